#include "tsa/powersim/powerflow.hpp"

#include <Eigen/LU>
#include <cmath>

#include "tsa/powersim/ybus.hpp"

namespace tsa::powersim {

PowerFlowResult solve_power_flow(const PowerNetwork& network,
                                 const Eigen::VectorXd& pg_mw, double load_scale,
                                 int max_iterations, double tolerance) {
    if (pg_mw.size() != static_cast<Eigen::Index>(network.generators.size()))
        throw InputError("solve_power_flow: one dispatch entry per generator required");

    const int n = static_cast<int>(network.buses.size());
    const Eigen::MatrixXcd y = build_ybus(network, NetworkPhase::prefault);
    const Eigen::MatrixXd g = y.real();
    const Eigen::MatrixXd b = y.imag();

    // scheduled injections, p.u.
    Eigen::VectorXd p_sched = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd q_sched = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        p_sched(i) -= network.buses[static_cast<std::size_t>(i)].pd_mw * load_scale /
                      network.base_mva;
        q_sched(i) -= network.buses[static_cast<std::size_t>(i)].qd_mvar * load_scale /
                      network.base_mva;
    }
    for (std::size_t gi = 0; gi < network.generators.size(); ++gi) {
        int i = network.bus_index(network.generators[gi].bus);
        if (network.buses[static_cast<std::size_t>(i)].type != BusType::slack)
            p_sched(i) += pg_mw(static_cast<Eigen::Index>(gi)) / network.base_mva;
    }

    Eigen::VectorXd vm(n), va = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        const auto& bus = network.buses[static_cast<std::size_t>(i)];
        vm(i) = bus.type == BusType::pq ? 1.0 : bus.vset;
    }

    std::vector<int> ang_idx, mag_idx;  // unknown angles / magnitudes
    for (int i = 0; i < n; ++i) {
        const auto& bus = network.buses[static_cast<std::size_t>(i)];
        if (bus.type != BusType::slack) ang_idx.push_back(i);
        if (bus.type == BusType::pq) mag_idx.push_back(i);
    }
    const int na = static_cast<int>(ang_idx.size());
    const int nm = static_cast<int>(mag_idx.size());

    Eigen::VectorXd p_calc(n), q_calc(n);
    auto compute_injections = [&]() {
        for (int i = 0; i < n; ++i) {
            double p = 0.0, q = 0.0;
            for (int k = 0; k < n; ++k) {
                double th = va(i) - va(k);
                double c = std::cos(th), s = std::sin(th);
                p += vm(i) * vm(k) * (g(i, k) * c + b(i, k) * s);
                q += vm(i) * vm(k) * (g(i, k) * s - b(i, k) * c);
            }
            p_calc(i) = p;
            q_calc(i) = q;
        }
    };

    PowerFlowResult result;
    for (int iter = 0; iter <= max_iterations; ++iter) {
        compute_injections();

        Eigen::VectorXd mismatch(na + nm);
        for (int a = 0; a < na; ++a) mismatch(a) = p_sched(ang_idx[a]) - p_calc(ang_idx[a]);
        for (int m = 0; m < nm; ++m)
            mismatch(na + m) = q_sched(mag_idx[m]) - q_calc(mag_idx[m]);

        result.iterations = iter;
        result.max_mismatch = mismatch.size() ? mismatch.cwiseAbs().maxCoeff() : 0.0;
        if (result.max_mismatch <= tolerance) {
            result.converged = true;
            break;
        }
        if (iter == max_iterations) break;

        // standard polar Jacobian
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(na + nm, na + nm);
        for (int a = 0; a < na; ++a) {
            int i = ang_idx[a];
            for (int a2 = 0; a2 < na; ++a2) {
                int k = ang_idx[a2];
                if (i == k)
                    jac(a, a2) = -q_calc(i) - b(i, i) * vm(i) * vm(i);
                else {
                    double th = va(i) - va(k);
                    jac(a, a2) =
                        vm(i) * vm(k) * (g(i, k) * std::sin(th) - b(i, k) * std::cos(th));
                }
            }
            for (int m = 0; m < nm; ++m) {
                int k = mag_idx[m];
                if (i == k)
                    jac(a, na + m) = p_calc(i) / vm(i) + g(i, i) * vm(i);
                else {
                    double th = va(i) - va(k);
                    jac(a, na + m) =
                        vm(i) * (g(i, k) * std::cos(th) + b(i, k) * std::sin(th));
                }
            }
        }
        for (int m = 0; m < nm; ++m) {
            int i = mag_idx[m];
            for (int a2 = 0; a2 < na; ++a2) {
                int k = ang_idx[a2];
                if (i == k)
                    jac(na + m, a2) = p_calc(i) - g(i, i) * vm(i) * vm(i);
                else {
                    double th = va(i) - va(k);
                    jac(na + m, a2) =
                        -vm(i) * vm(k) * (g(i, k) * std::cos(th) + b(i, k) * std::sin(th));
                }
            }
            for (int m2 = 0; m2 < nm; ++m2) {
                int k = mag_idx[m2];
                if (i == k)
                    jac(na + m, na + m2) = q_calc(i) / vm(i) - b(i, i) * vm(i);
                else {
                    double th = va(i) - va(k);
                    jac(na + m, na + m2) =
                        vm(i) * (g(i, k) * std::sin(th) - b(i, k) * std::cos(th));
                }
            }
        }

        Eigen::VectorXd step = jac.partialPivLu().solve(mismatch);
        if (!step.allFinite()) break;
        for (int a = 0; a < na; ++a) va(ang_idx[a]) += step(a);
        for (int m = 0; m < nm; ++m) vm(mag_idx[m]) += step(na + m);
    }

    compute_injections();
    result.v.resize(n);
    for (int i = 0; i < n; ++i) result.v(i) = std::polar(vm(i), va(i));
    result.p_injection = p_calc;
    result.q_injection = q_calc;
    return result;
}

}  // namespace tsa::powersim
