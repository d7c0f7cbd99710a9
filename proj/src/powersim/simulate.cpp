#include "tsa/powersim/simulate.hpp"

#include <cmath>
#include <numbers>

#include "tsa/powersim/powerflow.hpp"
#include "tsa/powersim/reduction.hpp"

namespace tsa::powersim {

namespace {

bool grid_aligned(double t, double dt) {
    double steps = t / dt;
    return std::abs(steps - std::round(steps)) < 1e-9;
}

}  // namespace

int Trajectory::grid_index(double t, const char* what) const {
    double steps_d = t / dt;
    long idx = std::lround(steps_d);
    if (std::abs(steps_d - static_cast<double>(idx)) > 1e-6)
        throw InputError(std::string("trajectory: ") + what +
                         " does not lie on the time grid");
    if (idx < 0 || idx > steps)
        throw InputError(std::string("trajectory: ") + what + " outside horizon");
    return static_cast<int>(idx);
}

Trajectory simulate(const PowerNetwork& network, const Eigen::VectorXd& pg_mw,
                    double load_scale, const std::optional<Contingency>& contingency,
                    const SimOptions& options, double anchor_fault, double anchor_clear) {
    network.validate();
    const int n_gen = static_cast<int>(network.generators.size());
    if (n_gen == 0) throw ConfigError("simulate: network has no generators");
    const double dt = options.dt;
    if (dt <= 0.0 || dt > 5e-3 + 1e-12)
        throw ConfigError("simulate: dt must be positive and at most 5 ms");

    double t_fault = anchor_fault, t_clear = anchor_clear;
    if (contingency) {
        contingency->validate(network);
        t_fault = contingency->t_fault;
        t_clear = contingency->t_clear;
        if (!grid_aligned(t_fault, dt) || !grid_aligned(t_clear, dt))
            throw ConfigError("simulate: fault and clearing times must be multiples of dt");
        if (t_clear > options.horizon)
            throw ConfigError("simulate: clearing time beyond horizon");
    }

    PowerFlowResult pf = solve_power_flow(network, pg_mw, load_scale);
    if (!pf.converged)
        throw NumericError("simulate: power flow diverged (max mismatch " +
                           std::to_string(pf.max_mismatch) + " p.u. after " +
                           std::to_string(pf.iterations) + " iterations)");

    // classical-model initialization: E' = V + j x'd I behind each terminal
    Eigen::VectorXd emf(n_gen), delta0(n_gen);
    for (int k = 0; k < n_gen; ++k) {
        const auto& gen = network.generators[static_cast<std::size_t>(k)];
        int bi = network.bus_index(gen.bus);
        const auto& bus = network.buses[static_cast<std::size_t>(bi)];
        std::complex<double> s_gen(pf.p_injection(bi) + bus.pd_mw * load_scale / network.base_mva,
                                   pf.q_injection(bi) + bus.qd_mvar * load_scale / network.base_mva);
        std::complex<double> v = pf.v(bi);
        std::complex<double> current = std::conj(s_gen / v);
        std::complex<double> e =
            v + std::complex<double>(0.0, xd_prime_system(gen, network.base_mva)) * current;
        emf(k) = std::abs(e);
        delta0(k) = std::arg(e);
    }

    Eigen::VectorXcd y_load = load_admittances(network, pf.v, load_scale);
    Eigen::MatrixXcd y_pre =
        reduce_to_internal(build_ybus(network, NetworkPhase::prefault), network, y_load,
                           "prefault");
    Eigen::MatrixXcd y_fault, y_post;
    if (contingency) {
        y_fault = reduce_to_internal(build_ybus(network, NetworkPhase::faulted, contingency),
                                     network, y_load, "faulted");
        y_post = reduce_to_internal(build_ybus(network, NetworkPhase::postfault, contingency),
                                    network, y_load, "postfault");
    }

    const double omega_s = network.omega_s();
    Eigen::VectorXd m_coeff(n_gen), damping(n_gen);
    for (int k = 0; k < n_gen; ++k) {
        const auto& gen = network.generators[static_cast<std::size_t>(k)];
        double scale = gen.rating_mva / network.base_mva;
        m_coeff(k) = 2.0 * gen.inertia_h * scale / omega_s;
        damping(k) = gen.damping * scale;
    }

    // P_m from the pre-fault reduced network so t = 0 is an exact equilibrium
    Eigen::VectorXd pm = electrical_power(y_pre, emf, delta0);

    Trajectory traj;
    traj.dt = dt;
    traj.steps = static_cast<int>(std::lround(options.horizon / dt));
    traj.pm = pm;
    traj.m_coeff = m_coeff;
    traj.emf = emf;
    traj.t_fault = t_fault;
    traj.t_clear = t_clear;
    traj.faulted = contingency.has_value();
    traj.load_scale = load_scale;
    if (contingency) traj.scenario = contingency->id(network);

    const int rows = traj.steps + 1;
    traj.delta.resize(rows, n_gen);
    traj.omega.resize(rows, n_gen);
    traj.pe.resize(rows, n_gen);

    // regime in force on [t_i, t_{i+1}) — the right limit at t_i
    auto active_matrix = [&](int step) -> const Eigen::MatrixXcd& {
        if (!contingency) return y_pre;
        double t = static_cast<double>(step) * dt;
        if (t < t_fault - 0.5 * dt) return y_pre;
        if (t < t_clear - 0.5 * dt) return y_fault;
        return y_post;
    };

    Eigen::VectorXd delta = delta0;
    Eigen::VectorXd omega = Eigen::VectorXd::Zero(n_gen);

    auto derivative = [&](const Eigen::MatrixXcd& y, const Eigen::VectorXd& d,
                          const Eigen::VectorXd& w, Eigen::VectorXd& dd,
                          Eigen::VectorXd& dw) {
        Eigen::VectorXd pe = electrical_power(y, emf, d);
        dd = w;
        dw = (pm - pe - damping.cwiseProduct(w)).cwiseQuotient(m_coeff);
    };

    Eigen::VectorXd k1d(n_gen), k1w(n_gen), k2d(n_gen), k2w(n_gen), k3d(n_gen),
        k3w(n_gen), k4d(n_gen), k4w(n_gen);

    for (int i = 0; i <= traj.steps; ++i) {
        const Eigen::MatrixXcd& y_now = active_matrix(i);
        traj.delta.row(i) = delta.transpose();
        traj.omega.row(i) = omega.transpose();
        traj.pe.row(i) = electrical_power(y_now, emf, delta).transpose();

        if (!delta.allFinite() || !omega.allFinite()) {
            traj.blown_up = true;
            traj.blow_step = i;
            // freeze the last finite state over the remaining grid
            for (int r = i; r <= traj.steps; ++r) {
                traj.delta.row(r) = traj.delta.row(std::max(0, i - 1));
                traj.omega.row(r) = traj.omega.row(std::max(0, i - 1));
                traj.pe.row(r) = traj.pe.row(std::max(0, i - 1));
            }
            break;
        }
        if (i == traj.steps) break;

        // classic RK4; the step never straddles a switch because switch
        // instants are grid-aligned
        derivative(y_now, delta, omega, k1d, k1w);
        derivative(y_now, delta + 0.5 * dt * k1d, omega + 0.5 * dt * k1w, k2d, k2w);
        derivative(y_now, delta + 0.5 * dt * k2d, omega + 0.5 * dt * k2w, k3d, k3w);
        derivative(y_now, delta + dt * k3d, omega + dt * k3w, k4d, k4w);
        delta += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        omega += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    }
    return traj;
}

double max_angle_spread_deg(const Trajectory& traj) {
    double max_spread = 0.0;
    int last = traj.blown_up ? std::max(0, traj.blow_step - 1) : traj.steps;
    for (int i = 0; i <= last; ++i) {
        double spread = traj.delta.row(i).maxCoeff() - traj.delta.row(i).minCoeff();
        max_spread = std::max(max_spread, spread);
    }
    return max_spread * 180.0 / std::numbers::pi;
}

int stability_label(const Trajectory& traj) {
    if (traj.blown_up) return -1;
    return max_angle_spread_deg(traj) < 360.0 ? 1 : -1;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    const int n_gen = static_cast<int>(traj.delta.cols());
    out << "time";
    for (int k = 0; k < n_gen; ++k) out << ",delta_" << k;
    for (int k = 0; k < n_gen; ++k) out << ",omega_" << k;
    for (int k = 0; k < n_gen; ++k) out << ",pe_" << k;
    out << '\n';
    out << "# pm";
    for (int k = 0; k < n_gen; ++k) out << ',' << full_double(traj.pm(k));
    out << '\n';
    out << "# m";
    for (int k = 0; k < n_gen; ++k) out << ',' << full_double(traj.m_coeff(k));
    out << '\n';
    for (int i = 0; i <= traj.steps; ++i) {
        out << full_double(static_cast<double>(i) * traj.dt);
        for (int k = 0; k < n_gen; ++k) out << ',' << full_double(traj.delta(i, k));
        for (int k = 0; k < n_gen; ++k) out << ',' << full_double(traj.omega(i, k));
        for (int k = 0; k < n_gen; ++k) out << ',' << full_double(traj.pe(i, k));
        out << '\n';
    }
}

}  // namespace tsa::powersim
