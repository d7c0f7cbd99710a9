#include "tsa/powersim/reduction.hpp"

#include <Eigen/LU>
#include <cmath>

namespace tsa::powersim {

using cd = std::complex<double>;

Eigen::VectorXcd load_admittances(const PowerNetwork& network,
                                  const Eigen::VectorXcd& v, double load_scale) {
    const int n = static_cast<int>(network.buses.size());
    if (v.size() != n) throw InputError("load_admittances: voltage size mismatch");
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < n; ++i) {
        const auto& bus = network.buses[static_cast<std::size_t>(i)];
        cd s(bus.pd_mw * load_scale / network.base_mva,
             bus.qd_mvar * load_scale / network.base_mva);
        double vm2 = std::norm(v(i));
        if (std::abs(s) > 0.0) {
            if (vm2 < 1e-12)
                throw NumericError("load_admittances: vanishing voltage at bus " +
                                   std::to_string(bus.id));
            y(i) = std::conj(s) / vm2;
        }
    }
    return y;
}

double xd_prime_system(const Generator& gen, double base_mva) {
    return gen.xd_prime * base_mva / gen.rating_mva;
}

Eigen::MatrixXcd reduce_to_internal(const Eigen::MatrixXcd& ybus,
                                    const PowerNetwork& network,
                                    const Eigen::VectorXcd& y_load,
                                    const std::string& phase_name) {
    const int n_net = static_cast<int>(ybus.rows());
    const int n_gen = static_cast<int>(network.generators.size());
    if (n_gen == 0) throw ConfigError("reduce_to_internal: no generators");
    if (y_load.size() > n_net)
        throw InputError("reduce_to_internal: load vector larger than ybus");

    Eigen::MatrixXcd y_ll = ybus;
    for (Eigen::Index i = 0; i < y_load.size(); ++i) y_ll(i, i) += y_load(i);

    Eigen::MatrixXcd y_gg = Eigen::MatrixXcd::Zero(n_gen, n_gen);
    Eigen::MatrixXcd y_gl = Eigen::MatrixXcd::Zero(n_gen, n_net);
    for (int k = 0; k < n_gen; ++k) {
        const auto& gen = network.generators[static_cast<std::size_t>(k)];
        cd y_src = 1.0 / cd(0.0, xd_prime_system(gen, network.base_mva));
        int bus = network.bus_index(gen.bus);
        y_gg(k, k) = y_src;
        y_gl(k, bus) = -y_src;
        y_ll(bus, bus) += y_src;
    }

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(y_ll);
    Eigen::MatrixXcd solved = lu.solve(y_gl.transpose());  // n_net x n_gen
    if (!solved.allFinite())
        throw NumericError("reduce_to_internal: singular network matrix in " +
                           phase_name + " phase");
    double residual = (y_ll * solved - y_gl.transpose()).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, y_ll.cwiseAbs().maxCoeff() *
                                     std::max(1.0, solved.cwiseAbs().maxCoeff()));
    if (!(residual / scale < 1e-8))
        throw NumericError("reduce_to_internal: ill-conditioned network matrix in " +
                           phase_name + " phase");

    Eigen::MatrixXcd y_red = y_gg - y_gl * solved;
    y_red = 0.5 * (y_red + y_red.transpose()).eval();
    return y_red;
}

Eigen::VectorXd electrical_power(const Eigen::MatrixXcd& y_red,
                                 const Eigen::VectorXd& emf,
                                 const Eigen::VectorXd& delta) {
    const int n = static_cast<int>(y_red.rows());
    if (emf.size() != n || delta.size() != n)
        throw InputError("electrical_power: dimension mismatch");

    Eigen::VectorXd sin_d(n), cos_d(n);
    for (int i = 0; i < n; ++i) {
        sin_d(i) = std::sin(delta(i));
        cos_d(i) = std::cos(delta(i));
    }

    Eigen::VectorXd pe(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            // sin/cos of (d_i - d_j) via angle-difference identities
            double cij = cos_d(i) * cos_d(j) + sin_d(i) * sin_d(j);
            double sij = sin_d(i) * cos_d(j) - cos_d(i) * sin_d(j);
            acc += emf(i) * emf(j) *
                   (y_red(i, j).real() * cij + y_red(i, j).imag() * sij);
        }
        pe(i) = acc;
    }
    return pe;
}

}  // namespace tsa::powersim
