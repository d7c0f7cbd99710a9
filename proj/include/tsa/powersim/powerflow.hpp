#pragma once

#include <Eigen/Dense>
#include <complex>

#include "tsa/powersim/network.hpp"

namespace tsa::powersim {

struct PowerFlowResult {
    Eigen::VectorXcd v;           // complex bus voltages, p.u.
    Eigen::VectorXd p_injection;  // net P injection per bus, p.u.
    Eigen::VectorXd q_injection;  // net Q injection per bus, p.u.
    int iterations = 0;
    double max_mismatch = 0.0;  // p.u.
    bool converged = false;
};

// Flat-start Newton-Raphson. pg_mw assigns active dispatch per generator in
// network order (slack entry ignored); loads are scaled by load_scale.
PowerFlowResult solve_power_flow(const PowerNetwork& network,
                                 const Eigen::VectorXd& pg_mw, double load_scale,
                                 int max_iterations = 50, double tolerance = 1e-8);

}  // namespace tsa::powersim
