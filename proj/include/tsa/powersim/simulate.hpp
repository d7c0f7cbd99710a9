#pragma once

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <string>

#include "tsa/powersim/network.hpp"
#include "tsa/powersim/ybus.hpp"

namespace tsa::powersim {

struct SimOptions {
    double dt = 1.0 / 1200.0;  // cycle boundaries land on grid points
    double horizon = 5.0;      // s
};

// Rotor angle / speed-deviation / electrical-power time series on a uniform
// grid t_i = i*dt, i = 0..steps. At switching instants the stored pe holds
// the value of the regime that starts there (right limit); delta and omega
// are continuous across switches.
struct Trajectory {
    double dt = 0.0;
    int steps = 0;
    Eigen::MatrixXd delta;  // (steps+1) x n_gen, rad
    Eigen::MatrixXd omega;  // (steps+1) x n_gen, rad/s deviation
    Eigen::MatrixXd pe;     // (steps+1) x n_gen, p.u.
    Eigen::VectorXd pm;     // p.u., constant
    Eigen::VectorXd m_coeff;  // M_i = 2 H_i / omega_s on system base
    Eigen::VectorXd emf;      // internal EMF magnitudes

    double t_fault = 0.0;
    double t_clear = 0.0;
    bool faulted = false;
    bool blown_up = false;
    int blow_step = -1;

    double load_scale = 1.0;
    std::string scenario;

    int grid_index(double t, const char* what) const;  // exact grid hit or throws
};

// Pre-fault power flow (flat start, tol 1e-8), constant-impedance load
// conversion, classical-model initialization, then fixed-step RK4 with exact
// switching at t_fault and t_clear. Fault times must be grid-aligned.
// With no contingency the network runs at equilibrium; anchor_fault /
// anchor_clear give nominal anchor times for feature extraction.
Trajectory simulate(const PowerNetwork& network, const Eigen::VectorXd& pg_mw,
                    double load_scale, const std::optional<Contingency>& contingency,
                    const SimOptions& options = {}, double anchor_fault = 0.2,
                    double anchor_clear = 0.3);

// Largest pairwise rotor-angle separation over the whole trajectory, degrees.
double max_angle_spread_deg(const Trajectory& trajectory);

// sgn(360 deg - max spread): +1 stable, -1 unstable; blow-up counts as
// unstable.
int stability_label(const Trajectory& trajectory);

// time,delta_i...,omega_i...,pe_i... at full precision.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace tsa::powersim
