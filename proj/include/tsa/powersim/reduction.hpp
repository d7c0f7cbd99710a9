#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "tsa/powersim/network.hpp"

namespace tsa::powersim {

// Constant-impedance load admittances computed at an operating point:
// y_i = conj(S_load,i) / |V_i|^2. Entries are zero at load-free buses.
Eigen::VectorXcd load_admittances(const PowerNetwork& network,
                                  const Eigen::VectorXcd& v, double load_scale);

// Kron reduction to generator internal nodes. ybus may be larger than the
// bus set (temporary fault bus); load admittances are zero-padded. Internal
// node i couples to its terminal bus through 1/(j x'd) on the system base.
// Returns the n_gen x n_gen reduced admittance matrix.
Eigen::MatrixXcd reduce_to_internal(const Eigen::MatrixXcd& ybus,
                                    const PowerNetwork& network,
                                    const Eigen::VectorXcd& y_load,
                                    const std::string& phase_name = "prefault");

// Classical-model network equation:
//   P_e,i = sum_j E_i E_j (G_ij cos(d_i - d_j) + B_ij sin(d_i - d_j))
Eigen::VectorXd electrical_power(const Eigen::MatrixXcd& y_red,
                                 const Eigen::VectorXd& emf,
                                 const Eigen::VectorXd& delta);

// x'd converted from machine base to system base.
double xd_prime_system(const Generator& gen, double base_mva);

}  // namespace tsa::powersim
