#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

#include "tsa/powersim/network.hpp"

namespace tsa::powersim {

// Three-phase-to-ground fault on a branch.
struct Contingency {
    int branch_index = 0;   // index into network.branches
    double location = 0.0;  // fraction along the branch from the "from" end
    double t_fault = 0.2;   // s
    double t_clear = 0.3;   // s

    void validate(const PowerNetwork& network) const;
    std::string id(const PowerNetwork& network) const;  // e.g. "B5-7@0.25"
};

enum class NetworkPhase { prefault, faulted, postfault };

// Bolted fault modeled as a large purely susceptive shunt; keeps lossless
// test networks lossless.
inline constexpr std::complex<double> kFaultAdmittance{0.0, -1e6};

// Bus admittance matrix, pi-model branches with from-side taps.
// The faulted phase grounds the fault point; a mid-branch fault splits the
// branch at a temporary bus appended as the last row/column. The cleared
// network keeps the pre-fault topology.
Eigen::MatrixXcd build_ybus(const PowerNetwork& network, NetworkPhase phase,
                            const std::optional<Contingency>& contingency = std::nullopt);

}  // namespace tsa::powersim
