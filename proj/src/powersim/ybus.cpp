#include "tsa/powersim/ybus.hpp"

#include <cmath>

namespace tsa::powersim {

void Contingency::validate(const PowerNetwork& network) const {
    if (branch_index < 0 || branch_index >= static_cast<int>(network.branches.size()))
        throw ConfigError("contingency: branch index out of range");
    if (location < 0.0 || location >= 1.0)
        throw ConfigError("contingency: fault location must lie in [0, 1)");
    if (!(t_clear > t_fault) || t_fault < 0.0)
        throw ConfigError("contingency: need t_clear > t_fault >= 0");
    const auto& br = network.branches[static_cast<std::size_t>(branch_index)];
    if (location > 0.0 && br.kind == BranchKind::transformer)
        throw ConfigError("contingency: mid-branch faults only supported on lines");
}

std::string Contingency::id(const PowerNetwork& network) const {
    const auto& br = network.branches[static_cast<std::size_t>(branch_index)];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "B%d-%d@%.2f", br.from, br.to, location);
    return buf;
}

namespace {

using cd = std::complex<double>;

void stamp_branch(Eigen::MatrixXcd& y, int i, int j, double r, double x, double b_half,
                  double tap) {
    cd series = 1.0 / cd(r, x);
    cd shunt(0.0, b_half);
    double a2 = tap * tap;
    y(i, i) += (series + shunt) / a2;
    y(j, j) += series + shunt;
    y(i, j) -= series / tap;
    y(j, i) -= series / tap;
}

}  // namespace

Eigen::MatrixXcd build_ybus(const PowerNetwork& network, NetworkPhase phase,
                            const std::optional<Contingency>& contingency) {
    const int n = static_cast<int>(network.buses.size());

    bool fault_active = phase == NetworkPhase::faulted;
    if (fault_active) {
        if (!contingency) throw ConfigError("build_ybus: faulted phase needs a contingency");
        contingency->validate(network);
    }
    bool split = fault_active && contingency->location > 0.0;
    const int dim = split ? n + 1 : n;

    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t b = 0; b < network.branches.size(); ++b) {
        const auto& br = network.branches[b];
        int i = network.bus_index(br.from);
        int j = network.bus_index(br.to);
        if (split && static_cast<int>(b) == contingency->branch_index) {
            // split at the temporary fault bus (index n); charging stays at
            // the original ends
            double f = contingency->location;
            cd series_a = 1.0 / cd(br.r * f, br.x * f);
            cd series_b = 1.0 / cd(br.r * (1.0 - f), br.x * (1.0 - f));
            cd shunt(0.0, br.b_half);
            y(i, i) += series_a + shunt;
            y(j, j) += series_b + shunt;
            y(n, n) += series_a + series_b;
            y(i, n) -= series_a;
            y(n, i) -= series_a;
            y(n, j) -= series_b;
            y(j, n) -= series_b;
        } else {
            stamp_branch(y, i, j, br.r, br.x, br.b_half, br.tap);
        }
    }

    if (fault_active) {
        int fault_node = split ? n : network.bus_index(
                                         network.branches[static_cast<std::size_t>(
                                                              contingency->branch_index)]
                                             .from);
        y(fault_node, fault_node) += kFaultAdmittance;
    }
    return y;
}

}  // namespace tsa::powersim
