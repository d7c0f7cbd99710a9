#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <sstream>

#include "tsa/powersim/kb.hpp"
#include "tsa/powersim/network.hpp"
#include "tsa/powersim/powerflow.hpp"
#include "tsa/powersim/reduction.hpp"
#include "tsa/powersim/simulate.hpp"
#include "tsa/powersim/ybus.hpp"

using namespace tsa;
using namespace tsa::powersim;

namespace {

PowerNetwork two_bus_network(double x_line) {
    PowerNetwork net;
    net.name = "twobus";
    net.base_mva = 100.0;
    net.frequency_hz = 60.0;
    net.buses = {{1, BusType::slack, 0, 0, 1.0}, {2, BusType::pq, 0, 0, 1.0}};
    net.branches = {{1, 2, 0.0, x_line, 0.0, 1.0, BranchKind::line}};
    net.generators = {{1, 5.0, 0.25, 0.0, 100.0, 0.0}};
    return net;
}

// machine behind x'd against a quasi-infinite bus (huge inertia, tiny x'd)
PowerNetwork smib_network(double pg_mw = 100.0) {
    PowerNetwork net;
    net.name = "smib";
    net.base_mva = 100.0;
    net.frequency_hz = 60.0;
    net.buses = {{1, BusType::pv, 0, 0, 1.05}, {2, BusType::slack, 0, 0, 1.0}};
    net.branches = {{1, 2, 0.0, 0.2, 0.0, 1.0, BranchKind::line}};
    net.generators = {{1, 3.0, 0.3, 0.0, 100.0, pg_mw},
                      {2, 1e5, 1e-4, 0.0, 100.0, 0.0}};
    return net;
}

Eigen::VectorXd dispatch_of(const PowerNetwork& net, double scale = 1.0) {
    Eigen::VectorXd pg(net.generators.size());
    for (std::size_t g = 0; g < net.generators.size(); ++g)
        pg(static_cast<Eigen::Index>(g)) = net.generators[g].pg_mw * scale;
    return pg;
}

// equal-area critical clearing time for the SMIB case with zero transfer
// during the fault and the pre-fault network restored afterwards
struct EqualAreaOracle {
    double delta0;
    double p_max;
    double p_m;
    double cct_seconds;  // fault duration, not absolute time
};

EqualAreaOracle equal_area_cct(double v1, double v2, double x_line, double xd1,
                               double xd2, double p_pu, double h_s, double f_hz) {
    using cd = std::complex<double>;
    double theta1 = std::asin(p_pu * x_line / (v1 * v2));
    cd v1c = std::polar(v1, theta1);
    cd v2c = std::polar(v2, 0.0);
    cd current = (v1c - v2c) / cd(0.0, x_line);
    cd e1 = v1c + cd(0.0, xd1) * current;
    cd e2 = v2c - cd(0.0, xd2) * current;

    EqualAreaOracle out;
    double x_total = xd1 + x_line + xd2;
    out.p_max = std::abs(e1) * std::abs(e2) / x_total;
    out.delta0 = std::arg(e1) - std::arg(e2);
    out.p_m = out.p_max * std::sin(out.delta0);
    double cos_dc = (out.p_m / out.p_max) * (std::numbers::pi - 2.0 * out.delta0) -
                    std::cos(out.delta0);
    double delta_c = std::acos(cos_dc);
    double m = 2.0 * h_s / (2.0 * std::numbers::pi * f_hz);
    out.cct_seconds = std::sqrt(2.0 * m * (delta_c - out.delta0) / out.p_m);
    return out;
}

Trajectory synthetic_two_machine(double spread_deg, bool blow_up = false) {
    Trajectory traj;
    traj.dt = 1.0 / 1200.0;
    traj.steps = 1200;
    traj.pm = Eigen::VectorXd::Constant(2, 1.0);
    traj.m_coeff = Eigen::VectorXd::Constant(2, 0.016);
    traj.emf = Eigen::VectorXd::Constant(2, 1.0);
    traj.t_fault = 0.2;
    traj.t_clear = 0.3;
    traj.faulted = true;
    traj.delta.setZero(traj.steps + 1, 2);
    traj.omega.setZero(traj.steps + 1, 2);
    traj.pe.setZero(traj.steps + 1, 2);
    double spread_rad = spread_deg * std::numbers::pi / 180.0;
    // ramp the separation up to its peak mid-horizon
    for (int i = 0; i <= traj.steps; ++i) {
        double frac = static_cast<double>(i) / traj.steps;
        double s = spread_rad * std::sin(std::numbers::pi * frac);
        traj.delta(i, 0) = 0.5 * s;
        traj.delta(i, 1) = -0.5 * s;
    }
    if (blow_up) {
        traj.blown_up = true;
        traj.blow_step = traj.steps / 2;
    }
    return traj;
}

}  // namespace

TEST_SUITE("powersim") {

TEST_CASE("ybus closed form for one line of z = j0.1") {
    PowerNetwork net = two_bus_network(0.1);
    Eigen::MatrixXcd y = build_ybus(net, NetworkPhase::prefault);
    CHECK(std::abs(y(0, 1) - std::complex<double>(0, 10)) < 1e-12);
    CHECK(std::abs(y(1, 0) - std::complex<double>(0, 10)) < 1e-12);
    CHECK(std::abs(y(0, 0) - std::complex<double>(0, -10)) < 1e-12);
    CHECK(std::abs(y(1, 1) - std::complex<double>(0, -10)) < 1e-12);
}

TEST_CASE("a tap-1.0 transformer stamps exactly like a line") {
    PowerNetwork as_line = two_bus_network(0.1);
    PowerNetwork as_xfmr = two_bus_network(0.1);
    as_xfmr.branches[0].kind = BranchKind::transformer;
    as_xfmr.branches[0].tap = 1.0;
    Eigen::MatrixXcd ya = build_ybus(as_line, NetworkPhase::prefault);
    Eigen::MatrixXcd yb = build_ybus(as_xfmr, NetworkPhase::prefault);
    CHECK((ya - yb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("39-bus ybus is symmetric with sparsity matching the branch list") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee39.json");
    Eigen::MatrixXcd y = build_ybus(net, NetworkPhase::prefault);
    CHECK((y - y.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    std::set<std::pair<int, int>> expected;
    for (const auto& br : net.branches) {
        int i = net.bus_index(br.from), j = net.bus_index(br.to);
        expected.insert({std::min(i, j), std::max(i, j)});
    }
    for (int i = 0; i < y.rows(); ++i)
        for (int j = i + 1; j < y.cols(); ++j) {
            bool connected = expected.count({i, j}) > 0;
            CHECK(connected == (std::abs(y(i, j)) > 0.0));
        }
}

TEST_CASE("faulted ybus grounds the fault point") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee9.json");
    Contingency c;
    c.branch_index = 3;  // line 4-5
    c.location = 0.0;
    Eigen::MatrixXcd y_pre = build_ybus(net, NetworkPhase::prefault);
    Eigen::MatrixXcd y_fault = build_ybus(net, NetworkPhase::faulted, c);
    int bus4 = net.bus_index(4);
    CHECK(std::abs(y_fault(bus4, bus4) - y_pre(bus4, bus4) - kFaultAdmittance) < 1e-9);

    // mid-branch fault appends a temporary bus carrying the shunt
    c.location = 0.5;
    Eigen::MatrixXcd y_mid = build_ybus(net, NetworkPhase::faulted, c);
    CHECK(y_mid.rows() == y_pre.rows() + 1);
    CHECK(std::abs(y_mid(y_pre.rows(), y_pre.rows()).imag() - kFaultAdmittance.imag()) <
          std::abs(kFaultAdmittance.imag()) * 0.1);
    // postfault topology is the pre-fault one
    Eigen::MatrixXcd y_post = build_ybus(net, NetworkPhase::postfault, c);
    CHECK((y_post - y_pre).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kron reduction closed form: series reactances of a SMIB") {
    PowerNetwork net = smib_network();
    Eigen::MatrixXcd y = build_ybus(net, NetworkPhase::prefault);
    Eigen::VectorXcd no_load = Eigen::VectorXcd::Zero(2);
    Eigen::MatrixXcd y_red = reduce_to_internal(y, net, no_load);
    REQUIRE(y_red.rows() == 2);
    double x_total = 0.3 + 0.2 + 1e-4;
    CHECK(std::abs(y_red(0, 1)) == doctest::Approx(1.0 / x_total).epsilon(1e-10));
    CHECK((y_red - y_red.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    // lossless network: conductance terms vanish
    CHECK(y_red.real().cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("9-bus power flow converges to the textbook operating point") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee9.json");
    PowerFlowResult pf = solve_power_flow(net, dispatch_of(net), 1.0);
    REQUIRE(pf.converged);
    CHECK(pf.max_mismatch <= 1e-8);
    // slack generation ~ 71.6 MW, |V5| ~ 0.9956
    CHECK(pf.p_injection(net.bus_index(1)) == doctest::Approx(0.716).epsilon(0.01));
    CHECK(std::abs(pf.v(net.bus_index(5))) == doctest::Approx(0.9956).epsilon(0.003));
}

TEST_CASE("39-bus power flow converges with residual below 1e-8") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee39.json");
    PowerFlowResult pf = solve_power_flow(net, dispatch_of(net), 1.0);
    REQUIRE(pf.converged);
    CHECK(pf.max_mismatch <= 1e-8);
    for (int i = 0; i < pf.v.size(); ++i) {
        CHECK(std::abs(pf.v(i)) > 0.85);
        CHECK(std::abs(pf.v(i)) < 1.15);
    }
}

TEST_CASE("electrical power closed forms") {
    PowerNetwork net = smib_network();
    Eigen::MatrixXcd y_red = reduce_to_internal(build_ybus(net, NetworkPhase::prefault),
                                                net, Eigen::VectorXcd::Zero(2));
    Eigen::VectorXd emf = Eigen::VectorXd::Constant(2, 1.0);

    // equal angles in a lossless network transfer nothing
    Eigen::VectorXd delta = Eigen::VectorXd::Constant(2, 0.7);
    Eigen::VectorXd pe = electrical_power(y_red, emf, delta);
    CHECK(pe.cwiseAbs().maxCoeff() < 1e-9);

    // textbook sine law
    double x_total = 0.3 + 0.2 + 1e-4;
    delta << 0.4, 0.0;
    pe = electrical_power(y_red, emf, delta);
    CHECK(pe(0) == doctest::Approx(std::sin(0.4) / x_total).epsilon(1e-6));
    // lossless: generation and absorption balance
    CHECK(std::abs(pe.sum()) < 1e-9);
}

TEST_CASE("reduction + power flow reproduce the dispatch at equilibrium") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee9.json");
    Trajectory traj = simulate(net, dispatch_of(net), 1.0, std::nullopt, {});
    CHECK(traj.pm(1) == doctest::Approx(1.63).epsilon(1e-4));
    CHECK(traj.pm(2) == doctest::Approx(0.85).epsilon(1e-4));
}

TEST_CASE("unfaulted equilibrium holds to 1e-6 rad over 5 s") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee9.json");
    Trajectory traj = simulate(net, dispatch_of(net), 1.0, std::nullopt, {});
    double drift = (traj.delta.row(traj.steps) - traj.delta.row(0)).cwiseAbs().maxCoeff();
    CHECK(drift <= 1e-6);
    CHECK(stability_label(traj) == 1);
}

TEST_CASE("SMIB: clearing before the critical time is stable, after is unstable") {
    PowerNetwork net = smib_network();
    EqualAreaOracle oracle = equal_area_cct(1.05, 1.0, 0.2, 0.3, 1e-4, 1.0, 3.0, 60.0);
    REQUIRE(oracle.cct_seconds > 0.05);

    SimOptions opt;
    auto run_label = [&](double clear_delay) {
        Contingency c;
        c.branch_index = 0;
        c.location = 0.0;
        c.t_fault = 0.2;
        c.t_clear = 0.2 + std::round(clear_delay / opt.dt) * opt.dt;
        return stability_label(simulate(net, dispatch_of(net), 1.0, c, opt));
    };
    CHECK(run_label(oracle.cct_seconds - 2.0 / 60.0) == 1);
    CHECK(run_label(oracle.cct_seconds + 2.0 / 60.0) == -1);
}

TEST_CASE("SMIB critical clearing time brackets the equal-area prediction within one cycle") {
    PowerNetwork net = smib_network();
    EqualAreaOracle oracle = equal_area_cct(1.05, 1.0, 0.2, 0.3, 1e-4, 1.0, 3.0, 60.0);

    SimOptions opt;
    Contingency c;
    c.branch_index = 0;
    c.location = 0.0;
    c.t_fault = 0.2;
    auto stable_at = [&](long steps_clear) {
        Contingency cc = c;
        cc.t_clear = c.t_fault + static_cast<double>(steps_clear) * opt.dt;
        return stability_label(simulate(net, dispatch_of(net), 1.0, cc, opt)) == 1;
    };

    long lo = std::lround(0.02 / opt.dt);  // known stable
    long hi = std::lround(0.60 / opt.dt);  // known unstable
    REQUIRE(stable_at(lo));
    REQUIRE(!stable_at(hi));
    while (hi - lo > 1) {
        long mid = (lo + hi) / 2;
        if (stable_at(mid))
            lo = mid;
        else
            hi = mid;
    }
    double cct_sim = 0.5 * (static_cast<double>(lo) + static_cast<double>(hi)) * opt.dt;
    CHECK(std::abs(cct_sim - oracle.cct_seconds) <= 1.0 / 60.0);
}

TEST_CASE("label is monotone in clearing time on the SMIB sweep") {
    PowerNetwork net = smib_network();
    SimOptions opt;
    bool seen_unstable = false;
    for (int k = 2; k <= 40; k += 2) {
        Contingency c;
        c.branch_index = 0;
        c.location = 0.0;
        c.t_fault = 0.2;
        c.t_clear = 0.2 + k * 0.01;
        int label = stability_label(simulate(net, dispatch_of(net), 1.0, c, opt));
        if (label == -1) seen_unstable = true;
        if (seen_unstable) REQUIRE(label == -1);  // stable set is a prefix
    }
    CHECK(seen_unstable);
}

TEST_CASE("lossless energy is conserved within 1e-4 over the post-fault swing") {
    PowerNetwork net = smib_network();
    SimOptions opt;
    Contingency c;
    c.branch_index = 0;
    c.location = 0.0;
    c.t_fault = 0.2;
    c.t_clear = 0.3;
    Trajectory traj = simulate(net, dispatch_of(net), 1.0, c, opt);
    REQUIRE(stability_label(traj) == 1);

    Eigen::MatrixXcd y_red = reduce_to_internal(build_ybus(net, NetworkPhase::prefault),
                                                net, Eigen::VectorXcd::Zero(2));
    auto energy = [&](int row) {
        double kinetic = 0.0, potential = 0.0;
        for (int i = 0; i < 2; ++i) {
            kinetic += 0.5 * traj.m_coeff(i) * traj.omega(row, i) * traj.omega(row, i);
            potential -= traj.pm(i) * traj.delta(row, i);
        }
        for (int i = 0; i < 2; ++i)
            for (int j = i + 1; j < 2; ++j)
                potential -= traj.emf(i) * traj.emf(j) * y_red(i, j).imag() *
                             std::cos(traj.delta(row, i) - traj.delta(row, j));
        return kinetic + potential;
    };

    int start = traj.grid_index(traj.t_clear, "t_clear");
    double e0 = energy(start);
    double max_drift = 0.0;
    for (int row = start; row <= traj.steps; ++row)
        max_drift = std::max(max_drift, std::abs(energy(row) - e0));
    CHECK(max_drift <= 1e-4);
}

TEST_CASE("halving dt changes a stable trajectory by less than 1e-5 rad") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee9.json");
    Contingency c;
    c.branch_index = 3;
    c.location = 0.5;
    c.t_fault = 0.2;
    c.t_clear = 0.3;
    SimOptions coarse;
    coarse.horizon = 2.0;
    SimOptions fine = coarse;
    fine.dt = coarse.dt / 2.0;
    Trajectory a = simulate(net, dispatch_of(net), 1.0, c, coarse);
    Trajectory b = simulate(net, dispatch_of(net), 1.0, c, fine);
    REQUIRE(stability_label(a) == 1);
    double sup = 0.0;
    for (int i = 0; i <= a.steps; ++i)
        sup = std::max(sup, (a.delta.row(i) - b.delta.row(2 * i)).cwiseAbs().maxCoeff());
    CHECK(sup <= 1e-5);
}

TEST_CASE("uniform angle shift leaves electrical power and the label unchanged") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee9.json");
    Eigen::MatrixXcd ybus = build_ybus(net, NetworkPhase::prefault);
    PowerFlowResult pf = solve_power_flow(net, dispatch_of(net), 1.0);
    Eigen::VectorXcd y_load = load_admittances(net, pf.v, 1.0);
    Eigen::MatrixXcd y_red = reduce_to_internal(ybus, net, y_load);

    Eigen::VectorXd emf = Eigen::VectorXd::Constant(3, 1.05);
    Eigen::VectorXd delta(3);
    delta << 0.1, 0.6, -0.4;
    Eigen::VectorXd shifted = delta.array() + 1.234;
    CHECK((electrical_power(y_red, emf, delta) - electrical_power(y_red, emf, shifted))
              .cwiseAbs()
              .maxCoeff() < 1e-10);

    Trajectory traj = synthetic_two_machine(200.0);
    Trajectory moved = traj;
    moved.delta.array() += 2.0;
    CHECK(stability_label(traj) == stability_label(moved));
}

TEST_CASE("stability labeling follows the 360-degree rule") {
    CHECK(stability_label(synthetic_two_machine(100.0)) == 1);
    CHECK(stability_label(synthetic_two_machine(359.9)) == 1);
    CHECK(stability_label(synthetic_two_machine(360.1)) == -1);
    CHECK(stability_label(synthetic_two_machine(100.0, /*blow_up=*/true)) == -1);
}

TEST_CASE("power flow divergence surfaces as a numeric error") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee9.json");
    CHECK_THROWS_AS(simulate(net, dispatch_of(net), 60.0, std::nullopt, {}),
                    NumericError);
}

TEST_CASE("fault and clearing instants must lie on the dt grid") {
    PowerNetwork net = smib_network();
    Contingency c;
    c.branch_index = 0;
    c.location = 0.0;
    c.t_fault = 0.2;
    c.t_clear = 0.3 + 1e-4;  // off-grid
    CHECK_THROWS_AS(simulate(net, dispatch_of(net), 1.0, c, {}), ConfigError);
}

TEST_CASE("pick_fault_locations is deterministic and line-only") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee9.json");
    ScenarioGrid grid;
    grid.fault_locations = 20;
    auto a = pick_fault_locations(net, grid, 5);
    auto b = pick_fault_locations(net, grid, 5);
    CHECK(a == b);
    CHECK(a.size() == 20);  // 6 lines x 4 fractions = 24 candidates
    for (const auto& [branch, frac] : a)
        CHECK(net.branches[static_cast<std::size_t>(branch)].kind == BranchKind::line);
    auto c = pick_fault_locations(net, grid, 6);
    CHECK(a != c);
}

TEST_CASE("generate_kb produces a deterministic small knowledge base") {
    PowerNetwork net = load_network(std::string(TSA_DATA_DIR) + "/ieee9.json");
    ScenarioGrid grid;
    grid.load_levels = {1.0, 1.25};
    grid.dispatch_draws = 1;
    grid.fault_locations = 6;
    SimOptions opt;
    opt.horizon = 3.0;

    KbGenReport report;
    KnowledgeBase kb = generate_kb(net, grid, 11, opt, &report);
    CHECK(report.requested == 12);
    CHECK(static_cast<int>(kb.rows.size()) +
              static_cast<int>(report.rejections.size()) ==
          12);
    CHECK(kb.feature_names.size() == 33);

    int train = 0, test = 0;
    for (const auto& row : kb.rows) {
        CHECK((row.label == 1 || row.label == -1));
        CHECK(row.features.size() == 33);
        (row.split == "train" ? train : test)++;
    }
    CHECK(train == static_cast<int>(kb.rows.size()) * 2 / 3);

    std::ostringstream a, b;
    write_kb_csv(kb, a);
    write_kb_csv(generate_kb(net, grid, 11, opt), b);
    CHECK(a.str() == b.str());

    std::istringstream in(a.str());
    KnowledgeBase back = read_kb_csv(in);
    REQUIRE(back.rows.size() == kb.rows.size());
    CHECK(back.rows.front().scenario_id == kb.rows.front().scenario_id);
    CHECK(back.rows.front().label == kb.rows.front().label);
}

TEST_CASE("trajectory CSV dump includes machine constants and full state") {
    PowerNetwork net = smib_network();
    SimOptions opt;
    opt.horizon = 0.5;
    Trajectory traj = simulate(net, dispatch_of(net), 1.0, std::nullopt, opt);
    std::ostringstream out;
    write_trajectory_csv(traj, out);
    std::string text = out.str();
    CHECK(text.rfind("time,delta_0,delta_1,omega_0,omega_1,pe_0,pe_1\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') ==
          traj.steps + 1 + 3);  // header + 2 constant rows + data rows
}

TEST_CASE("network validation catches broken input") {
    PowerNetwork net = two_bus_network(0.1);
    net.buses.push_back({3, BusType::pq, 0, 0, 1.0});  // disconnected
    CHECK_THROWS_AS(net.validate(), TopologyError);

    PowerNetwork dup = two_bus_network(0.1);
    dup.buses[1].id = 1;
    CHECK_THROWS_AS(dup.validate(), ConfigError);

    PowerNetwork neg = two_bus_network(0.1);
    neg.branches[0].x = -0.1;
    CHECK_THROWS_AS(neg.validate(), ConfigError);
}

}  // TEST_SUITE
