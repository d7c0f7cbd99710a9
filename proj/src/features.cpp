#include "tsa/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsa::features {

std::vector<std::string> feature_names() {
    std::vector<std::string> names;
    names.reserve(kFeatureCount);
    for (int i = 1; i <= kFeatureCount; ++i) names.push_back("Tz" + std::to_string(i));
    return names;
}

CoiFrame coi_frame(const Eigen::VectorXd& delta, const Eigen::VectorXd& omega,
                   const Eigen::VectorXd& m) {
    if (delta.size() != m.size() || omega.size() != m.size())
        throw InputError("coi_frame: dimension mismatch");
    double m_total = m.sum();
    CoiFrame frame;
    frame.delta_coi = m.dot(delta) / m_total;
    frame.omega_coi = m.dot(omega) / m_total;
    frame.delta_rel = delta.array() - frame.delta_coi;
    frame.omega_rel = omega.array() - frame.omega_coi;
    return frame;
}

Eigen::VectorXd kinetic_energy(const Eigen::VectorXd& m,
                               const Eigen::VectorXd& omega_rel) {
    if (m.size() != omega_rel.size()) throw InputError("kinetic_energy: dimension mismatch");
    return 0.5 * m.cwiseProduct(omega_rel.cwiseProduct(omega_rel));
}

double system_impact(const powersim::Trajectory& traj, double t) {
    int idx = traj.grid_index(t, "system impact instant");
    return (traj.pm.transpose() - traj.pe.row(idx)).sum();
}

namespace {

// lowest index wins ties
int argmax(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

struct AnchorBlock {
    double impact;        // total accelerating power
    double angle_bigdiff; // COI-relative angle of the largest-|angle| machine
    double ke_maxangle;   // kinetic energy of the most-advanced machine
    double angle_maxke;   // COI-relative angle of the max-KE machine
    double ke_max;
    double ke_mean;
    double spread;        // max pairwise angle difference
    double speed_bigdiff; // COI-relative speed of the largest-|angle| machine
};

AnchorBlock anchor_block(const powersim::Trajectory& traj, int idx) {
    CoiFrame frame =
        coi_frame(traj.delta.row(idx).transpose(), traj.omega.row(idx).transpose(),
                  traj.m_coeff);
    Eigen::VectorXd ke = kinetic_energy(traj.m_coeff, frame.omega_rel);

    int i_bigdiff = argmax(frame.delta_rel.cwiseAbs());
    int i_maxangle = argmax(frame.delta_rel);
    int i_maxke = argmax(ke);

    AnchorBlock blk;
    blk.impact = (traj.pm.transpose() - traj.pe.row(idx)).sum();
    blk.angle_bigdiff = frame.delta_rel(i_bigdiff);
    blk.ke_maxangle = ke(i_maxangle);
    blk.angle_maxke = frame.delta_rel(i_maxke);
    blk.ke_max = ke.maxCoeff();
    blk.ke_mean = ke.mean();
    blk.spread = frame.delta_rel.maxCoeff() - frame.delta_rel.minCoeff();
    blk.speed_bigdiff = frame.omega_rel(i_bigdiff);
    return blk;
}

}  // namespace

Eigen::VectorXd extract_features(const powersim::Trajectory& traj) {
    const double t0 = traj.t_fault;
    const double t_cl = traj.t_clear;
    const double anchors[4] = {t_cl, t_cl + 3 * kCycleSeconds, t_cl + 6 * kCycleSeconds,
                               t_cl + 9 * kCycleSeconds};
    const char* anchor_names[4] = {"t_cl", "t_cl+3c", "t_cl+6c", "t_cl+9c"};

    int idx_t0 = traj.grid_index(t0, "t0");
    int idx[4];
    for (int a = 0; a < 4; ++a) idx[a] = traj.grid_index(anchors[a], anchor_names[a]);

    Eigen::VectorXd f(kFeatureCount);

    // Tz1: mean mechanical power before the fault (constant in this model)
    f(0) = traj.pm.mean();

    // t0 block: fault-on accelerating powers (pe holds the right limit)
    Eigen::VectorXd acc_power = traj.pm.transpose() - traj.pe.row(idx_t0);
    Eigen::VectorXd acc_rate = acc_power.cwiseQuotient(traj.m_coeff);
    CoiFrame frame0 = coi_frame(traj.delta.row(idx_t0).transpose(),
                                traj.omega.row(idx_t0).transpose(), traj.m_coeff);
    int i_maxrate = argmax(acc_rate);
    f(1) = acc_rate(i_maxrate);
    f(2) = frame0.delta_rel(i_maxrate);
    f(3) = acc_power.mean();

    AnchorBlock cl = anchor_block(traj, idx[0]);
    f(4) = cl.impact;
    f(5) = cl.angle_bigdiff;
    f(6) = cl.ke_maxangle;
    f(7) = cl.angle_maxke;
    f(8) = cl.ke_max;
    f(9) = cl.ke_mean;
    f(10) = cl.spread;
    f(11) = cl.speed_bigdiff;

    AnchorBlock c3 = anchor_block(traj, idx[1]);
    f(12) = c3.impact;
    f(13) = c3.ke_max;
    f(14) = c3.ke_mean;
    f(15) = c3.angle_bigdiff;
    f(16) = c3.spread;
    f(17) = c3.ke_maxangle;
    f(18) = c3.speed_bigdiff;

    AnchorBlock c6 = anchor_block(traj, idx[2]);
    f(19) = c6.impact;
    f(20) = c6.ke_max;
    f(21) = c6.ke_mean;
    f(22) = c6.ke_maxangle;
    f(23) = c6.angle_bigdiff;
    f(24) = c6.spread;
    f(25) = c6.speed_bigdiff;

    AnchorBlock c9 = anchor_block(traj, idx[3]);
    f(26) = c9.impact;
    f(27) = c9.ke_maxangle;
    f(28) = c9.ke_max;
    f(29) = c9.ke_mean;
    f(30) = c9.angle_bigdiff;
    f(31) = c9.spread;
    f(32) = c9.speed_bigdiff;

    if (!f.allFinite()) throw NumericError("extract_features: non-finite feature value");
    return f;
}

std::vector<FeatureSpec> feature_dictionary() {
    auto names = feature_names();
    const char* block_formulas[8] = {
        "sum_i (Pm_i - Pe_i) at %s (total accelerating power)",
        "COI-relative rotor angle of argmax_i |delta_rel_i| at %s",
        "kinetic energy 0.5*M*w_rel^2 of argmax_i delta_rel_i at %s",
        "COI-relative rotor angle of argmax_i KE_i at %s",
        "max_i kinetic energy at %s",
        "mean_i kinetic energy at %s",
        "max_{i,j} |delta_i - delta_j| at %s",
        "COI-relative rotor speed of argmax_i |delta_rel_i| at %s",
    };
    auto fmt = [&](int which, const char* anchor) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), block_formulas[which], anchor);
        return std::string(buf);
    };

    std::vector<FeatureSpec> dict;
    dict.push_back({names[0], "mean_i Pm_i (pre-fault mechanical power)"});
    dict.push_back({names[1], "max_i (Pm_i - Pe_i(t0+))/M_i"});
    dict.push_back({names[2], "COI-relative rotor angle of the max-acceleration machine at t0"});
    dict.push_back({names[3], "mean_i (Pm_i - Pe_i(t0+))"});
    // per-anchor orderings differ; indices follow the Tz table
    const int order_cl[8] = {0, 1, 2, 3, 4, 5, 6, 7};
    const int order_c3[7] = {0, 4, 5, 1, 6, 2, 7};
    const int order_c6[7] = {0, 4, 5, 2, 1, 6, 7};
    const int order_c9[7] = {0, 2, 4, 5, 1, 6, 7};
    int tz = 4;
    for (int k = 0; k < 8; ++k) dict.push_back({names[tz++], fmt(order_cl[k], "t_cl")});
    for (int k = 0; k < 7; ++k) dict.push_back({names[tz++], fmt(order_c3[k], "t_cl+3c")});
    for (int k = 0; k < 7; ++k) dict.push_back({names[tz++], fmt(order_c6[k], "t_cl+6c")});
    for (int k = 0; k < 7; ++k) dict.push_back({names[tz++], fmt(order_c9[k], "t_cl+9c")});
    return dict;
}

void write_feature_dictionary(std::ostream& out) {
    out << "feature,formula\n";
    for (const auto& spec : feature_dictionary())
        out << spec.name << ",\"" << spec.formula << "\"\n";
}

ScalingRecord normalize_kb(powersim::KnowledgeBase& kb) {
    if (kb.rows.empty()) throw InputError("normalize_kb: empty knowledge base");
    const auto d = kb.rows.front().features.size();

    ScalingRecord rec;
    rec.min = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
    rec.max = Eigen::VectorXd::Constant(d, -std::numeric_limits<double>::infinity());
    bool any_train = false;
    for (const auto& row : kb.rows) {
        if (row.split != "train") continue;
        any_train = true;
        rec.min = rec.min.cwiseMin(row.features);
        rec.max = rec.max.cwiseMax(row.features);
    }
    if (!any_train) throw InputError("normalize_kb: no training rows");

    rec.zero_range.resize(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j)
        rec.zero_range[static_cast<std::size_t>(j)] = (rec.max(j) - rec.min(j)) < 1e-12;

    for (auto& row : kb.rows)
        row.features = apply_scaling(row.features, rec, row.split != "train");
    return rec;
}

Eigen::VectorXd apply_scaling(const Eigen::VectorXd& x, const ScalingRecord& rec,
                              bool clip) {
    if (x.size() != rec.min.size()) throw InputError("apply_scaling: dimension mismatch");
    Eigen::VectorXd out(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (rec.zero_range[static_cast<std::size_t>(j)]) {
            out(j) = 0.5;
            continue;
        }
        double v = (x(j) - rec.min(j)) / (rec.max(j) - rec.min(j));
        out(j) = clip ? std::clamp(v, -0.1, 1.1) : v;
    }
    return out;
}

Eigen::VectorXd invert_scaling(const Eigen::VectorXd& x, const ScalingRecord& rec) {
    if (x.size() != rec.min.size()) throw InputError("invert_scaling: dimension mismatch");
    Eigen::VectorXd out(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (rec.zero_range[static_cast<std::size_t>(j)])
            out(j) = rec.min(j);  // constant feature: original value
        else
            out(j) = rec.min(j) + x(j) * (rec.max(j) - rec.min(j));
    }
    return out;
}

nlohmann::json to_json(const ScalingRecord& rec) {
    nlohmann::json mins = nlohmann::json::array(), maxs = nlohmann::json::array(),
                   zeros = nlohmann::json::array();
    for (Eigen::Index j = 0; j < rec.min.size(); ++j) {
        mins.push_back(rec.min(j));
        maxs.push_back(rec.max(j));
        zeros.push_back(static_cast<bool>(rec.zero_range[static_cast<std::size_t>(j)]));
    }
    return {{"min", mins}, {"max", maxs}, {"zero_range", zeros}};
}

ScalingRecord scaling_from_json(const nlohmann::json& j) {
    ScalingRecord rec;
    const auto& mins = j.at("min");
    rec.min.resize(static_cast<Eigen::Index>(mins.size()));
    rec.max.resize(static_cast<Eigen::Index>(mins.size()));
    for (std::size_t i = 0; i < mins.size(); ++i) {
        rec.min(static_cast<Eigen::Index>(i)) = mins.at(i).get<double>();
        rec.max(static_cast<Eigen::Index>(i)) = j.at("max").at(i).get<double>();
    }
    for (const auto& z : j.at("zero_range")) rec.zero_range.push_back(z.get<bool>());
    return rec;
}

}  // namespace tsa::features
