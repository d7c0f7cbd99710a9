#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tsa/powersim/kb.hpp"
#include "tsa/powersim/simulate.hpp"
#include "json.hpp"

namespace tsa::features {

inline constexpr int kFeatureCount = 33;
inline constexpr double kCycleSeconds = 1.0 / 60.0;

// Tz1 .. Tz33
std::vector<std::string> feature_names();

struct FeatureSpec {
    std::string name;
    std::string formula;
};

// Audit table: what each Tz actually computes.
std::vector<FeatureSpec> feature_dictionary();
void write_feature_dictionary(std::ostream& out);

// Inertia-weighted mean angle/speed and the per-machine values relative to it.
struct CoiFrame {
    double delta_coi = 0.0;
    double omega_coi = 0.0;
    Eigen::VectorXd delta_rel;
    Eigen::VectorXd omega_rel;
};

CoiFrame coi_frame(const Eigen::VectorXd& delta, const Eigen::VectorXd& omega,
                   const Eigen::VectorXd& m);

// E_k,i = 0.5 M_i w_i^2 (COI-relative speeds).
Eigen::VectorXd kinetic_energy(const Eigen::VectorXd& m, const Eigen::VectorXd& omega_rel);

// Total accelerating power sum_i (P_m,i - P_e,i(t)); t must be a grid point.
double system_impact(const powersim::Trajectory& trajectory, double t);

// The 33 system-level features at the anchor instants
// {t0, t_cl, t_cl+3c, t_cl+6c, t_cl+9c}. Throws if an anchor is off-grid or
// beyond the horizon, naming the missing anchor.
Eigen::VectorXd extract_features(const powersim::Trajectory& trajectory);

// Per-feature min-max scaling fitted on the training split.
struct ScalingRecord {
    Eigen::VectorXd min;
    Eigen::VectorXd max;
    std::vector<bool> zero_range;  // constant features map to 0.5
};

// Scales the training split to [0, 1]; test rows use training stats and are
// clipped to [-0.1, 1.1]. Returns the fitted record.
ScalingRecord normalize_kb(powersim::KnowledgeBase& kb);

Eigen::VectorXd apply_scaling(const Eigen::VectorXd& x, const ScalingRecord& rec,
                              bool clip = true);
Eigen::VectorXd invert_scaling(const Eigen::VectorXd& x, const ScalingRecord& rec);

nlohmann::json to_json(const ScalingRecord& rec);
ScalingRecord scaling_from_json(const nlohmann::json& j);

}  // namespace tsa::features
