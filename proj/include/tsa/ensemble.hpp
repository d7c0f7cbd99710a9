#pragma once

#include <cstdint>
#include <vector>

#include "tsa/oselm.hpp"

namespace tsa {

struct EnsembleConfig {
    int pool_size = 10;       // K weak OS-ELMs
    int selector_count = -1;  // N; -1 means N = K
    int hidden_nodes = 65;    // L per weak classifier
    Activation activation = Activation::sigmoid;
    std::uint64_t seed = 0;
    // When true, each weak classifier receives Poisson(1)-many update_one
    // calls per sample instead of exactly one.
    bool poisson_updates = false;
    double error_clamp = 1e-4;     // e_n kept in [clamp, 1-clamp]
    double counter_prior = 1e-3;   // initial lambda_correct / lambda_wrong
};

// Importance-weight counters one selector keeps for one weak classifier.
struct SelectorSlot {
    double lambda_correct = 0.0;
    double lambda_wrong = 0.0;

    double error() const { return lambda_wrong / (lambda_wrong + lambda_correct); }
};

struct Selector {
    std::vector<SelectorSlot> slots;  // one per weak classifier
    int chosen_index = 0;             // argmin_m e_{n,m}, ties -> lowest index
    double alpha = 0.0;               // voting weight
};

struct BoostEnsemble {
    EnsembleConfig config;
    std::vector<OselmState> pool;     // K weak classifiers, distinct seeds
    std::vector<Selector> selectors;  // N selectors in chain order
    std::uint64_t samples_seen = 0;
};

// Each weak classifier runs its own init_phase on d0 with a seed derived
// from config.seed. Counters start at the prior, all alpha = 0.
BoostEnsemble init_ensemble(const EnsembleConfig& config, const std::vector<Sample>& d0);

// One online-boosting pass: weak classifiers are trained on the sample first
// (once globally), then the selector chain updates counters with the running
// importance, re-picks its weak classifier, refreshes alpha, and rescales the
// importance for the next selector.
void train_sample(BoostEnsemble& ensemble, const Sample& sample);

struct StrongPrediction {
    double margin = 0.0;  // sum_n alpha_n * label of selector n's weak
    int label = 0;        // sign, tie -> +1
};

StrongPrediction predict_strong(const BoostEnsemble& ensemble, const Eigen::VectorXd& x);

// Plain-averaging ensemble variant: mean of pool scores, sign.
std::pair<double, int> ensemble_mode_average(const std::vector<OselmState>& pool,
                                             const Eigen::VectorXd& x);

nlohmann::json to_json(const BoostEnsemble& ensemble);
BoostEnsemble ensemble_from_json(const nlohmann::json& j);

}  // namespace tsa
