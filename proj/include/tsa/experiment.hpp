#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsa/ensemble.hpp"
#include "tsa/featsel.hpp"
#include "tsa/features.hpp"
#include "tsa/powersim/kb.hpp"
#include "tsa/sgbp.hpp"

namespace tsa {

struct ModelParams {
    int hidden_nodes = 65;
    int init_samples = -1;  // N0; -1 means L + 50
    int pool_size = 10;     // EOS-ELM weak classifiers
    int selector_count = -1;
    std::string mode = "one-by-one";  // or "chunk"
    int chunk_size = 20;
    std::string activation = "sigmoid";

    int resolved_init_samples() const {
        return init_samples > 0 ? init_samples : hidden_nodes + 50;
    }
};

struct FeatSelParams {
    double sigma = 0.2;
    double weight = 0.1;
    int jaya_population = 30;
    int jaya_iterations = 200;
};

struct SgbpParams {
    int hidden_nodes = 30;
    double learning_rate = 0.05;
    int epochs = 1;
};

struct ExperimentConfig {
    std::string network_file = "data/ieee9.json";
    powersim::ScenarioGrid grid;
    powersim::SimOptions sim;
    ModelParams model;
    FeatSelParams featsel;
    SgbpParams sgbp;
    int trials = 50;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    nlohmann::json to_json() const;
    // Rejects unknown keys at every nesting level.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
};

// Normalized samples with +/-1 targets, ready for the learners.
struct Dataset {
    std::vector<Sample> train;
    std::vector<Sample> test;

    static Dataset from_kb(const powersim::KnowledgeBase& kb);
    Dataset restricted_to(const std::vector<int>& feature_subset) const;
    int input_dim() const;
};

struct TrialRow {
    int trial = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double init_seconds = 0.0;
    double seq_seconds = 0.0;
};

struct TrialReport {
    std::string algorithm;
    std::vector<TrialRow> rows;
    double mean_train = 0.0, sd_train = 0.0;
    double mean_test = 0.0, sd_test = 0.0;
    double mean_init_seconds = 0.0, mean_seq_seconds = 0.0;
};

// Aggregates with the population SD (divide by n).
void finalize_report(TrialReport& report);

TrialReport run_trials_oselm(const Dataset& data, const ModelParams& params, int trials,
                             std::uint64_t seed);
TrialReport run_trials_eoselm(const Dataset& data, const ModelParams& params, int trials,
                              std::uint64_t seed);
TrialReport run_trials_sgbp(const Dataset& data, const SgbpParams& params, int trials,
                            std::uint64_t seed);

// Single trained models (the per-trial work, reusable to rebuild a specific
// trial's model deterministically).
OselmState train_oselm_trial(const Dataset& data, const ModelParams& params,
                             std::uint64_t trial_seed);
BoostEnsemble train_eoselm_trial(const Dataset& data, const ModelParams& params,
                                 std::uint64_t trial_seed);

double accuracy_oselm(const OselmState& model, const std::vector<Sample>& samples);
double accuracy_eoselm(const BoostEnsemble& model, const std::vector<Sample>& samples);
double accuracy_sgbp(const SgbpNet& model, const std::vector<Sample>& samples);

struct ModelSelectResult {
    int best_l = 0;
    double best_accuracy = 0.0;
    std::vector<std::pair<int, double>> curve;  // (L, mean validation accuracy)
};

// k-fold cross-validation over the training split; ties go to the smallest L.
ModelSelectResult model_select(const Dataset& data, const std::vector<int>& l_grid,
                               int folds, std::uint64_t seed, const ModelParams& base);

// Serialized model + the preprocessing needed to score raw feature rows.
struct ModelEnvelope {
    std::string type;  // "os-elm" or "eos-elm"
    std::optional<OselmState> oselm;
    std::optional<BoostEnsemble> ensemble;
    features::ScalingRecord scaling;
    std::vector<int> feature_subset;  // empty = all features

    int predict_label(const Eigen::VectorXd& raw_features) const;
    nlohmann::json to_json() const;
    static ModelEnvelope from_json(const nlohmann::json& j);
};

void write_trials_csv(const TrialReport& report, std::ostream& out);
void write_summary_csv(const std::vector<TrialReport>& reports, std::ostream& out);

}  // namespace tsa
