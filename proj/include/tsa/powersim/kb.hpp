#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tsa/powersim/simulate.hpp"

namespace tsa::powersim {

struct ScenarioGrid {
    std::vector<double> load_levels = {0.8, 0.925, 1.05, 1.175, 1.30};
    int dispatch_draws = 3;
    int fault_locations = 20;  // sampled from lines x fractions
    std::vector<double> fractions = {0.0, 0.25, 0.5, 0.75};
    double t_fault = 0.2;
    double t_clear = 0.3;
    double dispatch_spread = 0.2;  // per-generator factor in [1-s, 1+s]

    int scenario_count() const {
        return static_cast<int>(load_levels.size()) * dispatch_draws * fault_locations;
    }
};

struct KbRow {
    std::string scenario_id;
    double load_level = 1.0;
    std::string fault_id;
    Eigen::VectorXd features;
    int label = 0;             // +1 / -1
    std::string split;         // "train" / "test"
};

struct KnowledgeBase {
    std::vector<std::string> feature_names;
    std::vector<KbRow> rows;
};

struct KbGenReport {
    int requested = 0;
    int generated = 0;
    std::vector<std::string> rejections;  // "scenario_id: reason"
};

// Deterministic fault-location sample: all (line, fraction) pairs, seeded
// subsample if more than `count` are available, returned in branch order.
std::vector<std::pair<int, double>> pick_fault_locations(const PowerNetwork& network,
                                                         const ScenarioGrid& grid,
                                                         std::uint64_t seed);

// Runs the load-level x dispatch x fault grid, extracts features and labels,
// shuffles rows with the master seed and splits 2:1 train:test. Scenarios
// run in parallel with per-scenario derived seeds; results are identical to
// a serial run. Rejected scenarios are reported, never silently dropped.
KnowledgeBase generate_kb(const PowerNetwork& network, const ScenarioGrid& grid,
                          std::uint64_t seed, const SimOptions& options = {},
                          KbGenReport* report = nullptr);

// CSV with header scenario_id,load_level,fault_id,Tz1..Tz33,label,split and
// 9-significant-digit floats.
void write_kb_csv(const KnowledgeBase& kb, std::ostream& out);
KnowledgeBase read_kb_csv(std::istream& in);

// rows of a given split, stacked as (features matrix, labels)
void kb_split(const KnowledgeBase& kb, const std::string& split, Eigen::MatrixXd& x,
              std::vector<int>& labels);

}  // namespace tsa::powersim
