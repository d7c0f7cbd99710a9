#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsa/jaya.hpp"

namespace tsa {

// <U, A, D>: samples with features normalized to [0, 1], binary labels.
struct ClassificationTable {
    Eigen::MatrixXd features;        // n x d
    std::vector<int> labels;         // +1 / -1
    std::vector<std::string> names;  // d feature names

    void validate() const;  // range, both classes present, |U| >= 2
};

// Gaussian-kernel fuzzy-rough dependency of the label on feature subset B:
//   k(x,y)  = exp(-||x_B - y_B||^2 / (2 sigma^2))
//   mu(x)   = min over y of opposite class of (1 - k(x,y))
//   gamma_B = mean over x of mu(x)
double kfrs_dependency(const ClassificationTable& table, const std::vector<int>& subset,
                       double sigma);

// Classification-certainty term: mean over x of
// (1 - max over y != x with opposite label of k(x,y)).
double kfrs_certainty(const ClassificationTable& table, const std::vector<int>& subset,
                      double sigma);

// g_C = (dependency + certainty) / 2, in [0, 1].
double kfrs_criterion(const ClassificationTable& table, const std::vector<int>& subset,
                      double sigma);

struct SubsetFitness {
    double g_c = 0.0;
    double dim_penalty = 0.0;
    double total = 0.0;  // -g_c + weight * |B|/|A|, minimized
};

// Fitness of a bitmask subset; the empty subset scores +infinity.
SubsetFitness subset_fitness(const ClassificationTable& table,
                             const std::vector<std::uint8_t>& bits, double sigma,
                             double weight);

// Memoized fitness evaluations keyed by bitmask (up to 64 features).
class FitnessCache {
public:
    explicit FitnessCache(const ClassificationTable& table, double sigma, double weight);

    SubsetFitness evaluate(const std::vector<std::uint8_t>& bits);
    std::size_t size() const;

private:
    const ClassificationTable& table_;
    double sigma_;
    double weight_;
    mutable std::mutex mutex_;
    std::unordered_map<std::uint64_t, SubsetFitness> cache_;
};

struct FeatSelConfig {
    double sigma = 0.2;
    double weight = 0.1;  // size-penalty weight
    JayaConfig jaya;      // population/iters/seed; bounds default to [-1,1]^4
};

struct SelectionResult {
    std::vector<int> subset;             // selected feature indices, ascending
    std::vector<std::string> names;      // matching feature names
    std::vector<std::uint8_t> bits;
    double g_c = 0.0;
    double fitness = 0.0;
    std::vector<IterStats> trace;        // optimizer convergence trace
};

// BinJaya-driven subset search; never returns an empty subset.
SelectionResult select_features(const ClassificationTable& table,
                                const FeatSelConfig& config);

// Exhaustive argmin of the same objective over all non-empty masks.
// Restricted to |A| <= 12.
SelectionResult brute_force_best_subset(const ClassificationTable& table, double sigma,
                                        double weight);

std::vector<int> bits_to_subset(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> subset_to_bits(const std::vector<int>& subset, int n_features);

}  // namespace tsa
