#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "tsa/common.hpp"

namespace tsa {

struct JayaConfig {
    int population = 20;  // n >= 2
    int dims = 1;         // m
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    int max_iters = 100;
    std::uint64_t seed = 0;
    std::optional<double> target_tolerance;  // stop once best f <= this

    void validate() const;
};

struct Candidate {
    Eigen::VectorXd x;
    double f = 0.0;
};

struct IterStats {
    int iter = 0;
    double best_f = 0.0;
    double mean_f = 0.0;
    double worst_f = 0.0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// One sweep: every candidate moves toward the current best and away from the
// current worst with per-dimension random factors shared across candidates;
// proposals are clamped to the bounds and accepted only if strictly better.
// Best/worst are the ones identified on entry; callers re-rank afterwards.
void jaya_step(std::vector<Candidate>& population, const Objective& objective,
               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, Rng& rng);

struct JayaResult {
    Candidate best;
    std::vector<double> best_history;  // best f after each executed iteration
    std::vector<IterStats> trace;
};

JayaResult jaya_run(const JayaConfig& config, const Objective& objective);

// CSV trace for convergence plots: iter,best_f,mean_f,worst_f.
void write_trace_csv(const std::vector<IterStats>& trace, std::ostream& out);

// Parameters of the sin/cos bit-string generating function
//   g(y) = sin(2*pi*(y-o) * p * cos(2*pi*r*(y-o))) + s
struct AngleModParams {
    double o = 0.0;  // horizontal shift
    double p = 0.0;  // sin frequency scale
    double r = 0.0;  // cos frequency
    double s = 0.0;  // vertical shift
};

double angle_mod_value(const AngleModParams& params, double y);

// Sample g at y_j = j / n_bits; bit j is 1 iff g(y_j) > 0 (strictly).
std::vector<std::uint8_t> angle_modulate(const AngleModParams& params, int n_bits);

using BitObjective = std::function<double(const std::vector<std::uint8_t>&)>;

struct BinJayaResult {
    std::vector<std::uint8_t> best_bits;
    AngleModParams best_params;
    double best_f = 0.0;
    std::vector<IterStats> trace;
};

// Continuous Jaya over (o, p, r, s) in [-1, 1]^4 (config bounds may override);
// each candidate is scored by bit_objective applied to its generated
// bitstring.
BinJayaResult binjaya_run(JayaConfig config, const BitObjective& bit_objective,
                          int n_bits);

}  // namespace tsa
