#include "tsa/featsel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsa {

void ClassificationTable::validate() const {
    const auto n = features.rows();
    const auto d = features.cols();
    if (n < 2) throw InputError("classification table needs at least 2 samples");
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw InputError("classification table: label count mismatch");
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != d)
        throw InputError("classification table: name count mismatch");
    bool has_pos = false, has_neg = false;
    for (int lab : labels) {
        if (lab == 1) has_pos = true;
        else if (lab == -1) has_neg = true;
        else throw InputError("classification table: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw InputError("classification table: both classes must be present");
    if (features.minCoeff() < -1e-9 || features.maxCoeff() > 1.0 + 1e-9)
        throw InputError("classification table: features must lie in [0, 1]");
}

namespace {

// Cross-class kernel matrix: rows = positive samples, cols = negative samples.
Eigen::MatrixXd cross_kernel(const ClassificationTable& table,
                             const std::vector<int>& subset, double sigma) {
    std::vector<Eigen::Index> pos, neg;
    for (Eigen::Index i = 0; i < table.features.rows(); ++i)
        (table.labels[static_cast<std::size_t>(i)] == 1 ? pos : neg).push_back(i);

    Eigen::MatrixXd k(pos.size(), neg.size());
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t a = 0; a < pos.size(); ++a) {
        for (std::size_t b = 0; b < neg.size(); ++b) {
            double d2 = 0.0;
            for (int f : subset) {
                double diff = table.features(pos[a], f) - table.features(neg[b], f);
                d2 += diff * diff;
            }
            k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                std::exp(-d2 * inv);
        }
    }
    return k;
}

void check_subset(const ClassificationTable& table, const std::vector<int>& subset,
                  double sigma) {
    if (subset.empty()) throw InputError("kfrs: empty feature subset");
    if (sigma <= 0.0) throw ConfigError("kfrs: sigma must be positive");
    for (int f : subset)
        if (f < 0 || f >= table.features.cols())
            throw InputError("kfrs: feature index out of range");
}

// Mean over all samples of (1 - max over opposite-class y of k(x, y)).
// Summed in sorted order so the result is exactly invariant under sample
// permutations.
double mean_opposite_margin(const Eigen::MatrixXd& k) {
    std::vector<double> margins;
    margins.reserve(static_cast<std::size_t>(k.rows() + k.cols()));
    for (Eigen::Index a = 0; a < k.rows(); ++a) margins.push_back(1.0 - k.row(a).maxCoeff());
    for (Eigen::Index b = 0; b < k.cols(); ++b) margins.push_back(1.0 - k.col(b).maxCoeff());
    std::sort(margins.begin(), margins.end());
    double total = 0.0;
    for (double m : margins) total += m;
    return total / static_cast<double>(margins.size());
}

}  // namespace

double kfrs_dependency(const ClassificationTable& table, const std::vector<int>& subset,
                       double sigma) {
    check_subset(table, subset, sigma);
    // mu(x) = min over opposite y of (1 - k) = 1 - max over opposite y of k
    return mean_opposite_margin(cross_kernel(table, subset, sigma));
}

double kfrs_certainty(const ClassificationTable& table, const std::vector<int>& subset,
                      double sigma) {
    check_subset(table, subset, sigma);
    // y != x is implied: opposite-label samples are always distinct from x.
    return mean_opposite_margin(cross_kernel(table, subset, sigma));
}

double kfrs_criterion(const ClassificationTable& table, const std::vector<int>& subset,
                      double sigma) {
    return 0.5 * (kfrs_dependency(table, subset, sigma) +
                  kfrs_certainty(table, subset, sigma));
}

std::vector<int> bits_to_subset(const std::vector<std::uint8_t>& bits) {
    std::vector<int> subset;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) subset.push_back(static_cast<int>(i));
    return subset;
}

std::vector<std::uint8_t> subset_to_bits(const std::vector<int>& subset, int n_features) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_features), 0);
    for (int f : subset) bits[static_cast<std::size_t>(f)] = 1;
    return bits;
}

SubsetFitness subset_fitness(const ClassificationTable& table,
                             const std::vector<std::uint8_t>& bits, double sigma,
                             double weight) {
    std::vector<int> subset = bits_to_subset(bits);
    SubsetFitness fit;
    if (subset.empty()) {
        fit.total = std::numeric_limits<double>::infinity();
        return fit;
    }
    fit.g_c = kfrs_criterion(table, subset, sigma);
    fit.dim_penalty = weight * static_cast<double>(subset.size()) /
                      static_cast<double>(bits.size());
    fit.total = -fit.g_c + fit.dim_penalty;
    return fit;
}

FitnessCache::FitnessCache(const ClassificationTable& table, double sigma, double weight)
    : table_(table), sigma_(sigma), weight_(weight) {
    if (table.features.cols() > 64)
        throw ConfigError("fitness cache supports at most 64 features");
}

SubsetFitness FitnessCache::evaluate(const std::vector<std::uint8_t>& bits) {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) mask |= (1ULL << i);
    {
        std::lock_guard lock(mutex_);
        auto it = cache_.find(mask);
        if (it != cache_.end()) return it->second;
    }
    SubsetFitness fit = subset_fitness(table_, bits, sigma_, weight_);
    std::lock_guard lock(mutex_);
    cache_.emplace(mask, fit);
    return fit;
}

std::size_t FitnessCache::size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

SelectionResult select_features(const ClassificationTable& table,
                                const FeatSelConfig& config) {
    table.validate();
    const int n_bits = static_cast<int>(table.features.cols());
    FitnessCache cache(table, config.sigma, config.weight);

    BitObjective objective = [&](const std::vector<std::uint8_t>& bits) {
        return cache.evaluate(bits).total;
    };

    BinJayaResult run = binjaya_run(config.jaya, objective, n_bits);
    if (!std::isfinite(run.best_f))
        throw NumericError(
            "select_features: optimizer never produced a non-empty subset");

    SelectionResult result;
    result.bits = run.best_bits;
    result.subset = bits_to_subset(run.best_bits);
    for (int f : result.subset)
        result.names.push_back(table.names.empty() ? "f" + std::to_string(f)
                                                   : table.names[static_cast<std::size_t>(f)]);
    SubsetFitness fit = cache.evaluate(run.best_bits);
    result.g_c = fit.g_c;
    result.fitness = fit.total;
    result.trace = std::move(run.trace);
    return result;
}

SelectionResult brute_force_best_subset(const ClassificationTable& table, double sigma,
                                        double weight) {
    table.validate();
    const int d = static_cast<int>(table.features.cols());
    if (d > 12) throw ConfigError("brute_force_best_subset: limited to 12 features");

    SelectionResult best;
    best.fitness = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 1; mask < (1ULL << d); ++mask) {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(d), 0);
        for (int f = 0; f < d; ++f)
            if (mask & (1ULL << f)) bits[static_cast<std::size_t>(f)] = 1;
        SubsetFitness fit = subset_fitness(table, bits, sigma, weight);
        if (fit.total < best.fitness) {
            best.fitness = fit.total;
            best.g_c = fit.g_c;
            best.bits = bits;
        }
    }
    best.subset = bits_to_subset(best.bits);
    for (int f : best.subset)
        best.names.push_back(table.names.empty() ? "f" + std::to_string(f)
                                                 : table.names[static_cast<std::size_t>(f)]);
    return best;
}

}  // namespace tsa
