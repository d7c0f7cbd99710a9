#include "tsa/jaya.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tsa {

void JayaConfig::validate() const {
    if (population < 2) throw ConfigError("jaya: population must be >= 2");
    if (dims < 1) throw ConfigError("jaya: dims must be >= 1");
    if (lower.size() != dims || upper.size() != dims)
        throw ConfigError("jaya: bounds must have one entry per dimension");
    for (int j = 0; j < dims; ++j)
        if (!(lower(j) < upper(j)))
            throw ConfigError("jaya: lower bound must be below upper in dim " +
                              std::to_string(j));
    if (max_iters < 0) throw ConfigError("jaya: max_iters must be >= 0");
}

namespace {

double safe_eval(const Objective& objective, const Eigen::VectorXd& x) {
    double f = objective(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
}

void find_best_worst(const std::vector<Candidate>& pop, int& best, int& worst) {
    best = 0;
    worst = 0;
    for (int k = 1; k < static_cast<int>(pop.size()); ++k) {
        if (pop[k].f < pop[best].f) best = k;
        if (pop[k].f > pop[worst].f) worst = k;
    }
}

}  // namespace

void jaya_step(std::vector<Candidate>& population, const Objective& objective,
               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, Rng& rng) {
    const int dims = static_cast<int>(lower.size());
    int best, worst;
    find_best_worst(population, best, worst);
    const Eigen::VectorXd x_best = population[best].x;
    const Eigen::VectorXd x_worst = population[worst].x;

    // r1, r2 drawn once per dimension for the whole sweep
    Eigen::VectorXd r1(dims), r2(dims);
    for (int j = 0; j < dims; ++j) {
        r1(j) = rng.uniform();
        r2(j) = rng.uniform();
    }

    for (auto& cand : population) {
        Eigen::VectorXd x = cand.x;
        for (int j = 0; j < dims; ++j) {
            double a = std::abs(x(j));
            x(j) = x(j) + r1(j) * (x_best(j) - a) - r2(j) * (x_worst(j) - a);
            x(j) = std::clamp(x(j), lower(j), upper(j));
        }
        double f = safe_eval(objective, x);
        if (f < cand.f) {
            cand.x = std::move(x);
            cand.f = f;
        }
    }
}

JayaResult jaya_run(const JayaConfig& config, const Objective& objective) {
    config.validate();
    Rng rng(config.seed);

    std::vector<Candidate> pop(config.population);
    for (auto& cand : pop) {
        cand.x.resize(config.dims);
        for (int j = 0; j < config.dims; ++j)
            cand.x(j) = rng.uniform(config.lower(j), config.upper(j));
        cand.f = safe_eval(objective, cand.x);
    }

    JayaResult result;
    for (int iter = 0; iter < config.max_iters; ++iter) {
        jaya_step(pop, objective, config.lower, config.upper, rng);

        int best, worst;
        find_best_worst(pop, best, worst);
        double sum = 0.0;
        for (const auto& cand : pop) sum += cand.f;
        result.best_history.push_back(pop[best].f);
        result.trace.push_back(IterStats{iter, pop[best].f,
                                         sum / static_cast<double>(pop.size()),
                                         pop[worst].f});
        if (config.target_tolerance && pop[best].f <= *config.target_tolerance) break;
    }

    int best, worst;
    find_best_worst(pop, best, worst);
    result.best = pop[best];
    return result;
}

void write_trace_csv(const std::vector<IterStats>& trace, std::ostream& out) {
    out << "iter,best_f,mean_f,worst_f\n";
    for (const auto& row : trace)
        out << row.iter << ',' << csv_double(row.best_f) << ',' << csv_double(row.mean_f)
            << ',' << csv_double(row.worst_f) << '\n';
}

double angle_mod_value(const AngleModParams& params, double y) {
    const double tau = 2.0 * std::numbers::pi;
    double u = y - params.o;
    return std::sin(tau * u * params.p * std::cos(tau * params.r * u)) + params.s;
}

std::vector<std::uint8_t> angle_modulate(const AngleModParams& params, int n_bits) {
    if (n_bits < 1) throw ConfigError("angle_modulate: n_bits must be >= 1");
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_bits));
    for (int j = 0; j < n_bits; ++j) {
        double y = static_cast<double>(j) / static_cast<double>(n_bits);
        bits[static_cast<std::size_t>(j)] = angle_mod_value(params, y) > 0.0 ? 1 : 0;
    }
    return bits;
}

BinJayaResult binjaya_run(JayaConfig config, const BitObjective& bit_objective,
                          int n_bits) {
    config.dims = 4;
    if (config.lower.size() != 4 || config.upper.size() != 4) {
        config.lower = Eigen::VectorXd::Constant(4, -1.0);
        config.upper = Eigen::VectorXd::Constant(4, 1.0);
    }

    Objective objective = [&](const Eigen::VectorXd& z) {
        AngleModParams params{z(0), z(1), z(2), z(3)};
        return bit_objective(angle_modulate(params, n_bits));
    };

    JayaResult inner = jaya_run(config, objective);

    BinJayaResult result;
    result.best_params =
        AngleModParams{inner.best.x(0), inner.best.x(1), inner.best.x(2), inner.best.x(3)};
    result.best_bits = angle_modulate(result.best_params, n_bits);
    result.best_f = inner.best.f;
    result.trace = std::move(inner.trace);
    return result;
}

}  // namespace tsa
