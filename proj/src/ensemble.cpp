#include "tsa/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace tsa {

BoostEnsemble init_ensemble(const EnsembleConfig& config, const std::vector<Sample>& d0) {
    if (config.pool_size < 1) throw ConfigError("init_ensemble: pool size K must be >= 1");
    const int n_selectors =
        config.selector_count > 0 ? config.selector_count : config.pool_size;
    if (d0.empty()) throw InputError("init_ensemble: empty initial set");

    BoostEnsemble ens;
    ens.config = config;
    ens.config.selector_count = n_selectors;

    const int input_dim = static_cast<int>(d0.front().x.size());
    ens.pool.reserve(config.pool_size);
    for (int k = 0; k < config.pool_size; ++k) {
        HiddenLayer layer = init_hidden(input_dim, config.hidden_nodes, config.activation,
                                        derive_seed(config.seed, static_cast<std::uint64_t>(k)));
        ens.pool.push_back(init_phase(layer, d0));
    }

    ens.selectors.assign(n_selectors, Selector{});
    for (auto& sel : ens.selectors) {
        sel.slots.assign(config.pool_size,
                         SelectorSlot{config.counter_prior, config.counter_prior});
        sel.chosen_index = 0;
        sel.alpha = 0.0;
    }
    return ens;
}

namespace {

int argmin_error(const Selector& sel) {
    int best = 0;
    double best_e = sel.slots[0].error();
    for (int m = 1; m < static_cast<int>(sel.slots.size()); ++m) {
        double e = sel.slots[m].error();
        if (e < best_e) {
            best_e = e;
            best = m;
        }
    }
    return best;
}

}  // namespace

void train_sample(BoostEnsemble& ens, const Sample& sample) {
    if (ens.pool.empty()) throw ConfigError("train_sample: ensemble not initialized");
    const int truth = sample.t(0) >= 0.0 ? 1 : -1;
    const int pool_size = static_cast<int>(ens.pool.size());

    // prequential evaluation: correctness is judged on the state before the
    // sample is learned, so error estimates stay honest
    std::vector<char> correct(pool_size);
    for (int m = 0; m < pool_size; ++m)
        correct[m] = predict(ens.pool[m], sample.x).label == truth;

    // Weak classifiers see the sample once, regardless of selector count.
    if (ens.config.poisson_updates) {
        for (int m = 0; m < pool_size; ++m) {
            Rng rng(derive_seed(ens.config.seed ^ 0xb0057ULL,
                                ens.samples_seen * static_cast<std::uint64_t>(pool_size) +
                                    static_cast<std::uint64_t>(m)));
            int reps = rng.poisson(1.0);
            for (int r = 0; r < reps; ++r) update_one(ens.pool[m], sample);
        }
    } else {
        for (auto& weak : ens.pool) update_one(weak, sample);
    }

    const double clamp_lo = ens.config.error_clamp;
    const double clamp_hi = 1.0 - ens.config.error_clamp;
    double lambda = 1.0;
    for (auto& sel : ens.selectors) {
        for (int m = 0; m < pool_size; ++m) {
            if (correct[m])
                sel.slots[m].lambda_correct += lambda;
            else
                sel.slots[m].lambda_wrong += lambda;
        }
        sel.chosen_index = argmin_error(sel);
        double e = std::clamp(sel.slots[sel.chosen_index].error(), clamp_lo, clamp_hi);
        sel.alpha = 0.5 * std::log((1.0 - e) / e);
        if (correct[sel.chosen_index])
            lambda /= 2.0 * (1.0 - e);
        else
            lambda /= 2.0 * e;
        if (!std::isfinite(lambda) || lambda < 1e-6 || lambda > 1e6) {
            static bool warned = false;
            if (!warned) {
                std::cerr << "tsa: train_sample: importance clamped to [1e-6, 1e6]\n";
                warned = true;
            }
            lambda = std::isfinite(lambda) ? std::clamp(lambda, 1e-6, 1e6) : 1e6;
        }
    }
    ++ens.samples_seen;
}

StrongPrediction predict_strong(const BoostEnsemble& ens, const Eigen::VectorXd& x) {
    if (ens.pool.empty()) throw ConfigError("predict_strong: ensemble not initialized");

    // Selectors share the pool, so evaluate each distinct chosen weak once.
    std::vector<int> labels(ens.pool.size(), 0);
    StrongPrediction out;
    for (const auto& sel : ens.selectors) {
        int m = sel.chosen_index;
        if (labels[m] == 0) labels[m] = predict(ens.pool[m], x).label;
        out.margin += sel.alpha * labels[m];
    }
    out.label = out.margin >= 0.0 ? 1 : -1;
    return out;
}

std::pair<double, int> ensemble_mode_average(const std::vector<OselmState>& pool,
                                             const Eigen::VectorXd& x) {
    if (pool.empty()) throw InputError("ensemble_mode_average: empty pool");
    double sum = 0.0;
    for (const auto& weak : pool) sum += predict(weak, x).score(0);
    double score = sum / static_cast<double>(pool.size());
    return {score, score >= 0.0 ? 1 : -1};
}

nlohmann::json to_json(const BoostEnsemble& ens) {
    nlohmann::json pool = nlohmann::json::array();
    for (const auto& weak : ens.pool) pool.push_back(to_json(weak));
    nlohmann::json selectors = nlohmann::json::array();
    for (const auto& sel : ens.selectors) {
        nlohmann::json slots = nlohmann::json::array();
        for (const auto& slot : sel.slots)
            slots.push_back({{"lambda_correct", slot.lambda_correct},
                             {"lambda_wrong", slot.lambda_wrong}});
        selectors.push_back({{"slots", std::move(slots)},
                             {"chosen_index", sel.chosen_index},
                             {"alpha", sel.alpha}});
    }
    return {
        {"format", "tsa-eoselm"},
        {"config",
         {{"pool_size", ens.config.pool_size},
          {"selector_count", ens.config.selector_count},
          {"hidden_nodes", ens.config.hidden_nodes},
          {"activation", to_string(ens.config.activation)},
          {"seed", ens.config.seed},
          {"poisson_updates", ens.config.poisson_updates},
          {"error_clamp", ens.config.error_clamp},
          {"counter_prior", ens.config.counter_prior}}},
        {"pool", std::move(pool)},
        {"selectors", std::move(selectors)},
        {"samples_seen", ens.samples_seen},
    };
}

BoostEnsemble ensemble_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "tsa-eoselm")
        throw InputError("ensemble_from_json: not a tsa-eoselm document");
    BoostEnsemble ens;
    const auto& c = j.at("config");
    ens.config.pool_size = c.at("pool_size").get<int>();
    ens.config.selector_count = c.at("selector_count").get<int>();
    ens.config.hidden_nodes = c.at("hidden_nodes").get<int>();
    ens.config.activation = activation_from_string(c.at("activation").get<std::string>());
    ens.config.seed = c.at("seed").get<std::uint64_t>();
    ens.config.poisson_updates = c.at("poisson_updates").get<bool>();
    ens.config.error_clamp = c.at("error_clamp").get<double>();
    ens.config.counter_prior = c.at("counter_prior").get<double>();
    for (const auto& w : j.at("pool")) ens.pool.push_back(oselm_from_json(w));
    for (const auto& s : j.at("selectors")) {
        Selector sel;
        for (const auto& slot : s.at("slots"))
            sel.slots.push_back(SelectorSlot{slot.at("lambda_correct").get<double>(),
                                             slot.at("lambda_wrong").get<double>()});
        sel.chosen_index = s.at("chosen_index").get<int>();
        sel.alpha = s.at("alpha").get<double>();
        ens.selectors.push_back(std::move(sel));
    }
    ens.samples_seen = j.at("samples_seen").get<std::uint64_t>();
    if (static_cast<int>(ens.pool.size()) != ens.config.pool_size)
        throw InputError("ensemble_from_json: pool size mismatch");
    return ens;
}

}  // namespace tsa
