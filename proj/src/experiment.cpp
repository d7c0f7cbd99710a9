#include "tsa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

namespace tsa {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError("config: unknown key \"" + key + "\" in " + where);
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
    return {
        {"network_file", network_file},
        {"grid",
         {{"load_levels", grid.load_levels},
          {"dispatch_draws", grid.dispatch_draws},
          {"fault_locations", grid.fault_locations},
          {"fractions", grid.fractions},
          {"t_fault", grid.t_fault},
          {"t_clear", grid.t_clear},
          {"dispatch_spread", grid.dispatch_spread}}},
        {"sim", {{"dt", sim.dt}, {"horizon", sim.horizon}}},
        {"model",
         {{"hidden_nodes", model.hidden_nodes},
          {"init_samples", model.init_samples},
          {"pool_size", model.pool_size},
          {"selector_count", model.selector_count},
          {"mode", model.mode},
          {"chunk_size", model.chunk_size},
          {"activation", model.activation}}},
        {"featsel",
         {{"sigma", featsel.sigma},
          {"weight", featsel.weight},
          {"jaya_population", featsel.jaya_population},
          {"jaya_iterations", featsel.jaya_iterations}}},
        {"sgbp",
         {{"hidden_nodes", sgbp.hidden_nodes},
          {"learning_rate", sgbp.learning_rate},
          {"epochs", sgbp.epochs}}},
        {"trials", trials},
        {"seed", seed},
        {"out_dir", out_dir},
    };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    check_keys(j, {"network_file", "grid", "sim", "model", "featsel", "sgbp", "trials",
                   "seed", "out_dir"},
               "top level");
    cfg.network_file = j.value("network_file", cfg.network_file);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g,
                   {"load_levels", "dispatch_draws", "fault_locations", "fractions",
                    "t_fault", "t_clear", "dispatch_spread"},
                   "grid");
        if (g.contains("load_levels"))
            cfg.grid.load_levels = g.at("load_levels").get<std::vector<double>>();
        cfg.grid.dispatch_draws = g.value("dispatch_draws", cfg.grid.dispatch_draws);
        cfg.grid.fault_locations = g.value("fault_locations", cfg.grid.fault_locations);
        if (g.contains("fractions"))
            cfg.grid.fractions = g.at("fractions").get<std::vector<double>>();
        cfg.grid.t_fault = g.value("t_fault", cfg.grid.t_fault);
        cfg.grid.t_clear = g.value("t_clear", cfg.grid.t_clear);
        cfg.grid.dispatch_spread = g.value("dispatch_spread", cfg.grid.dispatch_spread);
    }
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        check_keys(s, {"dt", "horizon"}, "sim");
        cfg.sim.dt = s.value("dt", cfg.sim.dt);
        cfg.sim.horizon = s.value("horizon", cfg.sim.horizon);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m,
                   {"hidden_nodes", "init_samples", "pool_size", "selector_count",
                    "mode", "chunk_size", "activation"},
                   "model");
        cfg.model.hidden_nodes = m.value("hidden_nodes", cfg.model.hidden_nodes);
        cfg.model.init_samples = m.value("init_samples", cfg.model.init_samples);
        cfg.model.pool_size = m.value("pool_size", cfg.model.pool_size);
        cfg.model.selector_count = m.value("selector_count", cfg.model.selector_count);
        cfg.model.mode = m.value("mode", cfg.model.mode);
        cfg.model.chunk_size = m.value("chunk_size", cfg.model.chunk_size);
        cfg.model.activation = m.value("activation", cfg.model.activation);
        if (cfg.model.mode != "one-by-one" && cfg.model.mode != "chunk")
            throw ConfigError("config: model.mode must be one-by-one or chunk");
    }
    if (j.contains("featsel")) {
        const auto& f = j.at("featsel");
        check_keys(f, {"sigma", "weight", "jaya_population", "jaya_iterations"},
                   "featsel");
        cfg.featsel.sigma = f.value("sigma", cfg.featsel.sigma);
        cfg.featsel.weight = f.value("weight", cfg.featsel.weight);
        cfg.featsel.jaya_population = f.value("jaya_population", cfg.featsel.jaya_population);
        cfg.featsel.jaya_iterations = f.value("jaya_iterations", cfg.featsel.jaya_iterations);
    }
    if (j.contains("sgbp")) {
        const auto& s = j.at("sgbp");
        check_keys(s, {"hidden_nodes", "learning_rate", "epochs"}, "sgbp");
        cfg.sgbp.hidden_nodes = s.value("hidden_nodes", cfg.sgbp.hidden_nodes);
        cfg.sgbp.learning_rate = s.value("learning_rate", cfg.sgbp.learning_rate);
        cfg.sgbp.epochs = s.value("epochs", cfg.sgbp.epochs);
    }
    cfg.trials = j.value("trials", cfg.trials);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (cfg.trials < 1) throw ConfigError("config: trials must be >= 1");
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

Dataset Dataset::from_kb(const powersim::KnowledgeBase& kb) {
    Dataset data;
    for (const auto& row : kb.rows) {
        Sample s;
        s.x = row.features;
        s.t = Eigen::VectorXd::Constant(1, static_cast<double>(row.label));
        (row.split == "train" ? data.train : data.test).push_back(std::move(s));
    }
    if (data.train.empty() || data.test.empty())
        throw InputError("dataset: both train and test splits must be non-empty");
    return data;
}

Dataset Dataset::restricted_to(const std::vector<int>& subset) const {
    auto pick = [&](const std::vector<Sample>& src) {
        std::vector<Sample> out;
        out.reserve(src.size());
        for (const auto& s : src) {
            Sample r;
            r.x.resize(static_cast<Eigen::Index>(subset.size()));
            for (std::size_t k = 0; k < subset.size(); ++k)
                r.x(static_cast<Eigen::Index>(k)) = s.x(subset[k]);
            r.t = s.t;
            out.push_back(std::move(r));
        }
        return out;
    };
    Dataset data;
    data.train = pick(train);
    data.test = pick(test);
    return data;
}

int Dataset::input_dim() const {
    if (train.empty()) throw InputError("dataset: empty");
    return static_cast<int>(train.front().x.size());
}

void finalize_report(TrialReport& report) {
    const auto n = static_cast<double>(report.rows.size());
    if (report.rows.empty()) throw InputError("finalize_report: no trial rows");
    double st = 0, ss = 0, si = 0, sq = 0;
    for (const auto& row : report.rows) {
        st += row.train_accuracy;
        ss += row.test_accuracy;
        si += row.init_seconds;
        sq += row.seq_seconds;
    }
    report.mean_train = st / n;
    report.mean_test = ss / n;
    report.mean_init_seconds = si / n;
    report.mean_seq_seconds = sq / n;
    double vt = 0, vs = 0;
    for (const auto& row : report.rows) {
        vt += (row.train_accuracy - report.mean_train) * (row.train_accuracy - report.mean_train);
        vs += (row.test_accuracy - report.mean_test) * (row.test_accuracy - report.mean_test);
    }
    report.sd_train = std::sqrt(vt / n);
    report.sd_test = std::sqrt(vs / n);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_model_params(const Dataset& data, const ModelParams& params) {
    const int n0 = params.resolved_init_samples();
    if (n0 < params.hidden_nodes)
        throw ConfigError("model: N0 must be at least L");
    if (n0 > static_cast<int>(data.train.size()))
        throw ConfigError("model: N0 = " + std::to_string(n0) +
                          " exceeds training split size " +
                          std::to_string(data.train.size()));
}

template <typename TrainFn>
TrialReport run_trials_parallel(const std::string& name, int trials, std::uint64_t seed,
                                const TrainFn& run_one) {
    TrialReport report;
    report.algorithm = name;
    report.rows.resize(static_cast<std::size_t>(trials));

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int t = next.fetch_add(1);
            if (t >= trials) break;
            report.rows[static_cast<std::size_t>(t)] = run_one(t, derive_seed(seed, t));
        }
    };
    unsigned n_threads =
        std::clamp(std::thread::hardware_concurrency(), 1u, 8u);
    if (n_threads > 1 && trials > 1) {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    } else {
        worker();
    }
    finalize_report(report);
    return report;
}

}  // namespace

OselmState train_oselm_trial(const Dataset& data, const ModelParams& params,
                             std::uint64_t trial_seed) {
    check_model_params(data, params);
    const int n0 = params.resolved_init_samples();
    HiddenLayer layer = init_hidden(data.input_dim(), params.hidden_nodes,
                                    activation_from_string(params.activation), trial_seed);
    std::vector<Sample> d0(data.train.begin(), data.train.begin() + n0);
    OselmState state = init_phase(layer, d0);

    if (params.mode == "chunk") {
        for (std::size_t i = static_cast<std::size_t>(n0); i < data.train.size();
             i += static_cast<std::size_t>(params.chunk_size)) {
            std::size_t end =
                std::min(data.train.size(), i + static_cast<std::size_t>(params.chunk_size));
            update_chunk(state, std::span<const Sample>(data.train.data() + i, end - i));
        }
    } else {
        for (std::size_t i = static_cast<std::size_t>(n0); i < data.train.size(); ++i)
            update_one(state, data.train[i]);
    }
    return state;
}

BoostEnsemble train_eoselm_trial(const Dataset& data, const ModelParams& params,
                                 std::uint64_t trial_seed) {
    check_model_params(data, params);
    const int n0 = params.resolved_init_samples();
    EnsembleConfig cfg;
    cfg.pool_size = params.pool_size;
    cfg.selector_count = params.selector_count;
    cfg.hidden_nodes = params.hidden_nodes;
    cfg.activation = activation_from_string(params.activation);
    cfg.seed = trial_seed;
    std::vector<Sample> d0(data.train.begin(), data.train.begin() + n0);
    BoostEnsemble ens = init_ensemble(cfg, d0);
    for (std::size_t i = static_cast<std::size_t>(n0); i < data.train.size(); ++i)
        train_sample(ens, data.train[i]);
    return ens;
}

double accuracy_oselm(const OselmState& model, const std::vector<Sample>& samples) {
    if (samples.empty()) return 0.0;
    int correct = 0;
    for (const auto& s : samples)
        if (predict(model, s.x).label == (s.t(0) >= 0 ? 1 : -1)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double accuracy_eoselm(const BoostEnsemble& model, const std::vector<Sample>& samples) {
    if (samples.empty()) return 0.0;
    int correct = 0;
    for (const auto& s : samples)
        if (predict_strong(model, s.x).label == (s.t(0) >= 0 ? 1 : -1)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double accuracy_sgbp(const SgbpNet& model, const std::vector<Sample>& samples) {
    if (samples.empty()) return 0.0;
    int correct = 0;
    for (const auto& s : samples)
        if (sgbp_label(model, s.x) == (s.t(0) >= 0 ? 1 : -1)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrialReport run_trials_oselm(const Dataset& data, const ModelParams& params, int trials,
                             std::uint64_t seed) {
    check_model_params(data, params);
    return run_trials_parallel("os-elm", trials, seed, [&](int t, std::uint64_t ts) {
        TrialRow row;
        row.trial = t;
        auto start = Clock::now();
        const int n0 = params.resolved_init_samples();
        HiddenLayer layer = init_hidden(data.input_dim(), params.hidden_nodes,
                                        activation_from_string(params.activation), ts);
        std::vector<Sample> d0(data.train.begin(), data.train.begin() + n0);
        OselmState state = init_phase(layer, d0);
        row.init_seconds = seconds_since(start);

        start = Clock::now();
        if (params.mode == "chunk") {
            for (std::size_t i = static_cast<std::size_t>(n0); i < data.train.size();
                 i += static_cast<std::size_t>(params.chunk_size)) {
                std::size_t end = std::min(data.train.size(),
                                           i + static_cast<std::size_t>(params.chunk_size));
                update_chunk(state,
                             std::span<const Sample>(data.train.data() + i, end - i));
            }
        } else {
            for (std::size_t i = static_cast<std::size_t>(n0); i < data.train.size(); ++i)
                update_one(state, data.train[i]);
        }
        row.seq_seconds = seconds_since(start);

        row.train_accuracy = accuracy_oselm(state, data.train);
        row.test_accuracy = accuracy_oselm(state, data.test);
        return row;
    });
}

TrialReport run_trials_eoselm(const Dataset& data, const ModelParams& params, int trials,
                              std::uint64_t seed) {
    check_model_params(data, params);
    return run_trials_parallel("eos-elm", trials, seed, [&](int t, std::uint64_t ts) {
        TrialRow row;
        row.trial = t;
        const int n0 = params.resolved_init_samples();
        EnsembleConfig cfg;
        cfg.pool_size = params.pool_size;
        cfg.selector_count = params.selector_count;
        cfg.hidden_nodes = params.hidden_nodes;
        cfg.activation = activation_from_string(params.activation);
        cfg.seed = ts;

        auto start = Clock::now();
        std::vector<Sample> d0(data.train.begin(), data.train.begin() + n0);
        BoostEnsemble ens = init_ensemble(cfg, d0);
        row.init_seconds = seconds_since(start);

        start = Clock::now();
        for (std::size_t i = static_cast<std::size_t>(n0); i < data.train.size(); ++i)
            train_sample(ens, data.train[i]);
        row.seq_seconds = seconds_since(start);

        row.train_accuracy = accuracy_eoselm(ens, data.train);
        row.test_accuracy = accuracy_eoselm(ens, data.test);
        return row;
    });
}

TrialReport run_trials_sgbp(const Dataset& data, const SgbpParams& params, int trials,
                            std::uint64_t seed) {
    return run_trials_parallel("sgbp", trials, seed, [&](int t, std::uint64_t ts) {
        TrialRow row;
        row.trial = t;
        auto start = Clock::now();
        SgbpNet net = sgbp_init(data.input_dim(), params.hidden_nodes, ts);
        row.init_seconds = seconds_since(start);

        start = Clock::now();
        for (int e = 0; e < params.epochs; ++e)
            for (const auto& s : data.train) sgbp_train_sample(net, s, params.learning_rate);
        row.seq_seconds = seconds_since(start);

        row.train_accuracy = accuracy_sgbp(net, data.train);
        row.test_accuracy = accuracy_sgbp(net, data.test);
        return row;
    });
}

ModelSelectResult model_select(const Dataset& data, const std::vector<int>& l_grid,
                               int folds, std::uint64_t seed, const ModelParams& base) {
    if (l_grid.empty()) throw ConfigError("model_select: empty L grid");
    if (folds < 2) throw ConfigError("model_select: need at least 2 folds");
    const int n = static_cast<int>(data.train.size());
    if (n < folds) throw ConfigError("model_select: fewer training rows than folds");

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(seed, 0xcfULL));
    shuffle(order, rng);

    ModelSelectResult result;
    result.best_accuracy = -1.0;
    for (int l : l_grid) {
        double acc_sum = 0.0;
        int evaluated = 0;
        for (int fold = 0; fold < folds; ++fold) {
            std::vector<Sample> fit, validate;
            for (int i = 0; i < n; ++i) {
                const Sample& s = data.train[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
                if (i % folds == fold)
                    validate.push_back(s);
                else
                    fit.push_back(s);
            }
            int n0 = std::min<int>(l + 50, static_cast<int>(fit.size()));
            if (n0 < l) {
                evaluated = 0;
                break;  // L infeasible for this split size
            }
            HiddenLayer layer =
                init_hidden(static_cast<int>(fit.front().x.size()), l,
                            activation_from_string(base.activation),
                            derive_seed(seed, (static_cast<std::uint64_t>(l) << 8) |
                                                  static_cast<std::uint64_t>(fold)));
            std::vector<Sample> d0(fit.begin(), fit.begin() + n0);
            OselmState state = init_phase(layer, d0);
            for (std::size_t i = static_cast<std::size_t>(n0); i < fit.size(); ++i)
                update_one(state, fit[i]);
            acc_sum += accuracy_oselm(state, validate);
            ++evaluated;
        }
        if (evaluated == 0) continue;
        double mean_acc = acc_sum / evaluated;
        result.curve.emplace_back(l, mean_acc);
        if (mean_acc > result.best_accuracy) {
            result.best_accuracy = mean_acc;
            result.best_l = l;
        }
    }
    if (result.curve.empty())
        throw ConfigError("model_select: no feasible L in the grid");
    return result;
}

int ModelEnvelope::predict_label(const Eigen::VectorXd& raw) const {
    Eigen::VectorXd scaled = features::apply_scaling(raw, scaling, true);
    Eigen::VectorXd x;
    if (feature_subset.empty()) {
        x = scaled;
    } else {
        x.resize(static_cast<Eigen::Index>(feature_subset.size()));
        for (std::size_t k = 0; k < feature_subset.size(); ++k)
            x(static_cast<Eigen::Index>(k)) = scaled(feature_subset[k]);
    }
    if (type == "os-elm") return predict(*oselm, x).label;
    if (type == "eos-elm") return predict_strong(*ensemble, x).label;
    throw InputError("model envelope: unknown type " + type);
}

nlohmann::json ModelEnvelope::to_json() const {
    nlohmann::json j{{"format", "tsa-model"},
                     {"type", type},
                     {"scaling", features::to_json(scaling)},
                     {"feature_subset", feature_subset}};
    if (type == "os-elm")
        j["model"] = tsa::to_json(*oselm);
    else if (type == "eos-elm")
        j["model"] = tsa::to_json(*ensemble);
    else
        throw InputError("model envelope: unknown type " + type);
    return j;
}

ModelEnvelope ModelEnvelope::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "tsa-model")
        throw InputError("model envelope: not a tsa-model document");
    ModelEnvelope env;
    env.type = j.at("type").get<std::string>();
    env.scaling = features::scaling_from_json(j.at("scaling"));
    env.feature_subset = j.at("feature_subset").get<std::vector<int>>();
    if (env.type == "os-elm")
        env.oselm = oselm_from_json(j.at("model"));
    else if (env.type == "eos-elm")
        env.ensemble = ensemble_from_json(j.at("model"));
    else
        throw InputError("model envelope: unknown type " + env.type);
    return env;
}

void write_trials_csv(const TrialReport& report, std::ostream& out) {
    out << "trial,train_accuracy,test_accuracy\n";
    for (const auto& row : report.rows)
        out << row.trial << ',' << csv_double(row.train_accuracy) << ','
            << csv_double(row.test_accuracy) << '\n';
}

void write_summary_csv(const std::vector<TrialReport>& reports, std::ostream& out) {
    out << "algorithm,trials,mean_train_accuracy,sd_train,mean_test_accuracy,sd_test\n";
    for (const auto& r : reports)
        out << r.algorithm << ',' << r.rows.size() << ',' << csv_double(r.mean_train)
            << ',' << csv_double(r.sd_train) << ',' << csv_double(r.mean_test) << ','
            << csv_double(r.sd_test) << '\n';
}

}  // namespace tsa
