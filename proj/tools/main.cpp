// Command-line front end: knowledge-base generation, model selection,
// train/eval trials, feature selection, prediction, latency benchmark.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tsa/experiment.hpp"
#include "tsa/powersim/network.hpp"

namespace fs = std::filesystem;
using namespace tsa;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> out_dir;
    std::optional<std::string> mode;
    std::optional<int> chunk_size;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)");
    cmd->add_option("--seed", args.seed, "master seed override");
    cmd->add_option("--trials", args.trials, "trial count override");
    cmd->add_option("--out-dir", args.out_dir, "output directory override");
    cmd->add_option("--mode", args.mode, "sequential mode: one-by-one or chunk")
        ->check(CLI::IsMember({"one-by-one", "chunk"}));
    cmd->add_option("--chunk-size", args.chunk_size, "chunk size for chunk mode");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = ExperimentConfig::load(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.trials) cfg.trials = *args.trials;
    if (args.out_dir) cfg.out_dir = *args.out_dir;
    if (args.mode) cfg.model.mode = *args.mode;
    if (args.chunk_size) cfg.model.chunk_size = *args.chunk_size;
    return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    fn(out);
}

powersim::KnowledgeBase load_kb(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open KB file: " + path);
    return powersim::read_kb_csv(in);
}

std::string default_kb_path(const ExperimentConfig& cfg) {
    return (fs::path(cfg.out_dir) / "kb.csv").string();
}

int cmd_gen_kb(const ExperimentConfig& cfg) {
    auto network = powersim::load_network(cfg.network_file);
    powersim::KbGenReport report;
    auto kb = powersim::generate_kb(network, cfg.grid, cfg.seed, cfg.sim, &report);

    fs::create_directories(cfg.out_dir);
    write_stream(fs::path(cfg.out_dir) / "kb.csv",
                 [&](std::ostream& out) { powersim::write_kb_csv(kb, out); });
    write_stream(fs::path(cfg.out_dir) / "feature_dictionary.csv",
                 [&](std::ostream& out) { features::write_feature_dictionary(out); });

    std::ostringstream rep;
    rep << "requested scenarios: " << report.requested << "\n"
        << "generated rows:     " << report.generated << "\n"
        << "rejected:           " << report.rejections.size() << "\n";
    for (const auto& r : report.rejections) rep << "  " << r << "\n";
    int stable = 0, unstable = 0;
    for (const auto& row : kb.rows) (row.label == 1 ? stable : unstable)++;
    rep << "stable rows:        " << stable << "\n"
        << "unstable rows:      " << unstable << "\n";
    write_file(fs::path(cfg.out_dir) / "gen_report.txt", rep.str());

    std::cout << "wrote " << kb.rows.size() << " rows to "
              << (fs::path(cfg.out_dir) / "kb.csv").string() << " (" << stable
              << " stable, " << unstable << " unstable, " << report.rejections.size()
              << " rejected)\n";
    return 0;
}

int cmd_model_select(const ExperimentConfig& cfg, const std::string& kb_path,
                     const std::string& l_grid_arg) {
    auto kb = load_kb(kb_path.empty() ? default_kb_path(cfg) : kb_path);
    features::normalize_kb(kb);
    Dataset data = Dataset::from_kb(kb);

    std::vector<int> l_grid;
    if (l_grid_arg.empty()) {
        for (int l = 10; l <= 100; l += 10) l_grid.push_back(l);
    } else {
        std::stringstream ss(l_grid_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) l_grid.push_back(std::stoi(tok));
    }

    ModelSelectResult result = model_select(data, l_grid, 5, cfg.seed, cfg.model);

    fs::create_directories(cfg.out_dir);
    write_stream(fs::path(cfg.out_dir) / "validation_curve.csv", [&](std::ostream& out) {
        out << "hidden_nodes,mean_validation_accuracy\n";
        for (const auto& [l, acc] : result.curve)
            out << l << ',' << csv_double(acc) << '\n';
    });
    std::cout << "best L = " << result.best_l << " (validation accuracy "
              << csv_double(result.best_accuracy) << ")\n";
    return 0;
}

int cmd_train_eval(const ExperimentConfig& cfg, const std::string& kb_path) {
    auto kb = load_kb(kb_path.empty() ? default_kb_path(cfg) : kb_path);
    auto scaling = features::normalize_kb(kb);
    Dataset data = Dataset::from_kb(kb);

    TrialReport os = run_trials_oselm(data, cfg.model, cfg.trials, derive_seed(cfg.seed, 1));
    TrialReport eos = run_trials_eoselm(data, cfg.model, cfg.trials, derive_seed(cfg.seed, 2));
    TrialReport sg = run_trials_sgbp(data, cfg.sgbp, cfg.trials, derive_seed(cfg.seed, 3));

    fs::create_directories(cfg.out_dir);
    write_stream(fs::path(cfg.out_dir) / "trials_oselm.csv",
                 [&](std::ostream& out) { write_trials_csv(os, out); });
    write_stream(fs::path(cfg.out_dir) / "trials_eoselm.csv",
                 [&](std::ostream& out) { write_trials_csv(eos, out); });
    write_stream(fs::path(cfg.out_dir) / "trials_sgbp.csv",
                 [&](std::ostream& out) { write_trials_csv(sg, out); });
    write_stream(fs::path(cfg.out_dir) / "report_summary.csv",
                 [&](std::ostream& out) { write_summary_csv({os, eos, sg}, out); });

    // rebuild the best EOS-ELM trial and ship it with the scaling record
    int best_trial = 0;
    for (std::size_t t = 1; t < eos.rows.size(); ++t)
        if (eos.rows[t].test_accuracy > eos.rows[static_cast<std::size_t>(best_trial)].test_accuracy)
            best_trial = static_cast<int>(t);
    ModelEnvelope env;
    env.type = "eos-elm";
    env.ensemble = train_eoselm_trial(data, cfg.model,
                                      derive_seed(derive_seed(cfg.seed, 2), best_trial));
    env.scaling = scaling;
    write_file(fs::path(cfg.out_dir) / "model.json", env.to_json().dump(2) + "\n");

    std::ostringstream sum;
    sum << "train-eval over " << cfg.trials << " trials (mode " << cfg.model.mode << ")\n\n";
    for (const auto& r : {os, eos, sg}) {
        sum << r.algorithm << ":\n"
            << "  mean train accuracy " << csv_double(r.mean_train) << " (SD "
            << csv_double(r.sd_train) << ")\n"
            << "  mean test accuracy  " << csv_double(r.mean_test) << " (SD "
            << csv_double(r.sd_test) << ")\n"
            << "  mean init time      " << csv_double(r.mean_init_seconds) << " s\n"
            << "  mean sequential time " << csv_double(r.mean_seq_seconds) << " s\n";
    }
    sum << "\nbest EOS-ELM trial: " << best_trial << " (test accuracy "
        << csv_double(eos.rows[static_cast<std::size_t>(best_trial)].test_accuracy)
        << "), saved to model.json\n";
    write_file(fs::path(cfg.out_dir) / "summary.txt", sum.str());
    std::cout << sum.str();
    return 0;
}

int cmd_select_features(const ExperimentConfig& cfg, const std::string& kb_path) {
    auto kb = load_kb(kb_path.empty() ? default_kb_path(cfg) : kb_path);
    features::normalize_kb(kb);
    Dataset data = Dataset::from_kb(kb);

    // classification table over the normalized training split
    ClassificationTable table;
    table.features.resize(static_cast<Eigen::Index>(data.train.size()), data.input_dim());
    for (std::size_t i = 0; i < data.train.size(); ++i) {
        table.features.row(static_cast<Eigen::Index>(i)) = data.train[i].x.transpose();
        table.labels.push_back(data.train[i].t(0) >= 0 ? 1 : -1);
    }
    table.names = kb.feature_names;

    FeatSelConfig fs_cfg;
    fs_cfg.sigma = cfg.featsel.sigma;
    fs_cfg.weight = cfg.featsel.weight;
    fs_cfg.jaya.population = cfg.featsel.jaya_population;
    fs_cfg.jaya.max_iters = cfg.featsel.jaya_iterations;
    fs_cfg.jaya.seed = derive_seed(cfg.seed, 4);

    SelectionResult sel = select_features(table, fs_cfg);

    TrialReport full = run_trials_eoselm(data, cfg.model, cfg.trials, derive_seed(cfg.seed, 5));
    full.algorithm = "eos-elm-full";
    Dataset reduced = data.restricted_to(sel.subset);
    ModelParams reduced_params = cfg.model;
    TrialReport subset_report =
        run_trials_eoselm(reduced, reduced_params, cfg.trials, derive_seed(cfg.seed, 6));
    subset_report.algorithm = "eos-elm-subset";

    fs::create_directories(cfg.out_dir);
    nlohmann::json subset_doc{{"features", sel.names},
                              {"indices", sel.subset},
                              {"g_c", sel.g_c},
                              {"fitness", sel.fitness},
                              {"sigma", cfg.featsel.sigma},
                              {"weight", cfg.featsel.weight},
                              {"trace_file", "featsel_trace.csv"}};
    write_file(fs::path(cfg.out_dir) / "featsel_subset.json", subset_doc.dump(2) + "\n");
    write_stream(fs::path(cfg.out_dir) / "featsel_trace.csv",
                 [&](std::ostream& out) { write_trace_csv(sel.trace, out); });
    write_stream(fs::path(cfg.out_dir) / "featsel_comparison.csv",
                 [&](std::ostream& out) { write_summary_csv({full, subset_report}, out); });

    std::cout << "selected " << sel.subset.size() << "/" << table.features.cols()
              << " features (g_C " << csv_double(sel.g_c) << ")\n"
              << "  full set mean test accuracy:   " << csv_double(full.mean_test) << "\n"
              << "  subset mean test accuracy:     " << csv_double(subset_report.mean_test)
              << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                const std::string& output_path) {
    std::ifstream model_in(model_path);
    if (!model_in) throw InputError("cannot open model file: " + model_path);
    nlohmann::json mj;
    model_in >> mj;
    ModelEnvelope env = ModelEnvelope::from_json(mj);

    std::ifstream in(input_path);
    if (!in) throw InputError("cannot open input file: " + input_path);
    std::ofstream out(output_path, std::ios::binary);
    if (!out) throw InputError("cannot write output file: " + output_path);

    std::string line;
    std::vector<int> feature_cols;
    std::vector<std::string> header;
    bool have_header = false;
    long row_id = 0;
    std::vector<double> latencies_us;
    out << "row,label\n";
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!have_header) {
            header = cells;
            for (std::size_t c = 0; c < header.size(); ++c)
                if (header[c].rfind("Tz", 0) == 0) feature_cols.push_back(static_cast<int>(c));
            if (feature_cols.empty())
                throw InputError("predict: input header has no Tz feature columns");
            have_header = true;
            continue;
        }
        Eigen::VectorXd x(static_cast<Eigen::Index>(feature_cols.size()));
        for (std::size_t k = 0; k < feature_cols.size(); ++k)
            x(static_cast<Eigen::Index>(k)) =
                std::stod(cells[static_cast<std::size_t>(feature_cols[k])]);
        auto start = std::chrono::steady_clock::now();
        int label = env.predict_label(x);
        latencies_us.push_back(
            std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start)
                .count());
        out << row_id++ << ',' << label << '\n';
    }

    if (!latencies_us.empty()) {
        std::sort(latencies_us.begin(), latencies_us.end());
        double median = latencies_us[latencies_us.size() / 2];
        double total = 0;
        for (double v : latencies_us) total += v;
        std::cerr << "predicted " << row_id << " rows; per-row latency median "
                  << median << " us, mean " << total / latencies_us.size() << " us\n";
    } else {
        std::cerr << "predicted 0 rows\n";
    }
    return 0;
}

int cmd_benchmark(const ExperimentConfig& cfg, const std::string& model_path,
                  const std::string& kb_path) {
    std::ifstream model_in(model_path);
    if (!model_in) throw InputError("cannot open model file: " + model_path);
    nlohmann::json mj;
    model_in >> mj;
    ModelEnvelope env = ModelEnvelope::from_json(mj);

    auto kb = load_kb(kb_path.empty() ? default_kb_path(cfg) : kb_path);
    if (kb.rows.empty()) throw InputError("benchmark: empty KB");

    std::vector<double> latencies_us;
    latencies_us.reserve(kb.rows.size());
    for (const auto& row : kb.rows) {
        auto start = std::chrono::steady_clock::now();
        (void)env.predict_label(row.features);
        latencies_us.push_back(
            std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start)
                .count());
    }
    std::sort(latencies_us.begin(), latencies_us.end());
    double median = latencies_us[latencies_us.size() / 2];
    double p99 = latencies_us[static_cast<std::size_t>(
        std::min<double>(static_cast<double>(latencies_us.size()) - 1,
                         0.99 * static_cast<double>(latencies_us.size())))];
    double total = 0;
    for (double v : latencies_us) total += v;

    std::ostringstream rep;
    rep << "prediction latency over " << latencies_us.size() << " rows\n"
        << "  median: " << median << " us\n"
        << "  mean:   " << total / static_cast<double>(latencies_us.size()) << " us\n"
        << "  p99:    " << p99 << " us\n";
    fs::create_directories(cfg.out_dir);
    write_file(fs::path(cfg.out_dir) / "benchmark.txt", rep.str());
    std::cout << rep.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transient stability assessment: OS-ELM / EOS-ELM toolkit"};
    app.require_subcommand(0, 1);

    bool print_config = false;
    app.add_flag("--print-config", print_config, "print the default config as JSON");

    CommonArgs gen_args, ms_args, te_args, fs_args, bm_args;
    std::string ms_kb, ms_lgrid, te_kb, fs_kb, bm_kb, bm_model;
    std::string pr_model, pr_input, pr_output;

    auto* gen = app.add_subcommand("gen-kb", "simulate the scenario grid into a labeled KB");
    add_common(gen, gen_args);

    auto* ms = app.add_subcommand("model-select", "cross-validated hidden-node selection");
    add_common(ms, ms_args);
    ms->add_option("--kb", ms_kb, "KB csv (default <out-dir>/kb.csv)");
    ms->add_option("--l-grid", ms_lgrid, "comma-separated L values");

    auto* te = app.add_subcommand("train-eval", "repeated-trial training and evaluation");
    add_common(te, te_args);
    te->add_option("--kb", te_kb, "KB csv (default <out-dir>/kb.csv)");

    auto* fsel = app.add_subcommand("select-features", "BinJaya feature selection + retrain");
    add_common(fsel, fs_args);
    fsel->add_option("--kb", fs_kb, "KB csv (default <out-dir>/kb.csv)");

    auto* pr = app.add_subcommand("predict", "label feature rows with a trained model");
    pr->add_option("--model", pr_model, "model JSON")->required();
    pr->add_option("--input", pr_input, "input feature CSV")->required();
    pr->add_option("--output", pr_output, "output label CSV")->required();

    auto* bm = app.add_subcommand("benchmark", "per-row prediction latency on a KB");
    add_common(bm, bm_args);
    bm->add_option("--model", bm_model, "model JSON")->required();
    bm->add_option("--kb", bm_kb, "KB csv (default <out-dir>/kb.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_config) {
            std::cout << ExperimentConfig{}.to_json().dump(2) << "\n";
            return 0;
        }
        if (gen->parsed()) return cmd_gen_kb(resolve_config(gen_args));
        if (ms->parsed()) return cmd_model_select(resolve_config(ms_args), ms_kb, ms_lgrid);
        if (te->parsed()) return cmd_train_eval(resolve_config(te_args), te_kb);
        if (fsel->parsed()) return cmd_select_features(resolve_config(fs_args), fs_kb);
        if (pr->parsed()) return cmd_predict(pr_model, pr_input, pr_output);
        if (bm->parsed()) return cmd_benchmark(resolve_config(bm_args), bm_model, bm_kb);
        std::cout << app.help();
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
