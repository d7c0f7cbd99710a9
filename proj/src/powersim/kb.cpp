#include "tsa/powersim/kb.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include "tsa/features.hpp"

namespace tsa::powersim {

std::vector<std::pair<int, double>> pick_fault_locations(const PowerNetwork& network,
                                                         const ScenarioGrid& grid,
                                                         std::uint64_t seed) {
    std::vector<std::pair<int, double>> all;
    for (std::size_t b = 0; b < network.branches.size(); ++b) {
        if (network.branches[b].kind != BranchKind::line) continue;
        for (double f : grid.fractions) all.emplace_back(static_cast<int>(b), f);
    }
    if (all.empty()) throw ConfigError("pick_fault_locations: network has no lines");
    if (static_cast<int>(all.size()) <= grid.fault_locations) return all;

    Rng rng(derive_seed(seed, 0xfa017ULL));
    shuffle(all, rng);
    all.resize(static_cast<std::size_t>(grid.fault_locations));
    std::sort(all.begin(), all.end());
    return all;
}

namespace {

struct ScenarioSpec {
    int index;
    double load_level;
    int draw;
    Contingency contingency;
};

}  // namespace

KnowledgeBase generate_kb(const PowerNetwork& network, const ScenarioGrid& grid,
                          std::uint64_t seed, const SimOptions& options,
                          KbGenReport* report) {
    network.validate();
    if (grid.dispatch_draws < 1 || grid.fault_locations < 1 || grid.load_levels.empty())
        throw ConfigError("generate_kb: empty scenario grid");

    auto faults = pick_fault_locations(network, grid, seed);

    std::vector<ScenarioSpec> specs;
    specs.reserve(static_cast<std::size_t>(grid.load_levels.size()) *
                  static_cast<std::size_t>(grid.dispatch_draws) * faults.size());
    int index = 0;
    for (double level : grid.load_levels)
        for (int draw = 0; draw < grid.dispatch_draws; ++draw)
            for (const auto& [branch, frac] : faults) {
                Contingency c;
                c.branch_index = branch;
                c.location = frac;
                c.t_fault = grid.t_fault;
                c.t_clear = grid.t_clear;
                specs.push_back(ScenarioSpec{index++, level, draw, c});
            }

    auto run_scenario = [&](const ScenarioSpec& spec, KbRow& row, std::string& error) {
        char sid[32];
        std::snprintf(sid, sizeof(sid), "S%04d", spec.index);
        row.scenario_id = sid;
        row.load_level = spec.load_level;
        row.fault_id = spec.contingency.id(network);
        try {
            // random dispatch around the scaled base case; slack absorbs the
            // residual
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(spec.index)));
            Eigen::VectorXd pg(network.generators.size());
            for (std::size_t g = 0; g < network.generators.size(); ++g) {
                double u = rng.uniform(1.0 - grid.dispatch_spread, 1.0 + grid.dispatch_spread);
                pg(static_cast<Eigen::Index>(g)) =
                    network.generators[g].pg_mw * spec.load_level * u;
            }

            Trajectory traj =
                simulate(network, pg, spec.load_level, spec.contingency, options);
            if (traj.blown_up &&
                traj.blow_step * traj.dt <
                    traj.t_clear + 9 * features::kCycleSeconds) {
                error = "state blew up before the last feature anchor";
                return false;
            }
            row.features = features::extract_features(traj);
            row.label = stability_label(traj);
            return true;
        } catch (const std::exception& ex) {
            error = ex.what();
            return false;
        }
    };

    std::vector<KbRow> rows(specs.size());
    std::vector<std::string> errors(specs.size());
    std::vector<char> ok(specs.size(), 0);

    unsigned hw = std::thread::hardware_concurrency();
    unsigned n_threads = std::clamp(hw, 1u, 8u);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) break;
            ok[i] = run_scenario(specs[i], rows[i], errors[i]) ? 1 : 0;
        }
    };
    if (n_threads > 1 && specs.size() > 1) {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    } else {
        worker();
    }

    KnowledgeBase kb;
    kb.feature_names = features::feature_names();
    KbGenReport local_report;
    local_report.requested = static_cast<int>(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (ok[i]) {
            kb.rows.push_back(std::move(rows[i]));
        } else {
            local_report.rejections.push_back(rows[i].scenario_id + ": " + errors[i]);
        }
    }
    local_report.generated = static_cast<int>(kb.rows.size());

    // shuffle, then 2:1 train:test
    Rng shuffle_rng(derive_seed(seed, 0x5bff1eULL));
    shuffle(kb.rows, shuffle_rng);
    std::size_t n_train = kb.rows.size() * 2 / 3;
    for (std::size_t i = 0; i < kb.rows.size(); ++i)
        kb.rows[i].split = i < n_train ? "train" : "test";

    if (report) *report = std::move(local_report);
    return kb;
}

void write_kb_csv(const KnowledgeBase& kb, std::ostream& out) {
    out << "scenario_id,load_level,fault_id";
    for (const auto& name : kb.feature_names) out << ',' << name;
    out << ",label,split\n";
    for (const auto& row : kb.rows) {
        out << row.scenario_id << ',' << csv_double(row.load_level) << ',' << row.fault_id;
        for (Eigen::Index j = 0; j < row.features.size(); ++j)
            out << ',' << csv_double(row.features(j));
        out << ',' << row.label << ',' << row.split << '\n';
    }
}

KnowledgeBase read_kb_csv(std::istream& in) {
    KnowledgeBase kb;
    std::string line;
    if (!std::getline(in, line)) throw InputError("read_kb_csv: empty file");

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 5 || header.front() != "scenario_id" ||
        header.back() != "split")
        throw InputError("read_kb_csv: unexpected header");
    const std::size_t n_features = header.size() - 5;
    kb.feature_names.assign(header.begin() + 3, header.end() - 2);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size())
            throw InputError("read_kb_csv: bad row with " + std::to_string(cells.size()) +
                             " cells");
        KbRow row;
        row.scenario_id = cells[0];
        row.load_level = std::stod(cells[1]);
        row.fault_id = cells[2];
        row.features.resize(static_cast<Eigen::Index>(n_features));
        for (std::size_t j = 0; j < n_features; ++j)
            row.features(static_cast<Eigen::Index>(j)) = std::stod(cells[3 + j]);
        row.label = std::stoi(cells[cells.size() - 2]);
        if (row.label != 1 && row.label != -1)
            throw InputError("read_kb_csv: label must be +1/-1");
        row.split = cells.back();
        kb.rows.push_back(std::move(row));
    }
    return kb;
}

void kb_split(const KnowledgeBase& kb, const std::string& split, Eigen::MatrixXd& x,
              std::vector<int>& labels) {
    std::vector<const KbRow*> rows;
    for (const auto& row : kb.rows)
        if (row.split == split) rows.push_back(&row);
    if (rows.empty()) throw InputError("kb_split: no rows with split " + split);
    x.resize(static_cast<Eigen::Index>(rows.size()), rows.front()->features.size());
    labels.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = rows[i]->features.transpose();
        labels.push_back(rows[i]->label);
    }
}

}  // namespace tsa::powersim
