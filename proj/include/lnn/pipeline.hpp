#pragma once

#include <chrono>
#include <nlohmann/json.hpp>
#include <optional>

#include "lnn/extract.hpp"
#include "lnn/train.hpp"

// Reverse engineering: progressive topology search with retry policy,
// crystallization gate, OBS pruning, and extraction.

namespace lnn {

struct PipelineConfig {
    int hidden_layers = 3;
    std::vector<int> width_schedule;   // empty: default [m, ⌈3m/2⌉, 2m, 3m]
    int tries_per_topology = 0;        // 0: default 5 + m
    TrainConfig train;
    double crystallization_mse_slack = -1.0;  // <0: default 2 × mse_target
    int grain = 1;
};

struct Attempt {
    std::string topology;
    int try_index;
    std::string outcome;
    double mse;
};

struct PipelineResult {
    std::optional<ExtractionReport> report;
    Network network;
    std::vector<Attempt> attempts_log;
    double total_seconds = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t attempt_seed(std::uint64_t base, int topo, int try_idx) {
    return splitmix64(base ^ splitmix64(std::uint64_t(topo) << 32 | std::uint64_t(try_idx)));
}

inline Network make_topology(const std::vector<std::string>& input_names, int hidden_layers,
                             int width, int grain) {
    Network net;
    net.input_names = input_names;
    net.grain = grain;
    long prev = long(input_names.size());
    for (int l = 0; l < hidden_layers; ++l) {
        net.layers.push_back({Eigen::MatrixXd::Zero(width, prev), Eigen::VectorXd::Zero(width)});
        prev = width;
    }
    net.layers.push_back({Eigen::MatrixXd::Zero(1, prev), Eigen::VectorXd::Zero(1)});
    return net;
}

// Input columns with a nonzero-weight path to the output.
inline std::vector<int> live_input_columns(const Network& net) {
    const std::size_t L = net.layers.size();
    std::vector<std::vector<bool>> alive(L);
    for (std::size_t l = 0; l < L; ++l)
        alive[l].assign(std::size_t(net.layers[l].weights.rows()), false);
    alive[L - 1][0] = true;
    for (std::size_t l = L; l-- > 1;) {
        const auto& W = net.layers[l].weights;
        for (long u = 0; u < W.rows(); ++u)
            if (alive[l][std::size_t(u)])
                for (long c = 0; c < W.cols(); ++c)
                    if (W(u, c) != 0.0) alive[l - 1][std::size_t(c)] = true;
    }
    std::vector<int> cols;
    const auto& W0 = net.layers[0].weights;
    for (long c = 0; c < W0.cols(); ++c) {
        bool live = false;
        for (long u = 0; u < W0.rows() && !live; ++u)
            live = alive[0][std::size_t(u)] && W0(u, c) != 0.0;
        if (live) cols.push_back(int(c));
    }
    return cols;
}

// Zeroes every weight whose individual removal keeps the mse within budget;
// returns whether anything was deleted.
inline bool crisp_delete_pass(Network& net, const Dataset& data, double budget) {
    bool changed = false;
    for (auto& layer : net.layers)
        for (long u = 0; u < layer.weights.rows(); ++u)
            for (long c = 0; c < layer.weights.cols(); ++c) {
                if (layer.weights(u, c) == 0.0) continue;
                double saved = layer.weights(u, c);
                layer.weights(u, c) = 0.0;
                if (mse(net, data) <= budget)
                    changed = true;
                else
                    layer.weights(u, c) = saved;
            }
    return changed;
}

}  // namespace detail

inline std::vector<int> default_width_schedule(int m) {
    return {m, (3 * m + 1) / 2, 2 * m, 3 * m};
}

inline PipelineResult reverse_engineer(const Dataset& data, PipelineConfig cfg) {
    if (data.rows() == 0) throw std::invalid_argument("reverse_engineer: empty dataset");
    const auto start = std::chrono::steady_clock::now();
    const int m = int(data.cols());
    if (cfg.width_schedule.empty()) cfg.width_schedule = default_width_schedule(std::max(1, m));
    const int tries = cfg.tries_per_topology > 0 ? cfg.tries_per_topology : 5 + m;
    const double target = cfg.train.mse_target;
    const double slack =
        cfg.crystallization_mse_slack >= 0 ? cfg.crystallization_mse_slack : 2.0 * target;
    const double gate = target + slack;

    PipelineResult result;
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    for (std::size_t topo = 0; topo < cfg.width_schedule.size(); ++topo) {
        const int width = cfg.width_schedule[topo];
        const std::string topo_name =
            std::to_string(cfg.hidden_layers) + "x" + std::to_string(width);
        for (int t = 0; t < tries; ++t) {
            Network net = detail::make_topology(data.column_names, cfg.hidden_layers, width,
                                                cfg.grain);
            TrainConfig tc = cfg.train;
            tc.seed = detail::attempt_seed(cfg.train.seed, int(topo), t);
            auto trained = crystallize_train(std::move(net), data, tc, gate);
            if (trained.stalled) {
                result.attempts_log.push_back({topo_name, t, "bad-training", trained.mse});
                continue;
            }
            if (!trained.converged) {
                result.attempts_log.push_back(
                    {topo_name, t, "crystallization-rejected", trained.mse});
                continue;
            }
            Network crys = std::move(trained.network);
            double cmse = trained.mse;
            // refine to a fixpoint: OBS prune + re-crystallize, then delete
            // individually-redundant crisp weights; roll back on mse blowup
            Network final_net = std::move(crys);
            double fmse = cmse;
            const double budget = std::max(target, cmse);
            for (int pass = 0; pass < 8; ++pass) {
                Network pruned = crisp_crystallize(obs_prune(final_net, data, tc));
                double pmse = mse(pruned, data);
                bool obs_changed = false;
                if (pmse <= gate && get_params(pruned) != get_params(final_net)) {
                    final_net = std::move(pruned);
                    fmse = pmse;
                    obs_changed = true;
                }
                bool deleted = detail::crisp_delete_pass(final_net, data, budget);
                if (deleted) fmse = mse(final_net, data);
                if (!obs_changed && !deleted) break;
            }
            result.attempts_log.push_back({topo_name, t, "success", fmse});
            result.report = extract_formula(final_net, data);
            result.network = std::move(final_net);
            result.total_seconds = elapsed();
            return result;
        }
    }
    result.total_seconds = elapsed();
    return result;  // schedule exhausted: no report, full attempts_log
}

// Attribute selection with a weak stopping criterion: columns that keep a
// nonzero crystallized weight into the surviving network.
inline std::vector<std::string> select_attributes(const Dataset& data, PipelineConfig cfg) {
    auto result = reverse_engineer(data, std::move(cfg));
    if (!result.report) return {};
    std::vector<std::string> names;
    for (int c : detail::live_input_columns(result.network))
        names.push_back(data.column_names[std::size_t(c)]);
    return names;
}

inline void save_attempts_csv(const PipelineResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "topology,try,outcome,mse\n";
    for (const auto& a : result.attempts_log)
        out << a.topology << ',' << a.try_index << ',' << a.outcome << ','
            << csv::format_number(a.mse) << '\n';
}

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    cfg.hidden_layers = j.value("hidden_layers", cfg.hidden_layers);
    if (j.contains("width_schedule"))
        cfg.width_schedule = j.at("width_schedule").get<std::vector<int>>();
    cfg.tries_per_topology = j.value("tries_per_topology", cfg.tries_per_topology);
    cfg.crystallization_mse_slack =
        j.value("crystallization_mse_slack", cfg.crystallization_mse_slack);
    cfg.grain = j.value("grain", cfg.grain);
    if (j.contains("train")) {
        const auto& t = j.at("train");
        cfg.train.mu_init = t.value("mu_init", cfg.train.mu_init);
        cfg.train.mu_factor = t.value("mu_factor", cfg.train.mu_factor);
        cfg.train.max_iters = t.value("max_iters", cfg.train.max_iters);
        cfg.train.mse_target = t.value("mse_target", cfg.train.mse_target);
        cfg.train.crystallization_exponent =
            t.value("crystallization_exponent", cfg.train.crystallization_exponent);
        cfg.train.seed = t.value("seed", cfg.train.seed);
    }
    return cfg;
}

}  // namespace lnn
