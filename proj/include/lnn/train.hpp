#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <random>

#include "lnn/crystal.hpp"
#include "lnn/dataset.hpp"
#include "lnn/network.hpp"

// Levenberg-Marquardt training with per-step soft crystallization, plus
// Optimal Brain Surgeon pruning.

namespace lnn {

struct TrainConfig {
    double mu_init = 0.01;
    double mu_factor = 10.0;
    int max_iters = 500;
    double mse_target = 0.002;
    int crystallization_exponent = 2;
    int retries_per_topology = 0;  // 0: derived as 5 + number of inputs
    std::uint64_t seed = 0;
    double finite_diff_eps = 1e-6;
};

constexpr double kMuMin = 1e-12;
constexpr double kMuMax = 1e12;
constexpr double kStallMu = 1e8;
constexpr int kStallWindow = 25;

struct IterationRecord {
    int iteration;
    double mse;
    double delta;
    double mu;
};

struct TrainResult {
    Network network;
    double mse = 0.0;
    int iterations = 0;
    bool converged = false;
    bool stalled = false;
    std::vector<IterationRecord> history;
};

inline double mse(const Network& net, const Dataset& data) {
    if (data.rows() == 0) throw std::invalid_argument("mse: empty dataset");
    double acc = 0.0;
    for (long r = 0; r < data.rows(); ++r) {
        Eigen::VectorXd in = data.inputs.row(r).transpose();
        double e = data.targets(r) - forward_activations(net, in)(0);
        acc += e * e;
    }
    return acc / double(data.rows());
}

// Jacobian of the per-case residual e = target − output with respect to the
// flat parameter vector (exact reverse-mode; ψ' = 1 on [0,1], else 0).
inline Eigen::MatrixXd network_jacobian(const Network& net, const Dataset& data) {
    const int P = param_count(net);
    const long N = data.rows();
    Eigen::MatrixXd J(N, P);
    const std::size_t L = net.layers.size();
    std::vector<Eigen::VectorXd> a(L + 1), z(L);
    for (long r = 0; r < N; ++r) {
        a[0] = data.inputs.row(r).transpose();
        for (std::size_t l = 0; l < L; ++l) {
            z[l] = net.layers[l].weights * a[l] + net.layers[l].biases;
            a[l + 1] = z[l].unaryExpr([](double v) { return psi(v); });
        }
        // backward: delta[l] = d(output)/d(z_l)
        Eigen::VectorXd delta = Eigen::VectorXd::Ones(1);
        delta(0) = psi_prime(z[L - 1](0));
        long k = P;
        for (std::size_t l = L; l-- > 0;) {
            const auto& layer = net.layers[l];
            long nb = layer.biases.size();
            long nw = layer.weights.size();
            k -= nb + nw;
            long pos = k;
            for (long u = 0; u < layer.weights.rows(); ++u)
                for (long c = 0; c < layer.weights.cols(); ++c)
                    J(r, pos++) = -delta(u) * a[l](c);
            for (long u = 0; u < nb; ++u) J(r, pos++) = -delta(u);
            if (l > 0) {
                Eigen::VectorXd next = layer.weights.transpose() * delta;
                for (long u = 0; u < next.size(); ++u) next(u) *= psi_prime(z[l - 1](u));
                delta = std::move(next);
            }
        }
    }
    return J;
}

inline Eigen::VectorXd residuals(const Network& net, const Dataset& data) {
    Eigen::VectorXd e(data.rows());
    for (long r = 0; r < data.rows(); ++r) {
        Eigen::VectorXd in = data.inputs.row(r).transpose();
        e(r) = data.targets(r) - forward_activations(net, in)(0);
    }
    return e;
}

struct LmStepResult {
    Network network;
    double mu;
    double mse;
    bool accepted;
};

// One damped step w ← Υ_n(w − [JᵀJ + μ·diag(JᵀJ)]⁻¹ Jᵀe), accepted only if
// the post-crystallization mse decreases; otherwise weights are untouched and
// μ grows by mu_factor.
inline LmStepResult lm_step(const Network& net, const Dataset& data, double mu,
                            int n_exponent, double mu_factor = 10.0) {
    const double current = mse(net, data);
    Eigen::MatrixXd J = network_jacobian(net, data);
    Eigen::VectorXd e = residuals(net, data);
    Eigen::VectorXd diag = (J.transpose() * J).diagonal();

    auto reject = [&] {
        return LmStepResult{net, std::min(kMuMax, mu * mu_factor), current, false};
    };
    if (diag.maxCoeff() <= 0.0) return reject();  // singular damped system

    Eigen::MatrixXd A = J.transpose() * J;
    for (long i = 0; i < diag.size(); ++i)
        A(i, i) += (diag(i) > 0.0) ? mu * diag(i) : 1e-8;
    Eigen::VectorXd step = A.ldlt().solve(J.transpose() * e);

    Network cand = net;
    Eigen::VectorXd p = get_params(net) - step;
    for (long i = 0; i < p.size(); ++i) p(i) = upsilon(p(i), n_exponent);
    set_params(cand, p);
    double cand_mse = mse(cand, data);
    if (cand_mse < current)
        return {std::move(cand), std::max(kMuMin, mu / mu_factor), cand_mse, true};
    return reject();
}

// Random parameter initialization from [-1,1], deterministic for a seed.
inline void randomize_params(Network& net, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd p(param_count(net));
    for (long i = 0; i < p.size(); ++i) p(i) = dist(rng);
    set_params(net, p);
    net.crystallized = false;
}

// Iterates lm_step until mse_target, max_iters, or stall (kStallWindow
// consecutive rejections with μ above kStallMu).
inline TrainResult lm_train(Network net, const Dataset& data, const TrainConfig& cfg) {
    randomize_params(net, cfg.seed);
    TrainResult result;
    double mu = cfg.mu_init;
    double current = mse(net, data);
    int rejected_streak = 0;
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        if (current <= cfg.mse_target) break;
        auto step = lm_step(net, data, mu, cfg.crystallization_exponent, cfg.mu_factor);
        mu = step.mu;
        if (step.accepted) {
            net = std::move(step.network);
            current = step.mse;
            rejected_streak = 0;
        } else {
            ++rejected_streak;
        }
        result.history.push_back({iter, current, representation_error(net), mu});
        if (rejected_streak >= kStallWindow && mu >= kStallMu) {
            result.stalled = true;
            ++iter;
            break;
        }
    }
    result.network = std::move(net);
    result.mse = current;
    result.iterations = iter;
    result.converged = current <= cfg.mse_target;
    return result;
}

namespace detail {

// Masked, box-projected LM descent: optimizes the parameters not flagged in
// `frozen`, accepting steps that decrease the raw mse. Weights are projected
// onto [-1,1] and biases onto [-3,3] after every step so the iterate stays
// within rounding distance of a crisp configuration.
inline double lm_refine(Network& net, const Dataset& data, const std::vector<bool>& frozen,
                        const std::vector<bool>& is_weight, double& mu, int max_iters,
                        double target) {
    double current = mse(net, data);
    const int P = param_count(net);
    std::vector<long> free_idx;
    for (long i = 0; i < P; ++i)
        if (!frozen[std::size_t(i)]) free_idx.push_back(i);
    if (free_idx.empty()) return current;
    int streak = 0;
    for (int iter = 0; iter < max_iters && current > target; ++iter) {
        Eigen::MatrixXd Jf = network_jacobian(net, data);
        Eigen::MatrixXd J(Jf.rows(), long(free_idx.size()));
        for (std::size_t c = 0; c < free_idx.size(); ++c) J.col(long(c)) = Jf.col(free_idx[c]);
        Eigen::VectorXd e = residuals(net, data);
        Eigen::MatrixXd A = J.transpose() * J;
        Eigen::VectorXd diag = A.diagonal();
        bool accepted = false;
        if (diag.maxCoeff() > 0.0) {
            for (long i = 0; i < long(free_idx.size()); ++i)
                A(i, i) += (diag(i) > 0.0) ? mu * diag(i) : 1e-8;
            Eigen::VectorXd step = A.ldlt().solve(J.transpose() * e);
            Eigen::VectorXd p = get_params(net);
            for (std::size_t c = 0; c < free_idx.size(); ++c) {
                long i = free_idx[c];
                p(i) -= step(long(c));
                p(i) = is_weight[std::size_t(i)] ? std::clamp(p(i), -1.0, 1.0)
                                                 : std::clamp(p(i), -3.0, 3.0);
            }
            Network cand = net;
            set_params(cand, p);
            double cand_mse = mse(cand, data);
            if (cand_mse < current) {
                net = std::move(cand);
                current = cand_mse;
                mu = std::max(kMuMin, mu / 10.0);
                accepted = true;
            }
        }
        if (!accepted) {
            mu = std::min(kMuMax, mu * 10.0);
            if (++streak >= 20 && mu >= kStallMu) break;
        } else {
            streak = 0;
        }
    }
    return current;
}

// Greedy discrete polish on a crisp network: single-parameter moves (weights
// across {-1,0,1}, biases by ±1 within [-3,3]), best-improvement first with a
// bounded number of sideways moves on plateaus.
inline double integer_polish(Network& net, const Dataset& data,
                             const std::vector<bool>& is_weight, double gate, int max_moves,
                             std::mt19937_64& rng) {
    const int P = param_count(net);
    double current = mse(net, data);
    int plateau = 0;
    for (int mv = 0; mv < max_moves && current > gate; ++mv) {
        double best = current;
        Eigen::VectorXd best_p;
        std::vector<Eigen::VectorXd> sideways;
        Eigen::VectorXd p = get_params(net);
        for (long i = 0; i < P; ++i) {
            double orig = p(i);
            auto consider = [&](double v) {
                p(i) = v;
                Network cand = net;
                set_params(cand, p);
                double m = mse(cand, data);
                if (m < best - 1e-15)
                    best = m, best_p = p;
                else if (std::abs(m - current) <= 1e-15)
                    sideways.push_back(p);
            };
            if (is_weight[std::size_t(i)]) {
                for (double v : {-1.0, 0.0, 1.0})
                    if (v != orig) consider(v);
            } else {
                for (double dv : {-1.0, 1.0})
                    if (std::abs(orig + dv) <= 3.0) consider(orig + dv);
            }
            p(i) = orig;
        }
        if (best_p.size()) {
            set_params(net, best_p);
            current = best;
            plateau = 0;
        } else if (!sideways.empty() && plateau < 12) {
            set_params(net, sideways[rng() % sideways.size()]);
            ++plateau;
        } else {
            break;
        }
    }
    return current;
}

}  // namespace detail

// Full training routine for one random start: fit the data with projected LM
// (re-perturbing the weights when the descent stalls), then progressively
// round parameters to integers — nearest first, refitting the remainder after
// each batch — and finally polish the crisp network with discrete moves.
// Succeeds when the crisp network's mse is within `gate`; `result.stalled`
// reports a failed fit phase.
inline TrainResult crystallize_train(Network net, const Dataset& data, const TrainConfig& cfg,
                                     double gate) {
    randomize_params(net, cfg.seed);
    const int P = param_count(net);
    const auto is_weight = weight_mask(net);
    std::vector<bool> frozen(std::size_t(P), false);
    TrainResult result;

    double mu = cfg.mu_init;
    double current = detail::lm_refine(net, data, frozen, is_weight, mu, cfg.max_iters,
                                       cfg.mse_target);
    std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995u);
    std::normal_distribution<double> noise(0.0, 0.15);
    for (int restart = 0; restart < 4 && current > cfg.mse_target; ++restart) {
        Eigen::VectorXd p = get_params(net);
        for (long i = 0; i < p.size(); ++i) p(i) += noise(rng);
        set_params(net, p);
        mu = cfg.mu_init;
        current = detail::lm_refine(net, data, frozen, is_weight, mu, cfg.max_iters / 2,
                                    cfg.mse_target);
    }
    if (current > cfg.mse_target) {
        result.network = std::move(net);
        result.mse = current;
        result.stalled = true;
        return result;
    }

    Network smooth = net;
    int free_count = P;
    while (free_count > 0) {
        Eigen::VectorXd p = get_params(net);
        std::vector<std::pair<double, long>> dist;
        for (long i = 0; i < P; ++i) {
            if (frozen[std::size_t(i)]) continue;
            double t = round_half_away(p(i));
            if (is_weight[std::size_t(i)]) t = std::clamp(t, -1.0, 1.0);
            dist.push_back({std::abs(p(i) - t), i});
        }
        std::sort(dist.begin(), dist.end());
        std::size_t take = std::max<std::size_t>(1, dist.size() / 4);
        while (take < dist.size() && dist[take].first < 0.1) ++take;
        for (std::size_t k = 0; k < take; ++k) {
            long i = dist[k].second;
            double t = round_half_away(p(i));
            if (is_weight[std::size_t(i)]) t = std::clamp(t, -1.0, 1.0);
            p(i) = t;
            frozen[std::size_t(i)] = true;
        }
        set_params(net, p);
        free_count = int(dist.size() - take);
        mu = std::max(mu, 1e-2);
        detail::lm_refine(net, data, frozen, is_weight, mu, 40, cfg.mse_target);
    }

    Network crisp = crisp_crystallize(net);
    double crisp_mse = mse(crisp, data);
    if (crisp_mse > gate) crisp_mse = detail::integer_polish(crisp, data, is_weight, gate, 200, rng);
    if (crisp_mse > gate) {
        Network alt = crisp_crystallize(smooth);
        double alt_mse = detail::integer_polish(alt, data, is_weight, gate, 200, rng);
        if (alt_mse < crisp_mse) {
            crisp = std::move(alt);
            crisp_mse = alt_mse;
        }
    }
    result.network = std::move(crisp);
    result.mse = crisp_mse;
    result.converged = crisp_mse <= gate;
    return result;
}

inline void save_history_csv(const TrainResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "iteration,mse,delta,mu\n";
    for (const auto& rec : result.history)
        out << rec.iteration << ',' << csv::format_number(rec.mse) << ','
            << csv::format_number(rec.delta) << ',' << csv::format_number(rec.mu) << '\n';
}

// Optimal Brain Surgeon: repeatedly deletes the minimum-saliency weight
// (L_q = w_q²/(2[H⁻¹]_qq), H ≈ JᵀJ + εI over the surviving parameters) and
// applies the compensating update δw = −(w_q/[H⁻¹]_qq)·H⁻¹e_q to the rest.
// Stops when the next deletion would push mse above the target budget.
inline Network obs_prune(Network net, const Dataset& data, const TrainConfig& cfg) {
    const int P = param_count(net);
    const auto is_weight = weight_mask(net);
    std::vector<bool> frozen(std::size_t(P), false);
    const double entry = mse(net, data);
    const double budget = std::max(cfg.mse_target, entry);

    while (true) {
        std::vector<long> active;
        for (long i = 0; i < P; ++i)
            if (!frozen[std::size_t(i)]) active.push_back(i);

        Eigen::MatrixXd Jfull = network_jacobian(net, data);
        Eigen::MatrixXd Ja(Jfull.rows(), long(active.size()));
        for (std::size_t c = 0; c < active.size(); ++c) Ja.col(long(c)) = Jfull.col(active[c]);
        Eigen::MatrixXd H = Ja.transpose() * Ja;
        H.diagonal().array() += 1e-8;
        Eigen::MatrixXd Hinv = H.inverse();

        Eigen::VectorXd p = get_params(net);
        long best = -1;
        double best_saliency = 0.0;
        for (std::size_t c = 0; c < active.size(); ++c) {
            if (!is_weight[std::size_t(active[c])]) continue;
            double hqq = Hinv(long(c), long(c));
            if (hqq <= 0.0) continue;
            double s = p(active[c]) * p(active[c]) / (2.0 * hqq);
            if (best < 0 || s < best_saliency) {
                best = long(c);
                best_saliency = s;
            }
        }
        if (best < 0) break;

        Eigen::VectorXd delta = -(p(active[std::size_t(best)]) / Hinv(best, best)) * Hinv.col(best);
        Eigen::VectorXd p_new = p;
        for (std::size_t c = 0; c < active.size(); ++c) p_new(active[c]) += delta(long(c));
        p_new(active[std::size_t(best)]) = 0.0;

        Network cand = net;
        set_params(cand, p_new);
        if (mse(cand, data) > budget) break;
        net = std::move(cand);
        frozen[std::size_t(active[std::size_t(best)])] = true;
    }
    return net;
}

}  // namespace lnn
