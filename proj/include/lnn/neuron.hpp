#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lnn/formula.hpp"
#include "lnn/grid.hpp"

// Neuron configurations ψ_b(w_1 x_1, ..., w_m x_m) with w_i ∈ {−1,0,1} and
// integer bias: classification, translation to formulas, the rewriting rule R,
// decomposition sets S(α), λ-similarity and best representable approximations.

namespace lnn {

struct NeuronConfig {
    std::vector<int> weights;  // each in {-1, 0, 1}
    int bias = 0;
};

enum class NeuronClass { Conjunction, Disjunction, ConstantZero, ConstantOne, Unrepresentable };

inline const char* to_string(NeuronClass c) {
    switch (c) {
        case NeuronClass::Conjunction:     return "conjunction";
        case NeuronClass::Disjunction:     return "disjunction";
        case NeuronClass::ConstantZero:    return "constant-zero";
        case NeuronClass::ConstantOne:     return "constant-one";
        case NeuronClass::Unrepresentable: return "unrepresentable";
    }
    return "?";
}

// Zero weights never influence ψ output and are dropped before counting.
// With n negative and p positive weights: constant 0 iff b <= -p, constant 1
// iff b >= n+1, conjunction iff b = -p+1, disjunction iff b = n.
inline NeuronClass classify_neuron(const NeuronConfig& cfg) {
    int neg = 0, pos = 0;
    for (int w : cfg.weights) {
        if (w < 0) ++neg;
        else if (w > 0) ++pos;
    }
    if (cfg.bias <= -pos) return NeuronClass::ConstantZero;
    if (cfg.bias >= neg + 1) return NeuronClass::ConstantOne;
    if (cfg.bias == -pos + 1) return NeuronClass::Conjunction;
    if (cfg.bias == neg) return NeuronClass::Disjunction;
    return NeuronClass::Unrepresentable;
}

inline bool is_constant(const NeuronConfig& cfg) {
    auto c = classify_neuron(cfg);
    return c == NeuronClass::ConstantZero || c == NeuronClass::ConstantOne;
}

inline bool is_representable(const NeuronConfig& cfg) {
    return classify_neuron(cfg) != NeuronClass::Unrepresentable;
}

inline Valuation config_valuation(const NeuronConfig& cfg) {
    return [cfg](std::span<const double> in) {
        double z = cfg.bias;
        for (std::size_t i = 0; i < cfg.weights.size(); ++i) z += cfg.weights[i] * in[i];
        return std::min(1.0, std::max(0.0, z));
    };
}

// Translates a representable configuration to a formula over the given inputs.
// Literals appear in input order; negative weights negate, zero weights drop.
inline FormulaPtr neuron_to_formula(const NeuronConfig& cfg,
                                    const std::vector<FormulaPtr>& inputs) {
    if (inputs.size() != cfg.weights.size())
        throw std::invalid_argument("neuron_to_formula: input arity mismatch");
    switch (classify_neuron(cfg)) {
        case NeuronClass::ConstantZero: return cnst(0);
        case NeuronClass::ConstantOne:  return cnst(1);
        case NeuronClass::Unrepresentable:
            throw std::invalid_argument("neuron_to_formula: unrepresentable configuration");
        default: break;
    }
    bool conj = classify_neuron(cfg) == NeuronClass::Conjunction;
    FormulaPtr acc;
    for (std::size_t i = 0; i < cfg.weights.size(); ++i) {
        if (cfg.weights[i] == 0) continue;
        FormulaPtr lit = cfg.weights[i] < 0 ? lnot(inputs[i]) : inputs[i];
        if (!acc) acc = std::move(lit);
        else acc = conj ? fusion(std::move(acc), std::move(lit))
                        : strong_disj(std::move(acc), std::move(lit));
    }
    return acc;  // non-constant implies at least one nonzero weight
}

// One application of rule R: input k is peeled into the top binary neuron
// ψ_{top_bias}(w_k x_k, 1·residual) with residual = ψ_{residual.bias}(rest),
// subject to bias = top_bias + residual.bias, top_bias <= residual.bias, and
// neither neuron constant.
struct RSplit {
    int separated_input;   // index into the source config
    int top_bias;          // b1
    NeuronConfig residual; // fan-in m-1, bias b0
};

// Enumerates splits up to permutation of same-signed inputs: for each weight
// sign and admissible (b0, b1) pair one representative is kept, peeling the
// highest input index of that sign (the paper's presentation order).
inline std::vector<RSplit> rule_r_splits(const NeuronConfig& cfg) {
    const int m = int(cfg.weights.size());
    std::vector<RSplit> out;
    std::set<std::tuple<int, int, int>> seen;  // (sign, b0, b1)
    for (int k = m - 1; k >= 0; --k) {
        const int wk = cfg.weights[k];
        if (wk == 0) continue;
        NeuronConfig residual;
        for (int i = 0; i < m; ++i)
            if (i != k) residual.weights.push_back(cfg.weights[i]);
        int rneg = 0, rpos = 0;
        for (int w : residual.weights) (w < 0 ? rneg : rpos) += (w != 0);
        // residual non-constant: b0 in [-rpos+1, rneg]
        for (int b0 = -rpos + 1; b0 <= rneg; ++b0) {
            const int b1 = cfg.bias - b0;
            if (b1 > b0) continue;
            // top neuron weights (wk, +1): non-constant iff b1 in [-p_t+1, n_t]
            const int nt = wk < 0 ? 1 : 0;
            const int pt = wk < 0 ? 1 : 2;
            if (b1 < -pt + 1 || b1 > nt) continue;
            if (!seen.insert({wk, b0, b1}).second) continue;
            residual.bias = b0;
            out.push_back({k, b1, residual});
        }
    }
    return out;
}

struct DecompositionBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kDecompositionCap = 20'000;

namespace detail {

inline FormulaPtr combine_split(int wk, int b1, FormulaPtr lit_k, FormulaPtr sub) {
    NeuronConfig top{{wk, 1}, b1};
    return neuron_to_formula(top, {std::move(lit_k), std::move(sub)});
}

inline std::vector<FormulaPtr> decompose_rec(const NeuronConfig& cfg,
                                             const std::vector<FormulaPtr>& inputs,
                                             int& generated, int cap) {
    // drop zero weights
    NeuronConfig c;
    std::vector<FormulaPtr> ins;
    for (std::size_t i = 0; i < cfg.weights.size(); ++i) {
        if (cfg.weights[i] == 0) continue;
        c.weights.push_back(cfg.weights[i]);
        ins.push_back(inputs[i]);
    }
    c.bias = cfg.bias;

    auto cls = classify_neuron(c);
    if (cls == NeuronClass::ConstantZero) return {cnst(0)};
    if (cls == NeuronClass::ConstantOne) return {cnst(1)};
    if (c.weights.size() <= 2) return {neuron_to_formula(c, ins)};

    std::vector<FormulaPtr> out;
    std::set<std::string> texts;
    for (const auto& split : rule_r_splits(c)) {
        std::vector<FormulaPtr> rest;
        for (std::size_t i = 0; i < ins.size(); ++i)
            if (int(i) != split.separated_input) rest.push_back(ins[i]);
        for (auto& sub : decompose_rec(split.residual, rest, generated, cap)) {
            auto f = combine_split(c.weights[split.separated_input], split.top_bias,
                                   ins[split.separated_input], std::move(sub));
            if (++generated > cap)
                throw DecompositionBudgetError("decomposition budget exceeded");
            if (texts.insert(format_formula(f)).second) out.push_back(std::move(f));
        }
    }
    return out;
}

}  // namespace detail

// S(α): all distinct full binary decompositions reachable by rule R, as
// formulas over the given inputs. Deterministic order (sorted by text).
inline std::vector<FormulaPtr> decomposition_set(const NeuronConfig& cfg,
                                                 const std::vector<FormulaPtr>& inputs,
                                                 int cap = kDecompositionCap) {
    int generated = 0;
    auto out = detail::decompose_rec(cfg, inputs, generated, cap);
    std::sort(out.begin(), out.end(), [](const FormulaPtr& a, const FormulaPtr& b) {
        return format_formula(a) < format_formula(b);
    });
    return out;
}

inline std::vector<FormulaPtr> placeholder_inputs(int m) {
    std::vector<FormulaPtr> v;
    for (int i = 1; i <= m; ++i) v.push_back(var("x" + std::to_string(i)));
    return v;
}

inline std::vector<FormulaPtr> decomposition_set(const NeuronConfig& cfg,
                                                 int cap = kDecompositionCap) {
    return decomposition_set(cfg, placeholder_inputs(int(cfg.weights.size())), cap);
}

// λ = exp(−mean |a−b|) over the full grid S_n^m.
inline double lambda_similarity(const Valuation& a, const Valuation& b, LogicGrain grain, int m) {
    double sum = 0.0;
    std::uint64_t count = 0;
    for_each_grid_point(grain, m, [&](std::span<const double> pt) {
        sum += std::abs(a(pt) - b(pt));
        ++count;
    });
    return std::exp(-sum / double(count));
}

// λ over an explicit case set (rows of input vectors).
inline double lambda_similarity(const Valuation& a, const Valuation& b,
                                const std::vector<std::vector<double>>& cases) {
    if (cases.empty()) throw std::invalid_argument("lambda_similarity: empty case set");
    double sum = 0.0;
    for (const auto& row : cases) sum += std::abs(a(row) - b(row));
    return std::exp(-sum / double(cases.size()));
}

inline int count_negations(const FormulaPtr& f) {
    switch (f->kind) {
        case Conn::Var:
        case Conn::Const: return 0;
        case Conn::Not:   return 1 + count_negations(f->left);
        default:          return count_negations(f->left) + count_negations(f->right);
    }
}

struct Approximation {
    FormulaPtr formula;  // over placeholder inputs x1..xm
    double lambda;
};

namespace detail {

// Greedy fallback when S(α) exceeds the cap: pick the best-λ split at each
// level and recurse into its residual only.
inline FormulaPtr greedy_decompose(const NeuronConfig& cfg,
                                   const std::vector<FormulaPtr>& inputs,
                                   const std::vector<std::vector<double>>& cases) {
    NeuronConfig c;
    std::vector<FormulaPtr> ins;
    std::vector<int> keep;
    for (std::size_t i = 0; i < cfg.weights.size(); ++i) {
        if (cfg.weights[i] == 0) continue;
        c.weights.push_back(cfg.weights[i]);
        ins.push_back(inputs[i]);
        keep.push_back(int(i));
    }
    c.bias = cfg.bias;
    auto cls = classify_neuron(c);
    if (cls == NeuronClass::ConstantZero) return cnst(0);
    if (cls == NeuronClass::ConstantOne) return cnst(1);
    if (c.weights.size() <= 2) return neuron_to_formula(c, ins);

    std::vector<std::vector<double>> full_cases;  // re-indexed to c's inputs
    for (const auto& r : cases) {
        std::vector<double> pr;
        for (int i : keep) pr.push_back(r[i]);
        full_cases.push_back(std::move(pr));
    }

    double best = -1.0;
    std::optional<RSplit> best_split;
    for (const auto& split : rule_r_splits(c)) {
        int k = split.separated_input;
        int wk = c.weights[k];
        NeuronConfig res = split.residual;
        Valuation approx = [&, k, wk, b1 = split.top_bias](std::span<const double> in) {
            double z = res.bias;
            std::size_t j = 0;
            for (std::size_t i = 0; i < in.size(); ++i)
                if (int(i) != k) z += res.weights[j++] * in[i];
            double sub = std::min(1.0, std::max(0.0, z));
            return std::min(1.0, std::max(0.0, wk * in[k] + sub + b1));
        };
        double lam = 0.0;
        {
            double sum = 0.0;
            for (const auto& r : full_cases) sum += std::abs(config_valuation(c)(r) - approx(r));
            lam = std::exp(-sum / double(full_cases.size()));
        }
        if (lam > best) {
            best = lam;
            best_split = split;
        }
    }
    if (!best_split) throw std::runtime_error("no admissible rule-R split");
    int k = best_split->separated_input;
    std::vector<FormulaPtr> rest;
    for (std::size_t i = 0; i < ins.size(); ++i)
        if (int(i) != k) rest.push_back(ins[i]);
    // residual cases: drop the separated coordinate
    std::vector<std::vector<double>> sub_cases;
    for (auto& r : full_cases) {
        std::vector<double> pr;
        for (std::size_t i = 0; i < r.size(); ++i)
            if (int(i) != k) pr.push_back(r[i]);
        sub_cases.push_back(std::move(pr));
    }
    auto sub = greedy_decompose(best_split->residual, rest, sub_cases);
    return combine_split(c.weights[k], best_split->top_bias, ins[k], std::move(sub));
}

}  // namespace detail

// Member of S(cfg) maximizing λ against cfg on the case set. Ties break by
// fewer negated literals, then lexicographic formula text.
inline Approximation best_approximation(const NeuronConfig& cfg,
                                        const std::vector<std::vector<double>>& cases,
                                        int cap = kDecompositionCap) {
    const int m = int(cfg.weights.size());
    auto inputs = placeholder_inputs(m);
    auto target = config_valuation(cfg);
    std::vector<std::string> order;
    for (const auto& in : inputs) order.push_back(in->name);

    std::vector<FormulaPtr> candidates;
    try {
        candidates = decomposition_set(cfg, inputs, cap);
    } catch (const DecompositionBudgetError&) {
        candidates = {detail::greedy_decompose(cfg, inputs, cases)};
    }
    if (candidates.empty()) throw std::invalid_argument("best_approximation: empty S(cfg)");

    FormulaPtr best;
    double best_lambda = -1.0;
    int best_negs = 0;
    std::string best_text;
    for (auto& cand : candidates) {
        auto val = formula_valuation(cand, order);
        double lam = lambda_similarity(target, val, cases);
        int negs = count_negations(cand);
        std::string text = format_formula(cand);
        bool better = lam > best_lambda + 1e-12 ||
                      (lam > best_lambda - 1e-12 &&
                       (negs < best_negs || (negs == best_negs && text < best_text)));
        if (!best || better) {
            best = cand;
            best_lambda = lam;
            best_negs = negs;
            best_text = std::move(text);
        }
    }
    return {best, best_lambda};
}

// Grid-based overload: cases = all of S_n^m.
inline Approximation best_approximation(const NeuronConfig& cfg, LogicGrain grain,
                                        int cap = kDecompositionCap) {
    std::vector<std::vector<double>> cases;
    for_each_grid_point(grain, int(cfg.weights.size()), [&](std::span<const double> pt) {
        cases.emplace_back(pt.begin(), pt.end());
    });
    return best_approximation(cfg, cases, cap);
}

}  // namespace lnn
