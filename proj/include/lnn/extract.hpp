#pragma once

#include <nlohmann/json.hpp>
#include <optional>

#include "lnn/dataset.hpp"
#include "lnn/network.hpp"
#include "lnn/neuron.hpp"

// Network → formula extraction: bottom-up per-neuron translation of a
// crystallized network, with λ-similar approximations for un-representable
// neurons.

namespace lnn {

enum class NeuronStatus { Representable, Approximated, Constant, Elided };

inline const char* to_string(NeuronStatus s) {
    switch (s) {
        case NeuronStatus::Representable: return "representable";
        case NeuronStatus::Approximated:  return "approximated";
        case NeuronStatus::Constant:      return "constant";
        case NeuronStatus::Elided:        return "elided";
    }
    return "?";
}

struct NeuronReport {
    int layer;
    int unit;
    NeuronStatus status;
    double lambda;  // 1 unless approximated
};

struct ExtractionReport {
    FormulaPtr formula;
    std::string formula_text;
    std::vector<NeuronReport> neurons;
    double lambda = 1.0;             // net vs formula over the case set
    double mse = 0.0;                // formula vs targets (when present)
    double accuracy = 0.0;           // grid-rounded match rate (when present)
    bool has_targets = false;
};

namespace detail {

inline FormulaPtr substitute(const FormulaPtr& f,
                             const std::map<std::string, FormulaPtr>& env) {
    switch (f->kind) {
        case Conn::Var: {
            auto it = env.find(f->name);
            if (it == env.end()) throw EvalError("unbound placeholder: " + f->name);
            return it->second;
        }
        case Conn::Const: return f;
        case Conn::Not:   return lnot(substitute(f->left, env));
        default:          return binary(f->kind, substitute(f->left, env),
                                        substitute(f->right, env));
    }
}

}  // namespace detail

inline double round_to_grid(double v, int n) { return std::round(v * n) / n; }

// Per-neuron translation over the given case set. Representable neurons
// translate exactly; un-representable ones are replaced by their best
// λ-similar decomposition evaluated on the cases seen at that neuron's
// inputs; dead units (constant or never consumed) are elided.
inline ExtractionReport extract_formula(const Network& net,
                                        const std::vector<std::vector<double>>& cases,
                                        const std::optional<Eigen::VectorXd>& targets = {},
                                        int decomposition_cap = kDecompositionCap) {
    if (!net.crystallized)
        throw std::invalid_argument("extract_formula: network is not crystallized");
    if (cases.empty()) throw std::invalid_argument("extract_formula: empty case set");
    const std::size_t L = net.layers.size();

    // liveness: a unit is alive when some alive consumer has a nonzero weight on it
    std::vector<std::vector<bool>> alive(L);
    for (std::size_t l = 0; l < L; ++l)
        alive[l].assign(std::size_t(net.layers[l].weights.rows()), false);
    alive[L - 1][0] = true;
    for (std::size_t l = L; l-- > 1;) {
        const auto& W = net.layers[l].weights;
        for (long u = 0; u < W.rows(); ++u) {
            if (!alive[l][std::size_t(u)]) continue;
            for (long c = 0; c < W.cols(); ++c)
                if (W(u, c) != 0.0) alive[l - 1][std::size_t(c)] = true;
        }
    }

    // activations per layer over the case set
    const long N = long(cases.size());
    std::vector<Eigen::MatrixXd> acts(L + 1);
    acts[0].resize(N, net.input_count());
    for (long r = 0; r < N; ++r)
        for (int c = 0; c < net.input_count(); ++c) acts[0](r, c) = cases[std::size_t(r)][std::size_t(c)];
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd z = acts[l] * net.layers[l].weights.transpose();
        z.rowwise() += net.layers[l].biases.transpose();
        acts[l + 1] = z.unaryExpr([](double v) { return psi(v); });
    }

    ExtractionReport report;
    std::vector<FormulaPtr> prev_formulas;
    for (const auto& name : net.input_names) prev_formulas.push_back(var(name));

    for (std::size_t l = 0; l < L; ++l) {
        const auto& layer = net.layers[l];
        std::vector<FormulaPtr> formulas(std::size_t(layer.weights.rows()));
        for (long u = 0; u < layer.weights.rows(); ++u) {
            if (!alive[l][std::size_t(u)]) {
                report.neurons.push_back({int(l), int(u), NeuronStatus::Elided, 1.0});
                continue;
            }
            // fold constant inputs into the bias, drop zero weights
            NeuronConfig cfg;
            std::vector<FormulaPtr> ins;
            std::vector<long> in_cols;
            int bias = int(std::llround(layer.biases(u)));
            for (long c = 0; c < layer.weights.cols(); ++c) {
                int w = int(std::llround(layer.weights(u, c)));
                if (w == 0) continue;
                const FormulaPtr& in = prev_formulas[std::size_t(c)];
                if (in->kind == Conn::Const) {
                    bias += w * in->value;
                    continue;
                }
                cfg.weights.push_back(w);
                ins.push_back(in);
                in_cols.push_back(c);
            }
            cfg.bias = bias;

            auto cls = classify_neuron(cfg);
            if (cfg.weights.empty() || cls == NeuronClass::ConstantZero ||
                cls == NeuronClass::ConstantOne) {
                int v = cfg.weights.empty() ? (bias >= 1 ? 1 : 0)
                                            : (cls == NeuronClass::ConstantOne ? 1 : 0);
                formulas[std::size_t(u)] = cnst(v);
                report.neurons.push_back({int(l), int(u), NeuronStatus::Constant, 1.0});
            } else if (cls != NeuronClass::Unrepresentable) {
                formulas[std::size_t(u)] = neuron_to_formula(cfg, ins);
                report.neurons.push_back({int(l), int(u), NeuronStatus::Representable, 1.0});
            } else {
                std::vector<std::vector<double>> neuron_cases(static_cast<std::size_t>(N));
                for (long r = 0; r < N; ++r)
                    for (long c : in_cols)
                        neuron_cases[std::size_t(r)].push_back(acts[l](r, c));
                auto approx = best_approximation(cfg, neuron_cases, decomposition_cap);
                std::map<std::string, FormulaPtr> env;
                for (std::size_t i = 0; i < ins.size(); ++i)
                    env["x" + std::to_string(i + 1)] = ins[i];
                formulas[std::size_t(u)] = detail::substitute(approx.formula, env);
                report.neurons.push_back({int(l), int(u), NeuronStatus::Approximated,
                                          approx.lambda});
            }
        }
        prev_formulas = std::move(formulas);
    }

    report.formula = prev_formulas[0];
    report.formula_text = format_formula(report.formula);

    auto net_val = network_valuation(net);
    auto formula_val = formula_valuation(report.formula, net.input_names);
    report.lambda = lambda_similarity(net_val, formula_val, cases);

    if (targets) {
        report.has_targets = true;
        double acc = 0.0, err = 0.0;
        for (long r = 0; r < N; ++r) {
            double pred = formula_val(cases[std::size_t(r)]);
            double t = (*targets)(r);
            err += (t - pred) * (t - pred);
            if (round_to_grid(pred, net.grain) == round_to_grid(t, net.grain)) acc += 1.0;
        }
        report.mse = err / double(N);
        report.accuracy = acc / double(N);
    }
    return report;
}

inline ExtractionReport extract_formula(const Network& net, const Dataset& data,
                                        int decomposition_cap = kDecompositionCap) {
    return extract_formula(net, data.input_rows(), data.targets, decomposition_cap);
}

inline nlohmann::json to_json(const ExtractionReport& report) {
    nlohmann::json neurons = nlohmann::json::array();
    for (const auto& n : report.neurons) {
        nlohmann::json entry{{"layer", n.layer}, {"unit", n.unit},
                             {"status", to_string(n.status)}};
        if (n.status == NeuronStatus::Approximated) entry["lambda"] = n.lambda;
        neurons.push_back(std::move(entry));
    }
    nlohmann::json j{{"formula", report.formula_text},
                     {"neurons", std::move(neurons)},
                     {"lambda", report.lambda}};
    if (report.has_targets) {
        j["mse"] = report.mse;
        j["accuracy"] = report.accuracy;
    }
    return j;
}

}  // namespace lnn
