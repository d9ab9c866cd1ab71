#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lnn/extract.hpp"
#include "lnn/compile.hpp"

using namespace lnn;

namespace {

bool equiv_s1(const FormulaPtr& a, const FormulaPtr& b, const std::vector<std::string>& order) {
    return grid_equivalent(formula_valuation(a, order), formula_valuation(b, order),
                           LogicGrain(1), int(order.size()))
        .equivalent;
}

// α = ψ_0(−x1, x2, −x3, x4, −x5), the five-input un-representable example.
const NeuronConfig kAlpha5{{-1, 1, -1, 1, -1}, 0};

// Nested right-comb approximations to kAlpha5 (peel order, then bias chain
// outermost→innermost). Frozen against a brute-force oracle.
double beta1(std::span<const double> x) {
    return psi(0 - x[4] + psi(0 + x[3] + psi(0 - x[2] + psi(0 + x[1] - x[0]))));
}
double beta2(std::span<const double> x) {
    return psi(-1 + x[3] + psi(-1 + x[1] + psi(0 - x[4] + psi(2 - x[2] - x[0]))));
}
double beta3(std::span<const double> x) {
    return psi(0 + x[3] + psi(1 - x[4] + psi(-1 + x[1] + psi(2 - x[2] - x[0]))));
}
double beta4(std::span<const double> x) {
    return psi(0 + x[3] + psi(-1 + x[1] + psi(1 - x[4] + psi(2 - x[2] - x[0]))));
}

// Same peel orders with bias chains that telescope to α's bias 0; these are
// genuine rule-R chains (β3/β4 above trade membership for closer similarity).
double beta3_chain(std::span<const double> x) {
    return psi(-1 + x[3] + psi(0 - x[4] + psi(0 + x[1] + psi(1 - x[2] - x[0]))));
}
double beta4_chain(std::span<const double> x) {
    return psi(-1 + x[3] + psi(0 + x[1] + psi(0 - x[4] + psi(1 - x[2] - x[0]))));
}

}  // namespace

TEST_CASE("classification examples") {
    CHECK(classify_neuron({{-1, 1}, 1}) == NeuronClass::Disjunction);   // x⇒y
    CHECK(classify_neuron({{1, 1}, -1}) == NeuronClass::Conjunction);   // x⊗y
    CHECK(classify_neuron({{1, 1}, 0}) == NeuronClass::Disjunction);    // x⊕y
    CHECK(classify_neuron({{-1, -1}, 2}) == NeuronClass::Disjunction);  // ¬x⊕¬y
    CHECK(classify_neuron({{-1, -1}, 1}) == NeuronClass::Conjunction);  // ¬x⊗¬y
    CHECK(classify_neuron({{-1, -1}, 3}) == NeuronClass::ConstantOne);  // b ≥ n+1
    CHECK(classify_neuron({{1, 1}, -2}) == NeuronClass::ConstantZero);  // b ≤ −p
    CHECK(classify_neuron({{1, 1}, 2}) == NeuronClass::ConstantOne);
    CHECK(classify_neuron({{-1, 1, -1, 1, -1}, 0}) == NeuronClass::Unrepresentable);
    // fan-in 1: conjunction takes precedence over disjunction
    CHECK(classify_neuron({{1}, 0}) == NeuronClass::Conjunction);
    // zero weights are dropped before counting
    CHECK(classify_neuron({{0, 1}, 0}) == classify_neuron({{1}, 0}));
    CHECK(classify_neuron({{0, 0}, 0}) == NeuronClass::ConstantZero);
    CHECK(classify_neuron({{0, 0}, 1}) == NeuronClass::ConstantOne);
}

TEST_CASE("neuron_to_formula examples") {
    auto xs = placeholder_inputs(2);
    CHECK(format_formula(neuron_to_formula({{-1, 1}, 1}, xs)) == "~x1 | x2");
    CHECK(format_formula(neuron_to_formula({{1, 1}, -1}, xs)) == "x1 & x2");
    CHECK(format_formula(neuron_to_formula({{1, 1}, -2}, xs)) == "0");
    auto seven = placeholder_inputs(7);
    CHECK(format_formula(neuron_to_formula({{0, 1, 0, 1, 0, 0, -1}, -1}, seven)) ==
          "x2 & x4 & ~x7");
    CHECK_THROWS_AS(neuron_to_formula(kAlpha5, placeholder_inputs(5)), std::invalid_argument);
    CHECK_THROWS_AS(neuron_to_formula({{1, 1}, -1}, placeholder_inputs(3)),
                    std::invalid_argument);
}

TEST_CASE("Table 1: binary neurons translate exactly") {
    // all nonzero sign patterns of fan-in ≤ 2 with admissible biases
    std::vector<std::vector<int>> patterns{{1},    {-1},    {1, 1}, {1, -1},
                                           {-1, 1}, {-1, -1}, {1, 0}, {0, -1}};
    int checked = 0;
    for (const auto& w : patterns) {
        for (int b = -3; b <= 3; ++b) {
            NeuronConfig cfg{w, b};
            if (classify_neuron(cfg) == NeuronClass::Unrepresentable) continue;
            auto f = neuron_to_formula(cfg, placeholder_inputs(int(w.size())));
            std::vector<std::string> order;
            for (std::size_t i = 1; i <= w.size(); ++i) order.push_back("x" + std::to_string(i));
            for (int n = 1; n <= 4; ++n)
                CHECK(grid_equivalent(config_valuation(cfg), formula_valuation(f, order),
                                      LogicGrain(n), int(w.size()))
                          .equivalent);
            ++checked;
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("classification soundness, exhaustive sign patterns m<=4") {
    std::vector<int> signs{-1, 0, 1};
    for (int m = 1; m <= 4; ++m) {
        std::vector<int> w(std::size_t(m), -1);
        while (true) {
            for (int b = -m - 1; b <= m + 1; ++b) {
                NeuronConfig cfg{w, b};
                auto cls = classify_neuron(cfg);
                if (cls == NeuronClass::Unrepresentable) continue;
                auto f = neuron_to_formula(cfg, placeholder_inputs(m));
                std::vector<std::string> order;
                for (int i = 1; i <= m; ++i) order.push_back("x" + std::to_string(i));
                CHECK(grid_equivalent(config_valuation(cfg), formula_valuation(f, order),
                                      LogicGrain(2), m)
                          .equivalent);
            }
            int i = m - 1;
            for (; i >= 0; --i) {
                if (w[std::size_t(i)] < 1) { ++w[std::size_t(i)]; break; }
                w[std::size_t(i)] = -1;
            }
            if (i < 0) break;
        }
    }
}

TEST_CASE("rule R split counts") {
    CHECK(rule_r_splits({{-1, 1, 1}, 0}).size() == 3);
    CHECK(rule_r_splits({{-1, -1, 1}, 2}).size() == 2);
    // conjunction ψ_{-2}(x1,x2,x3) admits the (b0,b1)=(-1,-1) split
    bool found = false;
    for (const auto& s : rule_r_splits({{1, 1, 1}, -2}))
        if (s.top_bias == -1 && s.residual.bias == -1) found = true;
    CHECK(found);
}

TEST_CASE("decomposition sets: worked examples") {
    auto order3 = std::vector<std::string>{"x1", "x2", "x3"};

    auto s1 = decomposition_set({{-1, 1, 1}, 0});
    REQUIRE(s1.size() == 3);
    // pairwise non-equivalent on S_1 (the source is un-representable)
    for (std::size_t i = 0; i < s1.size(); ++i)
        for (std::size_t j = i + 1; j < s1.size(); ++j)
            CHECK_FALSE(equiv_s1(s1[i], s1[j], order3));
    // each is λ = e^{−1/8} similar to the source at n=1
    for (const auto& f : s1) {
        double lam = lambda_similarity(config_valuation({{-1, 1, 1}, 0}),
                                       formula_valuation(f, order3), LogicGrain(1), 3);
        CHECK(lam == doctest::Approx(std::exp(-1.0 / 8.0)).epsilon(1e-9));
    }

    auto s2 = decomposition_set({{-1, -1, 1}, 2});
    REQUIRE(s2.size() == 2);
    CHECK(equiv_s1(s2[0], s2[1], order3));  // representable source: all equivalent

    // fan-in ≤ 2 and constants are their own decomposition
    auto s3 = decomposition_set({{1, 1}, -1});
    REQUIRE(s3.size() == 1);
    CHECK(format_formula(s3[0]) == "x1 & x2");
    auto s4 = decomposition_set({{1, 1, 1}, 3});
    REQUIRE(s4.size() == 1);
    CHECK(format_formula(s4[0]) == "1");
}

TEST_CASE("rule R soundness on representable configurations") {
    std::vector<NeuronConfig> cfgs{{{1, 1, 1}, -2}, {{1, 1, 1}, 0},  {{-1, 1, 1}, 1},
                                   {{-1, -1, 1}, -1}, {{1, -1, 1, -1}, 2}};
    for (const auto& cfg : cfgs) {
        if (classify_neuron(cfg) == NeuronClass::Unrepresentable) continue;
        std::vector<std::string> order;
        for (std::size_t i = 1; i <= cfg.weights.size(); ++i)
            order.push_back("x" + std::to_string(i));
        for (const auto& f : decomposition_set(cfg))
            CHECK(grid_equivalent(config_valuation(cfg), formula_valuation(f, order),
                                  LogicGrain(2), int(cfg.weights.size()))
                      .equivalent);
    }
}

TEST_CASE("lambda similarity") {
    auto a = config_valuation({{-1, 1, 1}, 0});
    CHECK(lambda_similarity(a, a, LogicGrain(1), 3) == doctest::Approx(1.0));
    // nested ψ_0(x3, ψ_0(−x1,x2)) differs in 1 of 8 Boolean cases
    Valuation nested = [](std::span<const double> x) {
        return psi(0 + x[2] + psi(0 - x[0] + x[1]));
    };
    CHECK(lambda_similarity(a, nested, LogicGrain(1), 3) ==
          doctest::Approx(std::exp(-1.0 / 8.0)).epsilon(1e-9));
    // β-family against α, Boolean 32-case oracle
    auto alpha = config_valuation(kAlpha5);
    CHECK(lambda_similarity(alpha, beta1, LogicGrain(1), 5) ==
          doctest::Approx(std::exp(-5.0 / 32.0)).epsilon(1e-9));
    CHECK(lambda_similarity(alpha, beta2, LogicGrain(1), 5) ==
          doctest::Approx(std::exp(-3.0 / 32.0)).epsilon(1e-9));
    CHECK(lambda_similarity(alpha, beta3, LogicGrain(1), 5) ==
          doctest::Approx(std::exp(-21.0 / 32.0)).epsilon(1e-9));
    CHECK(lambda_similarity(alpha, beta4, LogicGrain(1), 5) ==
          doctest::Approx(std::exp(-17.0 / 32.0)).epsilon(1e-9));
    CHECK_THROWS_AS(lambda_similarity(a, a, std::vector<std::vector<double>>{}),
                    std::invalid_argument);
}

TEST_CASE("beta approximations are members of S(alpha)") {
    auto order = std::vector<std::string>{"x1", "x2", "x3", "x4", "x5"};
    auto members = decomposition_set(kAlpha5);
    auto contains = [&](const Valuation& beta) {
        for (const auto& f : members)
            if (grid_equivalent(formula_valuation(f, order), beta, LogicGrain(1), 5).equivalent)
                return true;
        return false;
    };
    CHECK(contains(beta1));
    CHECK(contains(beta2));
    CHECK(contains(beta3_chain));
    CHECK(contains(beta4_chain));
}

TEST_CASE("best approximation") {
    // representable source: itself, λ=1
    auto r = best_approximation({{1, 1}, -1}, LogicGrain(1));
    CHECK(r.lambda == doctest::Approx(1.0));
    CHECK(format_formula(r.formula) == "x1 & x2");

    // α (5 inputs): best member matches β2's valuation with λ = e^{−3/32}
    auto a5 = best_approximation(kAlpha5, LogicGrain(1));
    CHECK(a5.lambda == doctest::Approx(std::exp(-3.0 / 32.0)).epsilon(1e-9));
    auto order = std::vector<std::string>{"x1", "x2", "x3", "x4", "x5"};
    CHECK(grid_equivalent(formula_valuation(a5.formula, order), beta2, LogicGrain(1), 5)
              .equivalent);

    // three-way λ tie: fewest negations, then lexicographic formula text
    auto a3 = best_approximation({{-1, 1, 1}, 0}, LogicGrain(1));
    CHECK(a3.lambda == doctest::Approx(std::exp(-1.0 / 8.0)).epsilon(1e-9));
    CHECK(format_formula(a3.formula) == "x3 & (~x1 | x2)");
}

TEST_CASE("extraction from crystallized networks") {
    // compiled formulas round-trip with λ = 1
    auto f = parse_formula("(a & b -> c) & (c -> a)");
    auto net = compile(f);
    std::vector<std::vector<double>> cases;
    for_each_grid_point(LogicGrain(2), 3, [&](std::span<const double> pt) {
        cases.emplace_back(pt.begin(), pt.end());
    });
    auto rep = extract_formula(net, cases);
    CHECK(rep.lambda == doctest::Approx(1.0));
    CHECK(grid_equivalent(formula_valuation(f, {"a", "b", "c"}),
                          formula_valuation(rep.formula, {"a", "b", "c"}), LogicGrain(2), 3)
              .equivalent);
    for (const auto& n : rep.neurons) CHECK(n.status != NeuronStatus::Approximated);

    // un-crystallized network is rejected
    Network loose = net;
    loose.crystallized = false;
    CHECK_THROWS_AS(extract_formula(loose, cases), std::invalid_argument);

    // a network with an un-representable neuron reports the approximation λ
    Network odd;
    odd.input_names = {"x1", "x2", "x3", "x4", "x5"};
    Layer layer;
    layer.weights = Eigen::MatrixXd(1, 5);
    layer.weights << -1, 1, -1, 1, -1;
    layer.biases = Eigen::VectorXd::Zero(1);
    odd.layers.push_back(layer);
    odd.crystallized = true;
    std::vector<std::vector<double>> cases5;
    for_each_grid_point(LogicGrain(1), 5, [&](std::span<const double> pt) {
        cases5.emplace_back(pt.begin(), pt.end());
    });
    auto rep5 = extract_formula(odd, cases5);
    bool approximated = false;
    for (const auto& n : rep5.neurons)
        if (n.status == NeuronStatus::Approximated) {
            approximated = true;
            CHECK(n.lambda == doctest::Approx(std::exp(-3.0 / 32.0)).epsilon(1e-9));
        }
    CHECK(approximated);
    CHECK(rep5.lambda == doctest::Approx(std::exp(-3.0 / 32.0)).epsilon(1e-9));
}

TEST_CASE("extraction accuracy and mse against targets") {
    auto f = parse_formula("a & b");
    auto net = compile(f);
    std::vector<std::vector<double>> cases{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    Eigen::VectorXd targets(4);
    targets << 0, 0, 0, 1;
    auto rep = extract_formula(net, cases, targets);
    CHECK(rep.has_targets);
    CHECK(rep.mse == doctest::Approx(0.0));
    CHECK(rep.accuracy == doctest::Approx(1.0));
    // flip one target: 3/4 accuracy, mse 0.25
    targets(3) = 0;
    auto rep2 = extract_formula(net, cases, targets);
    CHECK(rep2.accuracy == doctest::Approx(0.75));
    CHECK(rep2.mse == doctest::Approx(0.25));
}
