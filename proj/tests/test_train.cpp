#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "lnn/compile.hpp"
#include "lnn/extract.hpp"
#include "lnn/ingest.hpp"
#include "lnn/train.hpp"

using namespace lnn;

namespace {

Network topology(const std::vector<std::string>& names, const std::vector<int>& widths) {
    Network net;
    net.input_names = names;
    long prev = long(names.size());
    for (int w : widths) {
        net.layers.push_back({Eigen::MatrixXd::Zero(w, prev), Eigen::VectorXd::Zero(w)});
        prev = w;
    }
    return net;
}

Dataset boolean_conj_table() {
    return generate_table(parse_formula("x & y"), LogicGrain(1));
}

}  // namespace

TEST_CASE("mse examples") {
    auto data = boolean_conj_table();
    auto net = compile(parse_formula("x & y"));
    CHECK(mse(net, data) == doctest::Approx(0.0));
    // constant-0 network: one of four cases off by 1
    Network zero = topology({"x", "y"}, {1});
    CHECK(mse(zero, data) == doctest::Approx(0.25));
}

TEST_CASE("jacobian on a single unsaturated neuron") {
    // residual e = t − ψ(w1 x1 + w2 x2 + b); interior pre-activation
    auto net = compile(parse_formula("x & y"));
    Dataset data;
    data.column_names = {"x", "y"};
    data.inputs.resize(1, 2);
    data.inputs << 0.6, 0.7;
    data.targets.resize(1);
    data.targets << 1.0;
    auto J = network_jacobian(net, data);
    REQUIRE(J.rows() == 1);
    REQUIRE(J.cols() == 3);
    CHECK(J(0, 0) == doctest::Approx(-0.6));
    CHECK(J(0, 1) == doctest::Approx(-0.7));
    CHECK(J(0, 2) == doctest::Approx(-1.0));
}

TEST_CASE("jacobian vanishes at saturation") {
    auto net = compile(parse_formula("x | y"));  // ψ(x+y), saturates above 1
    Dataset data;
    data.column_names = {"x", "y"};
    data.inputs.resize(1, 2);
    data.inputs << 0.9, 0.8;  // pre-activation 1.7
    data.targets.resize(1);
    data.targets << 1.0;
    auto J = network_jacobian(net, data);
    CHECK(J.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("jacobian matches central finite differences") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> wdist(-0.45, 0.45);
    std::uniform_real_distribution<double> xdist(0.1, 0.9);
    int checked = 0;
    for (int trial = 0; trial < 500 && checked < 120; ++trial) {
        Network net = topology({"a", "b", "c"}, {2, 1});
        Eigen::VectorXd p(param_count(net));
        for (long i = 0; i < p.size(); ++i) p(i) = wdist(rng);
        // small positive biases keep pre-activations interior
        set_params(net, p);
        for (auto& layer : net.layers) layer.biases.array() += 0.3;

        Dataset data;
        data.column_names = {"a", "b", "c"};
        data.inputs.resize(1, 3);
        data.inputs << xdist(rng), xdist(rng), xdist(rng);
        data.targets.resize(1);
        data.targets << xdist(rng);

        // skip cases near the kinks of ψ
        bool interior = true;
        Eigen::VectorXd a = data.inputs.row(0).transpose();
        for (const auto& layer : net.layers) {
            Eigen::VectorXd z = layer.weights * a + layer.biases;
            for (long i = 0; i < z.size(); ++i)
                if (z(i) < 0.02 || z(i) > 0.98) interior = false;
            a = z.unaryExpr([](double v) { return psi(v); });
        }
        if (!interior) continue;

        auto J = network_jacobian(net, data);
        Eigen::VectorXd p0 = get_params(net);
        const double eps = 1e-6;
        for (long i = 0; i < p0.size(); ++i) {
            Network plus = net, minus = net;
            Eigen::VectorXd pp = p0, pm = p0;
            pp(i) += eps;
            pm(i) -= eps;
            set_params(plus, pp);
            set_params(minus, pm);
            double fd = (residuals(plus, data)(0) - residuals(minus, data)(0)) / (2 * eps);
            double an = J(0, i);
            double denom = std::max(1.0, std::abs(fd));
            CHECK(std::abs(an - fd) / denom < 1e-5);
        }
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("lm_step accept/reject semantics") {
    auto data = boolean_conj_table();
    Network net = topology({"x", "y"}, {1});
    randomize_params(net, 3);
    double before = mse(net, data);
    auto step = lm_step(net, data, 0.01, 2);
    if (step.accepted) {
        CHECK(step.mse < before);
        CHECK(step.mu == doctest::Approx(0.001));
    } else {
        CHECK(step.mse == doctest::Approx(before));
        CHECK(step.mu == doctest::Approx(0.1));
        CHECK(get_params(step.network) == get_params(net));
    }
    // μ clamps
    auto clamped = lm_step(net, data, 1e12, 2);
    CHECK(clamped.mu <= 1e12);
}

TEST_CASE("lm_train learns the Boolean conjunction") {
    auto data = boolean_conj_table();
    TrainConfig cfg;
    cfg.mse_target = 1e-4;
    cfg.max_iters = 400;
    bool solved = false;
    for (std::uint64_t seed = 0; seed < 8 && !solved; ++seed) {
        cfg.seed = seed;
        auto result = lm_train(topology({"x", "y"}, {1}), data, cfg);
        if (!result.converged) continue;
        auto crisp = crisp_crystallize(result.network);
        if (mse(crisp, data) < 1e-9) solved = true;
    }
    CHECK(solved);
}

TEST_CASE("accepted-step mse decreases monotonically") {
    auto data = generate_table(parse_formula("(x -> y) & (y -> x)"), LogicGrain(2));
    TrainConfig cfg;
    cfg.seed = 1;
    cfg.max_iters = 120;
    cfg.mse_target = 1e-9;
    auto result = lm_train(topology({"x", "y"}, {2, 1}), data, cfg);
    double last = std::numeric_limits<double>::infinity();
    for (const auto& rec : result.history) {
        CHECK(rec.mse <= last + 1e-15);
        last = rec.mse;
    }
    CHECK(result.iterations == int(result.history.size()));
}

TEST_CASE("training history serializes") {
    auto data = boolean_conj_table();
    TrainConfig cfg;
    cfg.seed = 2;
    cfg.max_iters = 10;
    auto result = lm_train(topology({"x", "y"}, {1}), data, cfg);
    auto path = std::filesystem::temp_directory_path() / "lnn_history.csv";
    save_history_csv(result, path.string());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "iteration,mse,delta,mu");
    std::filesystem::remove(path);
}

TEST_CASE("obs prunes zero weights for free") {
    auto net = compile(parse_formula("x & y"));
    // add a dead third input with zero weight
    Network padded = topology({"x", "y", "z"}, {1});
    padded.layers[0].weights << 1, 1, 0;
    padded.layers[0].biases << -1;
    auto data = generate_table(parse_formula("(x & y) | (z & ~z)"), LogicGrain(1));
    REQUIRE(data.cols() == 3);
    double before = mse(padded, data);
    TrainConfig cfg;
    cfg.mse_target = before + 1e-12;
    auto pruned = obs_prune(padded, data, cfg);
    CHECK(std::abs(mse(pruned, data) - before) < 1e-12);
    CHECK(pruned.layers[0].weights(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("obs saliency order matches delete-and-measure oracle") {
    // single neuron, 3 weights + bias: prune order by true mse impact
    Network net = topology({"a", "b", "c"}, {1});
    net.layers[0].weights << 0.9, 0.4, 0.05;
    net.layers[0].biases << 0.1;
    Dataset data;
    data.column_names = {"a", "b", "c"};
    data.inputs.resize(6, 3);
    data.inputs << 0.1, 0.2, 0.3,
                   0.4, 0.3, 0.2,
                   0.2, 0.5, 0.1,
                   0.3, 0.1, 0.4,
                   0.5, 0.2, 0.2,
                   0.2, 0.4, 0.5;
    data.targets.resize(6);
    for (long r = 0; r < 6; ++r)
        data.targets(r) = psi(0.9 * data.inputs(r, 0) + 0.4 * data.inputs(r, 1) + 0.1);

    // delete-and-measure: zeroing w3 is free, w2 hurts, w1 hurts most
    auto probe = [&](long col) {
        Network c = net;
        c.layers[0].weights(0, col) = 0.0;
        return mse(c, data);
    };
    REQUIRE(probe(2) < probe(1));
    REQUIRE(probe(1) < probe(0));

    TrainConfig cfg;
    cfg.mse_target = probe(1) * 0.5;  // allows w3 and then stops before w2's damage
    auto pruned = obs_prune(net, data, cfg);
    CHECK(pruned.layers[0].weights(0, 2) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(pruned.layers[0].weights(0, 0) != 0.0);
}

TEST_CASE("obs never deletes biases") {
    Network net = topology({"a"}, {1});
    net.layers[0].weights << 0.0;
    net.layers[0].biases << 0.4;
    Dataset data;
    data.column_names = {"a"};
    data.inputs.resize(2, 1);
    data.inputs << 0.1, 0.9;
    data.targets.resize(2);
    data.targets << 0.4, 0.4;
    TrainConfig cfg;
    cfg.mse_target = 1.0;
    auto pruned = obs_prune(net, data, cfg);
    CHECK(pruned.layers[0].biases(0) == doctest::Approx(0.4));
}
