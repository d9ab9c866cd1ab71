#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lnn/grid.hpp"

// Layered feed-forward networks with activation ψ(x) = min(1, max(0, x)).

namespace lnn {

inline double psi(double x) { return std::min(1.0, std::max(0.0, x)); }

// ψ'(z) with the closed-interval convention: 1 on [0,1], else 0.
inline double psi_prime(double z) { return (z >= 0.0 && z <= 1.0) ? 1.0 : 0.0; }

struct Layer {
    Eigen::MatrixXd weights;  // units × inputs
    Eigen::VectorXd biases;   // one per unit
};

struct Network {
    std::vector<std::string> input_names;
    std::vector<Layer> layers;
    bool crystallized = false;
    int grain = 1;  // logic grain the network was built/trained for

    int input_count() const { return int(input_names.size()); }
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void validate_topology(const Network& net) {
    long prev = net.input_count();
    for (const auto& layer : net.layers) {
        if (layer.weights.cols() != prev || layer.weights.rows() != layer.biases.size())
            throw DimensionError("inconsistent layer dimensions");
        prev = layer.weights.rows();
    }
    if (!net.layers.empty() && net.layers.back().weights.rows() != 1)
        throw DimensionError("final layer must have exactly one unit");
}

inline Eigen::VectorXd forward_activations(const Network& net, Eigen::VectorXd a) {
    for (const auto& layer : net.layers) {
        Eigen::VectorXd z = layer.weights * a + layer.biases;
        a = z.unaryExpr([](double v) { return psi(v); });
    }
    return a;
}

inline double forward(const Network& net, std::span<const double> input) {
    if (int(input.size()) != net.input_count())
        throw DimensionError("input dimension mismatch");
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(input.data(), long(input.size()));
    return forward_activations(net, std::move(a))(0);
}

inline Valuation network_valuation(const Network& net) {
    return [net](std::span<const double> in) { return forward(net, in); };
}

inline int param_count(const Network& net) {
    int n = 0;
    for (const auto& layer : net.layers)
        n += int(layer.weights.size() + layer.biases.size());
    return n;
}

// Flat parameter order: per layer, weights row-major then biases.
inline Eigen::VectorXd get_params(const Network& net) {
    Eigen::VectorXd p(param_count(net));
    long k = 0;
    for (const auto& layer : net.layers) {
        for (long r = 0; r < layer.weights.rows(); ++r)
            for (long c = 0; c < layer.weights.cols(); ++c) p(k++) = layer.weights(r, c);
        for (long r = 0; r < layer.biases.size(); ++r) p(k++) = layer.biases(r);
    }
    return p;
}

inline void set_params(Network& net, const Eigen::VectorXd& p) {
    long k = 0;
    for (auto& layer : net.layers) {
        for (long r = 0; r < layer.weights.rows(); ++r)
            for (long c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = p(k++);
        for (long r = 0; r < layer.biases.size(); ++r) layer.biases(r) = p(k++);
    }
    if (k != p.size()) throw DimensionError("parameter vector size mismatch");
}

// True when the index in flat parameter order addresses a weight (not a bias).
inline std::vector<bool> weight_mask(const Network& net) {
    std::vector<bool> mask;
    mask.reserve(std::size_t(param_count(net)));
    for (const auto& layer : net.layers) {
        mask.insert(mask.end(), std::size_t(layer.weights.size()), true);
        mask.insert(mask.end(), std::size_t(layer.biases.size()), false);
    }
    return mask;
}

inline bool is_crystal_valued(const Network& net, double tol = 0.0) {
    for (const auto& layer : net.layers) {
        for (long r = 0; r < layer.weights.rows(); ++r)
            for (long c = 0; c < layer.weights.cols(); ++c) {
                double w = layer.weights(r, c);
                if (std::abs(w - std::round(w)) > tol || std::abs(w) > 1.0 + tol) return false;
            }
        for (long r = 0; r < layer.biases.size(); ++r) {
            double b = layer.biases(r);
            if (std::abs(b - std::round(b)) > tol) return false;
        }
    }
    return true;
}

inline nlohmann::json to_json(const Network& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : net.layers) {
        nlohmann::json w = nlohmann::json::array();
        for (long r = 0; r < layer.weights.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (long c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
            w.push_back(std::move(row));
        }
        nlohmann::json b = nlohmann::json::array();
        for (long r = 0; r < layer.biases.size(); ++r) b.push_back(layer.biases(r));
        layers.push_back({{"weights", std::move(w)}, {"biases", std::move(b)}});
    }
    return {{"inputs", net.input_names},
            {"grain", net.grain},
            {"layers", std::move(layers)},
            {"crystallized", net.crystallized}};
}

inline Network network_from_json(const nlohmann::json& j) {
    Network net;
    net.input_names = j.at("inputs").get<std::vector<std::string>>();
    net.grain = j.value("grain", 1);
    net.crystallized = j.at("crystallized").get<bool>();
    for (const auto& jl : j.at("layers")) {
        Layer layer;
        const auto& w = jl.at("weights");
        const auto& b = jl.at("biases");
        long rows = long(w.size());
        long cols = rows > 0 ? long(w[0].size()) : 0;
        layer.weights.resize(rows, cols);
        for (long r = 0; r < rows; ++r) {
            if (long(w[r].size()) != cols) throw DimensionError("ragged weight matrix");
            for (long c = 0; c < cols; ++c) layer.weights(r, c) = w[r][c].get<double>();
        }
        layer.biases.resize(long(b.size()));
        for (long r = 0; r < layer.biases.size(); ++r) layer.biases(r) = b[r].get<double>();
        net.layers.push_back(std::move(layer));
    }
    validate_topology(net);
    if (net.crystallized && !is_crystal_valued(net))
        throw std::runtime_error(
            "crystallized network file contains non-crystal values "
            "(weights must be -1/0/1, biases integer)");
    return net;
}

inline void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(net).dump(2) << '\n';
}

inline Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return network_from_json(j);
}

}  // namespace lnn
