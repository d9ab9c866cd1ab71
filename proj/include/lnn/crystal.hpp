#pragma once

#include <cmath>
#include <numbers>

#include "lnn/network.hpp"

// Crystallization: driving weights and biases toward CNN values.
// Smooth: Υ_n(w) = sign(w)·(cos((1 − frac|w|)·π/2)^n + ⌊|w|⌋), with integers
// as fixed points. Crisp: rounding to the nearest integer (half away from
// zero), which prunes weights near 0 and consolidates weights near ±1.

namespace lnn {

inline double upsilon(double w, int n) {
    double a = std::abs(w);
    double fl = std::floor(a);
    double frac = a - fl;
    double c = std::cos((1.0 - frac) * std::numbers::pi / 2.0);
    double out = std::pow(c, n) + fl;
    return w < 0 ? -out : out;
}

inline Network smooth_crystallize(Network net, int n) {
    for (auto& layer : net.layers) {
        layer.weights = layer.weights.unaryExpr([n](double w) { return upsilon(w, n); });
        layer.biases = layer.biases.unaryExpr([n](double w) { return upsilon(w, n); });
    }
    return net;
}

inline double distance_to_integer(double w) { return std::abs(w - std::round(w)); }

// Representation error Δ: summed distance of every weight and bias to the
// nearest integer; zero exactly for crystallized networks.
inline double representation_error(const Network& net) {
    double delta = 0.0;
    for (const auto& layer : net.layers) {
        delta += layer.weights.unaryExpr([](double w) { return distance_to_integer(w); }).sum();
        delta += layer.biases.unaryExpr([](double w) { return distance_to_integer(w); }).sum();
    }
    return delta;
}

inline double round_half_away(double w) {
    return w < 0 ? -std::floor(-w + 0.5) : std::floor(w + 0.5);
}

inline Network crisp_crystallize(Network net) {
    for (auto& layer : net.layers) {
        layer.weights = layer.weights.unaryExpr([](double w) {
            double r = round_half_away(w);
            return std::min(1.0, std::max(-1.0, r));
        });
        layer.biases = layer.biases.unaryExpr([](double w) { return round_half_away(w); });
    }
    net.crystallized = true;
    return net;
}

}  // namespace lnn
