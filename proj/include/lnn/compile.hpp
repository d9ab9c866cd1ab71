#pragma once

#include <vector>

#include "lnn/formula.hpp"
#include "lnn/network.hpp"

// Formula → network compilation: one neuron per binary connective, negations
// folded into weight signs, identity units padding signals across layers so
// strict layering holds.

namespace lnn {

namespace detail {

struct CompileBuilder {
    struct Unit {
        std::vector<std::pair<int, int>> in;  // (index in previous layer, weight)
        int bias = 0;
    };
    int num_inputs = 0;
    std::vector<std::vector<Unit>> layers;

    struct Sig {
        int depth;  // 0 = network inputs
        int index;
        bool negated;
    };

    int add_unit(int depth, Unit u) {
        if (int(layers.size()) < depth) layers.resize(std::size_t(depth));
        layers[std::size_t(depth - 1)].push_back(std::move(u));
        return int(layers[std::size_t(depth - 1)].size()) - 1;
    }

    // Identity units (weight 1, bias 0) raise a shallow signal; the negation
    // flag stays on the signal and is realized at the consuming neuron.
    Sig raise_to(Sig s, int depth) {
        while (s.depth < depth) {
            int idx = add_unit(s.depth + 1, Unit{{{s.index, 1}}, 0});
            s = {s.depth + 1, idx, s.negated};
        }
        return s;
    }
};

inline CompileBuilder::Sig compile_rec(const FormulaPtr& f, CompileBuilder& b,
                                       const std::vector<std::string>& names) {
    using Sig = CompileBuilder::Sig;
    switch (f->kind) {
        case Conn::Var: {
            for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == f->name) return {0, int(i), false};
            throw EvalError("unknown variable in compile: " + f->name);
        }
        case Conn::Const: {
            int idx = b.add_unit(1, CompileBuilder::Unit{{}, f->value});
            return {1, idx, false};
        }
        case Conn::Not: {
            Sig s = compile_rec(f->left, b, names);
            s.negated = !s.negated;
            return s;
        }
        case Conn::Iff:
            return compile_rec(fusion(implies(f->left, f->right), implies(f->right, f->left)),
                               b, names);
        case Conn::Fusion:
        case Conn::StrongDisj:
        case Conn::Implies: {
            Sig a = compile_rec(f->left, b, names);
            if (f->kind == Conn::Implies) a.negated = !a.negated;  // x⇒y = ¬x⊕y
            Sig c = compile_rec(f->right, b, names);
            int depth = std::max(a.depth, c.depth);
            a = b.raise_to(a, depth);
            c = b.raise_to(c, depth);
            if (a.depth == c.depth && a.index == c.index) {
                // both operands are the same signal (e.g. x & x): weights stay
                // in {-1,0,1}, so duplicate it through two identity units
                a = b.raise_to(a, depth + 1);
                c = {depth + 1,
                     b.add_unit(depth + 1, CompileBuilder::Unit{{{c.index, 1}}, 0}),
                     c.negated};
                depth += 1;
            }
            bool conj = f->kind == Conn::Fusion;
            int negs = int(a.negated) + int(c.negated);
            int bias = conj ? -1 + negs : negs;
            CompileBuilder::Unit u{{{a.index, a.negated ? -1 : 1}, {c.index, c.negated ? -1 : 1}},
                                   bias};
            int idx = b.add_unit(depth + 1, std::move(u));
            return {depth + 1, idx, false};
        }
    }
    throw EvalError("corrupt formula node");
}

}  // namespace detail

// Builds a crystallized network whose valuation equals eval_formula(f) on all
// of [0,1]^m; the output is the single unit of the final layer.
inline Network compile(const FormulaPtr& f, int grain = 1) {
    auto names = variables(f);
    detail::CompileBuilder b;
    b.num_inputs = int(names.size());
    auto root = detail::compile_rec(f, b, names);
    if (root.depth == 0 || root.negated ||
        root.index + 1 != int(b.layers[std::size_t(root.depth - 1)].size()) ||
        b.layers[std::size_t(root.depth - 1)].size() != 1) {
        // realize the root (variable, negated signal, or non-lone unit) in a
        // fresh output layer
        int w = root.negated ? -1 : 1;
        int bias = root.negated ? 1 : 0;
        root = {root.depth + 1,
                b.add_unit(root.depth + 1,
                           detail::CompileBuilder::Unit{{{root.index, w}}, bias}),
                false};
    }

    Network net;
    net.input_names = names;
    net.grain = grain;
    net.crystallized = true;
    int prev = b.num_inputs;
    for (const auto& lu : b.layers) {
        Layer layer;
        layer.weights = Eigen::MatrixXd::Zero(long(lu.size()), prev);
        layer.biases = Eigen::VectorXd::Zero(long(lu.size()));
        for (std::size_t u = 0; u < lu.size(); ++u) {
            for (auto [src, w] : lu[u].in) layer.weights(long(u), src) = w;
            layer.biases(long(u)) = lu[u].bias;
        }
        prev = int(lu.size());
        net.layers.push_back(std::move(layer));
    }
    validate_topology(net);
    return net;
}

}  // namespace lnn
