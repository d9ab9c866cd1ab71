#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lnn/formula.hpp"

// Finite truth grids S_n = {0, 1/n, ..., 1} and truth sub-tables.

namespace lnn {

struct LogicGrain {
    int n;  // the logic has n+1 truth values
    explicit LogicGrain(int n_) : n(n_) {
        if (n < 1) throw std::invalid_argument("grain must be >= 1");
    }
    std::vector<double> points() const {
        std::vector<double> p(n + 1);
        for (int i = 0; i <= n; ++i) p[i] = double(i) / n;
        return p;
    }
};

// Any map S_n^m -> [0,1]: a formula, a network, a neuron configuration.
using Valuation = std::function<double(std::span<const double>)>;

constexpr double kGridEqualityTol = 1e-9;
constexpr std::uint64_t kDefaultRowBudget = 1'000'000;

// Enumerates S_n^m in lexicographic order (first coordinate most significant).
inline void for_each_grid_point(LogicGrain grain, int m,
                                const std::function<void(std::span<const double>)>& fn) {
    std::vector<int> idx(m, 0);
    std::vector<double> pt(m, 0.0);
    const int n = grain.n;
    while (true) {
        for (int i = 0; i < m; ++i) pt[i] = double(idx[i]) / n;
        fn(pt);
        int i = m - 1;
        for (; i >= 0; --i) {
            if (++idx[i] <= n) break;
            idx[i] = 0;
        }
        if (i < 0) break;
    }
}

inline std::uint64_t grid_size(LogicGrain grain, int m) {
    std::uint64_t total = 1;
    for (int i = 0; i < m; ++i) {
        if (total > kDefaultRowBudget * 16) return total;  // avoid overflow, already huge
        total *= std::uint64_t(grain.n + 1);
    }
    return total;
}

struct TruthTable {
    std::vector<std::string> variable_names;
    LogicGrain grain;
    std::vector<std::pair<std::vector<double>, double>> rows;
};

struct RowBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Valuation formula_valuation(const FormulaPtr& f, std::vector<std::string> order) {
    return [f, order = std::move(order)](std::span<const double> in) {
        std::map<std::string, double> a;
        for (std::size_t i = 0; i < order.size(); ++i) a[order[i]] = in[i];
        return eval_formula(f, a);
    };
}

inline Valuation formula_valuation(const FormulaPtr& f) {
    return formula_valuation(f, variables(f));
}

// Full (n+1)-valued truth sub-table of f over its variables.
inline TruthTable truth_subtable(const FormulaPtr& f, LogicGrain grain,
                                 std::uint64_t row_budget = kDefaultRowBudget) {
    auto names = variables(f);
    const int m = int(names.size());
    if (grid_size(grain, m) > row_budget)
        throw RowBudgetError("truth sub-table exceeds row budget");
    TruthTable t{names, grain, {}};
    auto val = formula_valuation(f, names);
    for_each_grid_point(grain, m, [&](std::span<const double> pt) {
        t.rows.emplace_back(std::vector<double>(pt.begin(), pt.end()), val(pt));
    });
    return t;
}

struct GridCompare {
    bool equivalent;
    double max_abs_deviation;
};

// True iff max |f-g| over S_n^m is within the equality tolerance.
inline GridCompare grid_equivalent(const Valuation& f, const Valuation& g, LogicGrain grain,
                                   int m, double tol = kGridEqualityTol) {
    double worst = 0.0;
    for_each_grid_point(grain, m, [&](std::span<const double> pt) {
        worst = std::max(worst, std::abs(f(pt) - g(pt)));
    });
    return {worst <= tol, worst};
}

}  // namespace lnn
