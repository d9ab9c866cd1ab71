#pragma once

#include <algorithm>
#include <nlohmann/json.hpp>
#include <random>
#include <set>

#include "lnn/dataset.hpp"
#include "lnn/formula.hpp"
#include "lnn/grid.hpp"

// Tabular data ingestion: nominal CSV loading, one-hot binarization,
// 0.5-scaled negative-case enrichment, column projection, and truth-table
// dataset generation from formulas.

namespace lnn {

struct NominalTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> rows;
    std::string target_column;
    std::string positive_label;
    int target_index = -1;
};

struct BinarizationMap {
    // per source column (input columns only): observed tokens in first-seen order
    std::vector<std::string> source_columns;
    std::vector<std::vector<std::string>> tokens;

    std::vector<std::string> output_columns() const {
        std::vector<std::string> out;
        for (std::size_t c = 0; c < source_columns.size(); ++c)
            for (const auto& t : tokens[c]) out.push_back(source_columns[c] + "=" + t);
        return out;
    }
};

inline nlohmann::json to_json(const BinarizationMap& map) {
    nlohmann::json cols = nlohmann::json::array();
    for (std::size_t c = 0; c < map.source_columns.size(); ++c)
        cols.push_back({{"column", map.source_columns[c]}, {"tokens", map.tokens[c]}});
    return {{"columns", std::move(cols)}};
}

inline NominalTable load_nominal_csv(const std::string& path, const std::string& target_column,
                                     const std::string& positive_label) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    auto rows = csv::parse(in);
    if (rows.empty()) throw std::runtime_error("empty CSV " + path);
    NominalTable t;
    t.column_names = rows[0];
    t.target_column = target_column;
    t.positive_label = positive_label;
    for (std::size_t c = 0; c < t.column_names.size(); ++c)
        if (t.column_names[c] == target_column) t.target_index = int(c);
    if (t.target_index < 0)
        throw std::runtime_error("target column not found: " + target_column);
    std::set<std::string> labels;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != t.column_names.size())
            throw std::runtime_error("ragged CSV row " + std::to_string(r));
        labels.insert(rows[r][std::size_t(t.target_index)]);
        t.rows.push_back(std::move(rows[r]));
    }
    if (labels.size() != 2)
        throw std::runtime_error("target column must be binary; saw " +
                                 std::to_string(labels.size()) + " labels");
    return t;
}

// One-hot expansion per column over observed tokens; "?" is an ordinary token.
// Column order follows the source, token order is first observation.
inline std::pair<Dataset, BinarizationMap> binarize(const NominalTable& t) {
    BinarizationMap map;
    std::vector<int> src_cols;
    for (std::size_t c = 0; c < t.column_names.size(); ++c) {
        if (int(c) == t.target_index) continue;
        map.source_columns.push_back(t.column_names[c]);
        map.tokens.emplace_back();
        src_cols.push_back(int(c));
    }
    for (const auto& row : t.rows)
        for (std::size_t j = 0; j < src_cols.size(); ++j) {
            const auto& tok = row[std::size_t(src_cols[j])];
            auto& toks = map.tokens[j];
            if (std::find(toks.begin(), toks.end(), tok) == toks.end()) toks.push_back(tok);
        }

    Dataset d;
    d.column_names = map.output_columns();
    d.inputs = Eigen::MatrixXd::Zero(long(t.rows.size()), long(d.column_names.size()));
    d.targets.resize(long(t.rows.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        long base = 0;
        for (std::size_t j = 0; j < src_cols.size(); ++j) {
            const auto& tok = t.rows[r][std::size_t(src_cols[j])];
            const auto& toks = map.tokens[j];
            long k = std::find(toks.begin(), toks.end(), tok) - toks.begin();
            d.inputs(long(r), base + k) = 1.0;
            base += long(toks.size());
        }
        d.targets(long(r)) =
            t.rows[r][std::size_t(t.target_index)] == t.positive_label ? 1.0 : 0.0;
    }
    return {std::move(d), std::move(map)};
}

// Appends, for each row, a copy with inputs scaled by the factor and target
// forced to 0; originals stay first and unchanged.
inline Dataset enrich_negatives(const Dataset& d, double factor = 0.5) {
    Dataset out;
    out.column_names = d.column_names;
    out.inputs.resize(2 * d.rows(), d.cols());
    out.targets.resize(2 * d.rows());
    out.inputs.topRows(d.rows()) = d.inputs;
    out.targets.head(d.rows()) = d.targets;
    out.inputs.bottomRows(d.rows()) = d.inputs * factor;
    out.targets.tail(d.rows()).setZero();
    return out;
}

inline Dataset project_columns(const Dataset& d, const std::vector<std::string>& names) {
    Dataset out;
    out.column_names = names;
    out.inputs.resize(d.rows(), long(names.size()));
    out.targets = d.targets;
    for (std::size_t j = 0; j < names.size(); ++j) {
        auto it = std::find(d.column_names.begin(), d.column_names.end(), names[j]);
        if (it == d.column_names.end())
            throw std::invalid_argument("unknown column: " + names[j]);
        out.inputs.col(long(j)) = d.inputs.col(it - d.column_names.begin());
    }
    return out;
}

// Full truth sub-table of a formula as a Dataset; optional seeded Gaussian
// noise on targets, clamped to [0,1].
inline Dataset generate_table(const FormulaPtr& f, LogicGrain grain, double noise_sigma = 0.0,
                              std::uint64_t seed = 0,
                              std::uint64_t row_budget = kDefaultRowBudget) {
    Dataset d = dataset_from_table(truth_subtable(f, grain, row_budget));
    if (noise_sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (long r = 0; r < d.rows(); ++r)
            d.targets(r) = std::min(1.0, std::max(0.0, d.targets(r) + noise(rng)));
    }
    return d;
}

}  // namespace lnn
