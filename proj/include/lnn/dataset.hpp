#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lnn/grid.hpp"

// Datasets: rows of truth values in [0,1] plus one target column, with CSV
// import/export (header row = column names then "target").

namespace lnn {

namespace csv {

// RFC 4180 records; '?' and any other bare token pass through unchanged.
inline std::vector<std::vector<std::string>> parse(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') { field += '"'; in.get(); }
                else quoted = false;
            } else field += c;
            continue;
        }
        switch (c) {
            case '"': quoted = true; any = true; break;
            case ',': row.push_back(std::move(field)); field.clear(); any = true; break;
            case '\r': break;
            case '\n':
                if (any || !field.empty() || !row.empty()) {
                    row.push_back(std::move(field));
                    field.clear();
                    rows.push_back(std::move(row));
                    row.clear();
                    any = false;
                }
                break;
            default: field += c; any = true;
        }
    }
    if (any || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

// Decimal literal that round-trips the grid values used here.
inline std::string format_number(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace csv

struct Dataset {
    std::vector<std::string> column_names;  // input columns only
    Eigen::MatrixXd inputs;                 // rows × m
    Eigen::VectorXd targets;                // rows

    long rows() const { return inputs.rows(); }
    long cols() const { return inputs.cols(); }

    std::vector<std::vector<double>> input_rows() const {
        std::vector<std::vector<double>> out;
        out.reserve(std::size_t(rows()));
        for (long r = 0; r < rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(cols()), 0.0);
            for (long c = 0; c < cols(); ++c) row[std::size_t(c)] = inputs(r, c);
            out.push_back(std::move(row));
        }
        return out;
    }
};

inline Dataset dataset_from_table(const TruthTable& t) {
    Dataset d;
    d.column_names = t.variable_names;
    d.inputs.resize(long(t.rows.size()), long(t.variable_names.size()));
    d.targets.resize(long(t.rows.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t c = 0; c < t.rows[r].first.size(); ++c)
            d.inputs(long(r), long(c)) = t.rows[r].first[c];
        d.targets(long(r)) = t.rows[r].second;
    }
    return d;
}

inline void save_dataset(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& name : d.column_names) out << csv::escape(name) << ',';
    out << "target\n";
    for (long r = 0; r < d.rows(); ++r) {
        for (long c = 0; c < d.cols(); ++c) out << csv::format_number(d.inputs(r, c)) << ',';
        out << csv::format_number(d.targets(r)) << '\n';
    }
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    auto rows = csv::parse(in);
    if (rows.size() < 1 || rows[0].size() < 1)
        throw std::runtime_error("empty dataset file " + path);
    Dataset d;
    const std::size_t arity = rows[0].size();
    if (rows[0].back() != "target")
        throw std::runtime_error("dataset header must end with 'target'");
    d.column_names.assign(rows[0].begin(), rows[0].end() - 1);
    d.inputs.resize(long(rows.size()) - 1, long(arity) - 1);
    d.targets.resize(long(rows.size()) - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != arity)
            throw std::runtime_error("ragged dataset row " + std::to_string(r));
        for (std::size_t c = 0; c + 1 < arity; ++c)
            d.inputs(long(r) - 1, long(c)) = std::stod(rows[r][c]);
        d.targets(long(r) - 1) = std::stod(rows[r].back());
    }
    return d;
}

}  // namespace lnn
