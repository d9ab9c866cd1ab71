// Command-line front end: compile formulas to networks, generate truth
// tables, reverse-engineer formulas from tables, compare neuron
// configurations, and prepare tabular datasets.
//
// Exit codes: 0 success, 1 domain failure (non-convergence, budget), 2 usage
// error. Machine-readable outputs are written only on exit 0 or 1.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <variant>

#include "lnn/compile.hpp"
#include "lnn/extract.hpp"
#include "lnn/ingest.hpp"
#include "lnn/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageError = 2;

// Neuron spec mini-syntax, a transliteration of ψ_b(−x1,x2,...):
//   spec := bias ';' arg (',' arg)*
//   arg  := ['-'|'+'] (identifier | '(' spec ')')
struct NeuronSpec {
    int bias = 0;
    std::vector<std::pair<int, std::variant<std::string, std::shared_ptr<NeuronSpec>>>> args;
};

class SpecParser {
public:
    explicit SpecParser(std::string_view text) : text_(text) {}

    NeuronSpec run() {
        auto spec = parse_spec();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return spec;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw std::runtime_error("bad neuron spec: " + what + " at offset " +
                                 std::to_string(pos_));
    }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    NeuronSpec parse_spec() {
        NeuronSpec spec;
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected bias integer");
        spec.bias = std::stoi(std::string(text_.substr(start, pos_ - start)));
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != ';') fail("expected ';'");
        ++pos_;
        while (true) {
            spec.args.push_back(parse_arg());
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == ',') { ++pos_; continue; }
            break;
        }
        return spec;
    }

    std::pair<int, std::variant<std::string, std::shared_ptr<NeuronSpec>>> parse_arg() {
        skip_ws();
        int sign = 1;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
            if (text_[pos_] == '-') sign = -1;
            ++pos_;
        }
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            ++pos_;
            auto sub = std::make_shared<NeuronSpec>(parse_spec());
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
            ++pos_;
            return {sign, std::move(sub)};
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '.'))
            ++pos_;
        if (pos_ == start) fail("expected input name or '('");
        return {sign, std::string(text_.substr(start, pos_ - start))};
    }
};

void collect_names(const NeuronSpec& spec, std::vector<std::string>& names) {
    for (const auto& [sign, arg] : spec.args) {
        if (std::holds_alternative<std::string>(arg)) {
            const auto& n = std::get<std::string>(arg);
            if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
        } else {
            collect_names(*std::get<std::shared_ptr<NeuronSpec>>(arg), names);
        }
    }
}

double eval_spec(const NeuronSpec& spec, const std::map<std::string, double>& env) {
    double z = spec.bias;
    for (const auto& [sign, arg] : spec.args) {
        double v = std::holds_alternative<std::string>(arg)
                       ? env.at(std::get<std::string>(arg))
                       : eval_spec(*std::get<std::shared_ptr<NeuronSpec>>(arg), env);
        z += sign * v;
    }
    return lnn::psi(z);
}

// Natural order so x2 sorts before x10.
bool natural_less(const std::string& a, const std::string& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (std::isdigit(static_cast<unsigned char>(a[i])) &&
            std::isdigit(static_cast<unsigned char>(b[j]))) {
            std::size_t i2 = i, j2 = j;
            while (i2 < a.size() && std::isdigit(static_cast<unsigned char>(a[i2]))) ++i2;
            while (j2 < b.size() && std::isdigit(static_cast<unsigned char>(b[j2]))) ++j2;
            long x = std::stol(a.substr(i, i2 - i)), y = std::stol(b.substr(j, j2 - j));
            if (x != y) return x < y;
            i = i2; j = j2;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i; ++j;
        }
    }
    return a.size() < b.size();
}

int cmd_compile(const std::string& formula_text, const std::string& out_path) {
    lnn::FormulaPtr f;
    try {
        f = lnn::parse_formula(formula_text);
    } catch (const lnn::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    auto net = lnn::compile(f);
    lnn::save_network(net, out_path);
    std::cout << "inputs: " << net.input_count() << '\n';
    for (std::size_t l = 0; l < net.layers.size(); ++l)
        std::cout << "layer " << l + 1 << ": " << net.layers[l].weights.rows() << " x "
                  << net.layers[l].weights.cols() << '\n';
    return kOk;
}

int cmd_table(const std::string& formula_text, int n, const std::string& out_path,
              double noise, std::uint64_t seed) {
    lnn::FormulaPtr f;
    try {
        f = lnn::parse_formula(formula_text);
    } catch (const lnn::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    try {
        auto d = lnn::generate_table(f, lnn::LogicGrain(n), noise, seed);
        lnn::save_dataset(d, out_path);
        std::cout << d.rows() << " rows, " << d.cols() << " inputs\n";
    } catch (const lnn::RowBudgetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomainFailure;
    }
    return kOk;
}

int cmd_reveng(const std::string& table_path, const std::string& config_path,
               const std::string& out_dir, std::uint64_t seed, bool verbose) {
    lnn::Dataset data;
    lnn::PipelineConfig cfg;
    try {
        data = lnn::load_dataset(table_path);
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot read " + config_path);
            nlohmann::json j;
            in >> j;
            cfg = lnn::pipeline_config_from_json(j);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    cfg.train.seed = seed;
    fs::create_directories(out_dir);
    auto result = lnn::reverse_engineer(data, cfg);
    lnn::save_attempts_csv(result, out_dir + "/attempts.csv");
    if (verbose)
        for (const auto& a : result.attempts_log)
            std::cout << a.topology << " try " << a.try_index << ": " << a.outcome
                      << " (mse " << a.mse << ")\n";
    if (!result.report) {
        std::cerr << "error: topology schedule exhausted without a crystallized model\n";
        return kDomainFailure;
    }
    lnn::save_network(result.network, out_dir + "/network.json");
    std::ofstream rep(out_dir + "/report.json");
    rep << lnn::to_json(*result.report).dump(2) << '\n';
    std::cout << "formula: " << result.report->formula_text << '\n';
    std::cout << "lambda: " << result.report->lambda << '\n';
    std::cout << "mse: " << result.report->mse << '\n';
    std::cout << "accuracy: " << result.report->accuracy << '\n';
    return kOk;
}

int cmd_similar(const std::string& spec_a, const std::string& spec_b, int n, bool rank) {
    NeuronSpec a, b;
    bool have_b = !spec_b.empty();
    try {
        a = SpecParser(spec_a).run();
        if (have_b) b = SpecParser(spec_b).run();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    std::vector<std::string> names;
    collect_names(a, names);
    if (have_b) collect_names(b, names);
    std::sort(names.begin(), names.end(), natural_less);
    const int m = int(names.size());

    auto spec_valuation = [&](const NeuronSpec& s) {
        return lnn::Valuation([&s, names](std::span<const double> in) {
            std::map<std::string, double> env;
            for (std::size_t i = 0; i < names.size(); ++i) env[names[i]] = in[i];
            return eval_spec(s, env);
        });
    };

    if (have_b) {
        double lam = lnn::lambda_similarity(spec_valuation(a), spec_valuation(b),
                                            lnn::LogicGrain(n), m);
        std::printf("lambda = %.3f\n", lam);
    }
    if (rank) {
        lnn::NeuronConfig cfg;
        std::vector<lnn::FormulaPtr> inputs;
        for (const auto& [sign, arg] : a.args) {
            if (!std::holds_alternative<std::string>(arg)) {
                std::cerr << "error: --rank requires a flat configuration\n";
                return kUsageError;
            }
            cfg.weights.push_back(sign);
            inputs.push_back(lnn::var(std::get<std::string>(arg)));
        }
        cfg.bias = a.bias;
        std::vector<std::string> order;
        for (const auto& in : inputs) order.push_back(in->name);
        auto target = lnn::config_valuation(cfg);
        std::vector<std::pair<double, std::string>> ranking;
        for (const auto& cand : lnn::decomposition_set(cfg, inputs)) {
            double lam = lnn::lambda_similarity(target, lnn::formula_valuation(cand, order),
                                                lnn::LogicGrain(n), int(order.size()));
            ranking.emplace_back(lam, lnn::format_formula(cand));
        }
        std::stable_sort(ranking.begin(), ranking.end(),
                         [](const auto& x, const auto& y) { return x.first > y.first; });
        for (const auto& [lam, text] : ranking) std::printf("%.4f  %s\n", lam, text.c_str());
    }
    return kOk;
}

int cmd_prep(const std::string& csv_path, const std::string& target,
             const std::string& positive, const std::string& out_path,
             const std::string& map_path, bool do_binarize, bool do_enrich,
             const std::vector<std::string>& project) {
    try {
        lnn::Dataset d;
        lnn::BinarizationMap map;
        if (do_binarize) {
            auto table = lnn::load_nominal_csv(csv_path, target, positive);
            std::tie(d, map) = lnn::binarize(table);
        } else {
            d = lnn::load_dataset(csv_path);
        }
        if (!project.empty()) d = lnn::project_columns(d, project);
        if (do_enrich) d = lnn::enrich_negatives(d);
        lnn::save_dataset(d, out_path);
        if (do_binarize && !map_path.empty()) {
            std::ofstream out(map_path);
            out << lnn::to_json(map).dump(2) << '\n';
        }
        std::cout << d.rows() << " rows, " << d.cols() << " columns\n";
        return kOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Łukasiewicz-logic networks: compile, learn, and extract formulas"};
    app.require_subcommand(1);
    app.fallthrough();  // allow global options after the subcommand name
    std::uint64_t seed = 0;
    bool verbose = false;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "random seed for all stochastic steps");
    app.add_flag("--verbose", verbose, "print per-attempt progress");
    app.add_option("--out-dir", out_dir, "output directory for multi-file commands");

    std::string formula_text, out_path = "network.json";
    auto* compile_cmd = app.add_subcommand("compile", "compile a formula to a network JSON");
    compile_cmd->add_option("formula", formula_text, "formula text")->required();
    compile_cmd->add_option("-o,--output", out_path, "output network file");

    std::string table_formula, table_out = "table.csv";
    int table_n = 1;
    double noise = 0.0;
    auto* table_cmd = app.add_subcommand("table", "generate a truth sub-table CSV");
    table_cmd->add_option("formula", table_formula, "formula text")->required();
    table_cmd->add_option("-n,--grain", table_n, "logic grain (n+1 truth values)")
        ->required()
        ->check(CLI::PositiveNumber);
    table_cmd->add_option("-o,--output", table_out, "output CSV file");
    table_cmd->add_option("--noise", noise, "Gaussian target noise sigma");

    std::string reveng_table, reveng_config;
    auto* reveng_cmd = app.add_subcommand("reveng", "reverse-engineer a formula from a table");
    reveng_cmd->add_option("table", reveng_table, "truth-table CSV")->required();
    reveng_cmd->add_option("--config", reveng_config, "pipeline config JSON");

    std::string spec_a, spec_b;
    int sim_n = 1;
    bool rank = false;
    auto* similar_cmd = app.add_subcommand("similar", "λ-similarity between neuron configs");
    similar_cmd->add_option("config_a", spec_a, "neuron spec 'b; -x1,x2,...'")->required();
    similar_cmd->add_option("config_b", spec_b, "second neuron spec");
    similar_cmd->add_option("-n,--grain", sim_n, "logic grain")->check(CLI::PositiveNumber);
    similar_cmd->add_flag("--rank", rank, "print the full S(α) ranking");

    std::string prep_csv, prep_target, prep_positive, prep_out = "dataset.csv", prep_map;
    bool do_binarize = false, do_enrich = false;
    std::vector<std::string> project;
    auto* prep_cmd = app.add_subcommand("prep", "prepare a tabular dataset");
    prep_cmd->add_option("csv", prep_csv, "input CSV")->required();
    prep_cmd->add_option("--target", prep_target, "target column (for --binarize)");
    prep_cmd->add_option("--positive", prep_positive, "positive target label");
    prep_cmd->add_option("-o,--output", prep_out, "output dataset CSV");
    prep_cmd->add_option("--map", prep_map, "output binarization map JSON");
    prep_cmd->add_flag("--binarize", do_binarize, "one-hot expand nominal attributes");
    prep_cmd->add_flag("--enrich", do_enrich, "append 0.5-scaled negative cases");
    prep_cmd->add_option("--project", project, "keep only these columns")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kOk : kUsageError;
    }

    try {
        if (compile_cmd->parsed()) return cmd_compile(formula_text, out_path);
        if (table_cmd->parsed()) return cmd_table(table_formula, table_n, table_out, noise, seed);
        if (reveng_cmd->parsed())
            return cmd_reveng(reveng_table, reveng_config, out_dir, seed, verbose);
        if (similar_cmd->parsed()) return cmd_similar(spec_a, spec_b, sim_n, rank);
        if (prep_cmd->parsed())
            return cmd_prep(prep_csv, prep_target, prep_positive, prep_out, prep_map,
                            do_binarize, do_enrich, project);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomainFailure;
    }
    return kUsageError;
}
