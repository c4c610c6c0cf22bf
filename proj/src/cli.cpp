#include "spce/cli.hpp"

#include <chrono>
#include <cmath>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "spce/coincidence.hpp"
#include "spce/errors.hpp"
#include "spce/event_log.hpp"
#include "spce/hv_models.hpp"
#include "spce/purity.hpp"
#include "spce/quantum.hpp"
#include "spce/report.hpp"
#include "spce/rng.hpp"
#include "spce/timeseries.hpp"

namespace spce::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

// ---------------------------------------------------------------------------
// Small parsing helpers
// ---------------------------------------------------------------------------

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const char* first = item.data();
        const char* last = item.data() + item.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            throw ConfigError(std::string(what) + ": invalid number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
    return out;
}

std::vector<std::string> parse_label_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

CoincidenceWindow parse_window(const std::string& text,
                               std::optional<double> model_default) {
    if (text == "off") return CoincidenceWindow::unwindowed();
    if (text == "auto")
        return model_default ? CoincidenceWindow::width(*model_default)
                             : CoincidenceWindow::unwindowed();
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !(v >= 0.0) || !std::isfinite(v))
        throw ConfigError("--window: expected 'off', 'auto' or a nonnegative number, got '" +
                          text + "'");
    return CoincidenceWindow::width(v);
}

Json window_echo(const CoincidenceWindow& w) {
    if (w.is_unwindowed()) return "off";
    return w.seconds();
}

// ---------------------------------------------------------------------------
// CSV input
// ---------------------------------------------------------------------------

std::vector<double> read_csv_column(const fs::path& path, const std::string& column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ":1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) names.push_back(item);
    }
    std::size_t col = names.size();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == column) col = i;
    if (col == names.size())
        throw DataError(path.string() + ": no column named '" + column + "'");

    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string item;
        std::size_t i = 0;
        std::optional<std::string> field;
        while (std::getline(ss, item, ',')) {
            if (i == col) field = item;
            ++i;
        }
        if (!field)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": missing column " + std::to_string(col + 1));
        double v = 0.0;
        const char* first = field->data();
        const char* last = field->data() + field->size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": invalid number '" + *field + "'");
        values.push_back(v);
    }
    return values;
}

void write_plot_csv(const fs::path& path, const std::string& header,
                    const std::vector<std::vector<double>>& rows) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "'");
    out << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << io::format_double(row[i]);
        out << '\n';
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

void write_series_csv(const fs::path& path, const std::vector<double>& values) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "'");
    out << "z\n";
    for (double v : values) out << io::format_double(v) << '\n';
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Model specs
// ---------------------------------------------------------------------------

struct ModelSpec {
    std::string kind;
    std::unique_ptr<PairSource> source;
    std::optional<double> default_window;
    Json echo;
};

void require_keys(const Json& obj, std::initializer_list<const char*> allowed,
                  const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError(context + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_field(const Json& obj, const char* key, const std::string& context) {
    if (!obj.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(context + ": bad value for '" + key + "': " + e.what());
    }
}

template <typename Table>
Table get_table(const Json& obj, const char* key, const std::string& context) {
    if (!obj.contains(key) || !obj.at(key).is_object())
        throw ConfigError(context + ": missing table '" + key + "'");
    Table table;
    for (const auto& [label, value] : obj.at(key).items()) {
        try {
            table[label] = value.template get<typename Table::mapped_type>();
        } catch (const Json::exception& e) {
            throw ConfigError(context + ": bad table entry '" + label + "': " + e.what());
        }
    }
    return table;
}

ModelSpec make_model_from_json(const Json& spec, const std::string& context) {
    const std::string type = get_field<std::string>(spec, "type", context);
    ModelSpec model;
    model.kind = type;

    if (type == "qt") {
        require_keys(spec, {"type"}, context);
        model.source = std::make_unique<hv::QtOracleSource>();
        model.echo = Json{{"type", "qt"}};
    } else if (type == "contextual") {
        require_keys(spec, {"type", "t0", "delay_exponent", "pair_spacing"}, context);
        hv::ContextualEventModel m;
        if (spec.contains("t0")) m.t0 = get_field<double>(spec, "t0", context);
        if (spec.contains("delay_exponent"))
            m.delay_exponent = get_field<double>(spec, "delay_exponent", context);
        if (spec.contains("pair_spacing"))
            m.pair_spacing = get_field<double>(spec, "pair_spacing", context);
        try {
            m.validate();
        } catch (const std::exception& e) {
            throw ConfigError(context + ": " + e.what());
        }
        model.default_window = m.default_window();
        model.echo = Json{{"type", "contextual"},
                          {"t0", m.t0},
                          {"delay_exponent", m.delay_exponent},
                          {"pair_spacing", m.pair_spacing}};
        model.source = std::make_unique<hv::ContextualSource>(m);
    } else if (type == "factorizable") {
        require_keys(spec, {"type", "weights", "p_a", "p_b"}, context);
        hv::FactorizableModel m;
        m.weights = get_field<std::vector<double>>(spec, "weights", context);
        m.p_a = get_table<decltype(m.p_a)>(spec, "p_a", context);
        m.p_b = get_table<decltype(m.p_b)>(spec, "p_b", context);
        try {
            m.validate();
        } catch (const std::exception& e) {
            throw ConfigError(context + ": " + e.what());
        }
        model.echo = spec;
        model.source = std::make_unique<hv::FactorizableSource>(std::move(m));
    } else if (type == "deterministic") {
        require_keys(spec, {"type", "weights", "response_a", "response_b"}, context);
        hv::DeterministicSharedSpaceModel m;
        m.weights = get_field<std::vector<double>>(spec, "weights", context);
        m.response_a = get_table<decltype(m.response_a)>(spec, "response_a", context);
        m.response_b = get_table<decltype(m.response_b)>(spec, "response_b", context);
        try {
            m.validate();
        } catch (const std::exception& e) {
            throw ConfigError(context + ": " + e.what());
        }
        model.echo = spec;
        model.source = std::make_unique<hv::DeterministicSource>(std::move(m));
    } else {
        throw ConfigError(context + ": unknown model type '" + type + "'");
    }
    return model;
}

struct ModelFlags {
    std::string model;       // qt | contextual | "" (use file)
    std::string model_file;  // JSON spec path
    double t0 = 1.0;
    double delay_exponent = 3.0;
    double pair_spacing = 1000.0;
};

ModelSpec make_model(const ModelFlags& flags) {
    if (!flags.model_file.empty()) {
        std::ifstream in(flags.model_file, std::ios::binary);
        if (!in) throw ConfigError("cannot open model file '" + flags.model_file + "'");
        Json spec;
        try {
            in >> spec;
        } catch (const Json::exception& e) {
            throw ConfigError("model file '" + flags.model_file + "': " + e.what());
        }
        return make_model_from_json(spec, "model file '" + flags.model_file + "'");
    }
    if (flags.model == "qt") return make_model_from_json(Json{{"type", "qt"}}, "--model");
    if (flags.model == "contextual") {
        Json spec{{"type", "contextual"},
                  {"t0", flags.t0},
                  {"delay_exponent", flags.delay_exponent},
                  {"pair_spacing", flags.pair_spacing}};
        return make_model_from_json(spec, "--model");
    }
    if (flags.model.empty())
        throw ConfigError("specify --model qt|contextual or --model-file FILE");
    throw ConfigError("--model: unknown model '" + flags.model +
                      "' (table models need --model-file)");
}

void add_model_flags(CLI::App* sub, ModelFlags& flags) {
    sub->add_option("--model", flags.model, "Model: qt or contextual");
    sub->add_option("--model-file", flags.model_file,
                    "JSON model spec (qt, contextual, factorizable, deterministic)");
    sub->add_option("--t0", flags.t0, "Contextual delay scale (seconds)");
    sub->add_option("--d", flags.delay_exponent, "Contextual delay exponent");
    sub->add_option("--spacing", flags.pair_spacing, "Contextual emission period (seconds)");
}

Json estimate_echo(const SettingPairEstimate& e) {
    return Json{{"label_a", e.setting_a.label},
                {"label_b", e.setting_b.label},
                {"angle_a_rad", e.setting_a.angle.radians()},
                {"angle_b_rad", e.setting_b.angle.radians()},
                {"e_hat", e.estimate.e_hat},
                {"n_matched", e.estimate.n_matched},
                {"std_error", e.estimate.std_error}};
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

void finish_report(Json& report, const Timer& timer, bool timing, const fs::path& path) {
    if (timing) report["wall_time_s"] = timer.seconds();
    io::emit_report(report, path);
}

// ---------------------------------------------------------------------------
// Subcommand: simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
    ModelFlags model;
    double theta_a_deg = 0.0;
    double theta_b_deg = 0.0;
    std::string labels = "A,B";
    std::string x_label, y_label;
    std::int64_t n_pairs = 10000;
    std::uint64_t seed = 0;
    std::string out = ".";
    bool timing = false;
};

int handle_simulate(const SimulateOpts& opts) {
    Timer timer;
    if (opts.n_pairs < 1) throw ConfigError("--n: need at least one pair");
    ModelSpec model = make_model(opts.model);

    Setting sa, sb;
    const bool table_model =
        model.kind == "factorizable" || model.kind == "deterministic";
    if (table_model) {
        if (opts.x_label.empty() || opts.y_label.empty())
            throw ConfigError("table models need --x and --y setting labels");
        sa = Setting{opts.x_label, AnalyzerSetting(0.0)};
        sb = Setting{opts.y_label, AnalyzerSetting(0.0)};
    } else {
        const auto labels = parse_label_list(opts.labels);
        if (labels.size() != 2) throw ConfigError("--labels: expected two labels");
        sa = Setting{labels[0], AnalyzerSetting::from_degrees(opts.theta_a_deg)};
        sb = Setting{labels[1], AnalyzerSetting::from_degrees(opts.theta_b_deg)};
    }

    Json config{{"subcommand", "simulate"},
                {"model", model.echo},
                {"n_pairs", opts.n_pairs},
                {"seed", opts.seed}};
    if (table_model) {
        config["x"] = sa.label;
        config["y"] = sb.label;
    } else {
        config["theta_a_deg"] = opts.theta_a_deg;
        config["theta_b_deg"] = opts.theta_b_deg;
        config["labels"] = opts.labels;
    }

    const StreamPair streams = model.source->generate(sa, sb, opts.n_pairs, opts.seed);
    const fs::path out_dir(opts.out);
    io::write_event_log(streams, out_dir / "events.csv");

    Json report = io::make_report(config);
    report["results"] = Json{{"events", "events.csv"},
                             {"n_a", streams.a.size()},
                             {"n_b", streams.b.size()}};
    finish_report(report, timer, opts.timing, out_dir / "report.json");
    return 0;
}

// ---------------------------------------------------------------------------
// Subcommand: chsh
// ---------------------------------------------------------------------------

struct ChshOpts {
    ModelFlags model;
    std::string angles = "0,90,45,135";
    std::string labels = "a,ap,b,bp";
    std::int64_t n_pairs = 10000;
    std::uint64_t seed = 0;
    std::string window = "auto";
    std::string out = ".";
    std::string from_logs;
    bool save_logs = false;
    bool timing = false;
};

Json chsh_results_echo(const CHSHResult& result) {
    return Json{{"estimates", Json{{"ab", estimate_echo(result.ab)},
                                   {"ab_prime", estimate_echo(result.ab_prime)},
                                   {"a_prime_b", estimate_echo(result.a_prime_b)},
                                   {"a_prime_b_prime",
                                    estimate_echo(result.a_prime_b_prime)}}},
                {"s", result.s},
                {"s_std_error", result.s_std_error}};
}

CHSHResult assemble_chsh(const std::array<SettingPairEstimate, 4>& passes) {
    CHSHResult result;
    result.ab = passes[0];
    result.ab_prime = passes[1];
    result.a_prime_b = passes[2];
    result.a_prime_b_prime = passes[3];
    result.s = chsh_statistic(passes[0].estimate.e_hat, passes[1].estimate.e_hat,
                              passes[2].estimate.e_hat, passes[3].estimate.e_hat);
    double v = 0.0;
    for (const auto& p : passes) v += p.estimate.std_error * p.estimate.std_error;
    result.s_std_error = std::sqrt(v);
    return result;
}

int handle_chsh(const ChshOpts& opts) {
    Timer timer;
    static constexpr const char* k_pair_files[4] = {"pair_ab.csv", "pair_abp.csv",
                                                    "pair_apb.csv", "pair_apbp.csv"};
    const fs::path out_dir(opts.out);

    if (!opts.from_logs.empty()) {
        const CoincidenceWindow window = parse_window(opts.window, std::nullopt);
        Json config{{"subcommand", "chsh"},
                    {"from_logs", opts.from_logs},
                    {"window", window_echo(window)},
                    {"seed", opts.seed}};

        std::array<SettingPairEstimate, 4> passes;
        for (int i = 0; i < 4; ++i) {
            const fs::path log = fs::path(opts.from_logs) / k_pair_files[i];
            const StreamPair streams = io::read_event_log(log);
            if (streams.a.empty() || streams.b.empty())
                throw DataError(log.string() + ": empty stream");
            passes[static_cast<std::size_t>(i)].setting_a =
                Setting{streams.a.front().setting_label,
                        AnalyzerSetting(streams.a.front().setting_rad)};
            passes[static_cast<std::size_t>(i)].setting_b =
                Setting{streams.b.front().setting_label,
                        AnalyzerSetting(streams.b.front().setting_rad)};
            const auto matched = match_coincidences(streams.a, streams.b, window);
            passes[static_cast<std::size_t>(i)].estimate = estimate_correlation(matched);
        }
        const CHSHResult result = assemble_chsh(passes);
        Json report = io::make_report(config);
        report["results"] = chsh_results_echo(result);
        finish_report(report, timer, opts.timing, out_dir / "report.json");
        return 0;
    }

    if (opts.n_pairs < 1) throw ConfigError("--n: need at least one pair");
    ModelSpec model = make_model(opts.model);
    const CoincidenceWindow window = parse_window(opts.window, model.default_window);

    const auto angles = parse_double_list(opts.angles, "--angles");
    const auto labels = parse_label_list(opts.labels);
    if (angles.size() != 4) throw ConfigError("--angles: expected 4 values (a,a',b,b')");
    if (labels.size() != 4) throw ConfigError("--labels: expected 4 labels (a,a',b,b')");
    const Setting a{labels[0], AnalyzerSetting::from_degrees(angles[0])};
    const Setting ap{labels[1], AnalyzerSetting::from_degrees(angles[1])};
    const Setting b{labels[2], AnalyzerSetting::from_degrees(angles[2])};
    const Setting bp{labels[3], AnalyzerSetting::from_degrees(angles[3])};

    Json config{{"subcommand", "chsh"},
                {"model", model.echo},
                {"angles_deg", angles},
                {"labels", labels},
                {"n_pairs", opts.n_pairs},
                {"window", window_echo(window)},
                {"seed", opts.seed},
                {"save_logs", opts.save_logs}};

    CHSHResult result;
    if (opts.save_logs) {
        // Same passes and seed derivation as run_chsh_experiment, with each
        // pass's streams persisted.
        const std::array<std::pair<Setting, Setting>, 4> passes_cfg{
            {{a, b}, {a, bp}, {ap, b}, {ap, bp}}};
        std::array<SettingPairEstimate, 4> passes;
        for (int i = 0; i < 4; ++i) {
            const auto& [sa, sb] = passes_cfg[static_cast<std::size_t>(i)];
            const StreamPair streams = model.source->generate(
                sa, sb, opts.n_pairs, chsh_pass_seed(opts.seed, static_cast<std::uint64_t>(i)));
            io::write_event_log(streams, out_dir / k_pair_files[i]);
            const auto matched = match_coincidences(streams.a, streams.b, window);
            passes[static_cast<std::size_t>(i)] =
                SettingPairEstimate{sa, sb, estimate_correlation(matched)};
        }
        result = assemble_chsh(passes);
    } else {
        result = run_chsh_experiment(*model.source, a, ap, b, bp, opts.n_pairs, window,
                                     opts.seed);
    }

    Json report = io::make_report(config);
    report["results"] = chsh_results_echo(result);
    finish_report(report, timer, opts.timing, out_dir / "report.json");
    return 0;
}

// ---------------------------------------------------------------------------
// Subcommand: scan
// ---------------------------------------------------------------------------

struct ScanOpts {
    ModelFlags model;
    int points = 13;
    double delta_max_deg = 180.0;
    std::int64_t n_pairs = 10000;
    std::uint64_t seed = 0;
    std::string window = "auto";
    std::string out = ".";
    bool timing = false;
};

int handle_scan(const ScanOpts& opts) {
    Timer timer;
    if (opts.points < 2) throw ConfigError("--points: need at least 2");
    if (opts.n_pairs < 1) throw ConfigError("--n: need at least one pair");
    ModelSpec model = make_model(opts.model);
    if (model.kind == "factorizable" || model.kind == "deterministic")
        throw ConfigError("scan needs an angle-driven model (qt or contextual)");
    const CoincidenceWindow window = parse_window(opts.window, model.default_window);

    Json config{{"subcommand", "scan"},     {"model", model.echo},
                {"points", opts.points},    {"delta_max_deg", opts.delta_max_deg},
                {"n_pairs", opts.n_pairs},  {"window", window_echo(window)},
                {"seed", opts.seed}};

    Json points = Json::array();
    std::vector<std::vector<double>> plot_rows;
    for (int j = 0; j < opts.points; ++j) {
        const double delta_deg = opts.delta_max_deg * static_cast<double>(j) /
                                 static_cast<double>(opts.points - 1);
        const double delta_rad = degrees_to_radians(delta_deg);
        const Setting sa{"a", AnalyzerSetting(0.0)};
        const Setting sb{"b", AnalyzerSetting(delta_rad)};
        const std::uint64_t point_seed =
            derive_seed(opts.seed, {seed_tag::scan_point, static_cast<std::uint64_t>(j)});
        const StreamPair streams = model.source->generate(sa, sb, opts.n_pairs, point_seed);
        const auto matched = match_coincidences(streams.a, streams.b, window);
        const CorrelationEstimate est = estimate_correlation(matched);

        points.push_back(Json{{"delta_deg", delta_deg},
                              {"delta_rad", delta_rad},
                              {"e_hat", est.e_hat},
                              {"n_matched", est.n_matched},
                              {"std_error", est.std_error},
                              {"singlet_prediction", -std::cos(delta_rad)}});
        plot_rows.push_back({delta_deg, est.e_hat, est.e_hat - 1.96 * est.std_error,
                             est.e_hat + 1.96 * est.std_error});
    }

    const fs::path out_dir(opts.out);
    write_plot_csv(out_dir / "scan.csv", "x,y,band_lo,band_hi", plot_rows);
    Json report = io::make_report(config);
    report["results"] = Json{{"points", points}};
    finish_report(report, timer, opts.timing, out_dir / "report.json");
    return 0;
}

// ---------------------------------------------------------------------------
// Subcommand: purity
// ---------------------------------------------------------------------------

struct PurityOpts {
    std::string input;
    std::string column = "z";
    int splits = 2;
    std::uint64_t seed = 0;
    std::string out = ".";
    bool timing = false;
};

Json runs_echo(const purity::RunsTestReport& r) {
    return Json{{"n1", r.n1},
                {"n2", r.n2},
                {"runs", r.runs},
                {"expected_runs", r.expected_runs},
                {"var_runs", r.var_runs},
                {"z", r.z},
                {"p_value", r.p_value},
                {"normal_approx_reliable", r.normal_approx_reliable}};
}

int handle_purity(const PurityOpts& opts) {
    Timer timer;
    if (opts.input.empty()) throw ConfigError("--input is required");
    if (opts.splits < 2) throw ConfigError("--splits: need at least 2 blocks");

    Json config{{"subcommand", "purity"}, {"input", opts.input}, {"column", opts.column},
                {"splits", opts.splits},  {"seed", opts.seed}};

    const auto series = read_csv_column(opts.input, opts.column);
    purity::PurityReport purity_report;
    try {
        purity_report = purity::split_sample_purity(series, opts.splits);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }

    Json pairwise = Json::array();
    for (const auto& t : purity_report.pairwise)
        pairwise.push_back(Json{{"block_i", t.block_i},
                                {"block_j", t.block_j},
                                {"u", t.u},
                                {"p_value", t.p_value}});
    Json results{{"n", series.size()},
                 {"blocks", purity_report.blocks},
                 {"pairwise", pairwise},
                 {"runs_degenerate", purity_report.runs_degenerate},
                 {"runs", purity_report.runs_degenerate ? Json(nullptr)
                                                        : runs_echo(purity_report.runs)},
                 {"tests_performed", purity_report.tests_performed},
                 {"alpha", purity_report.alpha},
                 {"flagged", purity_report.flagged}};

    Json report = io::make_report(config);
    report["results"] = results;
    finish_report(report, timer, opts.timing, fs::path(opts.out) / "report.json");
    return 0;
}

// ---------------------------------------------------------------------------
// Subcommand: timeseries
// ---------------------------------------------------------------------------

struct TimeseriesOpts {
    std::string input;
    std::string column = "z";
    std::string gen_ar;
    std::int64_t gen_n = 500;
    double gen_noise_var = 1.0;
    int max_lag = 20;
    int fit_order = -1;  // -1: fit the selected order
    int bins = 0;        // 0: Sturges
    std::uint64_t seed = 0;
    std::string out = ".";
    bool timing = false;
};

int handle_timeseries(const TimeseriesOpts& opts) {
    Timer timer;
    if (opts.input.empty() == opts.gen_ar.empty())
        throw ConfigError("need exactly one of --input or --gen-ar");
    if (opts.max_lag < 1) throw ConfigError("--maxlag: need at least 1");

    Json config{{"subcommand", "timeseries"},
                {"column", opts.column},
                {"maxlag", opts.max_lag},
                {"fit", opts.fit_order},
                {"bins", opts.bins},
                {"seed", opts.seed}};

    const fs::path out_dir(opts.out);
    std::vector<double> series;
    if (!opts.gen_ar.empty()) {
        const auto coeffs = parse_double_list(opts.gen_ar, "--gen-ar");
        if (opts.gen_n < 1) throw ConfigError("--gen-n: need at least one point");
        if (!(opts.gen_noise_var > 0.0)) throw ConfigError("--gen-noise-var: must be > 0");
        std::optional<ts::ARModel> model;
        try {
            model.emplace(coeffs, opts.gen_noise_var);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("--gen-ar: ") + e.what());
        }
        series = ts::simulate_ar(*model, opts.gen_n, opts.seed).values;
        config["gen_ar"] = coeffs;
        config["gen_n"] = opts.gen_n;
        config["gen_noise_var"] = opts.gen_noise_var;
    } else {
        config["input"] = opts.input;
        series = read_csv_column(opts.input, opts.column);
    }

    const std::int64_t n = static_cast<std::int64_t>(series.size());
    Json results;
    try {
        const auto stats = ts::descriptive_stats(series);
        results["descriptives"] = Json{{"n", stats.n},
                                       {"mean", stats.mean},
                                       {"variance", stats.variance},
                                       {"skewness", stats.skewness},
                                       {"excess_kurtosis", stats.excess_kurtosis},
                                       {"min", stats.min},
                                       {"max", stats.max}};

        const int bins =
            opts.bins > 0
                ? opts.bins
                : 1 + static_cast<int>(std::ceil(std::log2(static_cast<double>(n))));
        const auto hist = ts::histogram(series, bins);
        results["histogram"] = Json{{"edges", hist.edges}, {"counts", hist.counts}};

        const int max_lag = static_cast<int>(std::min<std::int64_t>(opts.max_lag, n - 1));
        const auto correlogram = ts::pacf(series, max_lag);
        results["band"] = correlogram.band;
        results["acf"] = correlogram.acf;
        results["pacf"] = correlogram.pacf;

        const int selection_lag =
            static_cast<int>(std::min<std::int64_t>(max_lag, (n - 1) / 4));
        std::optional<int> selected;
        if (selection_lag >= 1) selected = ts::select_order(series, selection_lag);
        results["selected_order"] = selected ? Json(*selected) : Json(nullptr);

        // An explicit --fit must succeed or fail loudly; the auto path only
        // fits when a positive order was selected and the sample suffices.
        std::optional<int> fit_order;
        if (opts.fit_order >= 0)
            fit_order = opts.fit_order;
        else if (selected && *selected > 0 &&
                 n >= 10 * static_cast<std::int64_t>(*selected))
            fit_order = *selected;
        if (fit_order) {
            const auto model = ts::fit_ar(series, *fit_order);
            results["fit"] = Json{{"order", model.order()},
                                  {"coefficients", model.coefficients()},
                                  {"noise_variance", model.noise_variance()}};
        } else {
            results["fit"] = nullptr;
        }

        // Plot data
        if (!opts.gen_ar.empty()) write_series_csv(out_dir / "series.csv", series);
        std::vector<std::vector<double>> acf_rows, pacf_rows, hist_rows, ns_rows;
        for (std::size_t k = 0; k < correlogram.acf.size(); ++k)
            acf_rows.push_back({static_cast<double>(k), correlogram.acf[k],
                                -correlogram.band, correlogram.band});
        for (std::size_t k = 0; k < correlogram.pacf.size(); ++k)
            pacf_rows.push_back({static_cast<double>(k), correlogram.pacf[k],
                                 -correlogram.band, correlogram.band});
        for (std::size_t i = 0; i < hist.counts.size(); ++i)
            hist_rows.push_back({0.5 * (hist.edges[i] + hist.edges[i + 1]),
                                 static_cast<double>(hist.counts[i])});
        if (n >= 8)
            for (const auto& [q, v] : ts::normal_scores(series)) ns_rows.push_back({q, v});

        write_plot_csv(out_dir / "acf.csv", "x,y,band_lo,band_hi", acf_rows);
        write_plot_csv(out_dir / "pacf.csv", "x,y,band_lo,band_hi", pacf_rows);
        write_plot_csv(out_dir / "hist.csv", "x,y", hist_rows);
        if (!ns_rows.empty())
            write_plot_csv(out_dir / "normal_scores.csv", "x,y", ns_rows);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    } catch (const std::domain_error& e) {
        throw DataError(e.what());
    }

    Json report = io::make_report(config);
    report["results"] = results;
    finish_report(report, timer, opts.timing, out_dir / "report.json");
    return 0;
}

// ---------------------------------------------------------------------------
// Subcommand: calibrate
// ---------------------------------------------------------------------------

struct CalibrateOpts {
    std::string d_grid = "0,1,2,3,4";
    std::string w_grid = "0.005,0.01,0.02,0.05";
    std::int64_t n_pairs = 100000;
    double t0 = 1.0;
    double pair_spacing = 1000.0;
    std::uint64_t seed = 0;
    std::string out = ".";
    bool timing = false;
};

int handle_calibrate(const CalibrateOpts& opts) {
    Timer timer;
    if (opts.n_pairs < 1) throw ConfigError("--n: need at least one pair");
    const auto d_grid = parse_double_list(opts.d_grid, "--d-grid");
    const auto w_grid = parse_double_list(opts.w_grid, "--w-grid");

    hv::ContextualEventModel base;
    base.t0 = opts.t0;
    base.pair_spacing = opts.pair_spacing;
    try {
        base.validate();
        for (double d : d_grid)
            if (!(d >= 0.0)) throw ConfigError("--d-grid: exponents must be >= 0");
        for (double w : w_grid)
            if (!(w >= 0.0)) throw ConfigError("--w-grid: windows must be >= 0");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    Json config{{"subcommand", "calibrate"},
                {"d_grid", d_grid},
                {"w_grid", w_grid},
                {"n_pairs", opts.n_pairs},
                {"t0", opts.t0},
                {"pair_spacing", opts.pair_spacing},
                {"seed", opts.seed}};

    const auto report_data =
        hv::calibrate_contextual(base, d_grid, w_grid, opts.n_pairs, opts.seed);

    Json cells = Json::array();
    for (const auto& cell : report_data.cells)
        cells.push_back(Json{{"delay_exponent", cell.delay_exponent},
                             {"window", cell.window},
                             {"max_abs_deviation", cell.max_abs_deviation},
                             {"deviations", cell.deviations}});
    const auto& best = report_data.cells[report_data.best_cell];
    Json results{{"delta_grid_rad", report_data.delta_grid},
                 {"n_pairs", report_data.n_pairs},
                 {"cells", cells},
                 {"best", Json{{"delay_exponent", best.delay_exponent},
                               {"window", best.window},
                               {"max_abs_deviation", best.max_abs_deviation}}}};

    Json report = io::make_report(config);
    report["results"] = results;
    finish_report(report, timer, opts.timing, fs::path(opts.out) / "report.json");
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"spce: Monte Carlo laboratory for spin-polarization-correlation "
                 "experiments and time-series purity analysis"};
    app.require_subcommand(1);

    SimulateOpts simulate_opts;
    auto* simulate = app.add_subcommand("simulate", "Generate per-station event logs");
    add_model_flags(simulate, simulate_opts.model);
    simulate->add_option("--theta-a", simulate_opts.theta_a_deg, "Station A setting (deg)");
    simulate->add_option("--theta-b", simulate_opts.theta_b_deg, "Station B setting (deg)");
    simulate->add_option("--labels", simulate_opts.labels, "Two setting labels");
    simulate->add_option("--x", simulate_opts.x_label, "Setting label for station A (tables)");
    simulate->add_option("--y", simulate_opts.y_label, "Setting label for station B (tables)");
    simulate->add_option("--n", simulate_opts.n_pairs, "Number of pairs");
    simulate->add_option("--seed", simulate_opts.seed, "Master seed");
    simulate->add_option("--out", simulate_opts.out, "Output directory");
    simulate->add_flag("--timing", simulate_opts.timing, "Add wall time to the report");

    ChshOpts chsh_opts;
    auto* chsh = app.add_subcommand("chsh", "Four-settings CHSH experiment");
    add_model_flags(chsh, chsh_opts.model);
    chsh->add_option("--angles", chsh_opts.angles, "a,a',b,b' in degrees");
    chsh->add_option("--labels", chsh_opts.labels, "a,a',b,b' setting labels");
    chsh->add_option("--n", chsh_opts.n_pairs, "Pairs per setting pair");
    chsh->add_option("--seed", chsh_opts.seed, "Master seed");
    chsh->add_option("--window", chsh_opts.window, "Coincidence window: off, auto or seconds");
    chsh->add_option("--out", chsh_opts.out, "Output directory");
    chsh->add_option("--from-logs", chsh_opts.from_logs,
                     "Analyze stored logs (pair_ab.csv .. pair_apbp.csv) from this directory");
    chsh->add_flag("--save-logs", chsh_opts.save_logs, "Persist per-pass event logs");
    chsh->add_flag("--timing", chsh_opts.timing, "Add wall time to the report");

    ScanOpts scan_opts;
    auto* scan = app.add_subcommand("scan", "Correlation vs angle difference");
    add_model_flags(scan, scan_opts.model);
    scan->add_option("--points", scan_opts.points, "Grid points");
    scan->add_option("--delta-max", scan_opts.delta_max_deg, "Largest angle difference (deg)");
    scan->add_option("--n", scan_opts.n_pairs, "Pairs per point");
    scan->add_option("--seed", scan_opts.seed, "Master seed");
    scan->add_option("--window", scan_opts.window, "Coincidence window: off, auto or seconds");
    scan->add_option("--out", scan_opts.out, "Output directory");
    scan->add_flag("--timing", scan_opts.timing, "Add wall time to the report");

    PurityOpts purity_opts;
    auto* purity = app.add_subcommand("purity", "Split-sample purity tests on a CSV column");
    purity->add_option("--input", purity_opts.input, "Input CSV");
    purity->add_option("--column", purity_opts.column, "Column name");
    purity->add_option("--splits", purity_opts.splits, "Number of contiguous blocks");
    purity->add_option("--seed", purity_opts.seed, "Echoed in the report");
    purity->add_option("--out", purity_opts.out, "Output directory");
    purity->add_flag("--timing", purity_opts.timing, "Add wall time to the report");

    TimeseriesOpts ts_opts;
    auto* timeseries =
        app.add_subcommand("timeseries", "Descriptives, ACF/PACF, order selection, AR fit");
    timeseries->add_option("--input", ts_opts.input, "Input CSV");
    timeseries->add_option("--column", ts_opts.column, "Column name");
    timeseries->add_option("--gen-ar", ts_opts.gen_ar,
                           "Simulate an AR series with these coefficients instead of --input");
    timeseries->add_option("--gen-n", ts_opts.gen_n, "Generated series length");
    timeseries->add_option("--gen-noise-var", ts_opts.gen_noise_var,
                           "Generated noise variance");
    timeseries->add_option("--maxlag", ts_opts.max_lag, "Largest correlogram lag");
    timeseries->add_option("--fit", ts_opts.fit_order,
                           "AR order to fit (default: the selected order)");
    timeseries->add_option("--bins", ts_opts.bins, "Histogram bins (default: Sturges)");
    timeseries->add_option("--seed", ts_opts.seed, "Master seed (generation only)");
    timeseries->add_option("--out", ts_opts.out, "Output directory");
    timeseries->add_flag("--timing", ts_opts.timing, "Add wall time to the report");

    CalibrateOpts cal_opts;
    auto* calibrate =
        app.add_subcommand("calibrate", "Sweep the contextual model's (exponent, window) grid");
    calibrate->add_option("--d-grid", cal_opts.d_grid, "Delay exponents, comma separated");
    calibrate->add_option("--w-grid", cal_opts.w_grid, "Windows (seconds), comma separated");
    calibrate->add_option("--n", cal_opts.n_pairs, "Pairs per grid point");
    calibrate->add_option("--t0", cal_opts.t0, "Delay scale (seconds)");
    calibrate->add_option("--spacing", cal_opts.pair_spacing, "Emission period (seconds)");
    calibrate->add_option("--seed", cal_opts.seed, "Master seed");
    calibrate->add_option("--out", cal_opts.out, "Output directory");
    calibrate->add_flag("--timing", cal_opts.timing, "Add wall time to the report");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("spce");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (simulate->parsed()) return handle_simulate(simulate_opts);
        if (chsh->parsed()) return handle_chsh(chsh_opts);
        if (scan->parsed()) return handle_scan(scan_opts);
        if (purity->parsed()) return handle_purity(purity_opts);
        if (timeseries->parsed()) return handle_timeseries(ts_opts);
        if (calibrate->parsed()) return handle_calibrate(cal_opts);
        std::cerr << app.help();
        return 2;
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace spce::cli
