#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "gcoerce/experiments.hpp"
#include "gcoerce/io.hpp"
#include "gcoerce/stats.hpp"
#include "gcoerce/theory.hpp"

using namespace gcoerce;

namespace {

constexpr int kSchemaVersion = 1;

// Flags shared by every subcommand; option pointers record whether an
// override was actually given.
struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string format = "csv";
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_dir_opt = nullptr;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "Structured text config file");
    sub->add_option("--set", c.overrides, "Override one config entry (section.key=value)")
        ->type_name("KEY=VALUE");
    c.seed_opt = sub->add_option("--seed", c.seed, "Override ensemble.seed_begin");
    c.out_dir_opt = sub->add_option("--out-dir", c.out_dir, "Directory for output files");
    sub->add_option("--format", c.format, "Stdout format")
        ->check(CLI::IsMember({"csv", "json"}));
}

std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExperimentConfig load_config(const Common& c) {
    std::map<std::string, std::string> kv;
    if (!c.config_path.empty()) kv = parse_config_text(slurp_file(c.config_path));
    for (const std::string& entry : c.overrides) {
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("--set needs key=value, got: " + entry);
        kv[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    ExperimentConfig config = config_from_key_values(kv);
    if (c.seed_opt->count() > 0) config.seed_begin = c.seed;
    if (c.out_dir_opt->count() > 0) config.out_dir = c.out_dir;
    return config;
}

std::filesystem::path prepare_out_dir(const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string csv_quote(const std::string& s) {
    std::string quoted = "\"";
    for (char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

int run_gen_field(const Common& c) {
    const ExperimentConfig config = load_config(c);
    const VelocityField field = make_field(config.field, config.seed_begin);
    const std::string json = field.to_json() + "\n";
    if (!config.out_dir.empty()) {
        const auto dir = prepare_out_dir(config.out_dir);
        write_text_file(dir / "field.json", json);
        std::cout << "wrote " << (dir / "field.json").string() << "\n";
    } else {
        std::cout << json;
    }
    return 0;
}

int run_stats(const Common& c) {
    const ExperimentConfig config = load_config(c);
    const VelocityField field = make_field(config.field, config.seed_begin);
    const EmpiricalStats stats =
        r_star(field, config.t0, config.sources.front(), config.n_subdivision, config.epsilon,
               config.r_min, config.r_max, config.r_ratio, config.q);

    std::ostringstream csv;
    csv << "r,E_N,censored\n";
    for (std::size_t i = 0; i < stats.r_values.size(); ++i) {
        const bool censoring_row = stats.censored && i + 1 == stats.r_values.size();
        csv << format_double(stats.r_values[i]) << ',' << format_double(stats.e_n_values[i])
            << ',' << (censoring_row ? 1 : 0) << '\n';
    }
    const nlohmann::json summary = {
        {"schema_version", kSchemaVersion}, {"r_star", stats.r_star},
        {"censored", stats.censored},       {"epsilon", stats.epsilon},
        {"n_subdivision", stats.n_subdivision},
        {"n_radii", stats.r_values.size()},
    };
    if (!config.out_dir.empty()) {
        const auto dir = prepare_out_dir(config.out_dir);
        write_text_file(dir / "stats.csv", csv.str());
        write_text_file(dir / "stats.json", summary.dump(2) + "\n");
    }
    if (c.format == "json")
        std::cout << summary.dump(2) << "\n";
    else
        std::cout << csv.str();
    return 0;
}

int run_evolve(const Common& c, std::vector<double> snapshot_times) {
    const ExperimentConfig config = load_config(c);
    validate(config);
    const VelocityField field = make_field(config.field, config.seed_begin);

    GridSpec grid;
    grid.dim = config.field.dim;
    grid.n = config.grid_n;
    grid.h = config.grid_h;
    grid.center = config.sources.front();
    const double delta = config.delta > 0.0 ? config.delta : 2.0 * grid.h;
    LevelSetState state =
        init_point_source(grid, config.sources.front(), delta, config.t0, config.speed);

    std::sort(snapshot_times.begin(), snapshot_times.end());
    std::filesystem::path dir;
    if (!config.out_dir.empty()) dir = prepare_out_dir(config.out_dir);
    const auto dump = [&](const LevelSetState& s, const std::string& stem) {
        if (config.out_dir.empty()) return;
        std::ofstream occ(dir / ("occupancy_" + stem + ".bin"), std::ios::binary);
        write_occupancy(occ, s);
        std::ofstream ind(dir / ("indicator_" + stem + ".bin"), std::ios::binary);
        write_indicator(ind, reachable_indicator(s, config.threshold));
    };

    int index = 0;
    evolve(
        state, field, config.horizon, snapshot_times,
        [&](const LevelSetState& s) {
            char stem[16];
            std::snprintf(stem, sizeof(stem), "%03d", index++);
            dump(s, stem);
        },
        config.cfl_safety);
    dump(state, "final");

    const ReachableSet final_set = reachable_indicator(state, config.threshold);
    const double vol = volume(final_set);
    const double inscribed = inscribed_ball_radius(final_set);
    if (c.format == "json") {
        const nlohmann::json summary = {{"schema_version", kSchemaVersion},
                                        {"t", state.time},
                                        {"volume", vol},
                                        {"inscribed_radius", inscribed},
                                        {"snapshots", index}};
        std::cout << summary.dump(2) << "\n";
    } else {
        std::cout << "t,volume,inscribed_radius\n"
                  << format_double(state.time) << ',' << format_double(vol) << ','
                  << format_double(inscribed) << "\n";
    }
    return 0;
}

int run_waiting_time(const Common& c) {
    const ExperimentConfig config = load_config(c);
    const std::vector<WaitingTimeRecord> records = run_waiting_time_ensemble(config);
    int censored = 0;
    for (const auto& rec : records) censored += rec.censored ? 1 : 0;

    if (c.format == "json") {
        const nlohmann::json summary = {{"schema_version", kSchemaVersion},
                                        {"records", records.size()},
                                        {"censored", censored},
                                        {"out_dir", config.out_dir}};
        std::cout << summary.dump(2) << "\n";
    } else if (config.out_dir.empty()) {
        std::cout << waiting_csv_header(config.field.dim);
        for (const auto& rec : records) std::cout << waiting_csv_row(rec, config.field.dim);
    } else {
        std::cout << "records,censored\n" << records.size() << ',' << censored << "\n";
    }
    return 0;
}

int run_tails(const Common& c, std::string records_path, int t_count, double t_max) {
    const ExperimentConfig config = load_config(c);
    if (records_path.empty()) {
        if (config.out_dir.empty())
            throw std::invalid_argument("tails: need --records or an out dir with records");
        records_path =
            (std::filesystem::path(config.out_dir) / "waiting_records.csv").string();
    }
    std::ifstream in(records_path, std::ios::binary);
    if (!in) throw std::invalid_argument("tails: cannot read " + records_path);
    const std::vector<WaitingTimeRecord> records = read_waiting_csv(in);
    if (records.empty()) throw std::invalid_argument("tails: no records in " + records_path);
    if (t_count < 2) throw std::invalid_argument("tails: --t-count must be >= 2");

    double hi = t_max;
    if (!(hi > 0.0)) {
        for (const auto& rec : records) hi = std::max(hi, rec.measured_T - rec.t0);
        if (!(hi > 0.0)) hi = 1.0;
    }
    std::vector<double> grid;
    grid.reserve(t_count);
    for (int i = 0; i < t_count; ++i) grid.push_back(hi * i / (t_count - 1));
    const TailCurve curve = tail_curve(records, grid);

    std::ostringstream csv;
    csv << "t,survival,wilson_lo,wilson_hi\n";
    for (std::size_t i = 0; i < curve.t.size(); ++i)
        csv << format_double(curve.t[i]) << ',' << format_double(curve.survival[i]) << ','
            << format_double(curve.wilson_lo[i]) << ',' << format_double(curve.wilson_hi[i])
            << '\n';
    const nlohmann::json summary = {
        {"schema_version", kSchemaVersion},
        {"n_samples", curve.n_samples},
        {"n_censored", curve.n_censored},
        {"fit_done", curve.fit_done},
        {"fitted_exponent", curve.fitted_exponent},
        {"fitted_scale", curve.fitted_scale},
    };
    if (!config.out_dir.empty()) {
        const auto dir = prepare_out_dir(config.out_dir);
        write_text_file(dir / "tail_curve.csv", csv.str());
        write_text_file(dir / "tail_summary.json", summary.dump(2) + "\n");
    }
    if (c.format == "json")
        std::cout << summary.dump(2) << "\n";
    else
        std::cout << csv.str();
    return 0;
}

int run_params(const Common& c, double M, int dim, double C_large, double c_small,
               double lambda1, bool m_given, bool dim_given) {
    if (!c.config_path.empty() || !c.overrides.empty()) {
        const ExperimentConfig config = load_config(c);
        if (!m_given) M = std::max(field_spec_bound(config.field), 0.5);
        if (!dim_given) dim = config.field.dim;
    }
    if (lambda1 <= 0.0) lambda1 = default_lambda1(dim);
    const TheoremParams p = theorem_parameters(M, dim, C_large, c_small, lambda1);
    const nlohmann::json j = {
        {"schema_version", kSchemaVersion},
        {"M", p.M},
        {"dim", p.dim},
        {"C", p.C},
        {"c", p.c},
        {"lambda1", p.lambda1},
        {"epsilon", p.epsilon},
        {"N", p.N},
        {"N_small_scale", p.N_small_scale},
        {"L", p.L},
        {"alpha", p.alpha},
        {"beta", p.beta},
        {"gamma", p.gamma},
        {"ln_ratio", p.ln_ratio},
        {"ln_consistent", p.ln_consistent},
        {"phi_a", p.phi_a},
        {"phi_b", p.phi_b},
        {"admissible", p.admissible},
        {"rejection_reason", p.rejection_reason},
    };
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_verify(const Common& c) {
    const ExperimentConfig config = load_config(c);
    const VerifyReport report = verify_suite(config);
    const std::string json = verify_report_json(report);
    if (!config.out_dir.empty()) {
        const auto dir = prepare_out_dir(config.out_dir);
        write_text_file(dir / "verify_report.json", json);
    }
    if (c.format == "csv") {
        std::cout << "check,passed,detail\n";
        for (const auto& check : report.checks)
            std::cout << check.name << ',' << (check.passed ? 1 : 0) << ','
                      << csv_quote(check.detail) << "\n";
    } else {
        std::cout << json;
    }
    return report.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reachable-set experiments for controlled front propagation"};
    app.require_subcommand(1);

    Common gen_field_c, stats_c, evolve_c, waiting_c, tails_c, params_c, verify_c;

    CLI::App* gen_field = app.add_subcommand("gen-field", "Generate a field and print its JSON");
    add_common(gen_field, gen_field_c);

    CLI::App* stats = app.add_subcommand("stats", "Sub-box averages and r_star sweep");
    add_common(stats, stats_c);

    CLI::App* evolve = app.add_subcommand("evolve", "Advance the front and write snapshots");
    add_common(evolve, evolve_c);
    std::vector<double> snapshot_times;
    evolve->add_option("--snapshot-times", snapshot_times, "Times to snapshot at");

    CLI::App* waiting = app.add_subcommand("waiting-time", "Run the waiting-time ensemble");
    add_common(waiting, waiting_c);

    CLI::App* tails = app.add_subcommand("tails", "Tail curve from recorded waiting times");
    add_common(tails, tails_c);
    std::string records_path;
    int t_count = 64;
    double t_max = 0.0;
    tails->add_option("--records", records_path, "waiting_records.csv path");
    tails->add_option("--t-count", t_count, "Grid points for the survival curve");
    tails->add_option("--t-max", t_max, "Upper end of the t grid (0 = from data)");

    CLI::App* params = app.add_subcommand("params", "Print derived theorem parameters");
    add_common(params, params_c);
    params_c.format = "json";
    double M = 1.0, C_large = 1.0, c_small = 1.0, lambda1 = 0.0;
    int dim = 2;
    CLI::Option* m_opt = params->add_option("--M", M, "Velocity amplitude bound");
    CLI::Option* dim_opt = params->add_option("--dim", dim, "Dimension");
    params->add_option("--C", C_large, "Large bookkeeping constant");
    params->add_option("--c", c_small, "Small bookkeeping constant");
    params->add_option("--lambda1", lambda1, "Isoperimetric constant (0 = built-in default)");

    CLI::App* verify = app.add_subcommand("verify", "Run the cross-module check suite");
    add_common(verify, verify_c);
    verify_c.format = "json";

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(gen_field)) return run_gen_field(gen_field_c);
        if (app.got_subcommand(stats)) return run_stats(stats_c);
        if (app.got_subcommand(evolve)) return run_evolve(evolve_c, snapshot_times);
        if (app.got_subcommand(waiting)) return run_waiting_time(waiting_c);
        if (app.got_subcommand(tails)) return run_tails(tails_c, records_path, t_count, t_max);
        if (app.got_subcommand(params))
            return run_params(params_c, M, dim, C_large, c_small, lambda1, m_opt->count() > 0,
                              dim_opt->count() > 0);
        if (app.got_subcommand(verify)) return run_verify(verify_c);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
