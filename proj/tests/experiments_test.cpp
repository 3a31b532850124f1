#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "gcoerce/experiments.hpp"
#include "gcoerce/io.hpp"
#include "gcoerce/random.hpp"
#include "gcoerce/theory.hpp"

using namespace gcoerce;

namespace {

ExperimentConfig small_zero_config() {
    ExperimentConfig config;
    config.field.kind = FieldKind::zero;
    config.grid_n = 64;
    config.grid_h = 1.0 / 32.0;
    config.c_values = {0.3, 0.6};
    config.horizon = 0.25;
    config.epsilon = 0.1;
    config.n_subdivision = 2;
    config.r_min = 0.25;
    config.r_max = 1.0;
    config.r_ratio = 1.1892071150027210667;
    config.q = 4;
    config.seed_begin = 7;
    config.n_seeds = 2;
    return config;
}

WaitingTimeRecord make_record(double T, double r_star, bool censored = false) {
    WaitingTimeRecord rec;
    rec.t0 = 0.0;
    rec.horizon = 100.0;
    rec.measured_T = T;
    rec.censored = censored;
    rec.r_star_measured = r_star;
    rec.r_star_censored = false;
    return rec;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("make_field dispatches on kind and is seed-deterministic") {
    FieldSpec spec;
    spec.kind = FieldKind::zero;
    const Vec3 p{0.3, -0.2, 0.0};
    CHECK(make_field(spec, 1).eval(0.5, p)[0] == 0.0);
    CHECK(field_spec_bound(spec) == 0.0);

    spec.kind = FieldKind::constant;
    spec.constant = {0.3, -0.4, 0.0};
    const Vec3 v = make_field(spec, 1).eval(0.5, p);
    CHECK(v[0] == 0.3);
    CHECK(v[1] == -0.4);
    CHECK(field_spec_bound(spec) == doctest::Approx(0.5).epsilon(1e-12));

    spec.kind = FieldKind::random_fourier;
    spec.amplitude = 1.5;
    CHECK(field_spec_bound(spec) == 1.5);
    const VelocityField a = make_field(spec, 42);
    const VelocityField b = make_field(spec, 42);
    const VelocityField c = make_field(spec, 43);
    bool same_seed_matches = true;
    bool other_seed_differs = false;
    for (int i = 0; i < 8; ++i) {
        const Vec3 x{0.1 * i, 0.07 * i, 0.0};
        const Vec3 va = a.eval(0.2 * i, x);
        const Vec3 vb = b.eval(0.2 * i, x);
        const Vec3 vc = c.eval(0.2 * i, x);
        if (va[0] != vb[0] || va[1] != vb[1]) same_seed_matches = false;
        if (va[0] != vc[0] || va[1] != vc[1]) other_seed_differs = true;
    }
    CHECK(same_seed_matches);
    CHECK(other_seed_differs);
}

TEST_CASE("config validation rejects out-of-range fields") {
    CHECK_NOTHROW(validate(small_zero_config()));

    ExperimentConfig config = small_zero_config();
    config.c_values = {1.0};  // must stay below speed
    CHECK_THROWS_AS(validate(config), std::invalid_argument);

    config = small_zero_config();
    config.c_values = {};
    CHECK_THROWS_AS(validate(config), std::invalid_argument);

    config = small_zero_config();
    config.sources = {};
    CHECK_THROWS_AS(validate(config), std::invalid_argument);

    config = small_zero_config();
    config.horizon = config.t0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);

    config = small_zero_config();
    config.cfl_safety = 0.9;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);

    config = small_zero_config();
    config.r_min = 0.0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);

    config = small_zero_config();
    config.r_ratio = 1.0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);

    config = small_zero_config();
    config.n_seeds = 0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);

    // Horizon too long for the window: the front could wrap around.
    config = small_zero_config();
    config.horizon = 1.0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
}

TEST_CASE("spaced sources sit 2 (A + M) span apart") {
    ExperimentConfig config = small_zero_config();
    const std::vector<Vec3> sources = spaced_sources(config, 3);
    REQUIRE(sources.size() == 3);
    CHECK(sources[0][0] == 0.0);
    const double spacing = 2.0 * config.speed * (config.horizon - config.t0);
    for (int k = 1; k < 3; ++k) {
        CHECK(sources[k][0] - sources[k - 1][0] == doctest::Approx(spacing).epsilon(1e-12));
        const double dx = sources[k][0] - sources[k - 1][0];
        const double dy = sources[k][1] - sources[k - 1][1];
        CHECK(std::sqrt(dx * dx + dy * dy) >= spacing);
    }
    CHECK_THROWS_AS(spaced_sources(config, 0), std::invalid_argument);
}

TEST_CASE("zero-field ensemble: ordering, trivial waiting times, reproducible CSV") {
    ExperimentConfig config = small_zero_config();
    const std::vector<WaitingTimeRecord> records = run_waiting_time_ensemble(config);
    REQUIRE(records.size() == 4);  // 2 seeds x 1 source x 2 c

    // Merged in (seed, source, c) order regardless of thread count.
    CHECK(records[0].seed == 7);
    CHECK(records[1].seed == 7);
    CHECK(records[2].seed == 8);
    CHECK(records[3].seed == 8);
    CHECK(records[0].coercivity_c == 0.3);
    CHECK(records[1].coercivity_c == 0.6);

    for (const auto& rec : records) {
        // Zero field: the front keeps pace with any c < speed from t0 on.
        CHECK(!rec.censored);
        CHECK(rec.measured_T == rec.t0);
        // E_N of the zero field never reaches epsilon at any radius.
        CHECK(rec.r_star_measured == 0.0);
        CHECK(!rec.r_star_censored);
    }

    const auto tmp = std::filesystem::temp_directory_path();
    const auto dir_a = tmp / "gcoerce_ens_a";
    const auto dir_b = tmp / "gcoerce_ens_b";
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    config.out_dir = dir_a.string();
    run_waiting_time_ensemble(config);
    config.out_dir = dir_b.string();
    run_waiting_time_ensemble(config);
    const std::string csv_a = slurp(dir_a / "waiting_records.csv");
    const std::string csv_b = slurp(dir_b / "waiting_records.csv");
    CHECK(csv_a == csv_b);
    CHECK(csv_a.substr(0, csv_a.find('\n') + 1) == waiting_csv_header(2));
    CHECK(std::count(csv_a.begin(), csv_a.end(), '\n') == 5);  // header + 4 rows
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("waiting time vs r_star correlation") {
    SUBCASE("perfect monotone pairing") {
        std::vector<WaitingTimeRecord> records;
        for (int i = 1; i <= 12; ++i)
            records.push_back(make_record(3.0 * i, static_cast<double>(i)));
        const CorrelationReport report = correlate_T_rstar(records);
        CHECK(report.n_used == 12);
        CHECK(report.n_censored == 0);
        CHECK(std::abs(report.spearman - 1.0) <= 1e-12);
        CHECK(std::abs(report.slope_through_origin - 3.0) <= 1e-12);
        CHECK(report.n_permutations == 10000);
        CHECK(report.p_value < 0.01);

        // Rank correlation only sees order: cubing T changes nothing.
        std::vector<WaitingTimeRecord> cubed = records;
        for (auto& rec : cubed) rec.measured_T = std::pow(rec.measured_T, 3);
        CHECK(correlate_T_rstar(cubed).spearman == report.spearman);
    }
    SUBCASE("anti-monotone pairing") {
        std::vector<WaitingTimeRecord> records;
        for (int i = 1; i <= 12; ++i)
            records.push_back(make_record(100.0 - i, static_cast<double>(i)));
        const CorrelationReport report = correlate_T_rstar(records);
        CHECK(std::abs(report.spearman + 1.0) <= 1e-12);
        CHECK(report.p_value > 0.5);  // one-sided test for positive association
    }
    SUBCASE("constant input has zero correlation under average ranks") {
        std::vector<WaitingTimeRecord> records;
        for (int i = 1; i <= 12; ++i)
            records.push_back(make_record(5.0, static_cast<double>(i)));
        CHECK(correlate_T_rstar(records).spearman == 0.0);
    }
    SUBCASE("censored records are excluded, too few uncensored is an error") {
        std::vector<WaitingTimeRecord> records;
        for (int i = 1; i <= 12; ++i)
            records.push_back(make_record(3.0 * i, static_cast<double>(i)));
        records.push_back(make_record(99.0, 1.0, true));
        records.push_back(make_record(99.0, 2.0, true));
        WaitingTimeRecord rc = make_record(1.0, 8.0);
        rc.r_star_censored = true;
        records.push_back(rc);
        const CorrelationReport report = correlate_T_rstar(records);
        CHECK(report.n_used == 12);
        CHECK(report.n_censored == 3);

        std::vector<WaitingTimeRecord> few(records.begin(), records.begin() + 9);
        CHECK_THROWS_AS(correlate_T_rstar(few), std::invalid_argument);
    }
}

TEST_CASE("phi domination detector on constructed curves") {
    const TheoremParams params = theorem_parameters(2.0, 2, 1.0, 1.0, default_lambda1(2));
    REQUIRE(params.alpha == doctest::Approx(3.14159265358979 / 16.0).epsilon(1e-10));
    const double r = 1.0;

    std::vector<double> times, volumes;
    for (int i = 0; i <= 500; ++i) {
        const double t = 0.01 * i;
        times.push_back(t);
        volumes.push_back(phi(t, params) * r * r);
    }

    SUBCASE("a curve tracing phi itself dominates with slack alpha") {
        const PhiDominationReport report = phi_domination_check(times, volumes, r, params);
        CHECK(report.t1_reached);
        CHECK(report.t2_reached);
        // t1 solves a t^2 = alpha, t2 solves 1 - a (2b - t)^2 = 1 - alpha/4.
        const double a = params.phi_a, b = params.phi_b;
        CHECK(std::abs(report.t1 - std::sqrt(params.alpha / a)) <= 0.011);
        CHECK(std::abs(report.t2 - (2.0 * b - std::sqrt(params.alpha / (4.0 * a)))) <= 0.011);
        CHECK(report.dominates);
        CHECK(report.within_comparison_window);
        // Rebasing at t1 gifts the curve a head start of alpha, and the gap
        // only widens afterward, so the minimum slack sits at t1 itself.
        CHECK(std::abs(report.min_slack - params.alpha) <= 0.01);
        CHECK(report.worst_time == report.t1);
    }
    SUBCASE("a late dip below the profile is caught and located") {
        std::vector<double> dipped = volumes;
        for (std::size_t i = 0; i < times.size(); ++i)
            if (times[i] >= 3.2 && times[i] <= 3.3) dipped[i] -= 0.5;
        const PhiDominationReport report = phi_domination_check(times, dipped, r, params);
        CHECK(report.t1_reached);
        CHECK(report.t2_reached);
        CHECK(!report.dominates);
        CHECK(report.min_slack < -0.04);
        CHECK(report.worst_time >= 3.19);
        CHECK(report.worst_time <= 3.31);
    }
    SUBCASE("volume never filling alpha leaves t1 unreached") {
        const PhiDominationReport report =
            phi_domination_check({0.0, 1.0, 2.0}, {0.01, 0.02, 0.03}, r, params);
        CHECK(!report.t1_reached);
        CHECK(!report.dominates);
    }
    SUBCASE("volume capped below the upper threshold leaves t2 unreached") {
        std::vector<double> capped_t, capped_v;
        for (int i = 0; i <= 800; ++i) {
            const double t = 0.01 * i;
            capped_t.push_back(t);
            capped_v.push_back(std::min(phi(t, params), 0.6));
        }
        const PhiDominationReport report = phi_domination_check(capped_t, capped_v, r, params);
        CHECK(report.t1_reached);
        CHECK(!report.t2_reached);
        CHECK(!report.within_comparison_window);
        CHECK(!report.dominates);  // phi reaches 1 while the curve stalls at 0.6
        CHECK(report.min_slack <= -0.39);
    }
    SUBCASE("record overload selects the matching diagnostic curve") {
        WaitingTimeRecord rec;
        rec.times = {0.0, 0.1, 0.2};
        BoxVolumeCurve curve;
        curve.side = 0.5;
        curve.volume = {0.0, 0.1, 0.25};
        rec.box_volumes.push_back(curve);
        CHECK_NOTHROW(phi_domination_check(rec, 0.5, params));
        CHECK_THROWS_AS(phi_domination_check(rec, 0.7, params), std::invalid_argument);
    }
}

TEST_CASE("phi domination holds on an honest zero-field run") {
    FieldSpec spec;
    spec.kind = FieldKind::zero;
    const VelocityField field = make_field(spec, 1);

    WaitingTimeSetup setup;
    setup.grid.dim = 2;
    setup.grid.n = 256;
    setup.grid.h = 1.0 / 64.0;
    setup.delta = 3.0 / 64.0;
    setup.diagnostic_box_sides = {0.75};
    const WaitingTimeRecord rec = waiting_time(field, kZeroVec, 0.3, 0.7, setup);
    REQUIRE(!rec.censored);

    const TheoremParams params = theorem_parameters(2.0, 2, 1.0, 1.0, default_lambda1(2));
    const PhiDominationReport report = phi_domination_check(rec, 0.75, params);
    CHECK(report.t1_reached);
    CHECK(report.t2_reached);
    CHECK(report.dominates);
    CHECK(report.min_slack > 0.0);
    // The ball fills the box far faster than the profile's worst case.
    CHECK(report.within_comparison_window);
    CHECK(report.t2 - report.t1 <= 0.6);
}

TEST_CASE("tail curve estimates survival and the stretched-exponential rate") {
    SUBCASE("synthetic stretched-exponential sample recovers its exponent") {
        // T = (-ln U)^(1/0.75) has survival exp(-t^0.75) exactly.
        Rng rng(2024);
        std::vector<WaitingTimeRecord> records;
        for (int i = 0; i < 200; ++i) {
            const double u = rng.uniform01();
            records.push_back(make_record(std::pow(-std::log(1.0 - u), 1.0 / 0.75), 1.0));
        }
        std::vector<double> grid;
        for (int i = 0; i <= 30; ++i) grid.push_back(0.1 * i);
        const TailCurve curve = tail_curve(records, grid);

        CHECK(curve.n_samples == 200);
        CHECK(curve.n_censored == 0);
        CHECK(curve.survival[0] == 1.0);
        for (std::size_t i = 0; i < curve.t.size(); ++i) {
            CHECK(curve.wilson_lo[i] >= 0.0);
            CHECK(curve.wilson_hi[i] <= 1.0);
            CHECK(curve.wilson_lo[i] <= curve.survival[i]);
            CHECK(curve.survival[i] <= curve.wilson_hi[i]);
            if (i > 0) CHECK(curve.survival[i] <= curve.survival[i - 1]);
        }
        REQUIRE(curve.fit_done);
        CHECK(std::abs(curve.fitted_exponent - 0.75) <= 0.1);
        CHECK(curve.fitted_scale > 0.6);
        CHECK(curve.fitted_scale < 1.5);
    }
    SUBCASE("identical values skip the fit") {
        std::vector<WaitingTimeRecord> records(40, make_record(1.0, 1.0));
        const TailCurve curve = tail_curve(records, {0.5, 1.0, 1.5});
        CHECK(!curve.fit_done);
        CHECK(curve.survival[0] == 1.0);
        CHECK(curve.survival[1] == 1.0);  // survival is P(T >= t)
        CHECK(curve.survival[2] == 0.0);
    }
    SUBCASE("censored records survive at the horizon") {
        std::vector<WaitingTimeRecord> records;
        for (int i = 0; i < 30; ++i)
            records.push_back(make_record(i / 30.0, 1.0));
        for (int i = 0; i < 10; ++i) {
            WaitingTimeRecord rec = make_record(2.0, 1.0, true);
            rec.horizon = 2.0;
            records.push_back(rec);
        }
        const TailCurve curve = tail_curve(records, {1.5});
        CHECK(curve.n_samples == 40);
        CHECK(curve.n_censored == 10);
        CHECK(curve.survival[0] == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("degenerate inputs are errors") {
        CHECK_THROWS_AS(tail_curve({}, {0.0}), std::invalid_argument);
        CHECK_THROWS_AS(tail_curve({make_record(1.0, 1.0)}, {}), std::invalid_argument);
        CHECK_THROWS_AS(tail_curve({make_record(1.0, 1.0)}, {1.0, 0.5}),
                        std::invalid_argument);
    }
}

TEST_CASE("verify suite passes a sound config and flags a broken CFL") {
    ExperimentConfig config;
    config.field.kind = FieldKind::random_fourier;
    config.field.amplitude = 1.0;
    config.horizon = 0.45;
    const VerifyReport good = verify_suite(config);
    for (const auto& check : good.checks) {
        CAPTURE(check.name);
        CAPTURE(check.detail);
        CHECK(check.passed);
    }
    CHECK(good.all_passed);
    CHECK(good.checks.size() >= 12);

    ExperimentConfig broken = config;
    broken.cfl_safety = 0.9;
    const VerifyReport bad = verify_suite(broken);
    CHECK(!bad.all_passed);
    int failed = 0;
    for (const auto& check : bad.checks)
        if (!check.passed) {
            ++failed;
            CHECK(check.name == "cfl_config");
        }
    CHECK(failed == 1);

    const std::string json = verify_report_json(bad);
    CHECK(json.find("schema_version") != std::string::npos);
    CHECK(json.find("cfl_config") != std::string::npos);
    CHECK(json.find("\"all_passed\": false") != std::string::npos);
}

TEST_CASE("config text parsing") {
    SUBCASE("sections flatten to dotted keys, comments and blanks are skipped") {
        const std::string text =
            "# top comment\n"
            "field.kind = zero\n"
            "\n"
            "[grid]\n"
            "n = 64   # trailing comment\n"
            "h = 0.03125\n"
            "[run]\n"
            "horizon = 0.25\n";
        const auto kv = parse_config_text(text);
        CHECK(kv.at("field.kind") == "zero");
        CHECK(kv.at("grid.n") == "64");
        CHECK(kv.at("grid.h") == "0.03125");
        CHECK(kv.at("run.horizon") == "0.25");
        CHECK(kv.size() == 4);
    }
    SUBCASE("malformed text is an error") {
        CHECK_THROWS_AS(parse_config_text("a = 1\na = 2\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config_text("[sec\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config_text("just_a_word\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_config_text("[run]\n= 3\n"), std::invalid_argument);
    }
}

TEST_CASE("config construction from key-value pairs") {
    SUBCASE("full round trip") {
        const std::string text =
            "[field]\n"
            "kind = random_fourier\n"
            "dim = 2\n"
            "amplitude = 2\n"
            "n_modes = 6\n"
            "max_wavenumber = 2\n"
            "time_scale = 0.5\n"
            "period = 1\n"
            "[grid]\n"
            "n = 128\n"
            "h = 0.015625\n"
            "[run]\n"
            "t0 = 0.1\n"
            "speed = 1\n"
            "horizon = 0.6\n"
            "delta = 0.046875\n"
            "sample_dt = 0.005\n"
            "cfl_safety = 0.4\n"
            "box_sides = 0.5 1.0\n"
            "c = 0.2 0.4\n"
            "sources = 0 0; 1.1 0.8\n"
            "[stats]\n"
            "epsilon = 0.15\n"
            "n = 4\n"
            "r_min = 0.125\n"
            "r_max = 2\n"
            "q = 16\n"
            "[ensemble]\n"
            "seed_begin = 5\n"
            "n_seeds = 3\n";
        const ExperimentConfig config = config_from_key_values(parse_config_text(text));
        CHECK(config.field.kind == FieldKind::random_fourier);
        CHECK(config.field.amplitude == 2.0);
        CHECK(config.field.n_modes == 6);
        CHECK(config.field.time_scale == 0.5);
        CHECK(config.grid_n == 128);
        CHECK(config.grid_h == 0.015625);
        CHECK(config.t0 == 0.1);
        CHECK(config.horizon == 0.6);
        CHECK(config.delta == 0.046875);
        CHECK(config.sample_dt == 0.005);
        CHECK(config.cfl_safety == 0.4);
        CHECK(config.diagnostic_box_sides == std::vector<double>{0.5, 1.0});
        CHECK(config.c_values == std::vector<double>{0.2, 0.4});
        REQUIRE(config.sources.size() == 2);
        CHECK(config.sources[1][0] == 1.1);
        CHECK(config.sources[1][1] == 0.8);
        CHECK(config.epsilon == 0.15);
        CHECK(config.n_subdivision == 4);
        CHECK(config.r_min == 0.125);
        CHECK(config.r_max == 2.0);
        CHECK(config.q == 16);
        CHECK(config.seed_begin == 5);
        CHECK(config.n_seeds == 3);
    }
    SUBCASE("empty input keeps defaults") {
        const ExperimentConfig config = config_from_key_values({});
        CHECK(config.grid_n == 512);
        CHECK(config.n_seeds == 20);
        CHECK(config.field.kind == FieldKind::random_fourier);
    }
    SUBCASE("generated sources come from the spacing rule") {
        std::map<std::string, std::string> kv;
        kv["field.kind"] = "zero";
        kv["run.horizon"] = "0.5";
        kv["run.n_sources"] = "3";
        const ExperimentConfig config = config_from_key_values(kv);
        REQUIRE(config.sources.size() == 3);
        CHECK(config.sources[1][0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("bad keys and values are errors") {
        CHECK_THROWS_AS(config_from_key_values({{"run.bogus", "1"}}), std::invalid_argument);
        CHECK_THROWS_AS(config_from_key_values({{"grid.h", "0.1abc"}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(config_from_key_values({{"run.sources", "0 0 0"}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(
            config_from_key_values({{"run.sources", "0 0"}, {"run.n_sources", "2"}}),
            std::invalid_argument);
    }
}
