#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gcoerce/field.hpp"
#include "gcoerce/frontier.hpp"
#include "gcoerce/theory.hpp"

namespace gcoerce {

// Recipe for building one velocity field per seed. Every parameter that any
// generator kind uses lives here; the unused ones are ignored by the others.
struct FieldSpec {
    FieldKind kind = FieldKind::random_fourier;
    int dim = 2;
    double amplitude = 1.0;            // M (ignored by zero and constant)
    Vec3 constant = kZeroVec;          // constant kind
    Vec3 wavevector = {1.0, 0.0, 0.0}; // shear kind
    double cell_size = 1.0;            // cellular kind
    int n_modes = 8;
    int max_wavenumber = 3;
    double time_scale = 1.0;
    double period = 1.0;
};

VelocityField make_field(const FieldSpec& spec, std::uint64_t seed);

// Effective amplitude bound of the fields a spec generates; the window
// no-wraparound check and the speed-bound containment use it.
double field_spec_bound(const FieldSpec& spec);

// A full Monte Carlo run is determined by this config: seeds in
// [seed_begin, seed_begin + n_seeds) each build one field and measure every
// (source, c) pair on a grid window recentered at the source.
struct ExperimentConfig {
    FieldSpec field;

    int grid_n = 512;
    double grid_h = 1.0 / 128.0;

    std::vector<Vec3> sources = {kZeroVec};
    std::vector<double> c_values = {0.2};

    double t0 = 0.0;
    double speed = 1.0;  // control speed A
    double horizon = 2.0;
    double delta = 0.0;      // bump radius; 0 means the waiting-time default
    double sample_dt = 0.0;  // 0 means the waiting-time default
    double cfl_safety = 0.5;
    double threshold = 0.5;
    std::vector<double> diagnostic_box_sides;

    double epsilon = 0.1;  // r_star threshold
    int n_subdivision = 4;
    double r_min = 0.0625;
    double r_max = 8.0;
    double r_ratio = 1.0905077326652577;  // 2^(1/8)
    int q = 32;

    std::uint64_t seed_begin = 1;
    int n_seeds = 20;

    std::string out_dir;  // empty: keep results in memory only
};

// Throws invalid_argument when a field is out of range or the grid window
// cannot contain the front until the horizon.
void validate(const ExperimentConfig& config);

// Source points spaced 2 (A + M) (horizon - t0) apart along an incommensurate
// direction, so the periodic field decorrelates between them within one seed.
std::vector<Vec3> spaced_sources(const ExperimentConfig& config, int count);

// One waiting-time measurement per (seed, source, c), parallel over seeds,
// merged in (seed, source, c) order. Each record carries its r_star
// measurement. With out_dir set, writes waiting_records.csv there.
std::vector<WaitingTimeRecord> run_waiting_time_ensemble(const ExperimentConfig& config);

struct CorrelationReport {
    int n_used = 0;      // uncensored in both T and r_star
    int n_censored = 0;  // records excluded for censoring
    double spearman = 0.0;
    double p_value = 1.0;  // one-sided permutation test for positive association
    int n_permutations = 0;
    double slope_through_origin = 0.0;  // empirical stand-in for the constant in T = C r*
};

// Rank correlation between measured waiting time and measured r_star over the
// uncensored records. Requires >= 10 of them.
CorrelationReport correlate_T_rstar(const std::vector<WaitingTimeRecord>& records);

struct PhiDominationReport {
    double r = 0.0;
    double alpha_fraction = 0.0;  // filling fraction defining t1
    double upper_fraction = 0.0;  // fraction (1 - 2^-d alpha) defining t2
    bool t1_reached = false;
    bool t2_reached = false;
    double t1 = 0.0;
    double t2 = 0.0;
    double min_slack = 0.0;  // min over samples in [t1, t2] of vol/r^d - phi((t-t1)/r)
    double worst_time = 0.0;  // sample time attaining min_slack
    bool dominates = false;
    bool within_comparison_window = false;  // t2 - t1 <= (2d/lambda1) r
};

// Checks a sampled volume curve |Box_r intersect R_t| against the profile:
// between t1 (first sample filling alpha r^d) and t2 (first filling
// (1 - 2^-d alpha) r^d) the rescaled curve must dominate phi((t - t1)/r).
PhiDominationReport phi_domination_check(const std::vector<double>& times,
                                         const std::vector<double>& volumes, double r,
                                         const TheoremParams& params);

// Convenience overload reading the curve with side r from a record's
// diagnostics; throws when no such curve was recorded.
PhiDominationReport phi_domination_check(const WaitingTimeRecord& record, double r,
                                         const TheoremParams& params);

struct TailCurve {
    std::vector<double> t;
    std::vector<double> survival;  // empirical P(T >= t); censored enter at the horizon
    std::vector<double> wilson_lo;
    std::vector<double> wilson_hi;
    int n_samples = 0;
    int n_censored = 0;
    bool fit_done = false;
    double fitted_exponent = 0.0;  // beta' of exp(-(t/ell)^beta')
    double fitted_scale = 0.0;     // ell
};

// Empirical survival of the waiting time on t_grid with 95% Wilson bands.
// The stretched-exponential fit regresses log(-log S) on log t over the
// uncensored records, weighted by the delta-method precision of the
// transform; it is skipped (flagged) with fewer than 30 records or fewer
// than 5 distinct uncensored values.
TailCurve tail_curve(const std::vector<WaitingTimeRecord>& records,
                     const std::vector<double>& t_grid);

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed = false;
};

// Fast cross-module invariant sweep sized to run in seconds: field
// divergence, closed-box flux, E_N sanity, exact-solution solver checks,
// oracle agreement, growth/containment/continuity bounds, the comparison
// profile's closed forms, and the config's own CFL setting.
VerifyReport verify_suite(const ExperimentConfig& config);

std::string verify_report_json(const VerifyReport& report);

// Key-value config text: `key = value` lines, `[section]` headers flattening
// to dotted keys, `#` comments. Unknown keys are an error in
// config_from_key_values so typos do not silently fall back to defaults.
std::map<std::string, std::string> parse_config_text(const std::string& text);

ExperimentConfig config_from_key_values(const std::map<std::string, std::string>& kv);

}  // namespace gcoerce
