#include "gcoerce/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gcoerce/io.hpp"
#include "gcoerce/random.hpp"
#include "gcoerce/stats.hpp"
#include "gcoerce/util.hpp"

namespace gcoerce {

VelocityField make_field(const FieldSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case FieldKind::zero:
            return make_zero(spec.dim);
        case FieldKind::constant:
            return make_constant(spec.dim, spec.constant);
        case FieldKind::shear:
            return make_shear(spec.dim, spec.amplitude, spec.wavevector, spec.period);
        case FieldKind::cellular:
            return make_cellular(spec.amplitude, spec.cell_size);
        case FieldKind::random_fourier:
            return make_random_fourier(spec.dim, spec.amplitude, seed, spec.n_modes,
                                       spec.max_wavenumber, spec.time_scale, spec.period);
    }
    throw std::invalid_argument("make_field: unknown kind");
}

double field_spec_bound(const FieldSpec& spec) {
    switch (spec.kind) {
        case FieldKind::zero:
            return 0.0;
        case FieldKind::constant:
            return norm(spec.constant, spec.dim);
        default:
            return spec.amplitude;
    }
}

void validate(const ExperimentConfig& config) {
    GridSpec grid;
    grid.dim = config.field.dim;
    grid.n = config.grid_n;
    grid.h = config.grid_h;
    grid.validate();
    if (config.sources.empty())
        throw std::invalid_argument("config: need at least one source");
    if (config.c_values.empty())
        throw std::invalid_argument("config: need at least one c value");
    if (!(config.speed > 0.0)) throw std::invalid_argument("config: speed must be positive");
    for (double c : config.c_values)
        if (!(c > 0.0) || !(c < config.speed))
            throw std::invalid_argument("config: c values must lie in (0, speed)");
    if (!(config.horizon > config.t0))
        throw std::invalid_argument("config: horizon must exceed t0");
    if (!(config.cfl_safety > 0.0) || config.cfl_safety > 0.5)
        throw std::invalid_argument("config: cfl_safety must lie in (0, 0.5]");
    if (!(config.epsilon > 0.0))
        throw std::invalid_argument("config: epsilon must be positive");
    if (config.n_subdivision < 1)
        throw std::invalid_argument("config: n_subdivision must be >= 1");
    if (!(config.r_min > 0.0) || !(config.r_max >= config.r_min))
        throw std::invalid_argument("config: need 0 < r_min <= r_max");
    if (!(config.r_ratio > 1.0))
        throw std::invalid_argument("config: r_ratio must exceed 1");
    if (config.q < 1) throw std::invalid_argument("config: q must be >= 1");
    if (config.n_seeds < 1) throw std::invalid_argument("config: need >= 1 seed");

    const double span = config.horizon - config.t0;
    const double delta = config.delta > 0.0 ? config.delta : 2.0 * config.grid_h;
    const double needed =
        4.0 * (config.speed + field_spec_bound(config.field)) * span + 4.0 * delta;
    if (grid.side() < needed) {
        std::ostringstream msg;
        msg << "config: grid side " << grid.side() << " cannot contain the front; need >= "
            << needed;
        throw std::invalid_argument(msg.str());
    }
}

std::vector<Vec3> spaced_sources(const ExperimentConfig& config, int count) {
    if (count < 1) throw std::invalid_argument("spaced_sources: count must be >= 1");
    const double spacing = 2.0 * (config.speed + field_spec_bound(config.field)) *
                           (config.horizon - config.t0);
    // Golden-ratio slope keeps the offsets from aligning with the field
    // period for any spacing.
    const double slope = 0.6180339887498949;
    std::vector<Vec3> sources;
    sources.reserve(count);
    for (int k = 0; k < count; ++k)
        sources.push_back({k * spacing, k * spacing * slope, 0.0});
    return sources;
}

std::vector<WaitingTimeRecord> run_waiting_time_ensemble(const ExperimentConfig& config) {
    validate(config);
    const std::size_t per_seed = config.sources.size() * config.c_values.size();
    std::vector<std::vector<WaitingTimeRecord>> by_seed(config.n_seeds);

    parallel_for(static_cast<std::size_t>(config.n_seeds),
                 [&](std::size_t begin, std::size_t end) {
                     for (std::size_t s = begin; s < end; ++s) {
                         const std::uint64_t seed = config.seed_begin + s;
                         const VelocityField field = make_field(config.field, seed);
                         std::vector<WaitingTimeRecord>& out = by_seed[s];
                         out.reserve(per_seed);
                         for (const Vec3& source : config.sources) {
                             const EmpiricalStats stats =
                                 r_star(field, config.t0, source, config.n_subdivision,
                                        config.epsilon, config.r_min, config.r_max,
                                        config.r_ratio, config.q);
                             for (double c : config.c_values) {
                                 WaitingTimeSetup setup;
                                 setup.grid.dim = config.field.dim;
                                 setup.grid.n = config.grid_n;
                                 setup.grid.h = config.grid_h;
                                 setup.grid.center = source;
                                 setup.delta = config.delta;
                                 setup.t0 = config.t0;
                                 setup.speed = config.speed;
                                 setup.sample_dt = config.sample_dt;
                                 setup.cfl_safety = config.cfl_safety;
                                 setup.threshold = config.threshold;
                                 setup.diagnostic_box_sides = config.diagnostic_box_sides;
                                 WaitingTimeRecord rec =
                                     waiting_time(field, source, c, config.horizon, setup);
                                 rec.seed = seed;
                                 rec.r_star_measured = stats.r_star;
                                 rec.r_star_censored = stats.censored;
                                 out.push_back(std::move(rec));
                             }
                         }
                     }
                 });

    std::vector<WaitingTimeRecord> records;
    records.reserve(per_seed * config.n_seeds);
    for (auto& chunk : by_seed)
        for (auto& rec : chunk) records.push_back(std::move(rec));

    if (!config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        std::ofstream csv(std::filesystem::path(config.out_dir) / "waiting_records.csv",
                          std::ios::binary);
        if (!csv) throw std::runtime_error("ensemble: cannot write waiting_records.csv");
        csv << waiting_csv_header(config.field.dim);
        for (const auto& rec : records) csv << waiting_csv_row(rec, config.field.dim);
    }
    return records;
}

namespace {

// Ranks with ties averaged, the convention under which Spearman's rho on
// constant input is exactly zero.
std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * (i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

CorrelationReport correlate_T_rstar(const std::vector<WaitingTimeRecord>& records) {
    std::vector<double> T, R;
    CorrelationReport report;
    for (const auto& rec : records) {
        if (rec.censored || rec.r_star_censored || rec.r_star_measured < 0.0) {
            ++report.n_censored;
            continue;
        }
        T.push_back(rec.measured_T - rec.t0);
        R.push_back(rec.r_star_measured);
    }
    if (T.size() < 10)
        throw std::invalid_argument("correlate_T_rstar: need >= 10 uncensored records");
    report.n_used = static_cast<int>(T.size());

    const std::vector<double> rT = average_ranks(T);
    std::vector<double> rR = average_ranks(R);
    report.spearman = pearson(rT, rR);

    // Slope through the origin of T on r_star.
    double srr = 0.0, srt = 0.0;
    for (std::size_t i = 0; i < T.size(); ++i) {
        srr += R[i] * R[i];
        srt += R[i] * T[i];
    }
    report.slope_through_origin = srr > 0.0 ? srt / srr : 0.0;

    // One-sided permutation test: how often does a random pairing beat the
    // observed rank correlation. Fixed seed keeps the report reproducible.
    const int n_perm = 10000;
    report.n_permutations = n_perm;
    Rng rng(0x9e3779b97f4a7c15ull);
    int at_least = 0;
    std::vector<double> shuffled = rR;
    for (int p = 0; p < n_perm; ++p) {
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            const std::size_t j =
                static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(shuffled[i - 1], shuffled[j]);
        }
        if (pearson(rT, shuffled) >= report.spearman) ++at_least;
    }
    report.p_value = (1.0 + at_least) / (1.0 + n_perm);
    return report;
}

PhiDominationReport phi_domination_check(const std::vector<double>& times,
                                         const std::vector<double>& volumes, double r,
                                         const TheoremParams& params) {
    if (times.size() != volumes.size())
        throw std::invalid_argument("phi_domination_check: curve length mismatch");
    if (times.empty()) throw std::invalid_argument("phi_domination_check: empty curve");
    if (!(r > 0.0)) throw std::invalid_argument("phi_domination_check: r must be positive");

    PhiDominationReport report;
    report.r = r;
    report.alpha_fraction = params.alpha;
    report.upper_fraction = 1.0 - std::ldexp(params.alpha, -params.dim);
    const double rd = std::pow(r, params.dim);

    std::size_t i1 = times.size();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (volumes[i] >= report.alpha_fraction * rd - 1e-12) {
            i1 = i;
            break;
        }
    }
    if (i1 == times.size()) return report;  // t1 not reached
    report.t1_reached = true;
    report.t1 = times[i1];

    std::size_t i2 = times.size();
    for (std::size_t i = i1; i < times.size(); ++i) {
        if (volumes[i] >= report.upper_fraction * rd - 1e-12) {
            i2 = i;
            break;
        }
    }
    double slack = std::numeric_limits<double>::infinity();
    double worst = times[i1];
    const std::size_t last = i2 == times.size() ? times.size() - 1 : i2;
    for (std::size_t i = i1; i <= last; ++i) {
        const double s = volumes[i] / rd - phi((times[i] - report.t1) / r, params);
        if (s < slack) {
            slack = s;
            worst = times[i];
        }
    }
    report.min_slack = slack;
    report.worst_time = worst;
    report.dominates = slack >= -1e-12;

    if (i2 == times.size()) return report;  // t2 not reached
    report.t2_reached = true;
    report.t2 = times[i2];
    report.within_comparison_window =
        report.t2 - report.t1 <= (2.0 * params.dim / params.lambda1) * r + 1e-12;
    return report;
}

PhiDominationReport phi_domination_check(const WaitingTimeRecord& record, double r,
                                         const TheoremParams& params) {
    for (const BoxVolumeCurve& curve : record.box_volumes) {
        if (std::abs(curve.side - r) <= 1e-12 * std::max(1.0, r))
            return phi_domination_check(record.times, curve.volume, r, params);
    }
    throw std::invalid_argument("phi_domination_check: no diagnostic curve with side r");
}

TailCurve tail_curve(const std::vector<WaitingTimeRecord>& records,
                     const std::vector<double>& t_grid) {
    if (records.empty()) throw std::invalid_argument("tail_curve: need >= 1 record");
    if (t_grid.empty()) throw std::invalid_argument("tail_curve: empty t grid");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("tail_curve: t grid must be sorted");

    TailCurve curve;
    curve.t = t_grid;
    curve.n_samples = static_cast<int>(records.size());
    std::vector<double> elapsed;  // measured T - t0; censored values sit at the horizon
    std::vector<double> uncensored;
    for (const auto& rec : records) {
        elapsed.push_back(rec.measured_T - rec.t0);
        if (rec.censored)
            ++curve.n_censored;
        else
            uncensored.push_back(rec.measured_T - rec.t0);
    }

    const double n = static_cast<double>(elapsed.size());
    const double z = 1.959963984540054;  // 95% normal quantile
    for (double t : t_grid) {
        std::size_t alive = 0;
        for (double T : elapsed)
            if (T >= t) ++alive;
        const double p = alive / n;
        curve.survival.push_back(p);
        const double denom = 1.0 + z * z / n;
        const double center = (p + z * z / (2.0 * n)) / denom;
        const double half =
            z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
        curve.wilson_lo.push_back(std::max(0.0, center - half));
        curve.wilson_hi.push_back(std::min(1.0, center + half));
    }

    std::vector<double> distinct = uncensored;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (curve.n_samples < 30 || distinct.size() < 5) return curve;  // fit skipped, flagged off

    // Regress log(-log S) on log t over the uncensored empirical survival,
    // evaluated just above each distinct value so S is in (0, 1). Weights are
    // the delta-method precision of log(-log S), m S (log S)^2 / (1 - S);
    // both tails of the transform blow up in variance and must not dominate.
    const double m = static_cast<double>(uncensored.size());
    std::vector<double> lx, ly, lw;
    for (double t : distinct) {
        if (!(t > 0.0)) continue;
        std::size_t alive = 0;
        for (double T : uncensored)
            if (T > t) ++alive;
        const double s = alive / m;
        if (s <= 0.0 || s >= 1.0) continue;
        lx.push_back(std::log(t));
        ly.push_back(std::log(-std::log(s)));
        lw.push_back(m * s * std::log(s) * std::log(s) / (1.0 - s));
    }
    if (lx.size() < 3) return curve;
    const std::size_t k = lx.size();
    double sw = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sw += lw[i];
        mx += lw[i] * lx[i];
        my += lw[i] * ly[i];
    }
    mx /= sw;
    my /= sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += lw[i] * (lx[i] - mx) * (lx[i] - mx);
        sxy += lw[i] * (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) return curve;
    curve.fitted_exponent = sxy / sxx;
    const double intercept = my - curve.fitted_exponent * mx;
    curve.fitted_scale = std::exp(-intercept / curve.fitted_exponent);
    curve.fit_done = true;
    return curve;
}

}  // namespace gcoerce
