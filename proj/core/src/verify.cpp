#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gcoerce/experiments.hpp"
#include "gcoerce/stats.hpp"

namespace gcoerce {

namespace {

VerifyCheck check(const std::string& name, bool passed, const std::string& detail) {
    return VerifyCheck{name, passed, detail};
}

std::string num(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

SpaceTimeBox unit_box(double t0, int dim) {
    SpaceTimeBox box;
    box.center_time = t0;
    box.center_point = kZeroVec;
    box.side = 1.0;
    box.dim = dim;
    return box;
}

// Max over on cells of the distance to `center` against an exact ball.
void ball_gaps(const ReachableSet& set, const Vec3& center, double radius, double* inner,
               double* outer) {
    const GridSpec& g = set.grid;
    double in = 0.0, out = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double dx = g.coord(0, i) - center[0];
            const double dy = g.coord(1, j) - center[1];
            const double dist = std::hypot(dx, dy);
            if (set.on[static_cast<std::size_t>(j) * g.n + i]) {
                if (dist > radius) out = std::max(out, dist - radius);
            } else if (dist < radius) {
                in = std::max(in, radius - dist);
            }
        }
    }
    *inner = in;
    *outer = out;
}

}  // namespace

VerifyReport verify_suite(const ExperimentConfig& config) {
    VerifyReport report;
    const int dim = config.field.dim;
    const double M = field_spec_bound(config.field);
    const VelocityField field = make_field(config.field, config.seed_begin);

    {
        SpaceTimeBox box = unit_box(config.t0, dim);
        const double residual = verify_divergence_free(field, box, 2e-4, 12);
        const double tol = 1e-3 * std::max(M, 1.0);
        report.checks.push_back(check("field_divergence_free", residual <= tol,
                                      "max |div V| " + num(residual) + " tol " + num(tol)));
    }

    {
        // Closed box commensurate with the period: net flux must vanish.
        const double side = config.field.period;
        const double t_lo = config.t0, t_hi = config.t0 + 0.25;
        double total = 0.0;
        for (int axis = 0; axis < dim; ++axis) {
            for (int sgn : {-1, 1}) {
                Vec3 fc = kZeroVec;
                fc[axis] = sgn * side / 2.0;
                total += sgn * face_flux(field, fc, axis, side, t_lo, t_hi, 64);
            }
        }
        const double surface = 2.0 * dim * std::pow(side, dim - 1) * (t_hi - t_lo);
        const double tol = 1e-8 * std::max(M, 1.0) * surface;
        report.checks.push_back(check("closed_box_flux", std::abs(total) <= tol,
                                      "net flux " + num(total) + " tol " + num(tol)));
    }

    {
        SpaceTimeBox box = unit_box(config.t0, dim);
        box.side = 0.8;
        const double e1 = empirical_E_N(field, box, 1, config.q);
        const double avg = box_average_norm(field, box, config.q);
        const double e4 = empirical_E_N(field, box, 4, config.q);
        const bool ok = std::abs(e1 - avg) <= 1e-12 * std::max(1.0, avg) && e4 >= 0.0 &&
                        e4 <= M * (1.0 + 1e-9) + 1e-15;
        report.checks.push_back(check(
            "e_n_sanity", ok, "E_1 " + num(e1) + " box avg " + num(avg) + " E_4 " + num(e4)));
    }

    GridSpec small;
    small.dim = 2;
    small.n = 128;
    small.h = 1.0 / 64.0;
    small.center = kZeroVec;

    {
        const double t = 0.4, delta = 3.0 * small.h;
        LevelSetState st = init_point_source(small, kZeroVec, delta, 0.0, 1.0);
        evolve(st, make_zero(2), t, {}, [](const LevelSetState&) {});
        const ReachableSet set = reachable_indicator(st);
        const double vol = volume(set);
        const double insc = inscribed_ball_radius(set);
        const bool ok = std::abs(vol - M_PI * t * t) <= 0.05 * M_PI * t * t &&
                        std::abs(insc - t) <= 2.0 * small.h;
        report.checks.push_back(check("exact_ball", ok,
                                      "vol/pi t^2 " + num(vol / (M_PI * t * t)) +
                                          " inscribed gap/h " + num((insc - t) / small.h)));
    }

    {
        GridSpec g = small;
        g.n = 192;
        const double t = 0.35, delta = 3.0 * g.h;
        LevelSetState st = init_point_source(g, kZeroVec, delta, 0.0, 1.0);
        evolve(st, make_constant(2, {0.5, 0.0, 0.0}), t, {}, [](const LevelSetState&) {});
        const ReachableSet set = reachable_indicator(st);
        double in = 0.0, out = 0.0;
        ball_gaps(set, {0.5 * t, 0.0, 0.0}, t, &in, &out);
        const double hausdorff = std::max(in, out);
        report.checks.push_back(check("drift_translation", hausdorff <= 2.0 * g.h,
                                      "Hausdorff/h " + num(hausdorff / g.h)));
    }

    {
        GridSpec g;
        g.dim = 2;
        g.n = 128;
        g.h = 1.0 / 48.0;
        g.center = kZeroVec;
        const double t = 0.3, delta = 3.0 * g.h;
        const VelocityField cell = make_cellular(1.0, 1.0);
        LevelSetState st = init_point_source(g, kZeroVec, delta, 0.0, 1.0);
        evolve(st, cell, t, {}, [](const LevelSetState&) {});
        const ReachableSet solver = reachable_indicator(st);
        const ReachableSet oracle =
            trajectory_oracle(cell, g, kZeroVec, 0.0, t, 1.0, 48, 96, 0.5 * delta);
        const double frac = symmetric_difference_fraction(solver, oracle);
        report.checks.push_back(
            check("oracle_agreement", frac <= 0.10, "symdiff fraction " + num(frac)));
    }

    {
        GridSpec g = small;
        g.n = 256;
        const double delta = 3.0 * g.h;
        const VelocityField f = make_random_fourier(2, 1.0, 31, 5, 3, 1.0);
        LevelSetState st = init_point_source(g, kZeroVec, delta, 0.0, 1.0);
        bool ok = true;
        double worst = 1e300;
        evolve(st, f, 0.45, {0.35, 0.45}, [&](const LevelSetState& s) {
            const double At = s.time;
            if (At < 20.0 * g.h) return;
            const double ratio = volume(reachable_indicator(s)) / (M_PI * At * At);
            worst = std::min(worst, ratio);
            if (ratio < 0.9) ok = false;
        });
        report.checks.push_back(
            check("volume_growth", ok, "min ratio to laminar ball " + num(worst)));

        const ReachableSet last = reachable_indicator(st);
        const double bound = (1.0 + 1.0) * st.time + delta + 2.0 * g.h;
        const double reach = max_radius(last);
        report.checks.push_back(check("speed_bound_containment", reach <= bound,
                                      "max radius " + num(reach) + " bound " + num(bound)));
    }

    {
        WaitingTimeSetup setup;
        setup.grid.dim = 2;
        setup.grid.n = 256;
        setup.grid.h = 1.0 / 64.0;
        setup.grid.center = kZeroVec;
        setup.diagnostic_box_sides = {0.5, 1.0};
        const double amp = 1.5;
        const VelocityField f = make_random_fourier(2, amp, 404, 5, 3, 1.0);
        const auto rec = waiting_time(f, kZeroVec, 0.2, 0.3, setup);
        int violations = 0;
        double worst = 0.0;
        for (const auto& curve : rec.box_volumes) {
            const double floor_rate = -4.0 * 2.0 * amp * curve.side;
            for (std::size_t i = 1; i < curve.volume.size(); ++i) {
                const double dt = rec.times[i] - rec.times[i - 1];
                const double rate = (curve.volume[i] - curve.volume[i - 1]) / dt;
                worst = std::min(worst, rate - floor_rate);
                if (rate < floor_rate - 1e-9) ++violations;
            }
        }
        report.checks.push_back(check("lower_continuity", violations == 0,
                                      "violations " + std::to_string(violations) +
                                          " worst margin " + num(worst)));
    }

    {
        GridSpec g = small;
        g.n = 192;
        const double amp = 1.0, tau = 0.35, delta = 3.0 * g.h;
        const VelocityField f = make_random_fourier(2, amp, 88, 4, 2, 1.0);
        LevelSetState st = init_point_source(g, kZeroVec, delta, 0.0, 1.0);
        EvolveDiagnostics diag;
        evolve(st, f, tau, {}, [](const LevelSetState&) {}, 0.5, &diag);
        const double proxy = diag.perimeter_time_integral + diag.time_variation;
        const double bound = 4.0 * std::pow(1.0 + amp, 2.0) * (2.0 + amp) * tau * tau;
        report.checks.push_back(check("perimeter_bound", proxy <= bound,
                                      "proxy " + num(proxy) + " bound " + num(bound)));
    }

    {
        const TheoremParams params = theorem_parameters(2.0, 2, 1.0, 1.0, default_lambda1(2));
        const double at0 = phi(0.0, params);
        const double atb = phi(params.phi_b, params);
        const double at2b = phi(2.0 * params.phi_b, params);
        double residual = 0.0;
        for (double frac : {0.25, 0.5, 0.75, 1.25, 1.5, 1.75})
            residual = std::max(residual,
                                std::abs(phi_ode_residual(frac * params.phi_b, params, 1e-5)));
        const bool ok = at0 == 0.0 && std::abs(atb - 0.5) <= 1e-15 && at2b == 1.0 &&
                        residual <= 1e-6;
        report.checks.push_back(check("phi_closed_form", ok,
                                      "phi(0) " + num(at0) + " phi(b) " + num(atb) +
                                          " phi(2b) " + num(at2b) + " max residual " +
                                          num(residual)));
    }

    {
        const bool ok = config.cfl_safety > 0.0 && config.cfl_safety <= 0.5;
        report.checks.push_back(
            check("cfl_config", ok, "cfl_safety " + num(config.cfl_safety) + " range (0, 0.5]"));
    }

    {
        const double span = config.horizon - config.t0;
        const double delta = config.delta > 0.0 ? config.delta : 2.0 * config.grid_h;
        const double needed = 4.0 * (config.speed + M) * span + 4.0 * delta;
        const double side = config.grid_n * config.grid_h;
        report.checks.push_back(check("window_config", side >= needed && span > 0.0,
                                      "grid side " + num(side) + " needs >= " + num(needed)));
    }

    report.all_passed = true;
    for (const auto& c : report.checks) report.all_passed = report.all_passed && c.passed;
    return report;
}

std::string verify_report_json(const VerifyReport& report) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["all_passed"] = report.all_passed;
    doc["checks"] = nlohmann::json::array();
    for (const auto& c : report.checks)
        doc["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return doc.dump(2) + "\n";
}

}  // namespace gcoerce
