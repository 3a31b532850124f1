#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gcoerce/field.hpp"
#include "gcoerce/geometry.hpp"

namespace gcoerce {

// Occupancy function u(t, .) in [0, 1] on a periodic grid. Super-level sets
// of u are the sets reached from the source bump: the front expands at
// normal speed `speed` and is advected by the velocity field.
struct LevelSetState {
    GridSpec grid;
    std::vector<double> u;
    double time = 0.0;
    double t0 = 0.0;
    Vec3 source = kZeroVec;
    double speed = 1.0;   // control speed A
    double delta = 0.0;   // initial bump radius
};

struct ReachableSet {
    GridSpec grid;
    std::vector<std::uint8_t> on;
    double time = 0.0;
    double t0 = 0.0;
    Vec3 source = kZeroVec;
    double threshold = 0.5;
};

// Cosine-taper bump: 1 at the source, cos^2(pi rho / (2 delta)) out to
// radius delta, 0 beyond; its 0.5-level sits at rho = delta / 2.
// Requires delta >= 2h so the bump is resolved.
LevelSetState init_point_source(const GridSpec& grid, const Vec3& source, double delta,
                                double t0, double speed);

// One forward-Euler update of the monotone upwind scheme. The expansion term
// speed*|grad u| uses the one-sided differences that maximize the outward
// gradient; advection is upwinded per component on the sign of V. Requires
// dt <= 0.5 h / (speed sqrt(d) + M); larger steps break monotonicity and are
// an error. d=2 only.
void step(LevelSetState& state, const VelocityField& field, double dt);

struct EvolveDiagnostics {
    double perimeter_time_integral = 0.0;  // sum over steps of dt * raw perimeter
    double time_variation = 0.0;           // sum over steps of h^d * indicator flips
};

// Advance to t_final, calling the visitor at each sample time (sorted,
// within [state.time, t_final]); sample times and t_final are hit exactly
// by shortened substeps. Errors if the window cannot contain the front:
// grid side must be >= 4 (speed + M)(t - t0) + 4 delta throughout.
void evolve(LevelSetState& state, const VelocityField& field, double t_final,
            const std::vector<double>& sample_times,
            const std::function<void(const LevelSetState&)>& visitor,
            double cfl_safety = 0.5, EvolveDiagnostics* diagnostics = nullptr);

// Convenience wrapper returning the states at the snapshot times.
std::vector<LevelSetState> evolve_snapshots(LevelSetState state, const VelocityField& field,
                                            double t_final,
                                            const std::vector<double>& snapshot_times,
                                            double cfl_safety = 0.5);

// Threshold the occupancy function. The source cell is always included:
// the reachable set is taken closed at the source even when strong advection
// transiently sweeps the occupancy value below the threshold there.
ReachableSet reachable_indicator(const LevelSetState& state, double threshold = 0.5);

std::size_t cell_index(const GridSpec& grid, const Vec3& point);

double volume(const ReachableSet& set);

// Volume of the intersection with the cube of side `side` around `center`.
double volume_in_box(const ReachableSet& set, const Vec3& center, double side);

// Raw Manhattan perimeter: h^(d-1) times the number of on/off facets between
// neighboring cells. Multiply by manhattan_ball_correction(d) to compare
// against smooth perimeters of round sets.
double perimeter_estimate(const ReachableSet& set);

// omega_d / (2 omega_{d-1}): ratio of a ball's smooth perimeter to its
// axis-aligned staircase perimeter (pi/4 in d=2, 2/3 in d=3).
double manhattan_ball_correction(int dim);

// Largest rho such that every cell with center in B_rho(source) is on:
// the distance from the source to the nearest off cell center, limited by
// the distance to the window boundary; 0 if the source cell is off.
double inscribed_ball_radius(const ReachableSet& set);

// Max distance from the source to an on cell center.
double max_radius(const ReachableSet& set);

// |A xor B| / |A or B|; 0 when both are empty. Grids must match.
double symmetric_difference_fraction(const ReachableSet& a, const ReachableSet& b);

struct BoxVolumeCurve {
    double side = 0.0;
    std::vector<double> volume;
};

struct WaitingTimeRecord {
    std::uint64_t seed = 0;
    double t0 = 0.0;
    Vec3 source = kZeroVec;
    double coercivity_c = 0.0;
    double horizon = 0.0;
    double measured_T = 0.0;
    bool censored = false;
    double r_star_measured = -1.0;  // filled by ensemble drivers; -1 = not measured
    bool r_star_censored = false;

    std::vector<double> times;
    std::vector<double> total_volume;
    std::vector<double> inscribed_radius;
    std::vector<double> max_radius_curve;
    std::vector<BoxVolumeCurve> box_volumes;
    double perimeter_time_integral = 0.0;
    double time_variation = 0.0;
    double grid_h = 0.0;
    double speed = 1.0;
    double delta = 0.0;
};

struct WaitingTimeSetup {
    GridSpec grid;                     // window centered near the source
    double delta = 0.0;                // bump radius (default 2h when 0)
    double t0 = 0.0;
    double speed = 1.0;
    double sample_dt = 0.0;            // diagnostics interval (default horizon/128 when 0)
    double cfl_safety = 0.5;
    double threshold = 0.5;
    std::vector<double> diagnostic_box_sides;
};

// Evolve from the source bump to the horizon and report the first sampled
// time t* from which the inscribed ball keeps pace with c (t - t0) - 2h for
// every later sampled time. Censored when no sampled time does.
WaitingTimeRecord waiting_time(const VelocityField& field, const Vec3& source, double c,
                               double horizon, const WaitingTimeSetup& setup);

// Brute-force exact-time reachability: representative points propagate cell
// to cell under every control of magnitude speed on an n_controls-point
// circle, plus drift only, plus a drift-opposing feedback control that
// freezes the point wherever the drift is weaker than the control speed.
// Cells are claimed n_substeps times; inside each interval the paths take
// micro steps bounded by a quarter cell, so the integration error stays
// independent of the claim cadence. A cell turns on when most of its refined
// subcells hold genuinely reached points, mirroring the solver's
// half-covered threshold convention, so the result never overstates the
// reach by more than the subcell geometry. seed_radius > 0
// starts from every fine cell center inside that ball instead of the bare
// source point; pass the solver's initial half width when comparing against
// evolve output. Refuses grids beyond 128 cells per axis. d=2 only.
ReachableSet trajectory_oracle(const VelocityField& field, const GridSpec& grid,
                               const Vec3& source, double t0, double t_final, double speed,
                               int n_controls, int n_substeps, double seed_radius = 0.0);

}  // namespace gcoerce
