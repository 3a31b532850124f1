#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gcoerce/frontier.hpp"

namespace gcoerce {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void require_2d(const GridSpec& grid) {
    if (grid.dim != 2)
        throw std::invalid_argument("level set solver: only d=2 grids are supported");
}

double cfl_limit(const LevelSetState& state, const VelocityField& field) {
    const double d = state.grid.dim;
    return 0.5 * state.grid.h /
           (state.speed * std::sqrt(d) + field.amplitude_bound());
}

// Separable per-step sampling of a mode field on the grid:
// sin(2 pi (kx x + ky y) + w t + phase) = sx(x) cy(y,t) + cx(x) sy(y,t),
// so each step costs O(modes * n) trig calls instead of O(modes * n^2).
class FieldGridSampler {
public:
    FieldGridSampler(const VelocityField& field, const GridSpec& grid)
        : field_(field), grid_(grid), n_(grid.n) {
        const auto& modes = field.modes();
        sx_.resize(modes.size());
        cx_.resize(modes.size());
        for (std::size_t m = 0; m < modes.size(); ++m) {
            sx_[m].resize(n_);
            cx_[m].resize(n_);
            for (int i = 0; i < n_; ++i) {
                const double phase = kTwoPi * modes[m].wavevector[0] * grid.coord(0, i);
                sx_[m][i] = std::sin(phase);
                cx_[m][i] = std::cos(phase);
            }
        }
    }

    void sample(double t, std::vector<double>& vx, std::vector<double>& vy) const {
        const std::size_t cells = grid_.cell_count();
        vx.assign(cells, field_.constant_part()[0]);
        vy.assign(cells, field_.constant_part()[1]);
        const auto& modes = field_.modes();
        for (int j = 0; j < n_; ++j) {
            double* rx = vx.data() + static_cast<std::size_t>(j) * n_;
            double* ry = vy.data() + static_cast<std::size_t>(j) * n_;
            const double y = grid_.coord(1, j);
            for (std::size_t m = 0; m < modes.size(); ++m) {
                const auto& mode = modes[m];
                const double rest =
                    kTwoPi * mode.wavevector[1] * y + mode.omega * t + mode.phase;
                const double cr = std::cos(rest);
                const double sr = std::sin(rest);
                const double wx = mode.amplitude * mode.direction[0];
                const double wy = mode.amplitude * mode.direction[1];
                const double* sxm = sx_[m].data();
                const double* cxm = cx_[m].data();
                for (int i = 0; i < n_; ++i) {
                    const double s = sxm[i] * cr + cxm[i] * sr;
                    rx[i] += wx * s;
                    ry[i] += wy * s;
                }
            }
        }
    }

private:
    const VelocityField& field_;
    GridSpec grid_;
    int n_;
    std::vector<std::vector<double>> sx_, cx_;
};

void step_with_velocity(LevelSetState& state, const std::vector<double>& vx,
                        const std::vector<double>& vy, double dt,
                        std::vector<double>& scratch) {
    const int n = state.grid.n;
    const double h = state.grid.h;
    const double A = state.speed;
    scratch.resize(state.u.size());
    const double* u = state.u.data();
    double* out = scratch.data();
    for (int j = 0; j < n; ++j) {
        const int jm = (j + n - 1) % n, jp = (j + 1) % n;
        const std::size_t row = static_cast<std::size_t>(j) * n;
        const std::size_t rowm = static_cast<std::size_t>(jm) * n;
        const std::size_t rowp = static_cast<std::size_t>(jp) * n;
        for (int i = 0; i < n; ++i) {
            const int im = (i + n - 1) % n, ip = (i + 1) % n;
            const double c = u[row + i];
            const double left = u[row + im], right = u[row + ip];
            const double down = u[rowm + i], up = u[rowp + i];
            const double gx = std::max({left - c, right - c, 0.0}) / h;
            const double gy = std::max({down - c, up - c, 0.0}) / h;
            const double grow = A * std::sqrt(gx * gx + gy * gy);
            const double wx = vx[row + i], wy = vy[row + i];
            const double dx = wx > 0.0 ? (c - left) / h : (right - c) / h;
            const double dy = wy > 0.0 ? (c - down) / h : (up - c) / h;
            out[row + i] = c + dt * (grow - (wx * dx + wy * dy));
        }
    }
    state.u.swap(scratch);
    state.time += dt;
}

std::size_t facet_count(const std::vector<std::uint8_t>& on, int n) {
    // Interior facets only, matching the window-relative perimeter.
    std::size_t count = 0;
    for (int j = 0; j < n; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n;
        const std::size_t rowp = row + n;
        for (int i = 0; i < n; ++i) {
            if (i + 1 < n) count += on[row + i] != on[row + i + 1];
            if (j + 1 < n) count += on[row + i] != on[rowp + i];
        }
    }
    return count;
}

}  // namespace

LevelSetState init_point_source(const GridSpec& grid, const Vec3& source, double delta,
                                double t0, double speed) {
    grid.validate();
    require_2d(grid);
    if (!(speed > 0.0)) throw std::invalid_argument("init_point_source: speed must be positive");
    if (delta < 2.0 * grid.h)
        throw std::invalid_argument("init_point_source: delta must be at least 2h");

    LevelSetState state;
    state.grid = grid;
    state.time = t0;
    state.t0 = t0;
    state.source = source;
    state.speed = speed;
    state.delta = delta;
    state.u.assign(grid.cell_count(), 0.0);
    const int n = grid.n;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Vec3 p{grid.coord(0, i), grid.coord(1, j), 0.0};
            const double rho = norm(sub(p, source, 2), 2);
            if (rho < delta) {
                const double c = std::cos(0.5 * M_PI * rho / delta);
                state.u[static_cast<std::size_t>(j) * n + i] = c * c;
            }
        }
    }
    return state;
}

void step(LevelSetState& state, const VelocityField& field, double dt) {
    require_2d(state.grid);
    if (field.dim() != 2) throw std::invalid_argument("step: field dimension mismatch");
    if (state.u.size() != state.grid.cell_count())
        throw std::invalid_argument("step: state size mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (dt > cfl_limit(state, field) * (1.0 + 1e-9))
        throw std::invalid_argument("step: dt violates the CFL bound 0.5 h / (A sqrt(d) + M)");

    FieldGridSampler sampler(field, state.grid);
    std::vector<double> vx, vy, scratch;
    sampler.sample(state.time, vx, vy);
    step_with_velocity(state, vx, vy, dt, scratch);
}

void evolve(LevelSetState& state, const VelocityField& field, double t_final,
            const std::vector<double>& sample_times,
            const std::function<void(const LevelSetState&)>& visitor, double cfl_safety,
            EvolveDiagnostics* diagnostics) {
    require_2d(state.grid);
    if (field.dim() != 2) throw std::invalid_argument("evolve: field dimension mismatch");
    if (t_final < state.time) throw std::invalid_argument("evolve: t_final is in the past");
    if (!(cfl_safety > 0.0) || cfl_safety > 0.5)
        throw std::invalid_argument("evolve: cfl_safety must be in (0, 0.5]");
    const double span = t_final - state.t0;
    const double needed =
        4.0 * (state.speed + field.amplitude_bound()) * span + 4.0 * state.delta;
    if (state.grid.side() < needed)
        throw std::invalid_argument(
            "evolve: grid side too small for the front (wraparound risk)");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < state.time - 1e-12 || sample_times[i] > t_final + 1e-12)
            throw std::invalid_argument("evolve: sample time outside [state.time, t_final]");
        if (i > 0 && sample_times[i] < sample_times[i - 1])
            throw std::invalid_argument("evolve: sample times must be sorted");
    }

    const double dt_max = cfl_safety * state.grid.h /
                          (state.speed * std::sqrt(2.0) + field.amplitude_bound());
    FieldGridSampler sampler(field, state.grid);
    std::vector<double> vx, vy, scratch;
    std::vector<std::uint8_t> prev_on, curr_on;
    const double h = state.grid.h;
    if (diagnostics) {
        prev_on.resize(state.u.size());
        curr_on.resize(state.u.size());
        for (std::size_t i = 0; i < state.u.size(); ++i) prev_on[i] = state.u[i] >= 0.5;
    }

    std::size_t next_sample = 0;
    while (next_sample < sample_times.size() && sample_times[next_sample] <= state.time) {
        visitor(state);
        ++next_sample;
    }

    while (state.time < t_final - 1e-15) {
        double target = t_final;
        if (next_sample < sample_times.size())
            target = std::min(target, sample_times[next_sample]);
        while (state.time < target - 1e-15) {
            const double dt = std::min(dt_max, target - state.time);
            sampler.sample(state.time, vx, vy);
            step_with_velocity(state, vx, vy, dt, scratch);
            if (state.time > target - 1e-12) state.time = target;
            if (diagnostics) {
                std::size_t flips = 0;
                for (std::size_t i = 0; i < state.u.size(); ++i) {
                    curr_on[i] = state.u[i] >= 0.5;
                    flips += curr_on[i] != prev_on[i];
                }
                diagnostics->time_variation += flips * h * h;
                diagnostics->perimeter_time_integral +=
                    dt * facet_count(curr_on, state.grid.n) * h;
                prev_on.swap(curr_on);
            }
        }
        state.time = target;
        while (next_sample < sample_times.size() &&
               sample_times[next_sample] <= state.time + 1e-12) {
            visitor(state);
            ++next_sample;
        }
    }
}

std::vector<LevelSetState> evolve_snapshots(LevelSetState state, const VelocityField& field,
                                            double t_final,
                                            const std::vector<double>& snapshot_times,
                                            double cfl_safety) {
    std::vector<LevelSetState> out;
    evolve(state, field, t_final, snapshot_times,
           [&out](const LevelSetState& s) { out.push_back(s); }, cfl_safety);
    return out;
}

}  // namespace gcoerce
