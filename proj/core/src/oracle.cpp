#include <cmath>
#include <stdexcept>
#include <vector>

#include "gcoerce/frontier.hpp"

namespace gcoerce {

namespace {

// One claim interval under a fixed control vector, midpoint rule per micro
// step. Micro stepping keeps the integration error independent of how often
// cells are claimed.
Vec3 integrate_fixed(const VelocityField& field, Vec3 p, double t, double dt,
                     const Vec3& alpha, int micro) {
    const double dtm = dt / micro;
    for (int m = 0; m < micro; ++m) {
        const double tm = t + m * dtm;
        const Vec3 v0 = field.eval(tm, p);
        const Vec3 mid{p[0] + 0.5 * dtm * (v0[0] + alpha[0]),
                       p[1] + 0.5 * dtm * (v0[1] + alpha[1]), 0.0};
        const Vec3 vm = field.eval(tm + 0.5 * dtm, mid);
        p = {p[0] + dtm * (vm[0] + alpha[0]), p[1] + dtm * (vm[1] + alpha[1]), 0.0};
    }
    return p;
}

// Drift-opposing feedback control: the point is frozen wherever |V| <= speed
// and otherwise slides downstream at the reduced speed |V| - speed. The
// control never exceeds the speed bound, so the path stays admissible.
Vec3 integrate_hold(const VelocityField& field, Vec3 p, double t, double dt, double speed,
                    int micro) {
    const double dtm = dt / micro;
    for (int m = 0; m < micro; ++m) {
        const Vec3 v = field.eval(t + m * dtm, p);
        const double mag = std::sqrt(v[0] * v[0] + v[1] * v[1]);
        if (mag <= speed) continue;
        const double f = dtm * (1.0 - speed / mag);
        p = {p[0] + f * v[0], p[1] + f * v[1], 0.0};
    }
    return p;
}

}  // namespace

ReachableSet trajectory_oracle(const VelocityField& field, const GridSpec& grid,
                               const Vec3& source, double t0, double t_final, double speed,
                               int n_controls, int n_substeps, double seed_radius) {
    grid.validate();
    if (grid.dim != 2) throw std::invalid_argument("trajectory_oracle: only d=2 supported");
    if (grid.n > 128)
        throw std::invalid_argument("trajectory_oracle: grid too large (max 128 per axis)");
    if (field.dim() != 2)
        throw std::invalid_argument("trajectory_oracle: field dimension mismatch");
    if (t_final < t0) throw std::invalid_argument("trajectory_oracle: t_final before t0");
    if (!(speed > 0.0)) throw std::invalid_argument("trajectory_oracle: speed must be positive");
    if (n_controls < 3) throw std::invalid_argument("trajectory_oracle: need >= 3 controls");
    if (n_substeps < 1) throw std::invalid_argument("trajectory_oracle: need >= 1 substep");
    if (seed_radius < 0.0)
        throw std::invalid_argument("trajectory_oracle: seed_radius must be >= 0");

    std::vector<Vec3> controls;
    controls.reserve(n_controls + 1);
    for (int k = 0; k < n_controls; ++k) {
        const double ang = 2.0 * M_PI * k / n_controls;
        controls.push_back({speed * std::cos(ang), speed * std::sin(ang), 0.0});
    }
    controls.push_back(kZeroVec);

    // Representative points live on a 3x refined grid; the finer claim cells
    // cut the reach lost to keeping only one point per cell.
    constexpr int kRefine = 3;
    GridSpec fine = grid;
    fine.n = grid.n * kRefine;
    fine.h = grid.h / kRefine;

    const std::size_t cells = fine.cell_count();
    std::vector<std::uint8_t> occupied(cells, 0);
    std::vector<Vec3> rep(cells, kZeroVec);
    const std::size_t src = cell_index(fine, source);
    occupied[src] = 1;
    rep[src] = source;
    if (seed_radius > 0.0) {
        // Every fine cell whose center lies inside the seed ball starts
        // occupied; those centers belong to the initial set verbatim.
        const int reach = static_cast<int>(std::ceil(seed_radius / fine.h)) + 1;
        const long si = static_cast<long>(src % fine.n);
        const long sj = static_cast<long>(src / fine.n);
        for (long dj = -reach; dj <= reach; ++dj) {
            for (long di = -reach; di <= reach; ++di) {
                long i = (si + di) % fine.n, j = (sj + dj) % fine.n;
                if (i < 0) i += fine.n;
                if (j < 0) j += fine.n;
                const std::size_t idx = static_cast<std::size_t>(j) * fine.n + i;
                const Vec3 c{fine.coord(0, static_cast<int>(i)),
                             fine.coord(1, static_cast<int>(j)), 0.0};
                const double dx = c[0] - source[0], dy = c[1] - source[1];
                if (dx * dx + dy * dy > seed_radius * seed_radius) continue;
                occupied[idx] = 1;
                rep[idx] = c;
            }
        }
    }

    const double dt = (t_final - t0) / n_substeps;
    // Each micro move stays under a quarter of a fine cell.
    const double rate = speed + std::max(field.amplitude_bound(), 0.0);
    const int micro =
        std::max(1, static_cast<int>(std::ceil(dt * rate / (0.25 * fine.h))));

    std::vector<std::uint8_t> next_occ(cells);
    std::vector<Vec3> next_rep(cells);
    std::vector<double> next_score(cells);
    for (int s = 0; s < n_substeps; ++s) {
        const double t = t0 + s * dt;
        std::fill(next_occ.begin(), next_occ.end(), 0);
        for (std::size_t idx = 0; idx < cells; ++idx) {
            if (!occupied[idx]) continue;
            const Vec3 p = rep[idx];
            // Every candidate is a genuinely reached point; keeping the one
            // farthest from the source preserves the most onward reach.
            const auto claim = [&](const Vec3& q) {
                const std::size_t target = cell_index(fine, q);
                const double qx = q[0] - source[0], qy = q[1] - source[1];
                const double score = qx * qx + qy * qy;
                if (!next_occ[target] || score > next_score[target]) {
                    next_occ[target] = 1;
                    next_rep[target] = q;
                    next_score[target] = score;
                }
            };
            claim(integrate_hold(field, p, t, dt, speed, micro));
            for (const Vec3& alpha : controls)
                claim(integrate_fixed(field, p, t, dt, alpha, micro));
        }
        occupied.swap(next_occ);
        rep.swap(next_rep);
    }

    ReachableSet set;
    set.grid = grid;
    set.time = t_final;
    set.t0 = t0;
    set.source = source;
    set.threshold = 0.5;
    // A coarse cell turns on when most of its fine cells hold reached points,
    // mirroring the solver's half-covered threshold convention.
    set.on.assign(grid.cell_count(), 0);
    for (int j = 0; j < grid.n; ++j) {
        for (int i = 0; i < grid.n; ++i) {
            int hits = 0;
            for (int b = 0; b < kRefine; ++b)
                for (int a = 0; a < kRefine; ++a)
                    hits += occupied[static_cast<std::size_t>(j * kRefine + b) * fine.n +
                                     i * kRefine + a];
            if (2 * hits > kRefine * kRefine)
                set.on[static_cast<std::size_t>(j) * grid.n + i] = 1;
        }
    }
    set.on[cell_index(grid, source)] = 1;
    return set;
}

}  // namespace gcoerce
