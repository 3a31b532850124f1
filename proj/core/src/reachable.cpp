#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gcoerce/frontier.hpp"

namespace gcoerce {

namespace {

// Wraps a real offset into [-side/2, side/2) so distances respect the torus.
double wrap_offset(double delta, double side) {
    double w = std::remainder(delta, side);
    if (w >= side / 2.0) w -= side;
    return w;
}

}  // namespace

std::size_t cell_index(const GridSpec& grid, const Vec3& point) {
    std::size_t index = 0;
    std::size_t stride = 1;
    for (int a = 0; a < grid.dim; ++a) {
        const double lo = grid.center[a] - grid.side() / 2.0;
        double frac = (point[a] - lo) / grid.h;
        long cell = static_cast<long>(std::floor(frac));
        cell %= grid.n;
        if (cell < 0) cell += grid.n;
        index += static_cast<std::size_t>(cell) * stride;
        stride *= grid.n;
    }
    return index;
}

ReachableSet reachable_indicator(const LevelSetState& state, double threshold) {
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw std::invalid_argument("reachable_indicator: threshold must lie in (0, 1)");
    ReachableSet set;
    set.grid = state.grid;
    set.time = state.time;
    set.t0 = state.t0;
    set.source = state.source;
    set.threshold = threshold;
    set.on.resize(state.u.size());
    for (std::size_t i = 0; i < state.u.size(); ++i) set.on[i] = state.u[i] >= threshold;
    // The source is reachable by definition; advection can transiently push the
    // occupancy there below the threshold.
    set.on[cell_index(state.grid, state.source)] = 1;
    return set;
}

double volume(const ReachableSet& set) {
    std::size_t count = 0;
    for (std::uint8_t v : set.on) count += v;
    return count * std::pow(set.grid.h, set.grid.dim);
}

double volume_in_box(const ReachableSet& set, const Vec3& center, double side) {
    if (!(side > 0.0)) throw std::invalid_argument("volume_in_box: side must be positive");
    const GridSpec& grid = set.grid;
    if (grid.dim != 2) throw std::invalid_argument("volume_in_box: only d=2 supported");
    const double half = std::min(side, grid.side()) / 2.0;
    std::size_t count = 0;
    for (int j = 0; j < grid.n; ++j) {
        const double dy = wrap_offset(grid.coord(1, j) - center[1], grid.side());
        if (dy < -half || dy >= half) continue;
        const std::size_t row = static_cast<std::size_t>(j) * grid.n;
        for (int i = 0; i < grid.n; ++i) {
            if (!set.on[row + i]) continue;
            const double dx = wrap_offset(grid.coord(0, i) - center[0], grid.side());
            if (dx >= -half && dx < half) ++count;
        }
    }
    return count * std::pow(grid.h, grid.dim);
}

double perimeter_estimate(const ReachableSet& set) {
    const GridSpec& grid = set.grid;
    if (grid.dim != 2) throw std::invalid_argument("perimeter_estimate: only d=2 supported");
    const int n = grid.n;
    // Window-relative perimeter: only facets interior to the window count, so
    // a half-plane contributes one cross-section, not a wrapped pair.
    std::size_t count = 0;
    for (int j = 0; j < n; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * n;
        const std::size_t rowp = row + n;
        for (int i = 0; i < n; ++i) {
            if (i + 1 < n) count += set.on[row + i] != set.on[row + i + 1];
            if (j + 1 < n) count += set.on[row + i] != set.on[rowp + i];
        }
    }
    return count * std::pow(grid.h, grid.dim - 1);
}

double manhattan_ball_correction(int dim) {
    if (dim == 2) return M_PI / 4.0;
    if (dim == 3) return 2.0 / 3.0;
    throw std::invalid_argument("manhattan_ball_correction: dim must be 2 or 3");
}

double inscribed_ball_radius(const ReachableSet& set) {
    const GridSpec& grid = set.grid;
    if (grid.dim != 2) throw std::invalid_argument("inscribed_ball_radius: only d=2 supported");
    if (!set.on[cell_index(grid, set.source)]) return 0.0;
    // The largest ball about the source that stays inside the window, so cells
    // beyond the window edge never censor the distance scan.
    double limit = grid.side() / 2.0;
    for (int a = 0; a < grid.dim; ++a) {
        const double lo = grid.center[a] - grid.side() / 2.0;
        const double hi = grid.center[a] + grid.side() / 2.0;
        limit = std::min({limit, set.source[a] - lo, hi - set.source[a]});
    }
    double nearest = limit;
    for (int j = 0; j < grid.n; ++j) {
        const double dy = grid.coord(1, j) - set.source[1];
        if (std::abs(dy) >= nearest) continue;
        const std::size_t row = static_cast<std::size_t>(j) * grid.n;
        for (int i = 0; i < grid.n; ++i) {
            if (set.on[row + i]) continue;
            const double dx = grid.coord(0, i) - set.source[0];
            const double d = std::sqrt(dx * dx + dy * dy);
            if (d < nearest) nearest = d;
        }
    }
    return nearest;
}

double max_radius(const ReachableSet& set) {
    const GridSpec& grid = set.grid;
    if (grid.dim != 2) throw std::invalid_argument("max_radius: only d=2 supported");
    double furthest = 0.0;
    for (int j = 0; j < grid.n; ++j) {
        const double dy = grid.coord(1, j) - set.source[1];
        const std::size_t row = static_cast<std::size_t>(j) * grid.n;
        for (int i = 0; i < grid.n; ++i) {
            if (!set.on[row + i]) continue;
            const double dx = grid.coord(0, i) - set.source[0];
            furthest = std::max(furthest, std::sqrt(dx * dx + dy * dy));
        }
    }
    return furthest;
}

double symmetric_difference_fraction(const ReachableSet& a, const ReachableSet& b) {
    if (a.on.size() != b.on.size())
        throw std::invalid_argument("symmetric_difference_fraction: size mismatch");
    std::size_t diff = 0, either = 0;
    for (std::size_t i = 0; i < a.on.size(); ++i) {
        diff += a.on[i] != b.on[i];
        either += a.on[i] || b.on[i];
    }
    if (either == 0) return 0.0;
    return static_cast<double>(diff) / static_cast<double>(either);
}

}  // namespace gcoerce
