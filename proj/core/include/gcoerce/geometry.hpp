#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gcoerce {

// Points and vectors live in a fixed array of 3 doubles; components at
// indices >= dim are kept at zero so 2-d and 3-d code share one type.
using Vec3 = std::array<double, 3>;

inline constexpr Vec3 kZeroVec{0.0, 0.0, 0.0};

inline double dot(const Vec3& a, const Vec3& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec3& a, int dim) { return std::sqrt(dot(a, a, dim)); }

inline Vec3 add(const Vec3& a, const Vec3& b, int dim) {
    Vec3 r = kZeroVec;
    for (int i = 0; i < dim; ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec3 sub(const Vec3& a, const Vec3& b, int dim) {
    Vec3 r = kZeroVec;
    for (int i = 0; i < dim; ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec3 scale(const Vec3& a, double s, int dim) {
    Vec3 r = kZeroVec;
    for (int i = 0; i < dim; ++i) r[i] = a[i] * s;
    return r;
}

// Volume of the unit ball in R^d.
inline double unit_ball_volume(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
        default: throw std::invalid_argument("unit_ball_volume: dim must be 1, 2 or 3");
    }
}

// Axis-aligned space-time cube: time extent [center_time - side/2, center_time + side/2],
// spatial extent center_point + [-side/2, side/2]^d.
struct SpaceTimeBox {
    double center_time = 0.0;
    Vec3 center_point = kZeroVec;
    double side = 1.0;
    int dim = 2;

    double t_lo() const { return center_time - 0.5 * side; }
    double t_hi() const { return center_time + 0.5 * side; }
    double x_lo(int axis) const { return center_point[axis] - 0.5 * side; }
    double x_hi(int axis) const { return center_point[axis] + 0.5 * side; }
};

// Uniform periodic grid of n^dim cells with spacing h, centered on `center`.
// Cell (i0, i1, ...) has its center at center + (-n*h/2 + (i+1/2)*h) per axis.
struct GridSpec {
    int dim = 2;
    int n = 0;
    double h = 0.0;
    Vec3 center = kZeroVec;

    double side() const { return n * h; }
    std::size_t cell_count() const {
        std::size_t c = 1;
        for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(n);
        return c;
    }
    double coord(int axis, int index) const {
        return center[axis] - 0.5 * side() + (index + 0.5) * h;
    }
    void validate() const {
        if (dim < 2 || dim > 3) throw std::invalid_argument("GridSpec: dim must be 2 or 3");
        if (n < 4) throw std::invalid_argument("GridSpec: n must be at least 4");
        if (!(h > 0.0)) throw std::invalid_argument("GridSpec: h must be positive");
    }
};

}  // namespace gcoerce
