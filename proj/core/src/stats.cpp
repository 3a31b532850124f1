#include "gcoerce/stats.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include "gcoerce/util.hpp"

namespace gcoerce {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Midpoint average over [lo, hi] with q panels of e^{i c x}: the tensor
// midpoint sum of a Fourier mode factorizes into one such average per axis,
// so box averages cost O(modes) instead of O(modes * q^(d+1)) while being
// bit-for-bit the same sum up to rounding.
std::complex<double> phase_avg(double lo, double hi, double c, int q) {
    const double delta = (hi - lo) / q;
    const double phi = c * delta;
    const double half_sin = std::sin(0.5 * phi);
    if (std::abs(half_sin) < 1e-9) {
        std::complex<double> s{0.0, 0.0};
        for (int m = 0; m < q; ++m) s += std::polar(1.0, c * (lo + (m + 0.5) * delta));
        return s / static_cast<double>(q);
    }
    const double mag = std::sin(0.5 * q * phi) / (q * half_sin);
    const double mid = c * (lo + 0.5 * (hi - lo));
    return mag * std::polar(1.0, mid);
}

struct BoxRange {
    double t_lo, t_hi;
    std::array<double, 3> x_lo, x_hi;
};

// Componentwise midpoint average of V over an arbitrary space-time range.
std::array<double, 3> range_average(const VelocityField& field, const BoxRange& r, int q) {
    const int d = field.dim();
    std::array<double, 3> avg{field.constant_part()[0], field.constant_part()[1],
                              field.constant_part()[2]};
    for (const auto& m : field.modes()) {
        std::complex<double> prod = std::polar(1.0, m.phase);
        prod *= phase_avg(r.t_lo, r.t_hi, m.omega, q);
        for (int a = 0; a < d; ++a)
            prod *= phase_avg(r.x_lo[a], r.x_hi[a], kTwoPi * m.wavevector[a], q);
        const double im = m.amplitude * prod.imag();
        for (int a = 0; a < d; ++a) avg[a] += im * m.direction[a];
    }
    return avg;
}

BoxRange to_range(const SpaceTimeBox& box) {
    BoxRange r;
    r.t_lo = box.t_lo();
    r.t_hi = box.t_hi();
    for (int a = 0; a < 3; ++a) {
        r.x_lo[a] = box.center_point[a] - 0.5 * box.side;
        r.x_hi[a] = box.center_point[a] + 0.5 * box.side;
    }
    return r;
}

void check_q(int q) {
    if (q < 2) throw std::invalid_argument("quadrature: q must be >= 2");
}

std::vector<double> geometric_grid(double r_min, double r_max, double ratio) {
    if (!(r_min > 0.0) || !(r_max >= r_min))
        throw std::invalid_argument("radius grid: need 0 < r_min <= r_max");
    if (!(ratio > 1.0)) throw std::invalid_argument("radius grid: ratio must exceed 1");
    // Anchored at r_max so period-commensurate top radii are hit exactly.
    std::vector<double> grid;
    for (double r = r_max; r >= r_min * (1.0 - 1e-12); r /= ratio) grid.push_back(r);
    std::reverse(grid.begin(), grid.end());
    return grid;
}

}  // namespace

double box_average(const VelocityField& field, const SpaceTimeBox& box, int component,
                   int q) {
    check_q(q);
    if (component < 0 || component >= field.dim())
        throw std::invalid_argument("box_average: component out of range");
    return range_average(field, to_range(box), q)[component];
}

double box_average_norm(const VelocityField& field, const SpaceTimeBox& box, int q) {
    check_q(q);
    const auto avg = range_average(field, to_range(box), q);
    return norm({avg[0], avg[1], avg[2]}, field.dim());
}

double empirical_E_N(const VelocityField& field, const SpaceTimeBox& center_box, int N,
                     int q) {
    check_q(q);
    if (N < 1) throw std::invalid_argument("empirical_E_N: N must be >= 1");
    const int d = field.dim();
    const double r = center_box.side;
    const double rs = r / N;
    const int half = (N - 1) / 2;  // offsets with |k| <= half keep sub-boxes inside
    const int span = 2 * half + 1;

    std::size_t total = 1;
    for (int a = 0; a < d + 1; ++a) total *= span;

    const int workers = thread_count();
    std::vector<double> chunk_max(workers, 0.0);
    std::mutex mtx;
    int next_slot = 0;
    parallel_for(total, [&](std::size_t lo, std::size_t hi) {
        int slot;
        {
            std::lock_guard<std::mutex> lk(mtx);
            slot = next_slot++;
        }
        double best = 0.0;
        for (std::size_t flat = lo; flat < hi; ++flat) {
            std::size_t rem = flat;
            int off[4] = {0, 0, 0, 0};
            for (int a = 0; a < d + 1; ++a) {
                off[a] = static_cast<int>(rem % span) - half;
                rem /= span;
            }
            BoxRange range;
            const double tc = center_box.center_time + off[0] * rs;
            range.t_lo = tc - 0.5 * rs;
            range.t_hi = tc + 0.5 * rs;
            for (int a = 0; a < 3; ++a) {
                const double xc =
                    center_box.center_point[a] + (a < d ? off[a + 1] * rs : 0.0);
                range.x_lo[a] = xc - 0.5 * rs;
                range.x_hi[a] = xc + 0.5 * rs;
            }
            const auto avg = range_average(field, range, q);
            best = std::max(best, norm({avg[0], avg[1], avg[2]}, d));
        }
        chunk_max[slot] = std::max(chunk_max[slot], best);
    });
    double result = 0.0;
    for (double v : chunk_max) result = std::max(result, v);
    return result;
}

EmpiricalStats r_star(const VelocityField& field, double center_time, const Vec3& center,
                      int N, double epsilon, double r_min, double r_max, double ratio,
                      int q) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("r_star: epsilon must be positive");
    EmpiricalStats stats;
    stats.n_subdivision = N;
    stats.epsilon = epsilon;
    stats.r_values = geometric_grid(r_min, r_max, ratio);
    stats.e_n_values.reserve(stats.r_values.size());
    for (double r : stats.r_values) {
        SpaceTimeBox box{center_time, center, r, field.dim()};
        stats.e_n_values.push_back(empirical_E_N(field, box, N, q));
    }
    stats.r_star = 0.0;
    for (std::size_t i = 0; i < stats.r_values.size(); ++i) {
        if (stats.e_n_values[i] >= epsilon) stats.r_star = stats.r_values[i];
    }
    stats.censored = !stats.e_n_values.empty() && stats.e_n_values.back() >= epsilon;
    stats.center = SpaceTimeBox{center_time, center, stats.r_values.back(), field.dim()};
    return stats;
}

double spatial_average_norm(const VelocityField& field, double t, const Vec3& x, double side,
                            int q) {
    check_q(q);
    BoxRange range;
    range.t_lo = t;
    range.t_hi = t;
    for (int a = 0; a < 3; ++a) {
        range.x_lo[a] = x[a] - 0.5 * side;
        range.x_hi[a] = x[a] + 0.5 * side;
    }
    const int d = field.dim();
    // Pinned time axis: the time factor degenerates to e^{i omega t}.
    std::array<double, 3> avg{field.constant_part()[0], field.constant_part()[1],
                              field.constant_part()[2]};
    for (const auto& m : field.modes()) {
        std::complex<double> prod = std::polar(1.0, m.phase + m.omega * t);
        for (int a = 0; a < d; ++a)
            prod *= phase_avg(range.x_lo[a], range.x_hi[a], kTwoPi * m.wavevector[a], q);
        const double im = m.amplitude * prod.imag();
        for (int a = 0; a < d; ++a) avg[a] += im * m.direction[a];
    }
    return norm({avg[0], avg[1], avg[2]}, d);
}

double uniform_r_star(const VelocityField& field,
                      const std::vector<std::pair<double, Vec3>>& centers, double epsilon,
                      double r_min, double r_max, double ratio, int q) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("uniform_r_star: epsilon must be positive");
    if (centers.empty()) throw std::invalid_argument("uniform_r_star: no centers");
    const auto grid = geometric_grid(r_min, r_max, ratio);
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
        for (const auto& [t, x] : centers) {
            if (spatial_average_norm(field, t, x, *it, q) >= epsilon) return *it;
        }
    }
    return 0.0;
}

double face_flux(const VelocityField& field, const Vec3& face_center, int normal_axis,
                 double side, double t_lo, double t_hi, int q) {
    check_q(q);
    const int d = field.dim();
    if (normal_axis < 0 || normal_axis >= d)
        throw std::invalid_argument("face_flux: normal_axis out of range");
    if (!(side > 0.0) || !(t_hi > t_lo))
        throw std::invalid_argument("face_flux: face and interval must have positive measure");

    double avg = field.constant_part()[normal_axis];
    for (const auto& m : field.modes()) {
        // Pinned coordinate folds into the phase; remaining axes average.
        std::complex<double> prod = std::polar(
            1.0, m.phase + kTwoPi * m.wavevector[normal_axis] * face_center[normal_axis]);
        prod *= phase_avg(t_lo, t_hi, m.omega, q);
        for (int a = 0; a < d; ++a) {
            if (a == normal_axis) continue;
            prod *= phase_avg(face_center[a] - 0.5 * side, face_center[a] + 0.5 * side,
                              kTwoPi * m.wavevector[a], q);
        }
        avg += m.amplitude * m.direction[normal_axis] * prod.imag();
    }
    double measure = t_hi - t_lo;
    for (int a = 0; a < d - 1; ++a) measure *= side;
    return avg * measure;
}

FaceFluxReport check_face_flux_lemma(const VelocityField& field, double center_time,
                                     const Vec3& center, double r, int N, int L,
                                     double epsilon, int q) {
    if (!(r > 0.0)) throw std::invalid_argument("check_face_flux_lemma: r must be positive");
    if (L < 1 || L >= N)
        throw std::invalid_argument("check_face_flux_lemma: need 1 <= L < N");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("check_face_flux_lemma: epsilon must be positive");
    const int d = field.dim();
    const double rs = r / N;
    const double face_side = L * rs;
    const double M = field.amplitude_bound();
    const double denom_rate = epsilon + M / L;

    // Lattice plane positions |j| <= N/2; offsets m with the face and the
    // time interval inside the box: m in [-N/2, N/2 - L].
    const int plane_lo = -(N / 2), plane_hi = N / 2;
    const int off_lo = -(N / 2), off_hi = N / 2 - L;

    double face_measure = face_side;  // time extent
    for (int a = 0; a < d - 1; ++a) face_measure *= face_side;

    FaceFluxReport report;
    double sum_ratio = 0.0;
    for (int axis = 0; axis < d; ++axis) {
        std::array<int, 2> perp{};
        int np = 0;
        for (int a = 0; a < d; ++a)
            if (a != axis) perp[np++] = a;
        for (int j = plane_lo; j <= plane_hi; ++j) {
            std::array<int, 2> mo{off_lo, off_lo};
            while (true) {
                for (int mt = off_lo; mt <= off_hi; ++mt) {
                    Vec3 fc = center;
                    fc[axis] = center[axis] + j * rs;
                    for (int p = 0; p < np; ++p)
                        fc[perp[p]] = center[perp[p]] + mo[p] * rs + 0.5 * face_side;
                    const double t0 = center_time + mt * rs;
                    const double flux =
                        face_flux(field, fc, axis, face_side, t0, t0 + face_side, q);
                    const double ratio = std::abs(flux) / (denom_rate * face_measure);
                    report.max_ratio = std::max(report.max_ratio, ratio);
                    sum_ratio += ratio;
                    ++report.faces_checked;
                }
                int p = 0;
                for (; p < np; ++p) {
                    if (++mo[p] <= off_hi) break;
                    mo[p] = off_lo;
                }
                if (p == np) break;
                if (np == 0) break;
            }
            if (np == 0) break;
        }
    }
    if (report.faces_checked > 0) sum_ratio /= report.faces_checked;
    report.mean_ratio = sum_ratio;
    report.e_n_at_r =
        empirical_E_N(field, SpaceTimeBox{center_time, center, r, d}, N, q);
    report.hypothesis_met = report.e_n_at_r < epsilon;
    return report;
}

}  // namespace gcoerce
