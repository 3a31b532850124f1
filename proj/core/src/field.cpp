#include "gcoerce/field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gcoerce/random.hpp"

namespace gcoerce {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Vec3 perpendicular_2d(const Vec3& k) {
    const double n = std::hypot(k[0], k[1]);
    if (n == 0.0) throw std::invalid_argument("perpendicular_2d: zero wavevector");
    return {k[1] / n, -k[0] / n, 0.0};
}

void validate_mode(const FieldMode& m, int dim) {
    if (norm(m.wavevector, dim) == 0.0)
        throw std::invalid_argument("FieldMode: wavevector must be nonzero");
    if (m.amplitude < 0.0) throw std::invalid_argument("FieldMode: amplitude must be >= 0");
    const double dn = norm(m.direction, dim);
    if (std::abs(dn - 1.0) > 1e-9)
        throw std::invalid_argument("FieldMode: direction must be a unit vector");
    if (std::abs(dot(m.direction, m.wavevector, dim)) > 1e-9 * norm(m.wavevector, dim))
        throw std::invalid_argument("FieldMode: direction must be orthogonal to wavevector");
}

}  // namespace

const char* to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::zero: return "zero";
        case FieldKind::constant: return "constant";
        case FieldKind::shear: return "shear";
        case FieldKind::cellular: return "cellular";
        case FieldKind::random_fourier: return "random_fourier";
    }
    return "unknown";
}

FieldKind field_kind_from_string(const std::string& name) {
    if (name == "zero") return FieldKind::zero;
    if (name == "constant") return FieldKind::constant;
    if (name == "shear") return FieldKind::shear;
    if (name == "cellular") return FieldKind::cellular;
    if (name == "random_fourier") return FieldKind::random_fourier;
    throw std::invalid_argument("unknown field kind: " + name);
}

VelocityField::VelocityField(FieldKind kind, int dim, double amplitude_bound,
                             std::uint64_t seed, double period, Vec3 constant,
                             std::vector<FieldMode> modes)
    : kind_(kind),
      dim_(dim),
      amplitude_bound_(amplitude_bound),
      seed_(seed),
      period_(period),
      constant_(constant),
      modes_(std::move(modes)) {
    if (dim_ < 2 || dim_ > 3) throw std::invalid_argument("VelocityField: dim must be 2 or 3");
    if (amplitude_bound_ < 0.0)
        throw std::invalid_argument("VelocityField: amplitude bound must be >= 0");
    if (!(period_ > 0.0)) throw std::invalid_argument("VelocityField: period must be positive");
    for (const auto& m : modes_) validate_mode(m, dim_);
    for (int a = dim_; a < 3; ++a) constant_[a] = 0.0;
}

Vec3 VelocityField::eval(double t, const Vec3& x) const {
    Vec3 v = constant_;
    for (const auto& m : modes_) {
        const double arg = kTwoPi * dot(m.wavevector, x, dim_) + m.omega * t + m.phase;
        const double s = m.amplitude * std::sin(arg);
        for (int a = 0; a < dim_; ++a) v[a] += s * m.direction[a];
    }
    return v;
}

double VelocityField::min_wavelength() const {
    double lambda = period_;
    for (const auto& m : modes_) {
        const double kn = norm(m.wavevector, dim_);
        if (kn > 0.0) lambda = std::min(lambda, 1.0 / kn);
    }
    return lambda;
}

VelocityField make_zero(int dim) {
    return VelocityField(FieldKind::zero, dim, 0.0, 0, 1.0, kZeroVec, {});
}

VelocityField make_constant(int dim, const Vec3& value) {
    Vec3 v = value;
    for (int a = dim; a < 3; ++a) v[a] = 0.0;
    return VelocityField(FieldKind::constant, dim, norm(v, dim), 0, 1.0, v, {});
}

VelocityField make_shear(int dim, double amplitude_bound, const Vec3& wavevector,
                         double period) {
    if (!(period > 0.0)) throw std::invalid_argument("make_shear: period must be positive");
    Vec3 k = kZeroVec;
    for (int a = 0; a < dim; ++a) k[a] = wavevector[a] / period;
    if (norm(k, dim) == 0.0) throw std::invalid_argument("make_shear: zero wavevector");

    Vec3 dir;
    if (dim == 2) {
        dir = perpendicular_2d(k);
    } else {
        int zero_axis = -1;
        for (int a = 0; a < dim; ++a) {
            if (k[a] == 0.0) {
                zero_axis = a;
                break;
            }
        }
        if (zero_axis < 0)
            throw std::invalid_argument(
                "make_shear: in d=3 the wavevector must lie in a coordinate plane");
        dir = kZeroVec;
        dir[zero_axis] = 1.0;
    }

    FieldMode m;
    m.wavevector = k;
    m.amplitude = amplitude_bound;
    m.direction = dir;
    return VelocityField(FieldKind::shear, dim, amplitude_bound, 0, period, kZeroVec, {m});
}

VelocityField make_cellular(double amplitude_bound, double cell_size) {
    if (!(cell_size > 0.0))
        throw std::invalid_argument("make_cellular: cell_size must be positive");
    const double s = cell_size;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    // Stream function (M s / 2 pi) sin(2 pi x / s) sin(2 pi y / s) written as
    // two diagonal modes; the velocity amplitude of each is M / sqrt(2).
    FieldMode m1;
    m1.wavevector = {1.0 / s, -1.0 / s, 0.0};
    m1.amplitude = amplitude_bound * inv_sqrt2;
    m1.direction = {-inv_sqrt2, -inv_sqrt2, 0.0};
    FieldMode m2;
    m2.wavevector = {1.0 / s, 1.0 / s, 0.0};
    m2.amplitude = amplitude_bound * inv_sqrt2;
    m2.direction = {-inv_sqrt2, inv_sqrt2, 0.0};
    return VelocityField(FieldKind::cellular, 2, amplitude_bound, 0, s, kZeroVec, {m1, m2});
}

namespace {

// Exact maximum of g(alpha) = sum_j a_j |cos(alpha - alpha_j)| over the circle.
// Between kinks (alpha_j +- pi/2) the sign pattern is fixed and g is a single
// phasor magnitude; the maximum is either that magnitude or an interval endpoint.
double closure_sup_2d(const std::vector<FieldMode>& modes) {
    std::vector<double> angle(modes.size());
    std::vector<double> kinks;
    kinks.reserve(2 * modes.size());
    for (std::size_t j = 0; j < modes.size(); ++j) {
        angle[j] = std::atan2(modes[j].direction[1], modes[j].direction[0]);
        for (double off : {0.5 * M_PI, -0.5 * M_PI}) {
            double a = std::fmod(angle[j] + off, kTwoPi);
            if (a < 0.0) a += kTwoPi;
            kinks.push_back(a);
        }
    }
    kinks.push_back(0.0);
    kinks.push_back(kTwoPi);
    std::sort(kinks.begin(), kinks.end());

    const auto g = [&](double alpha) {
        double s = 0.0;
        for (std::size_t j = 0; j < modes.size(); ++j)
            s += modes[j].amplitude * std::abs(std::cos(alpha - angle[j]));
        return s;
    };

    double best = 0.0;
    for (std::size_t i = 0; i + 1 < kinks.size(); ++i) {
        const double lo = kinks[i], hi = kinks[i + 1];
        if (hi - lo < 1e-15) continue;
        const double mid = 0.5 * (lo + hi);
        std::complex<double> z{0.0, 0.0};
        for (std::size_t j = 0; j < modes.size(); ++j) {
            const double sj = std::cos(mid - angle[j]) >= 0.0 ? 1.0 : -1.0;
            z += sj * modes[j].amplitude * std::polar(1.0, angle[j]);
        }
        double arg = std::arg(z);
        best = std::max(best, std::max(g(lo), g(hi)));
        for (double cand : {arg, arg + kTwoPi, arg - kTwoPi}) {
            if (cand >= lo && cand <= hi) best = std::max(best, std::abs(z));
        }
    }
    return best;
}

// Maximum of the convex even function g(u) = sum_j a_j |d_j . u| over the
// sphere via multi-start sign-pattern fixed-point iteration: at a local
// maximum u is parallel to sum_j sign(d_j . u) a_j d_j, and the iteration
// value |w| equals g exactly at the fixed point.
double closure_sup_3d(const std::vector<FieldMode>& modes) {
    const auto g = [&](const Vec3& u) {
        double s = 0.0;
        for (const auto& m : modes) s += m.amplitude * std::abs(dot(m.direction, u, 3));
        return s;
    };
    const auto ascend = [&](Vec3 u) {
        double value = g(u);
        for (int it = 0; it < 64; ++it) {
            Vec3 w = kZeroVec;
            for (const auto& m : modes) {
                const double sj = dot(m.direction, u, 3) >= 0.0 ? 1.0 : -1.0;
                for (int a = 0; a < 3; ++a) w[a] += sj * m.amplitude * m.direction[a];
            }
            const double wn = norm(w, 3);
            if (wn == 0.0) break;
            const Vec3 u_next{w[0] / wn, w[1] / wn, w[2] / wn};
            const double next = g(u_next);
            if (next <= value + 1e-15) break;
            value = next;
            u = u_next;
        }
        return value;
    };

    double best = 0.0;
    const int n_starts = 512;  // Fibonacci sphere multi-start
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n_starts; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n_starts;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        best = std::max(best, ascend({r * std::cos(phi), r * std::sin(phi), z}));
    }
    return best;
}

}  // namespace

double mode_phase_closure_sup(const std::vector<FieldMode>& modes, int dim) {
    if (modes.empty()) return 0.0;
    return dim == 2 ? closure_sup_2d(modes) : closure_sup_3d(modes);
}

VelocityField make_random_fourier(int dim, double amplitude_bound, std::uint64_t seed,
                                  int n_modes, int max_wavenumber, double time_scale,
                                  double period) {
    if (dim < 2 || dim > 3) throw std::invalid_argument("make_random_fourier: dim must be 2 or 3");
    if (n_modes < 1) throw std::invalid_argument("make_random_fourier: n_modes must be >= 1");
    if (max_wavenumber < 1)
        throw std::invalid_argument("make_random_fourier: max_wavenumber must be >= 1");
    if (!(time_scale > 0.0))
        throw std::invalid_argument("make_random_fourier: time_scale must be positive");
    if (!(period > 0.0)) throw std::invalid_argument("make_random_fourier: period must be positive");

    Rng rng(seed);
    std::vector<FieldMode> modes;
    modes.reserve(n_modes);
    for (int j = 0; j < n_modes; ++j) {
        Vec3 k = kZeroVec;
        do {
            for (int a = 0; a < dim; ++a)
                k[a] = static_cast<double>(rng.uniform_int(-max_wavenumber, max_wavenumber));
        } while (norm(k, dim) == 0.0);
        for (int a = 0; a < dim; ++a) k[a] /= period;

        FieldMode m;
        m.wavevector = k;
        m.omega = rng.gaussian(0.0, 1.0 / time_scale);
        m.phase = rng.uniform(0.0, kTwoPi);
        m.amplitude = rng.uniform(0.5, 1.5);  // order-unity mode speeds before rescaling
        if (dim == 2) {
            m.direction = perpendicular_2d(k);
        } else {
            const double kn = norm(k, 3);
            Vec3 dir = kZeroVec;
            double dn = 0.0;
            do {
                const Vec3 c{rng.gaussian(0.0, 1.0), rng.gaussian(0.0, 1.0),
                             rng.gaussian(0.0, 1.0)};
                dir = {k[1] * c[2] - k[2] * c[1], k[2] * c[0] - k[0] * c[2],
                       k[0] * c[1] - k[1] * c[0]};
                dn = norm(dir, 3);
            } while (dn < 0.1 * kn);
            for (int a = 0; a < 3; ++a) dir[a] /= dn;
            m.direction = dir;
        }
        modes.push_back(m);
    }

    const double sup = mode_phase_closure_sup(modes, dim);
    if (sup > 0.0) {
        const double scale = amplitude_bound / sup;
        for (auto& m : modes) m.amplitude *= scale;
    }
    return VelocityField(FieldKind::random_fourier, dim, amplitude_bound, seed, period,
                         kZeroVec, std::move(modes));
}

double sup_norm_estimate(const VelocityField& field, const SpaceTimeBox& box,
                         int samples_per_axis) {
    if (samples_per_axis < 1)
        throw std::invalid_argument("sup_norm_estimate: samples_per_axis must be >= 1");
    const int d = field.dim();
    const int q = samples_per_axis;
    double best = 0.0;
    std::array<int, 4> idx{0, 0, 0, 0};  // time + up to 3 spatial axes
    const int axes = d + 1;
    while (true) {
        const double t = box.t_lo() + (idx[0] + 0.5) * box.side / q;
        Vec3 x = kZeroVec;
        for (int a = 0; a < d; ++a) x[a] = box.x_lo(a) + (idx[a + 1] + 0.5) * box.side / q;
        best = std::max(best, norm(field.eval(t, x), d));
        int a = 0;
        for (; a < axes; ++a) {
            if (++idx[a] < q) break;
            idx[a] = 0;
        }
        if (a == axes) break;
    }
    return best;
}

double verify_divergence_free(const VelocityField& field, const SpaceTimeBox& box, double h,
                              int samples_per_axis) {
    if (!(h > 0.0)) throw std::invalid_argument("verify_divergence_free: h must be positive");
    const int d = field.dim();
    const int q = samples_per_axis;
    double worst = 0.0;
    std::array<int, 4> idx{0, 0, 0, 0};
    const int axes = d + 1;
    while (true) {
        const double t = box.t_lo() + (idx[0] + 0.5) * box.side / q;
        Vec3 x = kZeroVec;
        for (int a = 0; a < d; ++a) x[a] = box.x_lo(a) + (idx[a + 1] + 0.5) * box.side / q;
        double div = 0.0;
        for (int a = 0; a < d; ++a) {
            Vec3 xp = x, xm = x;
            xp[a] += h;
            xm[a] -= h;
            div += (field.eval(t, xp)[a] - field.eval(t, xm)[a]) / (2.0 * h);
        }
        worst = std::max(worst, std::abs(div));
        int a = 0;
        for (; a < axes; ++a) {
            if (++idx[a] < q) break;
            idx[a] = 0;
        }
        if (a == axes) break;
    }
    return worst;
}

std::string VelocityField::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = to_string(kind_);
    j["dim"] = dim_;
    j["amplitude_bound"] = amplitude_bound_;
    j["seed"] = seed_;
    j["period"] = period_;
    j["constant"] = constant_;
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : modes_) {
        modes.push_back({{"wavevector", m.wavevector},
                         {"omega", m.omega},
                         {"amplitude", m.amplitude},
                         {"phase", m.phase},
                         {"direction", m.direction}});
    }
    j["modes"] = std::move(modes);
    return j.dump(2);
}

VelocityField VelocityField::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema_version").get<int>() != 1)
        throw std::invalid_argument("VelocityField::from_json: unsupported schema_version");
    std::vector<FieldMode> modes;
    for (const auto& jm : j.at("modes")) {
        FieldMode m;
        m.wavevector = jm.at("wavevector").get<Vec3>();
        m.omega = jm.at("omega").get<double>();
        m.amplitude = jm.at("amplitude").get<double>();
        m.phase = jm.at("phase").get<double>();
        m.direction = jm.at("direction").get<Vec3>();
        modes.push_back(m);
    }
    return VelocityField(field_kind_from_string(j.at("kind").get<std::string>()),
                         j.at("dim").get<int>(), j.at("amplitude_bound").get<double>(),
                         j.at("seed").get<std::uint64_t>(), j.at("period").get<double>(),
                         j.at("constant").get<Vec3>(), std::move(modes));
}

}  // namespace gcoerce
