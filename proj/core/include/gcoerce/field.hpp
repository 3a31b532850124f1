#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcoerce/geometry.hpp"

namespace gcoerce {

enum class FieldKind { zero, constant, shear, cellular, random_fourier };

const char* to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& name);

// One solenoidal Fourier mode: direction is a unit vector orthogonal to the
// wavevector, so each mode (and hence any sum of modes) is divergence free
// identically, not just to discretization accuracy.
struct FieldMode {
    Vec3 wavevector = kZeroVec;   // cycles per unit length (spatial frequency)
    double omega = 0.0;           // temporal angular frequency
    double amplitude = 0.0;       // velocity amplitude of the mode
    double phase = 0.0;
    Vec3 direction = kZeroVec;
};

// Incompressible synthetic velocity field: a constant part plus a table of
// solenoidal Fourier modes,
//   V(t,x) = constant + sum_j amplitude_j * direction_j *
//            sin(2*pi*wavevector_j . x + omega_j * t + phase_j).
// Spatially periodic with period `period` per axis (wavevectors are integer
// multiples of 1/period).
class VelocityField {
public:
    VelocityField() = default;
    VelocityField(FieldKind kind, int dim, double amplitude_bound, std::uint64_t seed,
                  double period, Vec3 constant, std::vector<FieldMode> modes);

    Vec3 eval(double t, const Vec3& x) const;

    FieldKind kind() const { return kind_; }
    int dim() const { return dim_; }
    double amplitude_bound() const { return amplitude_bound_; }
    std::uint64_t seed() const { return seed_; }
    double period() const { return period_; }
    const Vec3& constant_part() const { return constant_; }
    const std::vector<FieldMode>& modes() const { return modes_; }

    // Shortest spatial wavelength present, or `period` when no modes carry a
    // nonzero wavevector. Grids and difference steps are sized against this.
    double min_wavelength() const;

    std::string to_json() const;
    static VelocityField from_json(const std::string& text);

private:
    FieldKind kind_ = FieldKind::zero;
    int dim_ = 2;
    double amplitude_bound_ = 0.0;
    std::uint64_t seed_ = 0;
    double period_ = 1.0;
    Vec3 constant_ = kZeroVec;
    std::vector<FieldMode> modes_;
};

VelocityField make_zero(int dim);

// Uniform drift; test-only convenience, not mean zero.
VelocityField make_constant(int dim, const Vec3& value);

// Steady planar shear V(x) = M sin(2*pi k.x / period) u with u a unit vector
// perpendicular to k. In d=3 the wavevector must lie in a coordinate plane
// (one zero component); the flow is directed along the missing axis.
VelocityField make_shear(int dim, double amplitude_bound, const Vec3& wavevector,
                         double period = 1.0);

// Steady cellular (checkerboard vortex) flow from the stream function
// psi = (M s / 2 pi) sin(2 pi x / s) sin(2 pi y / s), s = cell_size. d=2 only.
VelocityField make_cellular(double amplitude_bound, double cell_size);

// Random solenoidal Fourier sum: n_modes wavevectors drawn uniformly from
// the nonzero integer lattice points of max norm <= max_wavenumber (cycles
// per period), phases uniform, temporal frequencies gaussian with standard
// deviation 1/time_scale. Amplitudes are rescaled so that the all-time
// supremum of |V| over the torus equals amplitude_bound exactly; finite
// samples approach that bound from below.
VelocityField make_random_fourier(int dim, double amplitude_bound, std::uint64_t seed,
                                  int n_modes, int max_wavenumber, double time_scale,
                                  double period = 1.0);

// Max of |eval| over a dense deterministic sample grid in the box
// (samples_per_axis points per spatial axis and per time).
double sup_norm_estimate(const VelocityField& field, const SpaceTimeBox& box,
                         int samples_per_axis = 48);

// Max over sampled points of the central-difference divergence at spacing h.
// Exact fields are solenoidal, so this measures the O(h^2) stencil error.
double verify_divergence_free(const VelocityField& field, const SpaceTimeBox& box,
                              double h, int samples_per_axis = 16);

// The exact supremum over all time and space of |V| for a mode field:
// as t -> infinity the mode phases equidistribute, so the supremum equals
// max_{|u|=1} sum_j amplitude_j |direction_j . u| (plus nothing from the
// constant part unless it is included by the caller). Used for rescaling.
double mode_phase_closure_sup(const std::vector<FieldMode>& modes, int dim);

}  // namespace gcoerce
