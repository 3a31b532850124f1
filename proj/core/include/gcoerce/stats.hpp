#pragma once

#include <vector>

#include "gcoerce/field.hpp"
#include "gcoerce/geometry.hpp"

namespace gcoerce {

// Result of a radius sweep of the sub-box statistic around one center.
struct EmpiricalStats {
    std::vector<double> r_values;
    std::vector<double> e_n_values;
    int n_subdivision = 1;
    double epsilon = 0.0;
    double r_star = 0.0;     // largest r in r_values with E_N >= epsilon, 0 if none
    bool censored = false;   // E_N >= epsilon still holds at the largest radius
    SpaceTimeBox center;     // box of side r_values.back() around the probed center
};

// Space-time average of one velocity component over `box` by the tensor
// midpoint rule with q points per axis (time included). Exact on constants,
// linear in the field, error O(q^-2) on smooth fields.
double box_average(const VelocityField& field, const SpaceTimeBox& box, int component,
                   int q = 32);

// Magnitude of the componentwise box average vector.
double box_average_norm(const VelocityField& field, const SpaceTimeBox& box, int q = 32);

// Sub-box statistic: the box of side r around `center` is cut by the lattice
// of step r/N anchored at its center, and the statistic is the max of
// |sub-box average| over all lattice sub-boxes of side r/N fully contained in
// the box (offsets |(k,n)|_inf < N/2). N=1 reduces to |box average|.
double empirical_E_N(const VelocityField& field, const SpaceTimeBox& center_box, int N,
                     int q = 32);

// Sweep a geometric radius grid (ratio defaults to 2^(1/8)) and report the
// largest radius at which E_N still reaches epsilon. The sweep is censored
// when even the largest radius does.
EmpiricalStats r_star(const VelocityField& field, double center_time, const Vec3& center,
                      int N, double epsilon, double r_min, double r_max,
                      double ratio = 1.0905077326652577, int q = 32);

// Length scale of the uniform spatial-mean statistic: largest r in the grid
// at which |spatial average over Box_r(x) at time t| >= epsilon for some
// sampled center (t, x). Spatial-only averages, no sub-box lattice.
double uniform_r_star(const VelocityField& field,
                      const std::vector<std::pair<double, Vec3>>& centers, double epsilon,
                      double r_min, double r_max, double ratio = 1.0905077326652577,
                      int q = 32);

// Spatial average of V over the cube of side `side` around x at fixed time.
double spatial_average_norm(const VelocityField& field, double t, const Vec3& x, double side,
                            int q = 32);

// Time-integrated flux of V through an axis-aligned (d-1)-face.
//   face_center: center of the face; the coordinate along `normal_axis` is
//   the face plane position. side: face side length. Positive sign along
//   +normal_axis. Midpoint rule with q points per axis (time included).
double face_flux(const VelocityField& field, const Vec3& face_center, int normal_axis,
                 double side, double t_lo, double t_hi, int q = 32);

struct FaceFluxReport {
    double max_ratio = 0.0;       // max over faces of |flux| / ((eps + M/L) * |F x I|)
    double mean_ratio = 0.0;
    int faces_checked = 0;
    double e_n_at_r = 0.0;        // sub-box statistic of the enclosing box
    bool hypothesis_met = false;  // e_n_at_r < epsilon (box averages small at this scale)
};

// Enumerate every lattice-aligned sub-face of side L*r/N inside the box of
// side r around `center` (all orientations, all plane positions and offsets
// on the r/N lattice) paired with lattice time intervals of length L*r/N,
// and compare each |face_flux| against (epsilon + M/L) * |F x I|.
FaceFluxReport check_face_flux_lemma(const VelocityField& field, double center_time,
                                     const Vec3& center, double r, int N, int L,
                                     double epsilon, int q = 32);

}  // namespace gcoerce
