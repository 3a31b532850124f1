#pragma once

#include <string>

namespace gcoerce {

// Derived constants of the coercivity theorem for one (M, d) and the chosen
// bookkeeping constants C (large) and c (small). All quantities are reported
// even when the parameter set is rejected as inadmissible.
struct TheoremParams {
    double M = 1.0;             // velocity amplitude bound (control speed is 1)
    int dim = 2;
    double C = 1.0;             // large constant in epsilon, N, and T = C * r_star
    double c = 1.0;             // small constant in beta
    double lambda1 = 0.0;       // relative isoperimetric constant of the unit cube

    double epsilon = 0.0;       // C^-1 M^-(d-1)
    long long N = 0;            // ceil(C M^(5d+2)): sub-box subdivision
    long long N_small_scale = 0;  // ceil(beta^-2 eps^-3 M^3): single-scale variant
    long long L = 0;            // ceil(M / epsilon): face aggregation count
    double alpha = 0.0;         // omega_d / (2M)^d: early volume fraction
    double beta = 0.0;          // c M^-(d+1): waiting-time tail exponent
    double gamma = 0.0;         // 1 + 2d / lambda1: doubling exponent
    double ln_ratio = 0.0;      // L / N, must stay <= beta for the scale split
    bool ln_consistent = false;

    double phi_a = 0.0;         // phi(t) = a t^d on [0, b]
    double phi_b = 0.0;         // anchor with phi(b) = 1/2

    bool admissible = false;
    std::string rejection_reason;

    double t1_offset(double r) const { return r / (2.0 * M); }
    double predicted_waiting_time(double r_star) const { return C * r_star; }
};

// Conservative relative isoperimetric constant of the unit cube: the minimum
// perimeter-to-volume^((d-1)/d) ratio over flat cuts and corner spheres, both
// of which 2-d numerical minimization confirms (see tests). d=2: sqrt(2).
double default_lambda1(int dim);

// Derive every constant from (M, d, C, c, lambda1). Requires M >= 1/2.
// The set is admissible when epsilon < 1, 1 <= L < N, alpha <= omega_d / 2^d
// and L/N <= beta all hold; otherwise admissible=false with the reason.
TheoremParams theorem_parameters(double M, int dim, double C, double c, double lambda1);

// Comparison profile for the rescaled volume of a growing reachable set:
// solves phi' = (lambda1 / 2) min(phi, 1 - phi)^((d-1)/d), phi(0) = 0,
// in closed form: a t^d up to b, then 1 - a (2b - t)^d, with a = (lambda1/2d)^d
// and b = (2a)^(-1/d); phi(b) = 1/2 and phi(2b) = 1. Clamped outside [0, 2b].
double phi(double t, const TheoremParams& params);

// |centered-difference phi' - (lambda1/2) min(phi,1-phi)^((d-1)/d)| at t.
// t must stay 2*fd_step away from the corners {0, b, 2b}.
double phi_ode_residual(double t, const TheoremParams& params, double fd_step = 1e-5);

struct TailRate {
    double beta_prime = 0.0;    // (d+1) beta / (d+1+beta), the strict-interior rate
    double beta = 0.0;
    int dim = 2;
};

// Stretched-exponential tail rate for the waiting time of a bounded field:
// P(T >= t) <= C exp(-c (t / ell)^beta_prime).
TailRate bin_tail_rate(double beta, int dim);

// Length scale ell(M) = C M^(2(d-1)/beta_prime) (1 + |log M|)^C entering the
// tail bound.
double bin_length_scale(double M, const TailRate& rate, double C);

}  // namespace gcoerce
