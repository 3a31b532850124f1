#include "gcoerce/theory.hpp"

#include <cmath>
#include <stdexcept>

#include "gcoerce/geometry.hpp"

namespace gcoerce {

double default_lambda1(int dim) {
    // Flat cut through the cube at half volume: perimeter 1, volume 1/2,
    // ratio 2^((d-1)/d). Corner spheres give sqrt(pi) (d=2) and larger in
    // d=3, so the flat cut is the conservative minimum of the two families.
    if (dim == 2) return std::sqrt(2.0);
    if (dim == 3) return std::pow(2.0, 2.0 / 3.0);
    throw std::invalid_argument("default_lambda1: dim must be 2 or 3");
}

TheoremParams theorem_parameters(double M, int dim, double C, double c, double lambda1) {
    if (dim < 2 || dim > 3) throw std::invalid_argument("theorem_parameters: dim must be 2 or 3");
    if (!(M >= 0.5)) throw std::invalid_argument("theorem_parameters: M must be >= 1/2");
    if (!(C > 0.0) || !(c > 0.0))
        throw std::invalid_argument("theorem_parameters: C and c must be positive");
    if (!(lambda1 > 0.0))
        throw std::invalid_argument("theorem_parameters: lambda1 must be positive");

    TheoremParams p;
    p.M = M;
    p.dim = dim;
    p.C = C;
    p.c = c;
    p.lambda1 = lambda1;

    p.epsilon = std::pow(M, -(dim - 1)) / C;
    p.N = static_cast<long long>(std::ceil(C * std::pow(M, 5 * dim + 2)));
    p.beta = c * std::pow(M, -(dim + 1));
    p.N_small_scale = static_cast<long long>(
        std::ceil(std::pow(p.beta, -2.0) * std::pow(p.epsilon, -3.0) * std::pow(M, 3.0)));
    p.L = static_cast<long long>(std::ceil(M / p.epsilon));
    p.alpha = unit_ball_volume(dim) / std::pow(2.0 * M, dim);
    p.gamma = 1.0 + 2.0 * dim / lambda1;
    p.ln_ratio = static_cast<double>(p.L) / static_cast<double>(p.N);
    p.ln_consistent = p.ln_ratio <= p.beta;

    p.phi_a = std::pow(lambda1 / (2.0 * dim), dim);
    p.phi_b = std::pow(2.0 * p.phi_a, -1.0 / dim);

    p.admissible = true;
    if (!(p.epsilon < 1.0)) {
        p.admissible = false;
        p.rejection_reason = "epsilon must be < 1";
    } else if (!(p.L >= 1 && p.L < p.N)) {
        p.admissible = false;
        p.rejection_reason = "need 1 <= L < N";
    } else if (p.alpha > unit_ball_volume(dim) / std::pow(2.0, dim)) {
        p.admissible = false;
        p.rejection_reason = "alpha exceeds its M >= 1 ceiling";
    } else if (!p.ln_consistent) {
        p.admissible = false;
        p.rejection_reason = "L/N exceeds beta";
    }
    return p;
}

double phi(double t, const TheoremParams& params) {
    const double a = params.phi_a;
    const double b = params.phi_b;
    const int d = params.dim;
    if (t <= 0.0) return 0.0;
    if (t >= 2.0 * b) return 1.0;
    if (t <= b) return a * std::pow(t, d);
    return 1.0 - a * std::pow(2.0 * b - t, d);
}

double phi_ode_residual(double t, const TheoremParams& params, double fd_step) {
    const double b = params.phi_b;
    if (!(fd_step > 0.0))
        throw std::invalid_argument("phi_ode_residual: fd_step must be positive");
    for (double corner : {0.0, b, 2.0 * b}) {
        if (std::abs(t - corner) < 2.0 * fd_step)
            throw std::invalid_argument("phi_ode_residual: t too close to a corner of phi");
    }
    const double derivative = (phi(t + fd_step, params) - phi(t - fd_step, params)) /
                              (2.0 * fd_step);
    const double v = phi(t, params);
    const double rhs = (t <= 0.0 || t >= 2.0 * b)
                           ? 0.0
                           : 0.5 * params.lambda1 *
                                 std::pow(std::min(v, 1.0 - v),
                                          double(params.dim - 1) / params.dim);
    return std::abs(derivative - rhs);
}

TailRate bin_tail_rate(double beta, int dim) {
    if (!(beta > 0.0)) throw std::invalid_argument("bin_tail_rate: beta must be positive");
    if (dim < 2 || dim > 3) throw std::invalid_argument("bin_tail_rate: dim must be 2 or 3");
    TailRate r;
    r.beta = beta;
    r.dim = dim;
    r.beta_prime = (dim + 1) * beta / (dim + 1 + beta);
    return r;
}

double bin_length_scale(double M, const TailRate& rate, double C) {
    if (!(M > 0.0)) throw std::invalid_argument("bin_length_scale: M must be positive");
    return C * std::pow(M, 2.0 * (rate.dim - 1) / rate.beta_prime) *
           std::pow(1.0 + std::abs(std::log(M)), C);
}

}  // namespace gcoerce
