#include <cmath>
#include <vector>

#include "doctest.h"
#include "gcoerce/geometry.hpp"
#include "gcoerce/theory.hpp"

using namespace gcoerce;

TEST_CASE("default isoperimetric constant is the flat-cut minimum") {
    CHECK(default_lambda1(2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(default_lambda1(3) == doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-15));
    CHECK_THROWS(default_lambda1(4));

    for (int d : {2, 3}) {
        const double flat_half = 1.0 / std::pow(0.5, double(d - 1) / d);
        CHECK(default_lambda1(d) == doctest::Approx(flat_half).epsilon(1e-12));
        // Flat cuts at other volume fractions are worse (relative isoperimetry
        // uses min(vol, 1 - vol)).
        for (double v = 0.05; v < 0.5; v += 0.05) {
            const double ratio = 1.0 / std::pow(v, double(d - 1) / d);
            CHECK(ratio >= default_lambda1(d));
        }
        // Corner spheres are worse at every admissible radius.
        for (double rho = 0.1; rho <= 1.0; rho += 0.1) {
            double area, vol;
            if (d == 2) {
                area = 0.5 * M_PI * rho;
                vol = 0.25 * M_PI * rho * rho;
            } else {
                area = 0.5 * M_PI * rho * rho;
                vol = M_PI * rho * rho * rho / 6.0;
            }
            if (vol > 0.5) break;
            const double ratio = area / std::pow(std::min(vol, 1.0 - vol), double(d - 1) / d);
            CHECK(ratio >= default_lambda1(d) * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("parameter map reproduces the frozen M=2 constants") {
    const TheoremParams p = theorem_parameters(2.0, 2, 1.0, 1.0, default_lambda1(2));
    CHECK(p.epsilon == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.N == 4096);
    CHECK(p.N_small_scale == 4096);
    CHECK(p.L == 4);
    CHECK(p.alpha == doctest::Approx(M_PI / 16.0).epsilon(1e-15));
    CHECK(p.beta == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(p.gamma == doctest::Approx(1.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(p.ln_ratio == doctest::Approx(4.0 / 4096.0).epsilon(1e-15));
    CHECK(p.ln_consistent);
    CHECK(p.admissible);
    CHECK(p.rejection_reason.empty());
}

TEST_CASE("parameter map rejects inconsistent sets with a reason") {
    SUBCASE("epsilon at one is rejected") {
        const TheoremParams p = theorem_parameters(1.0, 2, 1.0, 1.0, default_lambda1(2));
        CHECK(p.epsilon == 1.0);
        CHECK_FALSE(p.admissible);
        CHECK(p.rejection_reason.find("epsilon") != std::string::npos);
    }
    SUBCASE("L reaching N is rejected") {
        const TheoremParams p = theorem_parameters(1.0, 2, 2.0, 1.0, default_lambda1(2));
        CHECK(p.epsilon == doctest::Approx(0.5));
        CHECK(p.N == 2);
        CHECK(p.L == 2);
        CHECK_FALSE(p.admissible);
        CHECK(p.rejection_reason.find("L") != std::string::npos);
    }
    SUBCASE("preconditions throw") {
        CHECK_THROWS(theorem_parameters(0.49, 2, 1.0, 1.0, 1.0));
        CHECK_THROWS(theorem_parameters(2.0, 4, 1.0, 1.0, 1.0));
        CHECK_THROWS(theorem_parameters(2.0, 2, 0.0, 1.0, 1.0));
        CHECK_THROWS(theorem_parameters(2.0, 2, 1.0, -1.0, 1.0));
        CHECK_THROWS(theorem_parameters(2.0, 2, 1.0, 1.0, 0.0));
    }
}

TEST_CASE("alpha and N follow their scaling laws") {
    const TheoremParams one = theorem_parameters(1.0, 2, 1.0, 1.0, default_lambda1(2));
    CHECK(one.alpha == doctest::Approx(M_PI / 4.0).epsilon(1e-15));

    // Doubling M multiplies N by 2^(5d+2) within rounding.
    for (int d : {2, 3}) {
        const TheoremParams pm = theorem_parameters(2.0, d, 1.0, 1.0, default_lambda1(d));
        const TheoremParams p2m = theorem_parameters(4.0, d, 1.0, 1.0, default_lambda1(d));
        const double factor = std::pow(2.0, 5 * d + 2);
        CHECK(static_cast<double>(p2m.N) / static_cast<double>(pm.N) ==
              doctest::Approx(factor).epsilon(1e-9));
    }
}

TEST_CASE("parameter sweep over M yields valid or explicitly rejected sets") {
    for (int d : {2, 3}) {
        for (double M = 0.5; M <= 64.0; M *= 1.3) {
            const TheoremParams p = theorem_parameters(M, d, 1.0, 1.0, default_lambda1(d));
            if (p.admissible) {
                CHECK(p.epsilon > 0.0);
                CHECK(p.epsilon < 1.0);
                CHECK(p.N >= 1);
                CHECK(p.L >= 1);
                CHECK(p.L < p.N);
                CHECK(p.alpha <= unit_ball_volume(d) / std::pow(2.0, d) * (1.0 + 1e-12));
                CHECK(p.gamma > 1.0);
                CHECK(p.ln_consistent);
            } else {
                CHECK_FALSE(p.rejection_reason.empty());
            }
        }
    }
}

TEST_CASE("comparison profile hits its anchor values exactly") {
    for (int d : {2, 3}) {
        const TheoremParams p = theorem_parameters(2.0, d, 1.0, 1.0, default_lambda1(d));
        const double b = p.phi_b;
        if (d == 2) {
            CHECK(p.phi_a == doctest::Approx(0.125).epsilon(1e-15));
            CHECK(b == doctest::Approx(2.0).epsilon(1e-15));
        }
        CHECK(phi(0.0, p) == 0.0);
        CHECK(phi(b, p) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(phi(2.0 * b, p) == 1.0);
        CHECK(phi(-1.0, p) == 0.0);
        CHECK(phi(2.0 * b + 1.0, p) == 1.0);
    }
}

TEST_CASE("comparison profile is monotone, symmetric, and slope-bounded") {
    for (int d : {2, 3}) {
        const TheoremParams p = theorem_parameters(2.0, d, 1.0, 1.0, default_lambda1(d));
        const double b = p.phi_b;
        const double slope_bound = d * p.phi_a * std::pow(b, d - 1);
        double prev = -1.0;
        const int n = 400;
        for (int i = 0; i <= n; ++i) {
            const double t = 2.0 * b * i / n;
            const double v = phi(t, p);
            CHECK(v >= prev - 1e-15);
            prev = v;
            CHECK(phi(t, p) + phi(2.0 * b - t, p) == doctest::Approx(1.0).epsilon(1e-13));
            if (i > 0) {
                const double fd = (phi(t, p) - phi(t - 2.0 * b / n, p)) / (2.0 * b / n);
                CHECK(fd <= slope_bound * (1.0 + 1e-9));
            }
        }
    }
}

TEST_CASE("comparison profile satisfies its growth equation") {
    for (int d : {2, 3}) {
        const TheoremParams p = theorem_parameters(2.0, d, 1.0, 1.0, default_lambda1(d));
        const double b = p.phi_b;
        for (double t : {0.15 * b, 0.5 * b, 0.9 * b, 1.1 * b, 1.5 * b, 1.9 * b}) {
            CHECK(phi_ode_residual(t, p, 1e-5) <= 1e-6);
            // Branch symmetry carries to the residual.
            CHECK(phi_ode_residual(t, p) ==
                  doctest::Approx(phi_ode_residual(2.0 * b - t, p)).epsilon(1e-6));
        }
        // Corner guards.
        CHECK_THROWS(phi_ode_residual(0.0, p));
        CHECK_THROWS(phi_ode_residual(b + 1e-6, p, 1e-5));
        CHECK_THROWS(phi_ode_residual(2.0 * b, p));
    }
    // Cubic branch in d=3: centered differences carry an O(fd^2) error that
    // Richardson halving divides by four.
    const TheoremParams p3 = theorem_parameters(2.0, 3, 1.0, 1.0, default_lambda1(3));
    const double t = 0.4 * p3.phi_b;
    const double r1 = phi_ode_residual(t, p3, 1e-3);
    const double r2 = phi_ode_residual(t, p3, 5e-4);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("predicted waiting time is linear in the measured scale") {
    const TheoremParams p = theorem_parameters(2.0, 2, 3.5, 1.0, default_lambda1(2));
    CHECK(p.predicted_waiting_time(0.0) == 0.0);
    CHECK(p.predicted_waiting_time(2.0) == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(p.predicted_waiting_time(1.0) + p.predicted_waiting_time(3.0) ==
          doctest::Approx(p.predicted_waiting_time(4.0)).epsilon(1e-15));
    CHECK(p.t1_offset(1.0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("tail rate interpolates between zero and d+1") {
    SUBCASE("anchor value") {
        CHECK(bin_tail_rate(1.0, 2).beta_prime == doctest::Approx(0.75).epsilon(1e-15));
    }
    SUBCASE("monotone in beta, bounded by d+1, and below beta") {
        for (int d : {2, 3}) {
            double prev = 0.0;
            for (double beta = 0.05; beta < 50.0; beta *= 1.7) {
                const TailRate r = bin_tail_rate(beta, d);
                CHECK(r.beta_prime > prev);
                CHECK(r.beta_prime < d + 1.0);
                CHECK(r.beta_prime < beta);
                prev = r.beta_prime;
            }
            // beta -> infinity approaches d+1.
            CHECK(bin_tail_rate(1e9, d).beta_prime == doctest::Approx(d + 1.0).epsilon(1e-6));
        }
    }
    SUBCASE("length scale is C at M=1 and grows with M") {
        const TailRate r = bin_tail_rate(0.125, 2);
        CHECK(bin_length_scale(1.0, r, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(bin_length_scale(2.0, r, 2.0) > bin_length_scale(1.0, r, 2.0));
        CHECK_THROWS(bin_length_scale(0.0, r, 2.0));
    }
}
