#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "laplace/model.hpp"

namespace laplace {

// A model together with callables for the actual integrand, for the numerical
// oracles. The Model member carries the derivative jets the expansions use;
// f and log_g evaluate the full (non-truncated) functions.
struct LaplaceIntegrand {
    int d = 1;
    Model model;
    std::function<double(std::span<const double>)> f;
    std::function<double(std::span<const double>)> log_g;  // empty means g == 1

    // set when f and g depend on the point only through its norm
    bool exact_radial = false;
    std::function<double(double)> f_radial;
    std::function<double(double)> logg_radial;
};

// f(x) = |x|^2/2 + |x|^4/24, g == 1. The order-4 jet has classes
// (i,i,i,i) -> 1 and (i,i,j,j) -> 1/3.
LaplaceIntegrand quartic_model(int d, int L);

// Seeded random jets with entries uniform in [-scale, scale], plus the
// confining term scale*|x|^(2L+2) in f so the integral exists for every draw.
// scale = 0 degenerates to the pure Gaussian.
LaplaceIntegrand random_poly_model(int d, int L, std::uint64_t seed, double scale);

struct LogregConfig {
    int n = 100;
    int d = 2;
    int L = 2;
    std::uint64_t seed = 1;
    std::vector<double> x_star;      // defaults to 0
    std::string link = "logistic";   // or "quadratic" (pure Gaussian control)
};

// Idealized regression surrogate: features X_i uniform on the sphere of
// radius 1.5, ell(x) = (1/n) sum_i [psi(X_i.x) - psi'(X_i.x*) X_i.x], so x*
// is the exact minimizer by construction. f(t) = ell(x* + H^{-1/2} t) - ell(x*)
// with H the Hessian of ell at x*.
struct LogregInstance {
    LaplaceIntegrand integrand;
    std::vector<std::vector<double>> features;
    double ell_star = 0.0;
    double log_det_H = 0.0;
    int n = 0;
};

LogregInstance logreg_model(const LogregConfig& cfg);

// Coefficients of psi^(k) for the logistic link written as a polynomial in
// u = sigma(t); psi' = u and each derivative is P'(u) u(1-u). Exposed for
// tests and the docs table.
std::vector<double> logistic_psi_derivative_poly(int k);
double logistic_psi_derivative(int k, double t);

// Max deviation of the callable f from the standardized normal form at 0:
// |grad f(0)| (5-point stencils) and |hess f(0) - I|, both sup-norm. Builders
// reject anything above 1e-8.
struct StandardizationReport {
    double grad_inf = 0.0;
    double hess_dev_inf = 0.0;
};
StandardizationReport standardization_check(const LaplaceIntegrand& m);

// Copy of `m` with the expansion order forced to L: jets outside the new
// admissible ranges are dropped, missing ones stay zero. The integrand
// callables are untouched, so raising L past what the jets support makes the
// higher coefficients silently zero; callers own that trade-off.
Model with_expansion_order(const Model& m, int L);

// Rebuild the integrand callables for a model loaded from a file. Builder
// labels ("quartic(...)", "random(...)", "logreg(...)") re-run the named
// builder and cross-check the stored jets against the rebuilt ones; anything
// else integrates the jet polynomial plus a confining term
// max(0.1, largest |entry|) * |x|^(2L+2).
LaplaceIntegrand integrand_from_model(const Model& m);

}  // namespace laplace
