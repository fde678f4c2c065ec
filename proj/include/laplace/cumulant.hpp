#pragma once

#include "laplace/expansion.hpp"
#include "laplace/gaussian.hpp"
#include "laplace/model.hpp"
#include "laplace/polynomial.hpp"

namespace laplace {

// The degree-(k+2) polynomial driving the order-k contribution:
// p_k(x) = grad^k log g(0)[x^k] - grad^{k+2} f(0)[x^{k+2}] / ((k+1)(k+2)).
Polynomial<double> build_pk(const Model& model, int k);

// Joint cumulant of p_1(Z), ..., p_m(Z) for one standard Gaussian Z, via the
// set-partition moment formula. Exact in exact arithmetic; the polynomials
// must share the model dimension.
double joint_cumulant(const std::vector<Polynomial<double>>& polys);

// b_{M/2}: sum over compositions alpha with sum_i i*alpha_i = M of
// cum(alpha_i copies of p_i) / prod_i alpha_i! (i!)^{alpha_i}. M must be even
// and within 2..2L-2.
double b_coefficient(const Model& model, int M);

// Closed form for the first coefficient, written directly in the jet tensors:
// -1/2 <grad lap f, grad g> + 1/8 |grad lap f|^2 + 1/12 |grad^3 f|_F^2
// + 1/2 lap g - 1/8 lap^2 f, with grad g / hess g recovered from the log-g jets.
double b1_closed_form(const Model& model);

// All coefficients b_1..b_{L-1} by cumulant enumeration; the first one is
// cross-checked against b1_closed_form (1e-10, scale-aware) and the gap is
// recorded in diagnostics.
ExpansionResult expand(const Model& model);

}  // namespace laplace
