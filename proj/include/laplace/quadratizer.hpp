#pragma once

#include <utility>

#include "laplace/expansion.hpp"
#include "laplace/model.hpp"
#include "laplace/polynomial.hpp"

namespace laplace {

using EpsPoly = Polynomial<EpsSeries>;
using EpsMap = PolyMap<EpsSeries>;

// Working exponent of the inner integral between pipeline stages. `stage` = m
// carries the grading invariant: every monomial of x-degree >= 3 has all
// eps-coefficients of order < m equal to zero (exactly; rounding residues are
// checked against 1e-12 * coeff_scale and snapped), the x-degree cap is
// 2L-2m+1, and the eps^0 quadratic part is exactly |t|^2/2.
struct GradedExponent {
    EpsPoly poly{1, 2};
    int stage = 0;
    int d = 1;
    int L = 2;
    double coeff_scale = 1.0;
    // largest rounding residue absorbed by a snap so far, relative to scale
    double max_snap_residual_rel = 0.0;
};

// E_L brought to the square form a.t + t.B't/2 with a = eps*J1 and
// B' = I + 2 eps*J2; stores J1 and J2 themselves.
struct SquareForm {
    std::vector<EpsSeries> a;
    std::vector<std::vector<EpsSeries>> B;
    int d = 1;
    int L = 2;
};

// Degree-by-degree elimination of the cubic-and-up part of
// f(x) = |x|^2/2 + sum_k grad^k f(0)[x^k]/k!  truncated at degree 2L+1.
// Returns the accumulated change of variables X and the residual exponent
// (equal to |t|^2/2 once degrees 3..2L+1 cancel).
std::pair<EpsMap, GradedExponent> initial_quadratize(const Model& model);

// tr sum_{k>=1} (-1)^{k+1}/k (J(t) - I)^k truncated at degree_cap, where J is
// the Jacobian of m. Requires an identity-part map whose perturbation sits at
// eps-order >= eps_order in every coefficient. Terminates on its own: J - I
// has positive x-degree everywhere.
EpsPoly logdet_series(const EpsMap& m, int eps_order, int degree_cap);

// E_1 = residual - (eps/d) * [log g(X(t)) + log det X'(t)], both series
// truncated at x-degree 2L-1; the 1/lambda weight enters as eps/d.
GradedExponent fold_stage_inputs(const Model& model, const EpsMap& X,
                                 const GradedExponent& residual);

// One grading stage: eliminates x-degrees 3..2L-2m+1 of E_m, folds in the
// change-of-variables log-determinant at weight eps/d, drops x-degree-(>=3)
// content above 2L-2m-1, and returns (T_m, E_{m+1}).
std::pair<EpsMap, GradedExponent> eliminate_stage(const GradedExponent& E, int m);

// Reads J1/J2 off the purely linear-plus-quadratic E_L.
SquareForm complete_square(const GradedExponent& EL);

// Q(eps) = (d/2) eps J1^T (I + 2 eps J2)^{-1} J1 - (1/2) tr log(I + 2 eps J2),
// expanded by the terminating Neumann and matrix-log series; returns
// b_k = d^k [eps^k] Q for k = 1..L-1.
ExpansionResult extract_coefficients(const SquareForm& sq, int d, int L);

// Whole pipeline on a model; fills the stage diagnostics.
ExpansionResult run_pipeline(const Model& model);

}  // namespace laplace
