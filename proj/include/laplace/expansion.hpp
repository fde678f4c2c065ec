#pragma once

#include <cstddef>
#include <vector>

namespace laplace {

enum class ExpansionPath { cumulant, quadratize };

struct ExpansionDiagnostics {
    struct PerCoefficient {
        int term_count = 0;     // contributing enumeration terms (cumulant path)
        double elapsed_ms = 0.0;
    };
    std::vector<PerCoefficient> per_coefficient;

    // Cumulant path: relative gap between the order-one coefficient and its
    // closed form (see b1_closed_form).
    double b1_crosscheck_rel = 0.0;

    // Quadratizer path: monomial count of the working exponent after each
    // stage (index 0 = after the initial quadratization), and the largest
    // rounding residue absorbed when eliminated coefficients were snapped to
    // zero, relative to the input coefficient scale.
    std::vector<std::size_t> stage_monomials;
    double max_elimination_residual_rel = 0.0;
};

struct ExpansionResult {
    std::vector<double> coefficients;  // b_1 .. b_{L-1}
    ExpansionPath path = ExpansionPath::cumulant;
    ExpansionDiagnostics diagnostics;
};

}  // namespace laplace
