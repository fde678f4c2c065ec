#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "laplace/models.hpp"

namespace laplace {

struct OracleEstimate {
    double log_I = 0.0;
    double std_error = 0.0;  // 0 for deterministic quadrature
    std::string method;      // radial | ghq | mc
    double lambda = 0.0;
    long long samples_or_nodes = 0;
    std::optional<std::uint64_t> seed;
    bool converged = true;
};

// 1-d reduction for integrands that depend on the point only through its
// norm: I = (2^(d/2-1) Gamma(d/2))^{-1} int_0^inf u^(d-1) g(u/sqrt(l))
// exp(-l f(u/sqrt(l))) du, by adaptive Gauss-Kronrod to rel_tol.
OracleEstimate oracle_radial(const LaplaceIntegrand& m, double lambda, double rel_tol);

// Tensorized Gauss-Hermite evaluation of
// I = E_{T~N(0,I)}[ g(T/sqrt(l)) exp(-l f(T/sqrt(l)) + |T|^2/2) ].
// Runs the requested grid and a 1.5x refinement; the gap between the two is
// the reported std_error and must stay below 1e-8 for the converged flag.
OracleEstimate oracle_ghq(const LaplaceIntegrand& m, double lambda, int nodes_per_dim);

// Importance sampling from N(0, I/lambda); unbiased for I itself, log taken
// at the end with the delta-method standard error sd/(mean sqrt(N)).
OracleEstimate oracle_mc(const LaplaceIntegrand& m, double lambda, long long samples,
                         std::uint64_t seed);

enum class OracleKind { radial, ghq, mc };

struct OracleOptions {
    OracleKind kind = OracleKind::radial;
    double rel_tol = 1e-12;      // radial
    int nodes_per_dim = 40;      // ghq
    long long samples = 200000;  // mc
    std::uint64_t seed = 1;      // mc; sweep rows derive substreams from it
};

OracleEstimate run_oracle(const LaplaceIntegrand& m, double lambda, const OracleOptions& opt);

struct SweepRow {
    int d = 0;
    double lambda = 0.0;
    int L = 0;
    double log_I_oracle = 0.0;
    double log_I_expansion = 0.0;
    double remainder = 0.0;  // log_I_oracle - log_I_expansion, stored exactly
    double oracle_std_error = 0.0;
    bool usable = true;  // false when the remainder drowns in oracle noise
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<double> coefficients;  // b_1..b_{L-1} actually subtracted
    double slope = 0.0;
    double slope_std_error = 0.0;
    bool slope_fitted = false;
};

// Rows for each lambda plus the least-squares slope of log|remainder| against
// log lambda over the usable rows. Lambdas must be >= 3 strictly increasing
// values, geometrically spaced within 1%. With a pure-noise MC sweep (no
// usable rows) this throws and suggests a deterministic oracle.
SweepResult remainder_sweep(const LaplaceIntegrand& m, const std::vector<double>& lambdas,
                            int L, const OracleOptions& opt);

}  // namespace laplace
