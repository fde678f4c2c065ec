#pragma once

#include <array>
#include <span>

#include "laplace/polynomial.hpp"

namespace laplace {

// E[Z^alpha] for Z standard normal on R^dim: product of (a_i - 1)!! over even
// exponents, zero if any exponent is odd. Exponents above 60 are rejected
// (double factorial would lose all precision long before overflow matters).
double gaussian_moment(const MultiIndex& alpha);

// E[p(Z)], termwise. Works over double and EpsSeries coefficients.
template <class R>
R expect_poly(const Polynomial<R>& p) {
    R acc{};
    for (const auto& [a, c] : p.terms()) {
        double m = gaussian_moment(a);
        if (m != 0.0) acc += c * m;
    }
    return acc;
}

// Multivariate Hermite polynomials of the two orders the expansion needs:
// H_i(x) = x_i and
// H_{ijk}(x) = x_i x_j x_k - x_i [j=k] - x_j [i=k] - x_k [i=j].
class HermiteIndex {
public:
    static HermiteIndex first(int dim, int i);
    static HermiteIndex third(int dim, int i, int j, int k);  // sorts (i,j,k)

    int order() const { return order_; }
    int dim() const { return dim_; }
    std::span<const int> indices() const { return {idx_.data(), static_cast<std::size_t>(order_)}; }
    int distinct_count() const;

private:
    HermiteIndex(int dim, int order, std::array<int, 3> idx) : dim_(dim), order_(order), idx_(idx) {}
    int dim_;
    int order_;
    std::array<int, 3> idx_;
};

double hermite_eval(const HermiteIndex& h, std::span<const double> x);

// E[H(Z)^2]: 1 for order one; 6, 2, 1 for order-three indices with one, two,
// three distinct values.
double hermite_second_moment(const HermiteIndex& h);

// Same H as a Polynomial, for expectation-based identities in tests.
Polynomial<double> hermite_poly(const HermiteIndex& h);

}  // namespace laplace
