#include "laplace/gaussian.hpp"

#include <algorithm>
#include <stdexcept>

namespace laplace {

double gaussian_moment(const MultiIndex& alpha) {
    double r = 1.0;
    for (int i = 0; i < alpha.dim(); ++i) {
        int a = alpha[i];
        if (a % 2 == 1) return 0.0;
        if (a > 60) throw std::domain_error("gaussian_moment: exponent above 60 unsupported");
        for (int k = a - 1; k >= 3; k -= 2) r *= static_cast<double>(k);
    }
    return r;
}

HermiteIndex HermiteIndex::first(int dim, int i) {
    if (i < 0 || i >= dim) throw std::invalid_argument("HermiteIndex::first: index out of range");
    return HermiteIndex(dim, 1, {i, 0, 0});
}

HermiteIndex HermiteIndex::third(int dim, int i, int j, int k) {
    std::array<int, 3> a{i, j, k};
    for (int v : a)
        if (v < 0 || v >= dim) throw std::invalid_argument("HermiteIndex::third: index out of range");
    std::sort(a.begin(), a.end());
    return HermiteIndex(dim, 3, a);
}

int HermiteIndex::distinct_count() const {
    if (order_ == 1) return 1;
    int n = 1;
    if (idx_[1] != idx_[0]) ++n;
    if (idx_[2] != idx_[1]) ++n;
    return n;
}

double hermite_eval(const HermiteIndex& h, std::span<const double> x) {
    if (static_cast<int>(x.size()) != h.dim())
        throw std::invalid_argument("hermite_eval: point has wrong dimension");
    auto idx = h.indices();
    if (h.order() == 1) return x[static_cast<std::size_t>(idx[0])];
    const double xi = x[static_cast<std::size_t>(idx[0])];
    const double xj = x[static_cast<std::size_t>(idx[1])];
    const double xk = x[static_cast<std::size_t>(idx[2])];
    double v = xi * xj * xk;
    if (idx[1] == idx[2]) v -= xi;
    if (idx[0] == idx[2]) v -= xj;
    if (idx[0] == idx[1]) v -= xk;
    return v;
}

double hermite_second_moment(const HermiteIndex& h) {
    if (h.order() == 1) return 1.0;
    switch (h.distinct_count()) {
        case 1: return 6.0;
        case 2: return 2.0;
        default: return 1.0;
    }
}

Polynomial<double> hermite_poly(const HermiteIndex& h) {
    Polynomial<double> p(h.dim(), 3);
    auto idx = h.indices();
    if (h.order() == 1) {
        p.add_term(MultiIndex::unit(h.dim(), idx[0]), 1.0);
        return p;
    }
    MultiIndex cubic = MultiIndex::unit(h.dim(), idx[0])
                           .plus(MultiIndex::unit(h.dim(), idx[1]))
                           .plus(MultiIndex::unit(h.dim(), idx[2]));
    p.add_term(cubic, 1.0);
    if (idx[1] == idx[2]) p.add_term(MultiIndex::unit(h.dim(), idx[0]), -1.0);
    if (idx[0] == idx[2]) p.add_term(MultiIndex::unit(h.dim(), idx[1]), -1.0);
    if (idx[0] == idx[1]) p.add_term(MultiIndex::unit(h.dim(), idx[2]), -1.0);
    return p;
}

}  // namespace laplace
