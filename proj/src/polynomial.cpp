#include "laplace/polynomial.hpp"

namespace laplace {

Polynomial<double> tensor_to_poly(const SymTensor& T) {
    Polynomial<double> p(T.dim(), T.order());
    T.for_each_class([&](std::span<const int> idx, double v) {
        if (v == 0.0) return;
        std::vector<int> expo(static_cast<std::size_t>(T.dim()), 0);
        for (int i : idx) ++expo[static_cast<std::size_t>(i)];
        p.add_term(MultiIndex(std::move(expo)),
                   v * static_cast<double>(SymTensor::class_multiplicity(idx)));
    });
    return p;
}

Polynomial<EpsSeries> embed_eps(const Polynomial<double>& p, int trunc_order, int shift) {
    Polynomial<EpsSeries> out(p.dim(), p.max_degree());
    for (const auto& [a, c] : p.terms())
        out.add_term(a, EpsSeries::monomial(c, shift, trunc_order));
    return out;
}

}  // namespace laplace
