#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "laplace/eps_series.hpp"
#include "laplace/multi_index.hpp"
#include "laplace/sym_tensor.hpp"

namespace laplace {

// Sparse multivariate polynomial over a coefficient ring R (double or
// EpsSeries). Terms are kept in a map ordered lexicographically by exponent,
// so iteration (and anything serialized from it) is deterministic. Each
// polynomial carries a hard degree cap: terms above it are dropped on insert,
// which is how all truncated arithmetic is enforced.
template <class R>
class Polynomial {
public:
    Polynomial(int dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
        if (dim < 1) throw std::invalid_argument("Polynomial: dim must be >= 1");
        if (max_degree < 0) throw std::invalid_argument("Polynomial: negative degree cap");
    }

    int dim() const { return dim_; }
    int max_degree() const { return max_degree_; }
    const std::map<MultiIndex, R>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const MultiIndex& alpha, const R& coeff) {
        if (alpha.dim() != dim_) throw std::invalid_argument("Polynomial::add_term: dimension mismatch");
        if (ring_is_zero(coeff)) return;
        if (alpha.degree() > max_degree_) return;  // truncated ring: silently drops
        auto it = terms_.find(alpha);
        if (it == terms_.end()) {
            terms_.emplace(alpha, coeff);
        } else {
            it->second += coeff;
            if (ring_is_zero(it->second)) terms_.erase(it);
        }
    }

    R coefficient(const MultiIndex& alpha) const {
        auto it = terms_.find(alpha);
        return it == terms_.end() ? R{} : it->second;
    }

    Polynomial& operator+=(const Polynomial& o) {
        check_dim(o);
        max_degree_ = std::max(max_degree_, o.max_degree_);
        for (const auto& [a, c] : o.terms_) add_term(a, c);
        return *this;
    }

    Polynomial& operator-=(const Polynomial& o) {
        check_dim(o);
        max_degree_ = std::max(max_degree_, o.max_degree_);
        for (const auto& [a, c] : o.terms_) {
            R neg = c;
            neg *= -1.0;
            add_term(a, neg);
        }
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { a += b; return a; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { a -= b; return a; }

    Polynomial& scale(double s) {
        if (s == 0.0) { terms_.clear(); return *this; }
        for (auto& [a, c] : terms_) c *= s;
        return *this;
    }

    // Coefficient-wise scale by a ring element (used to weight by a series).
    Polynomial& scale_ring(const R& s) {
        std::map<MultiIndex, R> out;
        for (auto& [a, c] : terms_) {
            R v = c * s;
            if (!ring_is_zero(v)) out.emplace(a, std::move(v));
        }
        terms_ = std::move(out);
        return *this;
    }

    R eval(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dim_)
            throw std::invalid_argument("Polynomial::eval: point has wrong dimension");
        R acc{};
        for (const auto& [a, c] : terms_) {
            double m = 1.0;
            for (int i = 0; i < dim_; ++i)
                for (int p = 0; p < a[i]; ++p) m *= x[static_cast<std::size_t>(i)];
            acc += c * m;
        }
        return acc;
    }

    Polynomial partial_derivative(int var) const {
        if (var < 0 || var >= dim_) throw std::invalid_argument("Polynomial::partial_derivative: bad variable");
        Polynomial r(dim_, max_degree_);
        for (const auto& [a, c] : terms_) {
            if (a[var] == 0) continue;
            R v = c;
            v *= static_cast<double>(a[var]);
            r.add_term(a.minus_unit(var), v);
        }
        return r;
    }

    // Terms of total degree exactly k.
    Polynomial degree_part(int k) const {
        Polynomial r(dim_, max_degree_);
        for (const auto& [a, c] : terms_)
            if (a.degree() == k) r.add_term(a, c);
        return r;
    }

    // Drop all terms with total degree above new_cap and tighten the cap.
    Polynomial truncated(int new_cap) const {
        Polynomial r(dim_, new_cap);
        for (const auto& [a, c] : terms_)
            if (a.degree() <= new_cap) r.add_term(a, c);
        return r;
    }

    int max_term_degree() const {
        int m = 0;
        for (const auto& [a, c] : terms_) m = std::max(m, a.degree());
        return m;
    }

    double max_abs_coefficient() const {
        double m = 0.0;
        for (const auto& [a, c] : terms_) m = std::max(m, ring_abs(c));
        return m;
    }

    std::size_t term_count() const { return terms_.size(); }

private:
    void check_dim(const Polynomial& o) const {
        if (o.dim_ != dim_) throw std::invalid_argument("Polynomial: dimension mismatch");
    }

    int dim_;
    int max_degree_;
    std::map<MultiIndex, R> terms_;
};

// Product truncated to total degree <= cap.
template <class R>
Polynomial<R> poly_multiply(const Polynomial<R>& p, const Polynomial<R>& q, int cap) {
    if (p.dim() != q.dim()) throw std::invalid_argument("poly_multiply: dimension mismatch");
    Polynomial<R> r(p.dim(), cap);
    for (const auto& [a, ca] : p.terms()) {
        if (a.degree() > cap) continue;
        for (const auto& [b, cb] : q.terms()) {
            if (a.degree() + b.degree() > cap) continue;
            r.add_term(a.plus(b), ca * cb);
        }
    }
    return r;
}

// Polynomial change of variables x -> m(x), one component polynomial per
// coordinate. identity_part means m_i = x_i + (terms of degree >= 2), the form
// every construction in this library uses.
template <class R>
class PolyMap {
public:
    PolyMap(int dim, std::vector<Polynomial<R>> components)
        : dim_(dim), comps_(std::move(components)) {
        if (static_cast<int>(comps_.size()) != dim_)
            throw std::invalid_argument("PolyMap: need one component per coordinate");
        for (const auto& c : comps_)
            if (c.dim() != dim_) throw std::invalid_argument("PolyMap: component dimension mismatch");
    }

    int dim() const { return dim_; }
    const std::vector<Polynomial<R>>& components() const { return comps_; }
    const Polynomial<R>& component(int i) const { return comps_[static_cast<std::size_t>(i)]; }

    // m_i = x_i exactly, plus nothing of degree 0 or 1 otherwise.
    bool has_identity_part(double tol = 0.0) const;

    std::vector<R> eval(std::span<const double> x) const {
        std::vector<R> out;
        out.reserve(comps_.size());
        for (const auto& c : comps_) out.push_back(c.eval(x));
        return out;
    }

private:
    int dim_;
    std::vector<Polynomial<R>> comps_;
};

namespace detail {
inline double ring_component(double v, int) { return v; }
inline double ring_component(const EpsSeries& s, int k) { return s[k]; }
inline int ring_top_order(double) { return 0; }
inline int ring_top_order(const EpsSeries& s) { return s.empty() ? 0 : s.truncation_order(); }
}  // namespace detail

template <class R>
bool PolyMap<R>::has_identity_part(double tol) const {
    for (int i = 0; i < dim_; ++i) {
        for (const auto& [a, c] : comps_[static_cast<std::size_t>(i)].terms()) {
            int deg = a.degree();
            if (deg >= 2) continue;
            bool is_self = (deg == 1 && a[i] == 1);
            for (int k = 0; k <= detail::ring_top_order(c); ++k) {
                double want = (is_self && k == 0) ? 1.0 : 0.0;
                if (std::abs(detail::ring_component(c, k) - want) > tol) return false;
            }
            if (deg == 1 && !is_self) {
                // a different coordinate's linear term must be absent entirely
                if (ring_abs(c) > tol) return false;
            }
        }
        // the x_i term must actually be present
        MultiIndex self = MultiIndex::unit(dim_, i);
        if (ring_is_zero(comps_[static_cast<std::size_t>(i)].coefficient(self))) return false;
    }
    return true;
}

// Identity map over R; `proto` supplies the ring shape of the unit coefficient
// (EpsSeries needs a truncation order).
template <class R>
PolyMap<R> identity_map(int dim, int cap, const R& one) {
    std::vector<Polynomial<R>> comps;
    comps.reserve(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        Polynomial<R> c(dim, cap);
        c.add_term(MultiIndex::unit(dim, i), one);
        comps.push_back(std::move(c));
    }
    return PolyMap<R>(dim, std::move(comps));
}

// p(m(x)) truncated to total degree <= cap. Component powers are cached per
// exponent so repeated monomials don't redo the truncated products.
template <class R>
Polynomial<R> compose(const Polynomial<R>& p, const PolyMap<R>& m, int cap) {
    if (p.dim() != m.dim()) throw std::invalid_argument("compose: dimension mismatch");
    const int d = p.dim();
    // powers[i][e] = m_i^e (built lazily)
    std::vector<std::vector<Polynomial<R>>> powers(static_cast<std::size_t>(d));
    auto power = [&](int i, int e) -> const Polynomial<R>& {
        auto& pi = powers[static_cast<std::size_t>(i)];
        // exponent 0 is handled by the caller; slot e-1 holds m_i^e
        if (pi.empty()) pi.push_back(m.component(i).truncated(cap));
        while (static_cast<int>(pi.size()) < e)
            pi.push_back(poly_multiply(pi.back(), pi.front(), cap));
        return pi[static_cast<std::size_t>(e - 1)];
    };

    Polynomial<R> out(d, cap);
    for (const auto& [a, c] : p.terms()) {
        Polynomial<R> term(d, cap);
        term.add_term(MultiIndex::zero(d), c);
        for (int i = 0; i < d; ++i)
            if (a[i] > 0) term = poly_multiply(term, power(i, a[i]), cap);
        out += term;
    }
    return out;
}

// (a o b)(x) = a(b(x)), component-wise, truncated to cap.
template <class R>
PolyMap<R> compose_maps(const PolyMap<R>& a, const PolyMap<R>& b, int cap) {
    if (a.dim() != b.dim()) throw std::invalid_argument("compose_maps: dimension mismatch");
    std::vector<Polynomial<R>> comps;
    comps.reserve(static_cast<std::size_t>(a.dim()));
    for (int i = 0; i < a.dim(); ++i) comps.push_back(compose(a.component(i), b, cap));
    return PolyMap<R>(a.dim(), std::move(comps));
}

// Jacobian entries J_{ij} = d m_i / d x_j.
template <class R>
std::vector<std::vector<Polynomial<R>>> jacobian(const PolyMap<R>& m) {
    const int d = m.dim();
    std::vector<std::vector<Polynomial<R>>> J;
    J.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        std::vector<Polynomial<R>> row;
        row.reserve(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) row.push_back(m.component(i).partial_derivative(j));
        J.push_back(std::move(row));
    }
    return J;
}

// Polynomial x^alpha |-> T entry times multinomial count, summed over classes.
Polynomial<double> tensor_to_poly(const SymTensor& T);

// Embed a double polynomial into the EpsSeries ring at eps^shift.
Polynomial<EpsSeries> embed_eps(const Polynomial<double>& p, int trunc_order, int shift = 0);

}  // namespace laplace
