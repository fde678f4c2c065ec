#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace laplace {

// Truncated power series in the bookkeeping variable eps, over double.
// A series of truncation order N stores coefficients of eps^0 .. eps^N;
// products drop everything above eps^N. A default-constructed EpsSeries is
// "empty" and acts as an exact zero that adopts the other operand's order,
// which lets generic containers value-initialize entries safely.
class EpsSeries {
public:
    EpsSeries() = default;

    explicit EpsSeries(int truncation_order) {
        if (truncation_order < 0) throw std::invalid_argument("EpsSeries: negative truncation order");
        c_.assign(static_cast<std::size_t>(truncation_order) + 1, 0.0);
    }

    static EpsSeries constant(double v, int truncation_order) {
        EpsSeries s(truncation_order);
        s.c_[0] = v;
        return s;
    }

    // v * eps^k
    static EpsSeries monomial(double v, int k, int truncation_order) {
        EpsSeries s(truncation_order);
        if (k < 0) throw std::invalid_argument("EpsSeries::monomial: negative power");
        if (k <= truncation_order) s.c_[static_cast<std::size_t>(k)] = v;
        return s;
    }

    bool empty() const { return c_.empty(); }
    int truncation_order() const { return static_cast<int>(c_.size()) - 1; }

    double operator[](int k) const {
        if (k < 0) throw std::invalid_argument("EpsSeries: negative index");
        if (empty() || k >= static_cast<int>(c_.size())) return 0.0;
        return c_[static_cast<std::size_t>(k)];
    }

    double& at(int k) {
        if (empty() || k < 0 || k >= static_cast<int>(c_.size()))
            throw std::out_of_range("EpsSeries::at: index outside truncation");
        return c_[static_cast<std::size_t>(k)];
    }

    bool is_zero() const {
        for (double v : c_)
            if (v != 0.0) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    // Smallest k with nonzero coefficient, or truncation_order()+1 if zero.
    int min_order() const {
        for (std::size_t k = 0; k < c_.size(); ++k)
            if (c_[k] != 0.0) return static_cast<int>(k);
        return static_cast<int>(c_.size());
    }

    EpsSeries& operator+=(const EpsSeries& o) {
        if (o.empty()) return *this;
        if (empty()) { *this = o; return *this; }
        check_order(o);
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
        return *this;
    }

    EpsSeries& operator-=(const EpsSeries& o) {
        if (o.empty()) return *this;
        if (empty()) { *this = -o; return *this; }
        check_order(o);
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
        return *this;
    }

    EpsSeries& operator*=(double s) {
        for (double& v : c_) v *= s;
        return *this;
    }

    EpsSeries operator-() const {
        EpsSeries r(*this);
        for (double& v : r.c_) v = -v;
        return r;
    }

    friend EpsSeries operator+(EpsSeries a, const EpsSeries& b) { a += b; return a; }
    friend EpsSeries operator-(EpsSeries a, const EpsSeries& b) { a -= b; return a; }
    friend EpsSeries operator*(EpsSeries a, double s) { a *= s; return a; }
    friend EpsSeries operator*(double s, EpsSeries a) { a *= s; return a; }

    friend EpsSeries operator*(const EpsSeries& a, const EpsSeries& b) {
        if (a.empty() || b.empty()) return EpsSeries();
        a.check_order(b);
        EpsSeries r(a.truncation_order());
        const int n = a.truncation_order();
        for (int i = 0; i <= n; ++i) {
            if (a.c_[static_cast<std::size_t>(i)] == 0.0) continue;
            for (int j = 0; i + j <= n; ++j)
                r.c_[static_cast<std::size_t>(i + j)] +=
                    a.c_[static_cast<std::size_t>(i)] * b.c_[static_cast<std::size_t>(j)];
        }
        return r;
    }

    EpsSeries& operator*=(const EpsSeries& o) { *this = *this * o; return *this; }

    // Multiplicative inverse; requires a unit (nonzero) constant term.
    EpsSeries inverse() const {
        if (empty() || c_[0] == 0.0)
            throw std::domain_error("EpsSeries::inverse: constant term is zero (non-unit series)");
        EpsSeries r(truncation_order());
        r.c_[0] = 1.0 / c_[0];
        for (int n = 1; n <= truncation_order(); ++n) {
            double acc = 0.0;
            for (int k = 1; k <= n; ++k)
                acc += c_[static_cast<std::size_t>(k)] * r.c_[static_cast<std::size_t>(n - k)];
            r.c_[static_cast<std::size_t>(n)] = -acc / c_[0];
        }
        return r;
    }

    // Multiply by eps^p (coefficients above the truncation order fall off).
    EpsSeries shifted_up(int p) const {
        if (p < 0) throw std::invalid_argument("EpsSeries::shifted_up: negative shift");
        if (empty()) return *this;
        EpsSeries r(truncation_order());
        for (int k = 0; k + p <= truncation_order(); ++k)
            r.c_[static_cast<std::size_t>(k + p)] = c_[static_cast<std::size_t>(k)];
        return r;
    }

    // Divide by eps^p; coefficients below eps^p must vanish.
    EpsSeries shifted_down(int p) const {
        if (p < 0) throw std::invalid_argument("EpsSeries::shifted_down: negative shift");
        if (empty()) return *this;
        for (int k = 0; k < p && k <= truncation_order(); ++k)
            if (c_[static_cast<std::size_t>(k)] != 0.0)
                throw std::domain_error("EpsSeries::shifted_down: nonzero coefficient below shift");
        EpsSeries r(truncation_order());
        for (int k = p; k <= truncation_order(); ++k)
            r.c_[static_cast<std::size_t>(k - p)] = c_[static_cast<std::size_t>(k)];
        return r;
    }

    double eval(double eps) const {
        double acc = 0.0;
        for (std::size_t k = c_.size(); k-- > 0;) acc = acc * eps + c_[k];
        return acc;
    }

    bool operator==(const EpsSeries& o) const {
        if (empty() || o.empty()) return is_zero_or_empty(*this) && is_zero_or_empty(o);
        return c_ == o.c_;
    }

private:
    static bool is_zero_or_empty(const EpsSeries& s) { return s.empty() || s.is_zero(); }

    void check_order(const EpsSeries& o) const {
        if (o.c_.size() != c_.size())
            throw std::invalid_argument("EpsSeries: truncation order mismatch");
    }

    std::vector<double> c_;
};

// Ring helpers shared by generic polynomial code.
inline bool ring_is_zero(double v) { return v == 0.0; }
inline bool ring_is_zero(const EpsSeries& s) { return s.empty() || s.is_zero(); }
inline double ring_abs(double v) { return std::abs(v); }
inline double ring_abs(const EpsSeries& s) { return s.max_abs(); }

}  // namespace laplace
