#pragma once

#include <compare>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace laplace {

// Exponent vector of a monomial x_0^{a_0} ... x_{d-1}^{a_{d-1}}.
// Comparison is lexicographic so containers keyed by MultiIndex iterate in a
// deterministic order.
class MultiIndex {
public:
    MultiIndex() = default;

    explicit MultiIndex(std::vector<int> exponents) : e_(std::move(exponents)) {
        for (int v : e_)
            if (v < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    }

    static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }

    static MultiIndex unit(int dim, int var) {
        if (var < 0 || var >= dim) throw std::invalid_argument("MultiIndex::unit: var out of range");
        std::vector<int> e(dim, 0);
        e[var] = 1;
        return MultiIndex(std::move(e));
    }

    int dim() const { return static_cast<int>(e_.size()); }
    int degree() const { return std::accumulate(e_.begin(), e_.end(), 0); }
    int operator[](int i) const { return e_[i]; }
    const std::vector<int>& exponents() const { return e_; }

    MultiIndex plus(const MultiIndex& o) const {
        check_dim(o);
        std::vector<int> e(e_);
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += o.e_[i];
        return MultiIndex(std::move(e));
    }

    // Exponent decremented in one variable; invalid (resulting -1) throws.
    MultiIndex minus_unit(int var) const {
        if (var < 0 || var >= dim() || e_[var] == 0)
            throw std::invalid_argument("MultiIndex::minus_unit: exponent would go negative");
        std::vector<int> e(e_);
        --e[var];
        return MultiIndex(std::move(e));
    }

    bool operator==(const MultiIndex& o) const { return e_ == o.e_; }
    auto operator<=>(const MultiIndex& o) const {
        return std::lexicographical_compare_three_way(e_.begin(), e_.end(), o.e_.begin(), o.e_.end());
    }

private:
    void check_dim(const MultiIndex& o) const {
        if (o.dim() != dim()) throw std::invalid_argument("MultiIndex: dimension mismatch");
    }

    std::vector<int> e_;
};

}  // namespace laplace
