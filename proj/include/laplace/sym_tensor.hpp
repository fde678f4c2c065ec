#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace laplace {

// Symmetric tensor of a given order on R^dim, stored densely with one slot per
// permutation class (sorted index tuple). Indices are 0-based. Entry access
// sorts the requested tuple and ranks it combinatorially, so lookups are O(k log k).
class SymTensor {
public:
    SymTensor(int order, int dim);

    int order() const { return order_; }
    int dim() const { return dim_; }
    std::size_t class_count() const { return v_.size(); }

    double at(std::span<const int> idx) const;
    void set(std::span<const int> idx, double value);
    void add(std::span<const int> idx, double value);

    // initializer_list conveniences so call sites can write T.at({0, 0, 1})
    double at(std::initializer_list<int> idx) const { return at(std::span<const int>(idx.begin(), idx.size())); }
    void set(std::initializer_list<int> idx, double v) { set(std::span<const int>(idx.begin(), idx.size()), v); }
    void add(std::initializer_list<int> idx, double v) { add(std::span<const int>(idx.begin(), idx.size()), v); }

    // T[x^{(x) order}]
    double eval_power(std::span<const double> x) const;

    // Fully multilinear evaluation T[x_1, ..., x_order]; cost d^order.
    double eval_multi(const std::vector<std::vector<double>>& xs) const;

    // Sum of squared entries over all *ordered* index tuples.
    double frobenius_sq() const;

    double max_abs() const;
    bool is_zero() const;

    // Visit every permutation class: fn(sorted indices, value).
    void for_each_class(const std::function<void(std::span<const int>, double)>& fn) const;

    // Number of distinct orderings of a sorted tuple (multinomial count).
    static std::uint64_t class_multiplicity(std::span<const int> sorted_idx);
    static std::uint64_t class_multiplicity(std::initializer_list<int> idx) {
        return class_multiplicity(std::span<const int>(idx.begin(), idx.size()));
    }

private:
    std::size_t rank(std::span<const int> sorted_idx) const;
    void check_indices(std::span<const int> idx) const;

    int order_ = 0;
    int dim_ = 0;
    std::vector<double> v_;
};

// Build a symmetric tensor from (index tuple, value) entries. Tuples may be
// given in any index order but no two entries may name the same permutation
// class; violations throw with the offending tuple spelled out.
SymTensor symmetrize(const std::vector<std::pair<std::vector<int>, double>>& entries,
                     int order, int dim);

// The d tensors S_i of order M-1 with S_i[x^{(M-1)}] = T[x^{(M-1)}, e_i].
std::vector<SymTensor> lower_slot(const SymTensor& T);

// Power-iteration estimate of max_{|u|=1} |T[u^{(k)}]|. Diagnostic only; a
// lower bound, not certified.
double op_norm_estimate(const SymTensor& T, int restarts = 8, int iters = 60,
                        unsigned seed = 12345);

}  // namespace laplace
