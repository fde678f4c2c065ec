#include "laplace/sym_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace laplace {

namespace {

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

std::string tuple_str(std::span<const int> idx) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? "," : "") << idx[i];
    os << ")";
    return os.str();
}

// Advance a non-decreasing tuple over {0..d-1} in lexicographic order.
bool next_class(std::vector<int>& t, int d) {
    for (int j = static_cast<int>(t.size()) - 1; j >= 0; --j) {
        if (t[static_cast<std::size_t>(j)] < d - 1) {
            int v = t[static_cast<std::size_t>(j)] + 1;
            for (std::size_t i = static_cast<std::size_t>(j); i < t.size(); ++i) t[i] = v;
            return true;
        }
    }
    return false;
}

}  // namespace

SymTensor::SymTensor(int order, int dim) : order_(order), dim_(dim) {
    if (order < 0) throw std::invalid_argument("SymTensor: negative order");
    if (dim < 1) throw std::invalid_argument("SymTensor: dim must be >= 1");
    v_.assign(binomial(dim + order - 1, order), 0.0);
}

std::size_t SymTensor::rank(std::span<const int> sorted_idx) const {
    // Combinatorial number system on the strictly increasing tuple i_j + j.
    std::uint64_t r = 0;
    for (std::size_t j = 0; j < sorted_idx.size(); ++j)
        r += binomial(sorted_idx[j] + static_cast<int>(j), static_cast<int>(j) + 1);
    return static_cast<std::size_t>(r);
}

void SymTensor::check_indices(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != order_)
        throw std::invalid_argument("SymTensor: index tuple " + tuple_str(idx) + " has length " +
                                    std::to_string(idx.size()) + ", expected order " +
                                    std::to_string(order_));
    for (int i : idx)
        if (i < 0 || i >= dim_)
            throw std::invalid_argument("SymTensor: index tuple " + tuple_str(idx) +
                                        " out of range for dim " + std::to_string(dim_));
}

double SymTensor::at(std::span<const int> idx) const {
    check_indices(idx);
    std::vector<int> s(idx.begin(), idx.end());
    std::sort(s.begin(), s.end());
    return v_[rank(s)];
}

void SymTensor::set(std::span<const int> idx, double value) {
    check_indices(idx);
    std::vector<int> s(idx.begin(), idx.end());
    std::sort(s.begin(), s.end());
    v_[rank(s)] = value;
}

void SymTensor::add(std::span<const int> idx, double value) {
    check_indices(idx);
    std::vector<int> s(idx.begin(), idx.end());
    std::sort(s.begin(), s.end());
    v_[rank(s)] += value;
}

std::uint64_t SymTensor::class_multiplicity(std::span<const int> sorted_idx) {
    // Product of binomials C(n, m_i) over the run lengths m_i.
    std::uint64_t r = 1;
    int remaining = static_cast<int>(sorted_idx.size());
    std::size_t i = 0;
    while (i < sorted_idx.size()) {
        std::size_t j = i;
        while (j < sorted_idx.size() && sorted_idx[j] == sorted_idx[i]) ++j;
        r *= binomial(remaining, static_cast<int>(j - i));
        remaining -= static_cast<int>(j - i);
        i = j;
    }
    return r;
}

void SymTensor::for_each_class(const std::function<void(std::span<const int>, double)>& fn) const {
    if (order_ == 0) {
        fn(std::span<const int>(), v_[0]);
        return;
    }
    std::vector<int> t(static_cast<std::size_t>(order_), 0);
    do {
        fn(t, v_[rank(t)]);
    } while (next_class(t, dim_));
}

double SymTensor::eval_power(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("SymTensor::eval_power: point has wrong dimension");
    double acc = 0.0;
    for_each_class([&](std::span<const int> idx, double v) {
        if (v == 0.0) return;
        double m = v * static_cast<double>(class_multiplicity(idx));
        for (int i : idx) m *= x[static_cast<std::size_t>(i)];
        acc += m;
    });
    return acc;
}

double SymTensor::eval_multi(const std::vector<std::vector<double>>& xs) const {
    if (static_cast<int>(xs.size()) != order_)
        throw std::invalid_argument("SymTensor::eval_multi: wrong number of argument vectors");
    for (const auto& x : xs)
        if (static_cast<int>(x.size()) != dim_)
            throw std::invalid_argument("SymTensor::eval_multi: argument vector has wrong dimension");
    double total_tuples = std::pow(static_cast<double>(dim_), order_);
    if (total_tuples > 2e7)
        throw std::invalid_argument("SymTensor::eval_multi: d^order too large for dense evaluation");
    if (order_ == 0) return v_[0];

    std::vector<int> t(static_cast<std::size_t>(order_), 0);
    double acc = 0.0;
    while (true) {
        double m = at(t);
        if (m != 0.0) {
            for (std::size_t j = 0; j < t.size(); ++j) m *= xs[j][static_cast<std::size_t>(t[j])];
            acc += m;
        }
        int j = order_ - 1;
        while (j >= 0 && t[static_cast<std::size_t>(j)] == dim_ - 1) { t[static_cast<std::size_t>(j)] = 0; --j; }
        if (j < 0) break;
        ++t[static_cast<std::size_t>(j)];
    }
    return acc;
}

double SymTensor::frobenius_sq() const {
    double acc = 0.0;
    for_each_class([&](std::span<const int> idx, double v) {
        acc += static_cast<double>(class_multiplicity(idx)) * v * v;
    });
    return acc;
}

double SymTensor::max_abs() const {
    double m = 0.0;
    for (double v : v_) m = std::max(m, std::abs(v));
    return m;
}

bool SymTensor::is_zero() const {
    for (double v : v_)
        if (v != 0.0) return false;
    return true;
}

SymTensor symmetrize(const std::vector<std::pair<std::vector<int>, double>>& entries,
                     int order, int dim) {
    SymTensor T(order, dim);
    std::vector<std::pair<std::vector<int>, std::vector<int>>> seen;  // (sorted, original)
    for (const auto& [idx, value] : entries) {
        if (static_cast<int>(idx.size()) != order)
            throw std::invalid_argument("symmetrize: entry " + tuple_str(idx) + " has length " +
                                        std::to_string(idx.size()) + ", expected " + std::to_string(order));
        for (int i : idx)
            if (i < 0 || i >= dim)
                throw std::invalid_argument("symmetrize: entry " + tuple_str(idx) +
                                            " out of range for dim " + std::to_string(dim));
        std::vector<int> s(idx);
        std::sort(s.begin(), s.end());
        for (const auto& [ps, porig] : seen)
            if (ps == s)
                throw std::invalid_argument("symmetrize: entries " + tuple_str(porig) + " and " +
                                            tuple_str(idx) + " name the same permutation class");
        seen.emplace_back(s, idx);
        T.set(s, value);
    }
    return T;
}

std::vector<SymTensor> lower_slot(const SymTensor& T) {
    const int M = T.order();
    if (M < 1) throw std::invalid_argument("lower_slot: tensor order must be >= 1");
    const int d = T.dim();
    std::vector<SymTensor> out(static_cast<std::size_t>(d), SymTensor(M - 1, d));
    for (int i = 0; i < d; ++i) {
        out[static_cast<std::size_t>(i)].for_each_class([&](std::span<const int> c, double) {
            std::vector<int> full(c.begin(), c.end());
            full.push_back(i);
            out[static_cast<std::size_t>(i)].set(c, T.at(full));
        });
    }
    return out;
}

double op_norm_estimate(const SymTensor& T, int restarts, int iters, unsigned seed) {
    const int d = T.dim();
    const int k = T.order();
    if (k == 0) return std::abs(T.at(std::span<const int>()));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double best = 0.0;
    std::vector<double> u(static_cast<std::size_t>(d)), v(static_cast<std::size_t>(d));
    for (int r = 0; r < restarts; ++r) {
        double n2 = 0.0;
        for (auto& ui : u) { ui = unif(rng); n2 += ui * ui; }
        if (n2 == 0.0) continue;
        for (auto& ui : u) ui /= std::sqrt(n2);
        for (int it = 0; it < iters; ++it) {
            // v = T[u^{(k-1)}, .], via v_i = (1/k) d/du_i T[u^{(k)}].
            std::fill(v.begin(), v.end(), 0.0);
            T.for_each_class([&](std::span<const int> idx, double val) {
                if (val == 0.0) return;
                double mult = val * static_cast<double>(SymTensor::class_multiplicity(idx));
                // For each distinct variable in the class, drop one copy.
                for (std::size_t p = 0; p < idx.size(); ++p) {
                    if (p > 0 && idx[p] == idx[p - 1]) continue;
                    double prod = mult;
                    for (std::size_t q = 0; q < idx.size(); ++q)
                        if (q != p) prod *= u[static_cast<std::size_t>(idx[q])];
                    int copies = 0;
                    for (int j : idx)
                        if (j == idx[p]) ++copies;
                    v[static_cast<std::size_t>(idx[p])] += prod * static_cast<double>(copies) /
                                                           static_cast<double>(k);
                }
            });
            double vn = 0.0;
            for (double vi : v) vn += vi * vi;
            vn = std::sqrt(vn);
            if (vn < 1e-300) break;
            for (std::size_t i = 0; i < u.size(); ++i) u[i] = v[i] / vn;
            best = std::max(best, std::abs(T.eval_power(u)));
        }
        best = std::max(best, std::abs(T.eval_power(u)));
    }
    return best;
}

}  // namespace laplace
