#include "laplace/cumulant.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace laplace {

namespace {

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= static_cast<double>(i);
    return r;
}

// Visit all set partitions of {0..m-1} as lists of bit masks, in restricted
// growth string order.
template <class Fn>
void for_each_partition(int m, Fn&& fn) {
    std::vector<int> assign(static_cast<std::size_t>(m), 0);
    std::vector<unsigned> blocks;
    auto rec = [&](auto&& self, int i, int nblocks) -> void {
        if (i == m) {
            blocks.assign(static_cast<std::size_t>(nblocks), 0u);
            for (int j = 0; j < m; ++j)
                blocks[static_cast<std::size_t>(assign[static_cast<std::size_t>(j)])] |= 1u << j;
            fn(blocks);
            return;
        }
        for (int b = 0; b <= nblocks; ++b) {
            assign[static_cast<std::size_t>(i)] = b;
            self(self, i + 1, std::max(nblocks, b + 1));
        }
    };
    rec(rec, 0, 0);
}

// Enumerate alpha = (alpha_1..alpha_M) >= 0 with sum_i i*alpha_i = M.
template <class Fn>
void for_each_weighted_composition(int M, Fn&& fn) {
    std::vector<int> alpha(static_cast<std::size_t>(M), 0);
    auto rec = [&](auto&& self, int i, int remaining) -> void {
        if (i > M) {
            if (remaining == 0) fn(alpha);
            return;
        }
        for (int a = 0; a * i <= remaining; ++a) {
            alpha[static_cast<std::size_t>(i - 1)] = a;
            self(self, i + 1, remaining - a * i);
        }
        alpha[static_cast<std::size_t>(i - 1)] = 0;
    };
    rec(rec, 1, M);
}

}  // namespace

Polynomial<double> build_pk(const Model& model, int k) {
    if (k < 1 || k > 2 * model.L - 1)
        throw std::invalid_argument("build_pk: k = " + std::to_string(k) + " outside 1.." +
                                    std::to_string(2 * model.L - 1));
    Polynomial<double> p(model.d, k + 2);
    if (const SymTensor* G = model.logg_tensor(k)) p += tensor_to_poly(*G);
    if (k + 2 <= 2 * model.L + 1) {
        if (const SymTensor* F = model.f_tensor(k + 2)) {
            Polynomial<double> fp = tensor_to_poly(*F);
            fp.scale(-1.0 / (static_cast<double>(k + 1) * static_cast<double>(k + 2)));
            p += fp;
        }
    }
    return p;
}

double joint_cumulant(const std::vector<Polynomial<double>>& polys) {
    const int m = static_cast<int>(polys.size());
    if (m < 1) throw std::invalid_argument("joint_cumulant: need at least one polynomial");
    if (m > 20) throw std::invalid_argument("joint_cumulant: order above 20 unsupported");
    const int d = polys.front().dim();
    for (const auto& p : polys)
        if (p.dim() != d) throw std::invalid_argument("joint_cumulant: dimension mismatch");

    // Expectation of the product over every subset, shared across partitions.
    // Products are exact (cap = sum of factor degrees).
    const unsigned full = (1u << m) - 1u;
    std::vector<Polynomial<double>> prod(full + 1, Polynomial<double>(d, 0));
    std::vector<double> sub_e(full + 1, 0.0);
    for (unsigned mask = 1; mask <= full; ++mask) {
        unsigned lb = mask & (~mask + 1u);
        int lbi = std::countr_zero(lb);
        if (mask == lb) {
            prod[mask] = polys[static_cast<std::size_t>(lbi)];
        } else {
            const Polynomial<double>& rest = prod[mask ^ lb];
            int cap = rest.max_term_degree() + polys[static_cast<std::size_t>(lbi)].max_term_degree();
            prod[mask] = poly_multiply(rest, polys[static_cast<std::size_t>(lbi)], cap);
        }
        sub_e[mask] = expect_poly(prod[mask]);
    }

    double cum = 0.0;
    for_each_partition(m, [&](const std::vector<unsigned>& blocks) {
        double term = 1.0;
        for (unsigned b : blocks) term *= sub_e[b];
        int nb = static_cast<int>(blocks.size());
        double coef = factorial(nb - 1);
        if (nb % 2 == 0) coef = -coef;
        cum += coef * term;
    });
    return cum;
}

double b_coefficient(const Model& model, int M) {
    model.validate();
    if (M < 2 || M > 2 * model.L - 2 || M % 2 != 0)
        throw std::invalid_argument("b_coefficient: M = " + std::to_string(M) +
                                    " must be even and within 2.." + std::to_string(2 * model.L - 2));
    std::vector<Polynomial<double>> pk;
    pk.reserve(static_cast<std::size_t>(M));
    for (int i = 1; i <= M; ++i) pk.push_back(build_pk(model, i));

    double total = 0.0;
    for_each_weighted_composition(M, [&](const std::vector<int>& alpha) {
        std::vector<Polynomial<double>> args;
        double weight = 1.0;
        for (int i = 1; i <= M; ++i) {
            int a = alpha[static_cast<std::size_t>(i - 1)];
            if (a == 0) continue;
            if (pk[static_cast<std::size_t>(i - 1)].is_zero()) { weight = 0.0; break; }
            weight *= factorial(a) * std::pow(factorial(i), a);
            for (int c = 0; c < a; ++c) args.push_back(pk[static_cast<std::size_t>(i - 1)]);
        }
        if (weight == 0.0 || args.empty()) return;
        total += joint_cumulant(args) / weight;
    });
    return total;
}

double b1_closed_form(const Model& model) {
    model.validate();
    const int d = model.d;
    std::vector<double> v(static_cast<std::size_t>(d), 0.0);  // grad log g(0) = grad g(0)
    if (const SymTensor* G1 = model.logg_tensor(1))
        for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = G1->at(std::vector<int>{i});

    std::vector<double> w(static_cast<std::size_t>(d), 0.0);  // grad lap f(0)
    double f3_frob_sq = 0.0;
    if (const SymTensor* F3 = model.f_tensor(3)) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                w[static_cast<std::size_t>(i)] += F3->at(std::vector<int>{i, j, j});
        f3_frob_sq = F3->frobenius_sq();
    }

    double lap2_f = 0.0;
    if (const SymTensor* F4 = model.f_tensor(4))
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) lap2_f += F4->at(std::vector<int>{i, i, j, j});

    // lap g(0) = tr hess g(0), with hess g = hess log g + (grad log g)^2.
    double lap_g = 0.0;
    if (const SymTensor* G2 = model.logg_tensor(2))
        for (int i = 0; i < d; ++i) lap_g += G2->at(std::vector<int>{i, i});
    for (double vi : v) lap_g += vi * vi;

    double wv = 0.0, ww = 0.0;
    for (int i = 0; i < d; ++i) {
        wv += w[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        ww += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    }
    return -0.5 * wv + ww / 8.0 + f3_frob_sq / 12.0 + 0.5 * lap_g - lap2_f / 8.0;
}

ExpansionResult expand(const Model& model) {
    model.validate();
    ExpansionResult res;
    res.path = ExpansionPath::cumulant;
    for (int k = 1; k <= model.L - 1; ++k) {
        auto t0 = std::chrono::steady_clock::now();
        int terms = 0;
        double bk = 0.0;
        {
            // replicate b_coefficient but count contributing terms
            const int M = 2 * k;
            std::vector<Polynomial<double>> pk;
            for (int i = 1; i <= M; ++i) pk.push_back(build_pk(model, i));
            for_each_weighted_composition(M, [&](const std::vector<int>& alpha) {
                std::vector<Polynomial<double>> args;
                double weight = 1.0;
                for (int i = 1; i <= M; ++i) {
                    int a = alpha[static_cast<std::size_t>(i - 1)];
                    if (a == 0) continue;
                    if (pk[static_cast<std::size_t>(i - 1)].is_zero()) { weight = 0.0; break; }
                    weight *= factorial(a) * std::pow(factorial(i), a);
                    for (int c = 0; c < a; ++c) args.push_back(pk[static_cast<std::size_t>(i - 1)]);
                }
                if (weight == 0.0 || args.empty()) return;
                bk += joint_cumulant(args) / weight;
                ++terms;
            });
        }
        auto t1 = std::chrono::steady_clock::now();
        res.coefficients.push_back(bk);
        ExpansionDiagnostics::PerCoefficient pc;
        pc.term_count = terms;
        pc.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        res.diagnostics.per_coefficient.push_back(pc);
    }

    if (model.L >= 2) {
        const double closed = b1_closed_form(model);
        const double cum = res.coefficients.front();
        // Scale guard: a model whose b1 cancels to ~0 shouldn't turn rounding
        // into a spurious relative blowup, so the denominator includes the
        // magnitude of the two halves of the closed form.
        Polynomial<double> p1 = build_pk(model, 1);
        Polynomial<double> p2 = build_pk(model, 2);
        double var_p1 = 0.0;
        {
            int cap = 2 * p1.max_term_degree();
            double e1 = expect_poly(p1);
            var_p1 = expect_poly(poly_multiply(p1, p1, cap)) - e1 * e1;
        }
        double scale = std::max({std::abs(closed), std::abs(cum),
                                 0.5 * std::abs(var_p1) + 0.5 * std::abs(expect_poly(p2))});
        double rel = scale > 0.0 ? std::abs(closed - cum) / scale : 0.0;
        res.diagnostics.b1_crosscheck_rel = rel;
        if (rel > 1e-10)
            throw std::domain_error(
                "expand: cumulant b1 disagrees with the closed form (relative gap " +
                std::to_string(rel) + ")");
    }
    return res;
}

}  // namespace laplace
