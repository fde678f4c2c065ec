#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "laplace/cumulant.hpp"
#include "laplace/quadratizer.hpp"

using namespace laplace;

namespace {

MultiIndex exps(std::vector<int> e) {
    int d = static_cast<int>(e.size());
    MultiIndex a = MultiIndex::zero(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < e[static_cast<std::size_t>(i)]; ++j)
            a = a.plus(MultiIndex::unit(d, i));
    return a;
}

Model cubic_model_1d(double c, int L) {
    Model m;
    m.d = 1;
    m.L = L;
    SymTensor T(3, 1);
    T.set({0, 0, 0}, c);
    m.f_tensors.emplace(3, std::move(T));
    return m;
}

Model quartic_model(int d, int L) {
    Model m;
    m.d = d;
    m.L = L;
    SymTensor T(4, d);
    for (int i = 0; i < d; ++i) {
        T.set(std::vector<int>{i, i, i, i}, 1.0);
        for (int j = i + 1; j < d; ++j) T.set(std::vector<int>{i, i, j, j}, 1.0 / 3.0);
    }
    m.f_tensors.emplace(4, std::move(T));
    return m;
}

Model random_model(unsigned seed, int d, int L, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    auto fill = [&](SymTensor& T) {
        std::vector<std::vector<int>> classes;
        T.for_each_class([&](std::span<const int> idx, double) {
            classes.emplace_back(idx.begin(), idx.end());
        });
        for (auto& cl : classes) T.set(cl, u(rng));
    };
    Model m;
    m.d = d;
    m.L = L;
    for (int k = 3; k <= 2 * L + 1; ++k) {
        SymTensor T(k, d);
        fill(T);
        m.f_tensors.emplace(k, std::move(T));
    }
    for (int k = 1; k <= 2 * L - 1; ++k) {
        SymTensor T(k, d);
        fill(T);
        m.logg_tensors.emplace(k, std::move(T));
    }
    return m;
}

double eps0(const EpsPoly& p, const MultiIndex& a) { return p.coefficient(a)[0]; }

}  // namespace

TEST_CASE("pure gaussian is a fixed point") {
    Model m;
    m.d = 3;
    m.L = 3;
    auto [X, residual] = initial_quadratize(m);
    for (int i = 0; i < 3; ++i) {
        CHECK(X.component(i).term_count() == 1);
        CHECK(eps0(X.component(i), MultiIndex::unit(3, i)) == doctest::Approx(1.0));
    }
    auto res = run_pipeline(m);
    REQUIRE(res.coefficients.size() == 2);
    CHECK(res.coefficients[0] == doctest::Approx(0.0));
    CHECK(res.coefficients[1] == doctest::Approx(0.0));
}

TEST_CASE("initial quadratization of the 1-d cubic") {
    double c = 0.9;
    auto m = cubic_model_1d(c, 2);
    auto [X, residual] = initial_quadratize(m);

    // X(t) = t - (c/6) t^2 + (5 c^2/72) t^3 + O(t^4)
    const auto& x0 = X.component(0);
    CHECK(eps0(x0, exps({1})) == doctest::Approx(1.0));
    CHECK(eps0(x0, exps({2})) == doctest::Approx(-c / 6.0).epsilon(1e-13));
    CHECK(eps0(x0, exps({3})) == doctest::Approx(5.0 * c * c / 72.0).epsilon(1e-13));

    // residual is exactly |t|^2/2
    CHECK(eps0(residual.poly, exps({2})) == doctest::Approx(0.5));
    for (const auto& [a, s] : residual.poly.terms()) {
        if (a.degree() != 2) CHECK(s.is_zero());
    }

    // f(X(t)) == t^2/2 numerically through the truncation degree
    for (double t : {0.05, -0.08, 0.12}) {
        std::vector<double> tv = {t};
        double xt = x0.eval(tv)[0];
        double f = 0.5 * xt * xt + c / 6.0 * xt * xt * xt;
        // degree cap 2L+1 = 5: agreement to O(t^6)
        CHECK(std::abs(f - 0.5 * t * t) < 10.0 * std::pow(std::abs(t), 6.0));
    }
}

TEST_CASE("log-determinant series of a 1-d quadratic map") {
    // m(t) = t + b t^2: log m'(t) = 2bt - 2b^2 t^2 + (8/3) b^3 t^3 - ...
    double b = 0.7;
    Polynomial<EpsSeries> comp(1, 6);
    comp.add_term(exps({1}), EpsSeries::constant(1.0, 2));
    comp.add_term(exps({2}), EpsSeries::constant(b, 2));
    EpsMap m(1, {comp});
    auto ld = logdet_series(m, 0, 3);
    CHECK(eps0(ld, exps({1})) == doctest::Approx(2.0 * b).epsilon(1e-14));
    CHECK(eps0(ld, exps({2})) == doctest::Approx(-2.0 * b * b).epsilon(1e-14));
    CHECK(eps0(ld, exps({3})) == doctest::Approx(8.0 / 3.0 * b * b * b).epsilon(1e-14));
}

TEST_CASE("log-determinant matches a numeric jacobian in 2d") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<Polynomial<EpsSeries>> comps;
    for (int i = 0; i < 2; ++i) {
        Polynomial<EpsSeries> p(2, 4);
        p.add_term(MultiIndex::unit(2, i), EpsSeries::constant(1.0, 3));
        for (int a = 0; a <= 3; ++a)
            for (int bdeg = 0; a + bdeg <= 3; ++bdeg)
                if (a + bdeg >= 2) p.add_term(exps({a, bdeg}), EpsSeries::constant(u(rng), 3));
        comps.push_back(std::move(p));
    }
    EpsMap m(2, std::move(comps));
    auto ld = logdet_series(m, 0, 12);

    std::vector<double> x = {0.1, 0.01};
    double h = 1e-6;
    auto J = [&](int i, int j) {
        auto xp = x, xm = x;
        xp[static_cast<std::size_t>(j)] += h;
        xm[static_cast<std::size_t>(j)] -= h;
        return (m.component(i).eval(xp)[0] - m.component(i).eval(xm)[0]) / (2 * h);
    };
    double det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
    CHECK(ld.eval(x)[0] == doctest::Approx(std::log(det)).epsilon(1e-7));
}

TEST_CASE("log-determinant rejects maps without an identity part") {
    Polynomial<EpsSeries> comp(1, 4);
    comp.add_term(exps({1}), EpsSeries::constant(2.0, 2));
    EpsMap m(1, {comp});
    CHECK_THROWS(logdet_series(m, 0, 3));
}

TEST_CASE("fold of a pure linear log g") {
    // log g = v.x, f gaussian: E_1 = |t|^2/2 - (eps/d) v.t
    Model m;
    m.d = 2;
    m.L = 2;
    SymTensor v(1, 2);
    v.set({0}, 0.4);
    v.set({1}, -1.1);
    m.logg_tensors.emplace(1, std::move(v));

    auto [X, residual] = initial_quadratize(m);
    auto E1 = fold_stage_inputs(m, X, residual);
    CHECK(E1.stage == 1);
    auto s0 = E1.poly.coefficient(MultiIndex::unit(2, 0));
    auto s1 = E1.poly.coefficient(MultiIndex::unit(2, 1));
    CHECK(s0[1] == doctest::Approx(-0.4 / 2.0).epsilon(1e-14));
    CHECK(s1[1] == doctest::Approx(1.1 / 2.0).epsilon(1e-14));
    CHECK(s0[0] == 0.0);
}

TEST_CASE("fold of the 1-d cubic produces the frozen square form") {
    double c = 1.3;
    auto m = cubic_model_1d(c, 2);
    auto [X, residual] = initial_quadratize(m);
    auto E1 = fold_stage_inputs(m, X, residual);

    // E_1 = t^2/2 + (c/3) eps t - (11 c^2/72) eps t^2
    auto lin = E1.poly.coefficient(exps({1}));
    auto quad = E1.poly.coefficient(exps({2}));
    CHECK(lin[1] == doctest::Approx(c / 3.0).epsilon(1e-13));
    CHECK(quad[0] == doctest::Approx(0.5));
    CHECK(quad[1] == doctest::Approx(-11.0 * c * c / 72.0).epsilon(1e-13));

    // stage 1 clears the eps t^3 log-det tail; that only moves eps^2 content,
    // so the square form below is exact at the orders it reads
    auto [T1, E2] = eliminate_stage(E1, 1);
    auto sq = complete_square(E2);
    CHECK(sq.a[0][0] == doctest::Approx(c / 3.0).epsilon(1e-13));
    CHECK(sq.B[0][0][0] == doctest::Approx(-11.0 * c * c / 72.0).epsilon(1e-13));

    auto res = extract_coefficients(sq, 1, 2);
    REQUIRE(res.coefficients.size() == 1);
    CHECK(res.coefficients[0] == doctest::Approx(5.0 * c * c / 24.0).epsilon(1e-12));
}

TEST_CASE("eliminate_stage clears the graded band and logs the jacobian") {
    // E = |t|^2/2 + eps * t0^3: stage 1 must remove the cubic and leave the
    // log-determinant corrections behind.
    GradedExponent E;
    E.poly = EpsPoly(1, 5);
    E.poly.add_term(exps({2}), EpsSeries::constant(0.5, 3));
    E.poly.add_term(exps({3}), EpsSeries::monomial(1.0, 1, 3));
    E.stage = 1;
    E.d = 1;
    E.L = 3;
    E.coeff_scale = 1.0;

    auto [T1, E2] = eliminate_stage(E, 1);
    CHECK(E2.stage == 2);
    // elimination map t - (eps/1) t^2 (h = eps t^3, M = 3)
    auto t2 = T1.component(0).coefficient(exps({2}));
    CHECK(t2[1] == doctest::Approx(-1.0).epsilon(1e-14));
    // degree-3 coefficients of E2 vanish through eps^1
    auto c3 = E2.poly.coefficient(exps({3}));
    CHECK(c3[0] == 0.0);
    CHECK(c3[1] == 0.0);
    // the sweep runs through degree 5: T(t) = t - eps t^2 + (5/2) eps^2 t^3 + ...,
    // so log det T' = -2 eps t + (15/2 - 2) eps^2 t^2 + ...; folded at -eps/d
    // the linear slot gains 2 eps^2 and the quadratic slot -11/2 eps^3
    auto l1 = E2.poly.coefficient(exps({1}));
    CHECK(l1[2] == doctest::Approx(2.0).epsilon(1e-13));
    auto q = E2.poly.coefficient(exps({2}));
    CHECK(q[0] == doctest::Approx(0.5));
    CHECK(q[3] == doctest::Approx(-5.5).epsilon(1e-13));
}

TEST_CASE("eliminate_stage rejects stage/grading mismatches") {
    GradedExponent E;
    E.poly = EpsPoly(1, 5);
    E.poly.add_term(exps({2}), EpsSeries::constant(0.5, 3));
    E.poly.add_term(exps({3}), EpsSeries::constant(0.9, 3));  // eps^0 cubic: bad at stage 1
    E.stage = 1;
    E.d = 1;
    E.L = 3;
    CHECK_THROWS(eliminate_stage(E, 1));

    GradedExponent F;
    F.poly = EpsPoly(1, 5);
    F.poly.add_term(exps({2}), EpsSeries::constant(0.5, 3));
    F.stage = 2;
    F.d = 1;
    F.L = 3;
    CHECK_THROWS(eliminate_stage(F, 1));  // stage disagrees with m
}

TEST_CASE("complete_square validations") {
    // leftover cubic
    GradedExponent E;
    E.poly = EpsPoly(1, 5);
    E.poly.add_term(exps({2}), EpsSeries::constant(0.5, 2));
    E.poly.add_term(exps({3}), EpsSeries::monomial(1.0, 2, 2));
    E.stage = 2;
    E.d = 1;
    E.L = 2;
    CHECK_THROWS(complete_square(E));

    // wrong gaussian normalization
    GradedExponent F;
    F.poly = EpsPoly(1, 5);
    F.poly.add_term(exps({2}), EpsSeries::constant(0.7, 2));
    F.stage = 2;
    F.d = 1;
    F.L = 2;
    CHECK_THROWS(complete_square(F));
}

TEST_CASE("extract from a hand-built square form") {
    // E = t^2/2 + eps a t + eps b t^2: b_1 = a^2/2 - b
    double a = 0.8, b = -0.35;
    GradedExponent E;
    E.poly = EpsPoly(1, 5);
    E.poly.add_term(exps({1}), EpsSeries::monomial(a, 1, 2));
    E.poly.add_term(exps({2}), EpsSeries::constant(0.5, 2) + EpsSeries::monomial(b, 1, 2));
    E.stage = 2;
    E.d = 1;
    E.L = 2;
    auto sq = complete_square(E);
    auto res = extract_coefficients(sq, 1, 2);
    REQUIRE(res.coefficients.size() == 1);
    CHECK(res.coefficients[0] == doctest::Approx(a * a / 2.0 - b).epsilon(1e-13));
}

TEST_CASE("pipeline reproduces the quartic family") {
    for (int d = 1; d <= 3; ++d) {
        auto res = run_pipeline(quartic_model(d, 2));
        REQUIRE(res.coefficients.size() == 1);
        double want = -d * d / 24.0 - d / 12.0;
        CHECK(res.coefficients[0] == doctest::Approx(want).epsilon(1e-12));
    }
    // second coefficient of the 1-d quartic
    auto res = run_pipeline(quartic_model(1, 3));
    REQUIRE(res.coefficients.size() == 2);
    CHECK(res.coefficients[0] == doctest::Approx(-1.0 / 8.0).epsilon(1e-12));
    CHECK(res.coefficients[1] == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("pipeline reproduces the 1-d cubic") {
    for (double c : {0.5, -1.2}) {
        auto res = run_pipeline(cubic_model_1d(c, 2));
        REQUIRE(res.coefficients.size() == 1);
        CHECK(res.coefficients[0] == doctest::Approx(5.0 * c * c / 24.0).epsilon(1e-12));
    }
}

TEST_CASE("both paths agree on random models") {
    struct Case {
        int d, L;
    };
    for (Case cs : {Case{1, 2}, Case{2, 2}, Case{3, 2}, Case{1, 3}, Case{2, 3},
                    Case{1, 4}, Case{2, 4}}) {
        for (unsigned seed = 0; seed < 4; ++seed) {
            auto m = random_model(1000 * static_cast<unsigned>(cs.d) + seed, cs.d, cs.L, 0.2);
            auto cum = expand(m);
            auto quad = run_pipeline(m);
            REQUIRE(cum.coefficients.size() == quad.coefficients.size());
            for (std::size_t k = 0; k < cum.coefficients.size(); ++k) {
                double scale = std::max({std::abs(cum.coefficients[k]), 1e-6});
                CHECK(std::abs(cum.coefficients[k] - quad.coefficients[k]) / scale < 1e-9);
            }
            CHECK(quad.diagnostics.max_elimination_residual_rel < 1e-12);
        }
    }
}

TEST_CASE("pipeline diagnostics record stage sizes") {
    auto res = run_pipeline(random_model(7, 2, 3, 0.2));
    REQUIRE(res.diagnostics.stage_monomials.size() == 3);  // fold + 2 stages
    CHECK(res.path == ExpansionPath::quadratize);
}
