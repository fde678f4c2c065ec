#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "laplace/cumulant.hpp"
#include "laplace/models.hpp"
#include "laplace/oracles.hpp"

using namespace laplace;

namespace {

LaplaceIntegrand pure_gaussian_radial(int d) {
    LaplaceIntegrand m;
    m.d = d;
    m.model.d = d;
    m.model.L = 2;
    m.f = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return 0.5 * s;
    };
    m.exact_radial = true;
    m.f_radial = [](double r) { return 0.5 * r * r; };
    return m;
}

}  // namespace

TEST_CASE("quartic builder carries the norm-quartic jet") {
    auto m = quartic_model(2, 2);
    CHECK(m.exact_radial);
    const SymTensor* T = m.model.f_tensor(4);
    REQUIRE(T != nullptr);
    // tensor_to_poly(T) must be x1^4 + 2 x1^2 x2^2 + x2^4
    auto p = tensor_to_poly(*T);
    std::vector<double> x = {0.7, -1.2};
    double r2 = x[0] * x[0] + x[1] * x[1];
    CHECK(p.eval(x) == doctest::Approx(r2 * r2).epsilon(1e-14));
    CHECK(m.f(x) == doctest::Approx(0.5 * r2 + r2 * r2 / 24.0).epsilon(1e-14));
    auto rep = standardization_check(m);
    CHECK(rep.grad_inf < 1e-8);
    CHECK(rep.hess_dev_inf < 1e-8);
}

TEST_CASE("random builder is deterministic and standardized") {
    auto a = random_poly_model(3, 2, 42, 0.2);
    auto b = random_poly_model(3, 2, 42, 0.2);
    for (int k = 3; k <= 5; ++k) {
        const SymTensor* Ta = a.model.f_tensor(k);
        const SymTensor* Tb = b.model.f_tensor(k);
        REQUIRE(Ta != nullptr);
        REQUIRE(Tb != nullptr);
        bool equal = true;
        Ta->for_each_class([&](std::span<const int> idx, double v) {
            if (Tb->at(idx) != v) equal = false;
        });
        CHECK(equal);
        CHECK(Ta->max_abs() <= 0.2);
    }
    auto gauss = random_poly_model(2, 2, 7, 0.0);
    CHECK(gauss.model.f_tensors.empty());
    CHECK(gauss.model.logg_tensors.empty());
    std::vector<double> x = {0.3, -0.4};
    CHECK(gauss.f(x) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("logistic psi derivatives at zero") {
    CHECK(logistic_psi_derivative(1, 0.0) == doctest::Approx(0.5));
    CHECK(logistic_psi_derivative(2, 0.0) == doctest::Approx(0.25));
    CHECK(logistic_psi_derivative(3, 0.0) == doctest::Approx(0.0));
    CHECK(logistic_psi_derivative(4, 0.0) == doctest::Approx(-0.125));
    CHECK(logistic_psi_derivative(5, 0.0) == doctest::Approx(0.0));
    CHECK(logistic_psi_derivative(6, 0.0) == doctest::Approx(0.25));
}

TEST_CASE("logistic psi derivative recurrence matches finite differences") {
    double h = 1e-5;
    for (int k = 2; k <= 6; ++k) {
        for (double t : {-1.3, 0.2, 0.9}) {
            double fd = (logistic_psi_derivative(k - 1, t + h) -
                         logistic_psi_derivative(k - 1, t - h)) /
                        (2 * h);
            CHECK(logistic_psi_derivative(k, t) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("logreg with one observation has the closed-form quartic jet") {
    LogregConfig cfg;
    cfg.n = 1;
    cfg.d = 1;
    cfg.L = 2;
    cfg.seed = 5;
    auto inst = logreg_model(cfg);
    // x* = 0: psi'''(0) = 0 kills the cubic; grad^4 f(0) = psi''''(0)/psi''(0)^2 = -2
    const SymTensor* T3 = inst.integrand.model.f_tensor(3);
    if (T3 != nullptr) CHECK(T3->max_abs() < 1e-14);
    const SymTensor* T4 = inst.integrand.model.f_tensor(4);
    REQUIRE(T4 != nullptr);
    CHECK(T4->at({0, 0, 0, 0}) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("quadratic link degenerates to the pure Gaussian") {
    LogregConfig cfg;
    cfg.n = 40;
    cfg.d = 2;
    cfg.L = 2;
    cfg.seed = 11;
    cfg.link = "quadratic";
    auto inst = logreg_model(cfg);
    CHECK(inst.integrand.model.f_tensors.empty());
    auto res = expand(inst.integrand.model);
    REQUIRE(res.coefficients.size() == 1);
    CHECK(res.coefficients[0] == doctest::Approx(0.0));
}

TEST_CASE("logreg standardization holds through the exact callable") {
    LogregConfig cfg;
    cfg.n = 120;
    cfg.d = 3;
    cfg.L = 2;
    cfg.seed = 9;
    cfg.x_star = {0.3, -0.2, 0.1};
    auto inst = logreg_model(cfg);
    auto rep = standardization_check(inst.integrand);
    CHECK(rep.grad_inf < 1e-8);
    CHECK(rep.hess_dev_inf < 1e-8);
}

TEST_CASE("radial oracle: pure Gaussian and quartic") {
    auto g3 = pure_gaussian_radial(3);
    auto est = oracle_radial(g3, 37.0, 1e-12);
    CHECK(est.converged);
    CHECK(std::abs(est.log_I) < 1e-12);

    auto q1 = quartic_model(1, 2);
    auto e1 = oracle_radial(q1, 100.0, 1e-12);
    // log I = b1/lambda + O(1/lambda^2) with b1 = -1/8
    CHECK(std::abs(e1.log_I + 0.125 / 100.0) < 5e-4);

    // concentration: lambda -> infinity drives log I to 0
    auto q3 = quartic_model(3, 2);
    auto big = oracle_radial(q3, 1e6, 1e-12);
    CHECK(std::abs(big.log_I) < 1e-5);
}

TEST_CASE("ghq matches radial on the quartic") {
    auto q2 = quartic_model(2, 2);
    auto r = oracle_radial(q2, 100.0, 1e-13);
    auto g = oracle_ghq(q2, 100.0, 40);
    CHECK(g.converged);
    CHECK(std::abs(g.log_I - r.log_I) < 1e-8);
}

TEST_CASE("ghq grid guard") {
    auto q3 = quartic_model(3, 2);
    CHECK_THROWS(oracle_ghq(q3, 100.0, 400));
}

TEST_CASE("mc oracle: exact on the Gaussian, seeded, consistent with radial") {
    auto gauss = random_poly_model(2, 2, 3, 0.0);
    auto est = oracle_mc(gauss, 50.0, 2000, 99);
    CHECK(est.log_I == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(est.std_error == doctest::Approx(0.0));

    auto q3 = quartic_model(3, 2);
    auto a = oracle_mc(q3, 200.0, 100000, 1234);
    auto b = oracle_mc(q3, 200.0, 100000, 1234);
    CHECK(a.log_I == b.log_I);  // bitwise determinism
    auto r = oracle_radial(q3, 200.0, 1e-12);
    CHECK(std::abs(a.log_I - r.log_I) < 4.0 * a.std_error);
}

TEST_CASE("expansion beats the Gaussian approximation on the quartic") {
    auto q3 = quartic_model(3, 2);
    auto r = oracle_radial(q3, 100.0, 1e-12);
    double b1 = b_coefficient(q3.model, 2);
    CHECK(std::abs(r.log_I - b1 / 100.0) < std::abs(r.log_I));
}

TEST_CASE("remainder sweep slopes for the quartic family") {
    OracleOptions opt;
    opt.kind = OracleKind::radial;
    opt.rel_tol = 1e-13;
    std::vector<double> lambdas = {50, 100, 200, 400, 800};

    auto q1 = quartic_model(1, 2);
    auto s1 = remainder_sweep(q1, lambdas, 2, opt);
    REQUIRE(s1.slope_fitted);
    CHECK(std::abs(s1.slope + 2.0) < 0.15);

    auto q2 = quartic_model(2, 3);
    auto s2 = remainder_sweep(q2, lambdas, 3, opt);
    REQUIRE(s2.slope_fitted);
    CHECK(std::abs(s2.slope + 3.0) < 0.25);
    // slope within two fit standard errors of -L
    CHECK(std::abs(s2.slope + 3.0) < 2.0 * s2.slope_std_error + 0.05);
}

TEST_CASE("sweep on the pure Gaussian skips the fit") {
    OracleOptions opt;
    opt.kind = OracleKind::radial;
    auto g2 = pure_gaussian_radial(2);
    auto s = remainder_sweep(g2, {50, 100, 200}, 2, opt);
    CHECK_FALSE(s.slope_fitted);
    for (const auto& row : s.rows) CHECK_FALSE(row.usable);
}

TEST_CASE("sweep validates the lambda grid") {
    OracleOptions opt;
    opt.kind = OracleKind::radial;
    auto q1 = quartic_model(1, 2);
    CHECK_THROWS(remainder_sweep(q1, {50, 100}, 2, opt));
    CHECK_THROWS(remainder_sweep(q1, {50, 100, 100}, 2, opt));
    CHECK_THROWS(remainder_sweep(q1, {50, 100, 150}, 2, opt));
    CHECK_THROWS(remainder_sweep(q1, {100, 50, 200}, 2, opt));
}

TEST_CASE("with_expansion_order trims out-of-range jets") {
    auto m = random_poly_model(2, 3, 5, 0.1).model;
    auto trimmed = with_expansion_order(m, 2);
    CHECK(trimmed.L == 2);
    CHECK(trimmed.f_tensor(7) == nullptr);
    CHECK(trimmed.f_tensor(5) != nullptr);
    CHECK(trimmed.logg_tensor(5) == nullptr);
    trimmed.validate();
}

TEST_CASE("integrand reconstruction from labels") {
    auto q = quartic_model(2, 2);
    auto re = integrand_from_model(q.model);
    CHECK(re.exact_radial);
    std::vector<double> x = {0.2, 0.1};
    CHECK(re.f(x) == doctest::Approx(q.f(x)).epsilon(1e-14));

    auto r = random_poly_model(2, 2, 17, 0.1);
    auto rre = integrand_from_model(r.model);
    CHECK(rre.f(x) == doctest::Approx(r.f(x)).epsilon(1e-14));

    // tampered jets no longer match the label
    Model bad = q.model;
    SymTensor T(4, 2);
    T.set({0, 0, 0, 0}, 2.0);
    bad.f_tensors.at(4) = T;
    CHECK_THROWS(integrand_from_model(bad));
}

TEST_CASE("unlabeled models integrate the jets with confinement") {
    Model m;
    m.d = 1;
    m.L = 2;
    SymTensor T(4, 1);
    T.set({0, 0, 0, 0}, 1.0);
    m.f_tensors.emplace(4, std::move(T));
    auto integrand = integrand_from_model(m);
    std::vector<double> x = {0.5};
    // f = x^2/2 + x^4/24 + max(0.1, 1.0) * x^6
    double want = 0.125 + std::pow(0.5, 4) / 24.0 + 1.0 * std::pow(0.5, 6);
    CHECK(integrand.f(x) == doctest::Approx(want).epsilon(1e-14));
}
