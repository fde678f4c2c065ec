#include "laplace/quadratizer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace laplace {

namespace {

std::string monomial_str(const MultiIndex& a) {
    std::ostringstream os;
    os << "x^(";
    for (int i = 0; i < a.dim(); ++i) os << (i ? "," : "") << a[i];
    os << ")";
    return os.str();
}

// Verify that every eps-coefficient of order <= eps_hi vanishes (up to
// abs_tol of rounding residue) on terms with x-degree in [deg_lo, deg_hi],
// then zero those slots. Returns the largest residue absorbed.
double snap_graded_zeros(EpsPoly& E, int deg_lo, int deg_hi, int eps_hi, double abs_tol) {
    EpsPoly out(E.dim(), E.max_degree());
    double max_res = 0.0;
    for (const auto& [a, c] : E.terms()) {
        int deg = a.degree();
        if (deg < deg_lo || deg > deg_hi) {
            out.add_term(a, c);
            continue;
        }
        EpsSeries s = c;
        for (int k = 0; k <= std::min(eps_hi, s.truncation_order()); ++k) {
            double v = s[k];
            if (v == 0.0) continue;
            if (std::abs(v) > abs_tol)
                throw std::domain_error("quadratizer: monomial " + monomial_str(a) +
                                        " at eps-order " + std::to_string(k) +
                                        " should have cancelled but has coefficient " +
                                        std::to_string(v));
            max_res = std::max(max_res, std::abs(v));
            s.at(k) = 0.0;
        }
        if (!ring_is_zero(s)) out.add_term(a, s);
    }
    E = out;
    return max_res;
}

// Drop every term of x-degree >= 3 that exceeds new_cap (degrees <= 2 always
// survive; they hold the J1/J2 payload).
EpsPoly drop_high_degrees(const EpsPoly& E, int new_cap) {
    EpsPoly out(E.dim(), std::max(2, new_cap));
    for (const auto& [a, c] : E.terms()) {
        int deg = a.degree();
        if (deg >= 3 && deg > new_cap) continue;
        out.add_term(a, c);
    }
    return out;
}

// (eps/d) * p: every coefficient shifted one eps-order up, scaled by 1/d.
EpsPoly eps_over_d(const EpsPoly& p, int d) {
    EpsPoly out(p.dim(), p.max_degree());
    for (const auto& [a, c] : p.terms()) {
        EpsSeries s = c.shifted_up(1);
        s *= 1.0 / static_cast<double>(d);
        if (!ring_is_zero(s)) out.add_term(a, s);
    }
    return out;
}

// Elimination map for the degree-M homogeneous part h: t_i + phi_i with
// phi_i = -(1/M) d h / d t_i, so that |t|^2/2 composed with it cancels h.
EpsMap elimination_map(const EpsPoly& h, int M, int cap, int L) {
    const int d = h.dim();
    std::vector<EpsPoly> comps;
    comps.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        EpsPoly c(d, cap);
        c.add_term(MultiIndex::unit(d, i), EpsSeries::constant(1.0, L));
        EpsPoly phi = h.partial_derivative(i);
        phi.scale(-1.0 / static_cast<double>(M));
        c += phi;
        comps.push_back(std::move(c));
    }
    return EpsMap(d, std::move(comps));
}

int series_order_of(const EpsMap& m, int L_hint) {
    for (const auto& comp : m.components())
        for (const auto& [a, c] : comp.terms())
            if (!c.empty()) return c.truncation_order();
    return L_hint;
}

}  // namespace

std::pair<EpsMap, GradedExponent> initial_quadratize(const Model& model) {
    model.validate();
    const int d = model.d, L = model.L;
    const int cap = 2 * L + 1;

    Polynomial<double> f(d, cap);
    for (int i = 0; i < d; ++i)
        f.add_term(MultiIndex::unit(d, i).plus(MultiIndex::unit(d, i)), 0.5);
    double kfact = 2.0;
    for (int k = 3; k <= cap; ++k) {
        kfact *= static_cast<double>(k);
        if (const SymTensor* T = model.f_tensor(k)) {
            Polynomial<double> part = tensor_to_poly(*T);
            part.scale(1.0 / kfact);
            f += part;
        }
    }

    GradedExponent E;
    E.poly = embed_eps(f, L);
    E.stage = 0;
    E.d = d;
    E.L = L;
    E.coeff_scale = std::max(f.max_abs_coefficient(), 0.5);

    EpsMap X = identity_map(d, cap, EpsSeries::constant(1.0, L));
    const double tol = 1e-12 * E.coeff_scale;
    double max_res = 0.0;
    for (int M = 3; M <= cap; ++M) {
        EpsPoly h = E.poly.degree_part(M);
        if (h.is_zero()) continue;
        EpsMap tM = elimination_map(h, M, cap, L);
        E.poly = compose(E.poly, tM, cap);
        X = compose_maps(X, tM, cap);
        // at stage 0 everything is eps^0, so degree M cancels at all orders
        max_res = std::max(max_res, snap_graded_zeros(E.poly, M, M, L, tol));
    }
    // everything cubic and up is now gone; validate the full band
    max_res = std::max(max_res, snap_graded_zeros(E.poly, 3, cap, L, tol));
    E.max_snap_residual_rel = max_res / E.coeff_scale;
    return {std::move(X), std::move(E)};
}

EpsPoly logdet_series(const EpsMap& m, int eps_order, int degree_cap) {
    const int d = m.dim();
    if (!m.has_identity_part())
        throw std::invalid_argument("logdet_series: map lacks an identity part");
    const int L = series_order_of(m, 0);

    // A = J - I
    auto J = jacobian(m);
    std::vector<std::vector<EpsPoly>> A;
    A.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        std::vector<EpsPoly> row;
        for (int j = 0; j < d; ++j) {
            EpsPoly e = J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].truncated(degree_cap);
            if (i == j) {
                EpsPoly one(d, degree_cap);
                one.add_term(MultiIndex::zero(d), EpsSeries::constant(1.0, L));
                e -= one;
            }
            for (const auto& [a, c] : e.terms()) {
                if (a.degree() == 0 && !ring_is_zero(c))
                    throw std::invalid_argument("logdet_series: Jacobian perturbation has a constant entry");
                if (c.min_order() < eps_order)
                    throw std::invalid_argument(
                        "logdet_series: perturbation coefficient below the declared eps-order " +
                        std::to_string(eps_order));
            }
            row.push_back(std::move(e));
        }
        A.push_back(std::move(row));
    }

    EpsPoly acc(d, degree_cap);
    std::vector<std::vector<EpsPoly>> P = A;  // A^k
    for (int k = 1; k <= degree_cap; ++k) {
        bool all_zero = true;
        EpsPoly tr(d, degree_cap);
        for (int i = 0; i < d; ++i) {
            tr += P[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
            for (int j = 0; j < d; ++j)
                if (!P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].is_zero()) all_zero = false;
        }
        tr.scale((k % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(k));
        acc += tr;
        if (all_zero || k == degree_cap) break;
        // P <- P * A
        std::vector<std::vector<EpsPoly>> Q;
        Q.reserve(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            std::vector<EpsPoly> row;
            for (int j = 0; j < d; ++j) {
                EpsPoly e(d, degree_cap);
                for (int l = 0; l < d; ++l)
                    e += poly_multiply(P[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)],
                                       A[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)], degree_cap);
                row.push_back(std::move(e));
            }
            Q.push_back(std::move(row));
        }
        P = std::move(Q);
    }
    return acc;
}

GradedExponent fold_stage_inputs(const Model& model, const EpsMap& X,
                                 const GradedExponent& residual) {
    model.validate();
    if (residual.stage != 0)
        throw std::invalid_argument("fold_stage_inputs: residual is not a stage-0 exponent");
    const int d = model.d, L = model.L;
    const int cap = 2 * L - 1;

    Polynomial<double> logg(d, cap);
    double kfact = 1.0;
    for (int k = 1; k <= cap; ++k) {
        kfact *= static_cast<double>(k);
        if (const SymTensor* T = model.logg_tensor(k)) {
            Polynomial<double> part = tensor_to_poly(*T);
            part.scale(1.0 / kfact);
            logg += part;
        }
    }
    EpsPoly series = compose(embed_eps(logg, L), X, cap);
    series += logdet_series(X, 0, cap);

    GradedExponent E1;
    E1.d = d;
    E1.L = L;
    E1.stage = 1;
    E1.coeff_scale = std::max(residual.coeff_scale,
                              std::max(series.max_abs_coefficient(), 0.5));
    E1.max_snap_residual_rel = residual.max_snap_residual_rel;
    E1.poly = EpsPoly(d, std::max(2, cap));
    E1.poly += residual.poly;
    E1.poly -= eps_over_d(series, d);
    // the merged series enters with one eps factor, so nothing of x-degree >= 3
    // may sit at eps^0
    double res = snap_graded_zeros(E1.poly, 3, E1.poly.max_degree(), 0, 1e-12 * E1.coeff_scale);
    E1.max_snap_residual_rel = std::max(E1.max_snap_residual_rel, res / E1.coeff_scale);
    return E1;
}

std::pair<EpsMap, GradedExponent> eliminate_stage(const GradedExponent& E, int m) {
    if (m < 1 || m != E.stage)
        throw std::invalid_argument("eliminate_stage: stage mismatch (exponent at stage " +
                                    std::to_string(E.stage) + ", asked to run stage " +
                                    std::to_string(m) + ")");
    const int d = E.d, L = E.L;
    const int cap_in = 2 * L - 2 * m + 1;
    const int cap_out = 2 * L - 2 * m - 1;
    const double tol = 1e-12 * E.coeff_scale;

    // grading invariant: x-degree >= 3 must carry eps-order >= m
    for (const auto& [a, c] : E.poly.terms()) {
        if (a.degree() < 3) continue;
        if (a.degree() > cap_in)
            throw std::domain_error("eliminate_stage: monomial " + monomial_str(a) +
                                    " exceeds the stage degree cap " + std::to_string(cap_in));
        if (c.min_order() < m)
            throw std::domain_error("eliminate_stage: monomial " + monomial_str(a) +
                                    " carries eps-order " + std::to_string(c.min_order()) +
                                    " below the stage grading " + std::to_string(m));
    }

    GradedExponent out;
    out.d = d;
    out.L = L;
    out.coeff_scale = std::max(E.coeff_scale, E.poly.max_abs_coefficient());
    EpsPoly work = E.poly.truncated(cap_in);
    EpsMap T = identity_map(d, cap_in, EpsSeries::constant(1.0, L));
    double max_res = 0.0;
    for (int M = 3; M <= cap_in; ++M) {
        EpsPoly h = work.degree_part(M);
        if (h.is_zero()) continue;
        EpsMap tM = elimination_map(h, M, cap_in, L);
        work = compose(work, tM, cap_in);
        T = compose_maps(T, tM, cap_in);
        // degree M cancels at orders <= m only; the elimination itself refills
        // it at order m+1 (quadratic cross terms), which belongs to the next
        // stage and must survive
        max_res = std::max(max_res, snap_graded_zeros(work, M, M, m, tol));
    }

    EpsPoly logdet = logdet_series(T, m, cap_out);
    work = drop_high_degrees(work, cap_out);
    work -= eps_over_d(logdet, d);
    max_res = std::max(max_res, snap_graded_zeros(work, 3, cap_out, m, tol));

    out.poly = std::move(work);
    out.stage = m + 1;
    out.max_snap_residual_rel =
        std::max(E.max_snap_residual_rel, max_res / E.coeff_scale);
    return {std::move(T), std::move(out)};
}

SquareForm complete_square(const GradedExponent& EL) {
    const int d = EL.d, L = EL.L;
    if (EL.stage != L)
        throw std::invalid_argument("complete_square: exponent at stage " +
                                    std::to_string(EL.stage) + ", expected " + std::to_string(L));
    const double tol = 1e-12 * std::max(EL.coeff_scale, 1.0);

    SquareForm sq;
    sq.d = d;
    sq.L = L;
    sq.a.assign(static_cast<std::size_t>(d), EpsSeries(L));
    sq.B.assign(static_cast<std::size_t>(d),
                std::vector<EpsSeries>(static_cast<std::size_t>(d), EpsSeries(L)));

    for (const auto& [a, c] : EL.poly.terms()) {
        const int deg = a.degree();
        if (deg > 2)
            throw std::domain_error("complete_square: residual cubic-or-higher monomial " +
                                    monomial_str(a) + " survived the pipeline");
        if (deg == 0) {
            if (ring_abs(c) > tol)
                throw std::domain_error("complete_square: unexpected constant term");
            continue;
        }
        EpsSeries s = c;
        if (deg == 1) {
            if (std::abs(s[0]) > tol)
                throw std::domain_error("complete_square: linear term " + monomial_str(a) +
                                        " has an eps^0 component");
            if (s[0] != 0.0) s.at(0) = 0.0;
            int var = -1;
            for (int i = 0; i < d; ++i)
                if (a[i] == 1) var = i;
            sq.a[static_cast<std::size_t>(var)] = s.shifted_down(1);
            continue;
        }
        // quadratic
        int vi = -1, vj = -1;
        for (int i = 0; i < d; ++i) {
            if (a[i] == 2) vi = vj = i;
            if (a[i] == 1) (vi < 0 ? vi : vj) = i;
        }
        if (vi == vj) {
            double diag0 = s[0];
            if (std::abs(diag0 - 0.5) > tol)
                throw std::domain_error("complete_square: quadratic term " + monomial_str(a) +
                                        " deviates from |t|^2/2 at eps^0");
            s.at(0) = 0.0;
            sq.B[static_cast<std::size_t>(vi)][static_cast<std::size_t>(vi)] = s.shifted_down(1);
        } else {
            if (std::abs(s[0]) > tol)
                throw std::domain_error("complete_square: cross term " + monomial_str(a) +
                                        " has an eps^0 component");
            if (s[0] != 0.0) s.at(0) = 0.0;
            EpsSeries half = s.shifted_down(1);
            half *= 0.5;
            sq.B[static_cast<std::size_t>(vi)][static_cast<std::size_t>(vj)] = half;
            sq.B[static_cast<std::size_t>(vj)][static_cast<std::size_t>(vi)] = half;
        }
    }
    return sq;
}

ExpansionResult extract_coefficients(const SquareForm& sq, int d, int L) {
    if (sq.d != d || static_cast<int>(sq.a.size()) != d ||
        static_cast<int>(sq.B.size()) != d)
        throw std::invalid_argument("extract_coefficients: dimension mismatch");
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(sq.B[static_cast<std::size_t>(i)].size()) != d)
            throw std::invalid_argument("extract_coefficients: B is not d x d");
        for (int j = 0; j < d; ++j) {
            EpsSeries diff = sq.B[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                             sq.B[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            if (diff.max_abs() > 1e-12)
                throw std::invalid_argument("extract_coefficients: B is not symmetric");
        }
    }

    auto zero = EpsSeries(L);
    auto norm = [&](const EpsSeries& s) { return s.empty() ? zero : s; };

    // S = -2 eps J2; Neumann sum I + S + S^2 + ... terminates (S has eps >= 1)
    std::vector<std::vector<EpsSeries>> S(static_cast<std::size_t>(d),
                                          std::vector<EpsSeries>(static_cast<std::size_t>(d), zero));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            EpsSeries v = norm(sq.B[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]).shifted_up(1);
            v *= -2.0;
            S[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
        }

    auto mat_mul = [&](const std::vector<std::vector<EpsSeries>>& X,
                       const std::vector<std::vector<EpsSeries>>& Y) {
        std::vector<std::vector<EpsSeries>> Z(static_cast<std::size_t>(d),
                                              std::vector<EpsSeries>(static_cast<std::size_t>(d), zero));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                EpsSeries acc = zero;
                for (int l = 0; l < d; ++l)
                    acc += X[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] *
                           Y[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
                Z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
            }
        return Z;
    };
    auto mat_is_zero = [&](const std::vector<std::vector<EpsSeries>>& X) {
        for (const auto& row : X)
            for (const auto& e : row)
                if (!ring_is_zero(e)) return false;
        return true;
    };

    std::vector<std::vector<EpsSeries>> Minv(static_cast<std::size_t>(d),
                                             std::vector<EpsSeries>(static_cast<std::size_t>(d), zero));
    for (int i = 0; i < d; ++i) Minv[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = EpsSeries::constant(1.0, L);
    std::vector<std::vector<EpsSeries>> Pk = S;
    for (int k = 1; k <= L && !mat_is_zero(Pk); ++k) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                Minv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                    Pk[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        Pk = mat_mul(Pk, S);
    }

    // quad = J1^T Minv J1
    EpsSeries quad = zero;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            quad += norm(sq.a[static_cast<std::size_t>(i)]) *
                    Minv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                    norm(sq.a[static_cast<std::size_t>(j)]);

    // tr log(I + 2 eps J2) = sum (-1)^{k+1}/k tr((2 eps J2)^k)
    std::vector<std::vector<EpsSeries>> C(static_cast<std::size_t>(d),
                                          std::vector<EpsSeries>(static_cast<std::size_t>(d), zero));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                S[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * (-1.0);
    EpsSeries tr_log = zero;
    std::vector<std::vector<EpsSeries>> Ck = C;
    for (int k = 1; k <= L && !mat_is_zero(Ck); ++k) {
        EpsSeries tr = zero;
        for (int i = 0; i < d; ++i) tr += Ck[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        tr *= (k % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(k);
        tr_log += tr;
        Ck = mat_mul(Ck, C);
    }

    EpsSeries Q = quad.shifted_up(1);
    Q *= 0.5 * static_cast<double>(d);
    Q -= tr_log * 0.5;

    ExpansionResult res;
    res.path = ExpansionPath::quadratize;
    double dk = 1.0;
    for (int k = 1; k <= L - 1; ++k) {
        dk *= static_cast<double>(d);
        res.coefficients.push_back(dk * Q[k]);
    }
    return res;
}

ExpansionResult run_pipeline(const Model& model) {
    auto [X, residual] = initial_quadratize(model);
    GradedExponent E = fold_stage_inputs(model, X, residual);

    ExpansionDiagnostics diag;
    diag.stage_monomials.push_back(E.poly.term_count());
    for (int m = 1; m <= model.L - 1; ++m) {
        auto [Tm, En] = eliminate_stage(E, m);
        E = std::move(En);
        diag.stage_monomials.push_back(E.poly.term_count());
    }
    SquareForm sq = complete_square(E);
    ExpansionResult res = extract_coefficients(sq, model.d, model.L);
    res.diagnostics = std::move(diag);
    res.diagnostics.max_elimination_residual_rel = E.max_snap_residual_rel;
    return res;
}

}  // namespace laplace
