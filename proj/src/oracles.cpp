#include "laplace/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "laplace/cumulant.hpp"
#include "laplace/rng.hpp"

namespace laplace {

namespace {

// 7/15 Gauss-Kronrod pair on [-1,1]; nodes symmetric about 0.
constexpr double kKronrodX[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kKronrodW[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGaussW[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
    double a, b, integral, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(const F& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 8; ++i) {
        double fv = f(c + h * kKronrodX[i]);
        if (i < 7) fv += f(c - h * kKronrodX[i]);  // center counted once
        k += kKronrodW[i] * fv;
        // odd indices of the half-array (1,3,5 and the center 7) are the
        // embedded Gauss-7 nodes; i/2 maps them onto kGaussW
        if (i % 2 == 1) g += kGaussW[i / 2] * fv;
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.integral = k * h;
    p.error = std::abs(k - g) * h;
    return p;
}

template <class F>
std::pair<double, bool> adaptive_gk(const F& f, double a, double b, double rel_tol) {
    std::priority_queue<Panel> q;
    q.push(gk15(f, a, b));
    double total = q.top().integral, err = q.top().error;
    int splits = 0;
    const int max_splits = 4000;
    while (err > rel_tol * std::max(std::abs(total), 1e-300) && splits < max_splits) {
        Panel p = q.top();
        q.pop();
        double mid = 0.5 * (p.a + p.b);
        Panel l = gk15(f, p.a, mid), r = gk15(f, mid, p.b);
        total += l.integral + r.integral - p.integral;
        err += l.error + r.error - p.error;
        q.push(l);
        q.push(r);
        ++splits;
    }
    return {total, splits < max_splits};
}

}  // namespace

OracleEstimate oracle_radial(const LaplaceIntegrand& m, double lambda, double rel_tol) {
    if (!m.exact_radial || !m.f_radial)
        throw std::invalid_argument("oracle_radial: integrand is not marked radial");
    if (lambda <= 0.0) throw std::invalid_argument("oracle_radial: lambda must be positive");
    const int d = m.d;
    const double sqrt_l = std::sqrt(lambda);
    auto F = [&](double u) {
        if (u <= 0.0) return d == 1 ? std::exp(-lambda * m.f_radial(0.0)) : 0.0;
        double r = u / sqrt_l;
        double e = -lambda * m.f_radial(r) + (d - 1) * std::log(u);
        if (m.logg_radial) e += m.logg_radial(r);
        return std::exp(e);
    };

    double acc = 0.0;
    bool ok = true;
    double lo = 0.0;
    for (double hi = 16.0; hi <= 256.0; hi *= 2.0) {
        auto [v, conv] = adaptive_gk(F, lo, hi, rel_tol);
        acc += v;
        ok = ok && conv;
        lo = hi;
        if (std::abs(v) < 1e-18 * std::max(acc, 1e-300)) break;
    }

    OracleEstimate est;
    est.method = "radial";
    est.lambda = lambda;
    est.log_I = std::log(acc) - ((0.5 * d - 1.0) * std::log(2.0) + std::lgamma(0.5 * d));
    est.std_error = 0.0;
    est.converged = ok && std::isfinite(est.log_I);
    return est;
}

namespace {

// Gauss-Hermite nodes/weights for weight exp(-y^2) by Golub-Welsch.
void gh_rule(int n, std::vector<double>& y, std::vector<double>& w) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = std::sqrt(0.5 * k);
        J(k - 1, k) = b;
        J(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    y.resize(static_cast<std::size_t>(n));
    w.resize(static_cast<std::size_t>(n));
    const double sqrt_pi = 1.7724538509055160273;
    for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        w[static_cast<std::size_t>(i)] = sqrt_pi * v0 * v0;
    }
}

double ghq_once(const LaplaceIntegrand& m, double lambda, int n) {
    const int d = m.d;
    std::vector<double> y, w;
    gh_rule(n, y, w);
    // normalized so per-dim weights sum to 1: E over N(0,1) with t = sqrt(2) y
    const double sqrt_pi = 1.7724538509055160273;
    for (auto& v : w) v /= sqrt_pi;
    const double sqrt2 = std::sqrt(2.0);
    const double sqrt_l = std::sqrt(lambda);

    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> t(static_cast<std::size_t>(d)), x(static_cast<std::size_t>(d));
    double acc = 0.0;
    while (true) {
        double W = 1.0, t2 = 0.0;
        for (int j = 0; j < d; ++j) {
            double tj = sqrt2 * y[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            t[static_cast<std::size_t>(j)] = tj;
            x[static_cast<std::size_t>(j)] = tj / sqrt_l;
            t2 += tj * tj;
            W *= w[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        }
        double e = -lambda * m.f(x) + 0.5 * t2;
        if (m.log_g) e += m.log_g(x);
        acc += W * std::exp(e);
        int j = 0;
        while (j < d && ++idx[static_cast<std::size_t>(j)] == n) {
            idx[static_cast<std::size_t>(j)] = 0;
            ++j;
        }
        if (j == d) break;
    }
    return std::log(acc);
}

}  // namespace

OracleEstimate oracle_ghq(const LaplaceIntegrand& m, double lambda, int nodes_per_dim) {
    if (lambda <= 0.0) throw std::invalid_argument("oracle_ghq: lambda must be positive");
    if (nodes_per_dim < 2) throw std::invalid_argument("oracle_ghq: need at least 2 nodes");
    if (std::pow(static_cast<double>(nodes_per_dim), m.d) > 1e7)
        throw std::invalid_argument("oracle_ghq: grid larger than 10^7 points");

    double v1 = ghq_once(m, lambda, nodes_per_dim);
    int refined = nodes_per_dim + (nodes_per_dim + 1) / 2;
    while (refined > nodes_per_dim &&
           std::pow(static_cast<double>(refined), m.d) > 1e7)
        --refined;

    OracleEstimate est;
    est.method = "ghq";
    est.lambda = lambda;
    if (refined > nodes_per_dim) {
        double v2 = ghq_once(m, lambda, refined);
        est.log_I = v2;
        est.std_error = std::abs(v2 - v1);
        est.samples_or_nodes = refined;
        est.converged = std::isfinite(v2) && est.std_error < 1e-8;
    } else {
        est.log_I = v1;
        est.samples_or_nodes = nodes_per_dim;
        est.converged = std::isfinite(v1);
    }
    return est;
}

OracleEstimate oracle_mc(const LaplaceIntegrand& m, double lambda, long long samples,
                         std::uint64_t seed) {
    if (lambda <= 0.0) throw std::invalid_argument("oracle_mc: lambda must be positive");
    if (samples < 1000) throw std::invalid_argument("oracle_mc: need at least 10^3 samples");
    const int d = m.d;
    const double sqrt_l = std::sqrt(lambda);
    GaussianSampler gs(seed);
    std::vector<double> x(static_cast<std::size_t>(d));
    double sum = 0.0, sumsq = 0.0;
    for (long long i = 0; i < samples; ++i) {
        double z2 = 0.0;
        for (int j = 0; j < d; ++j) {
            double z = gs.next();
            z2 += z * z;
            x[static_cast<std::size_t>(j)] = z / sqrt_l;
        }
        double e = -lambda * m.f(x) + 0.5 * z2;
        if (m.log_g) e += m.log_g(x);
        double w = std::exp(e);
        if (!std::isfinite(w)) {
            std::ostringstream os;
            os << "oracle_mc: non-finite weight at sample " << i << ", x = (";
            for (int j = 0; j < d; ++j) os << (j ? ", " : "") << x[static_cast<std::size_t>(j)];
            os << ")";
            throw std::runtime_error(os.str());
        }
        sum += w;
        sumsq += w * w;
    }
    double mean = sum / static_cast<double>(samples);
    double var = std::max(0.0, sumsq / static_cast<double>(samples) - mean * mean);
    OracleEstimate est;
    est.method = "mc";
    est.lambda = lambda;
    est.samples_or_nodes = samples;
    est.seed = seed;
    est.log_I = std::log(mean);
    est.std_error = std::sqrt(var / static_cast<double>(samples)) / mean;
    est.converged = std::isfinite(est.log_I);
    return est;
}

OracleEstimate run_oracle(const LaplaceIntegrand& m, double lambda, const OracleOptions& opt) {
    switch (opt.kind) {
        case OracleKind::radial:
            return oracle_radial(m, lambda, opt.rel_tol);
        case OracleKind::ghq:
            return oracle_ghq(m, lambda, opt.nodes_per_dim);
        case OracleKind::mc:
            return oracle_mc(m, lambda, opt.samples, opt.seed);
    }
    throw std::logic_error("run_oracle: unknown oracle kind");
}

SweepResult remainder_sweep(const LaplaceIntegrand& m, const std::vector<double>& lambdas,
                            int L, const OracleOptions& opt) {
    if (lambdas.size() < 3)
        throw std::invalid_argument("remainder_sweep: need at least 3 lambdas");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1]))
            throw std::invalid_argument("remainder_sweep: lambdas must be strictly increasing");
    double ratio = lambdas[1] / lambdas[0];
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        double r = lambdas[i] / lambdas[i - 1];
        if (std::abs(r / ratio - 1.0) > 0.01)
            throw std::invalid_argument(
                "remainder_sweep: lambdas must be geometrically spaced (1% tolerance)");
    }

    auto jets = with_expansion_order(m.model, L);
    auto expansion = expand(jets);

    SweepResult out;
    out.coefficients = expansion.coefficients;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        double l = lambdas[i];
        OracleOptions row_opt = opt;
        if (opt.kind == OracleKind::mc) row_opt.seed = derive_stream(opt.seed, i);
        auto est = run_oracle(m, l, row_opt);

        SweepRow row;
        row.d = m.d;
        row.lambda = l;
        row.L = L;
        row.log_I_oracle = est.log_I;
        double e = 0.0;
        for (std::size_t k = 0; k < expansion.coefficients.size(); ++k)
            e += expansion.coefficients[k] / std::pow(l, static_cast<double>(k + 1));
        row.log_I_expansion = e;
        row.remainder = est.log_I - e;
        row.oracle_std_error = est.std_error;

        double floor = std::max(1e-13, 5.0 * est.std_error);
        row.usable = std::isfinite(row.remainder) && std::abs(row.remainder) > floor;
        if (opt.kind == OracleKind::mc && est.std_error >= 1e-3) row.usable = false;
        out.rows.push_back(row);
    }

    std::vector<double> xs, ys;
    for (const auto& r : out.rows) {
        if (!r.usable) continue;
        xs.push_back(std::log(r.lambda));
        ys.push_back(std::log(std::abs(r.remainder)));
    }
    if (xs.empty() && opt.kind == OracleKind::mc)
        throw std::runtime_error(
            "remainder_sweep: every row is noise-dominated; use a deterministic oracle or "
            "raise the sample count");
    if (xs.size() >= 3) {
        double n = static_cast<double>(xs.size());
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= n;
        my /= n;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        out.slope = sxy / sxx;
        double sse = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double resid = ys[i] - my - out.slope * (xs[i] - mx);
            sse += resid * resid;
        }
        out.slope_std_error = std::sqrt(sse / (n - 2.0) / sxx);
        out.slope_fitted = true;
    }
    return out;
}

}  // namespace laplace
