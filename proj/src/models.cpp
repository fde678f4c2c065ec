#include "laplace/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "laplace/num_format.hpp"
#include "laplace/polynomial.hpp"
#include "laplace/rng.hpp"

namespace laplace {

namespace {

constexpr double kStandardizationTol = 1e-8;

void fill_tensor(SymTensor& T, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<std::vector<int>> classes;
    T.for_each_class([&](std::span<const int> idx, double) {
        classes.emplace_back(idx.begin(), idx.end());
    });
    for (auto& cl : classes) T.set(cl, u(rng));
}

double norm_sq(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

// f as the jet polynomial plus conf*|x|^(2L+2); conf = 0 gives the bare jet.
struct JetIntegrand {
    Polynomial<double> poly;
    double conf;
    int L;
    double operator()(std::span<const double> x) const {
        double v = 0.5 * norm_sq(x) + poly.eval(x);
        if (conf != 0.0) v += conf * std::pow(norm_sq(x), L + 1);
        return v;
    }
};

Polynomial<double> jet_polynomial(const std::map<int, SymTensor>& tensors, int d, int cap) {
    Polynomial<double> p(d, cap);
    double fact = 1.0;
    int prev = 0;
    for (const auto& [k, T] : tensors) {
        while (prev < k) fact *= ++prev;
        auto q = tensor_to_poly(T);
        q.scale(1.0 / fact);
        p += q;
    }
    return p;
}

void enforce_standardized(const LaplaceIntegrand& m, const char* who) {
    auto rep = standardization_check(m);
    if (rep.grad_inf > kStandardizationTol || rep.hess_dev_inf > kStandardizationTol) {
        std::ostringstream os;
        os << who << ": integrand is not standardized (|grad| = " << rep.grad_inf
           << ", |hess - I| = " << rep.hess_dev_inf << ")";
        throw std::runtime_error(os.str());
    }
}

}  // namespace

LaplaceIntegrand quartic_model(int d, int L) {
    if (d < 1) throw std::invalid_argument("quartic_model: d must be >= 1");
    if (L < 1) throw std::invalid_argument("quartic_model: L must be >= 1");
    LaplaceIntegrand m;
    m.d = d;
    m.model.d = d;
    m.model.L = L;
    m.model.label = "quartic(d=" + std::to_string(d) + ",L=" + std::to_string(L) + ")";
    if (2 * L + 1 >= 4) {
        SymTensor T(4, d);
        for (int i = 0; i < d; ++i) {
            T.set(std::vector<int>{i, i, i, i}, 1.0);
            for (int j = i + 1; j < d; ++j) T.set(std::vector<int>{i, i, j, j}, 1.0 / 3.0);
        }
        m.model.f_tensors.emplace(4, std::move(T));
    }
    m.f = [](std::span<const double> x) {
        double r2 = norm_sq(x);
        return 0.5 * r2 + r2 * r2 / 24.0;
    };
    m.exact_radial = true;
    m.f_radial = [](double r) { return 0.5 * r * r + r * r * r * r / 24.0; };
    enforce_standardized(m, "quartic_model");
    return m;
}

LaplaceIntegrand random_poly_model(int d, int L, std::uint64_t seed, double scale) {
    if (d < 1) throw std::invalid_argument("random_poly_model: d must be >= 1");
    if (L < 1) throw std::invalid_argument("random_poly_model: L must be >= 1");
    if (scale < 0.0) throw std::invalid_argument("random_poly_model: scale must be >= 0");
    LaplaceIntegrand m;
    m.d = d;
    m.model.d = d;
    m.model.L = L;
    m.model.label = "random(d=" + std::to_string(d) + ",L=" + std::to_string(L) +
                    ",seed=" + std::to_string(seed) + ",scale=" + double_to_string(scale) + ")";
    std::mt19937_64 rng(seed);
    if (scale > 0.0) {
        for (int k = 3; k <= 2 * L + 1; ++k) {
            SymTensor T(k, d);
            fill_tensor(T, rng, scale);
            m.model.f_tensors.emplace(k, std::move(T));
        }
        for (int k = 1; k <= 2 * L - 1; ++k) {
            SymTensor T(k, d);
            fill_tensor(T, rng, scale);
            m.model.logg_tensors.emplace(k, std::move(T));
        }
    }
    m.f = JetIntegrand{jet_polynomial(m.model.f_tensors, d, 2 * L + 1), scale, L};
    if (!m.model.logg_tensors.empty()) {
        auto lg = jet_polynomial(m.model.logg_tensors, d, 2 * L - 1);
        m.log_g = [lg](std::span<const double> x) { return lg.eval(x); };
    }
    enforce_standardized(m, "random_poly_model");
    return m;
}

std::vector<double> logistic_psi_derivative_poly(int k) {
    if (k < 1) throw std::invalid_argument("logistic_psi_derivative_poly: k must be >= 1");
    std::vector<double> p = {0.0, 1.0};  // psi'(t) = u
    for (int j = 1; j < k; ++j) {
        // p <- p'(u) * (u - u^2)
        std::vector<double> dp(p.size() - 1, 0.0);
        for (std::size_t i = 1; i < p.size(); ++i)
            dp[i - 1] = p[i] * static_cast<double>(i);
        std::vector<double> next(dp.size() + 2, 0.0);
        for (std::size_t i = 0; i < dp.size(); ++i) {
            next[i + 1] += dp[i];
            next[i + 2] -= dp[i];
        }
        p = std::move(next);
    }
    return p;
}

double logistic_psi_derivative(int k, double t) {
    double u = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
    auto p = logistic_psi_derivative_poly(k);
    double acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * u + p[i];
    return acc;
}

namespace {

double softplus(double t) {
    if (t > 35.0) return t;
    if (t < -35.0) return std::exp(t);
    return std::log1p(std::exp(t));
}

struct Link {
    // psi and its derivatives; quadratic link is the Gaussian control case
    bool quadratic = false;
    double value(double t) const { return quadratic ? 0.5 * t * t : softplus(t); }
    double deriv(int k, double t) const {
        if (quadratic) {
            if (k == 1) return t;
            return k == 2 ? 1.0 : 0.0;
        }
        return logistic_psi_derivative(k, t);
    }
};

}  // namespace

LogregInstance logreg_model(const LogregConfig& cfg) {
    const int d = cfg.d, n = cfg.n, L = cfg.L;
    if (d < 1) throw std::invalid_argument("logreg_model: d must be >= 1");
    if (n < d) throw std::invalid_argument("logreg_model: need n >= d");
    if (L < 1) throw std::invalid_argument("logreg_model: L must be >= 1");
    std::vector<double> xs = cfg.x_star;
    if (xs.empty()) xs.assign(static_cast<std::size_t>(d), 0.0);
    if (static_cast<int>(xs.size()) != d)
        throw std::invalid_argument("logreg_model: x_star has wrong dimension");
    Link link;
    if (cfg.link == "logistic")
        link.quadratic = false;
    else if (cfg.link == "quadratic")
        link.quadratic = true;
    else
        throw std::invalid_argument("logreg_model: unknown link '" + cfg.link + "'");

    // features uniform on the radius-1.5 sphere; redraw the whole design until
    // the second-moment matrix is safely nonsingular
    GaussianSampler gs(cfg.seed);
    std::vector<std::vector<double>> X;
    Eigen::MatrixXd second(d, d);
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
        X.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d)));
        for (auto& row : X) {
            double nrm = 0.0;
            for (auto& v : row) {
                v = gs.next();
                nrm += v * v;
            }
            nrm = std::sqrt(nrm);
            if (nrm < 1e-12) {
                row.assign(row.size(), 0.0);
                row[0] = 1.0;
                nrm = 1.0;
            }
            for (auto& v : row) v *= 1.5 / nrm;
        }
        second.setZero();
        for (const auto& row : X)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) second(i, j) += row[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(j)] / n;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second);
        ok = es.eigenvalues().minCoeff() > 1e-8;
    }
    if (!ok)
        throw std::runtime_error(
            "logreg_model: features failed to span the space after 10 draws "
            "(second-moment matrix nearly singular)");

    // s_i = X_i.x*, the anchors for every derivative weight
    std::vector<double> s(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) s[static_cast<std::size_t>(i)] += X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * xs[static_cast<std::size_t>(j)];

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        double w = link.deriv(2, s[static_cast<std::size_t>(i)]) / n;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                H(a, b) += w * X[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] * X[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("logreg_model: Hessian at x* is not positive definite");
    Eigen::MatrixXd Hinvsqrt = es.operatorInverseSqrt();
    double log_det_H = es.eigenvalues().array().log().sum();

    // whitened features Y_i = H^{-1/2} X_i drive the standardized jets
    std::vector<std::vector<double>> Y(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d), 0.0));
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                Y[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] += Hinvsqrt(a, b) * X[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)];

    LogregInstance inst;
    inst.features = X;
    inst.n = n;
    inst.log_det_H = log_det_H;

    double ell_star = 0.0;
    for (int i = 0; i < n; ++i) {
        double si = s[static_cast<std::size_t>(i)];
        ell_star += (link.value(si) - link.deriv(1, si) * si) / n;
    }
    inst.ell_star = ell_star;

    LaplaceIntegrand& m = inst.integrand;
    m.d = d;
    m.model.d = d;
    m.model.L = L;
    {
        std::string sx;
        for (std::size_t i = 0; i < xs.size(); ++i)
            sx += (i ? "," : "") + double_to_string(xs[i]);
        m.model.label = "logreg(n=" + std::to_string(n) + ",d=" + std::to_string(d) +
                        ",L=" + std::to_string(L) + ",seed=" + std::to_string(cfg.seed) +
                        ",link=" + cfg.link + ",xstar=" + sx + ")";
    }

    for (int k = 3; k <= 2 * L + 1; ++k) {
        SymTensor T(k, d);
        std::vector<std::vector<int>> classes;
        T.for_each_class([&](std::span<const int> idx, double) {
            classes.emplace_back(idx.begin(), idx.end());
        });
        std::vector<double> wk(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) wk[static_cast<std::size_t>(i)] = link.deriv(k, s[static_cast<std::size_t>(i)]) / n;
        bool any = false;
        for (const auto& cl : classes) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                double prod = wk[static_cast<std::size_t>(i)];
                for (int idx : cl) prod *= Y[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx)];
                acc += prod;
            }
            T.set(cl, acc);
            if (acc != 0.0) any = true;
        }
        if (any) m.model.f_tensors.emplace(k, std::move(T));
    }

    // exact f through ell itself, not the truncated jets:
    // f(t) = (1/n) sum_i [psi(s_i + Y_i.t) - psi(s_i) - psi'(s_i) Y_i.t]
    m.f = [Y, s, link, n, d](std::span<const double> t) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double u = 0.0;
            for (int a = 0; a < d; ++a)
                u += Y[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] * t[static_cast<std::size_t>(a)];
            double si = s[static_cast<std::size_t>(i)];
            acc += link.value(si + u) - link.value(si) - link.deriv(1, si) * u;
        }
        return acc / n;
    };
    enforce_standardized(m, "logreg_model");
    return inst;
}

StandardizationReport standardization_check(const LaplaceIntegrand& m) {
    const int d = m.d;
    const double h = 5e-3;
    auto feval = [&](const std::vector<double>& x) { return m.f(x); };
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    StandardizationReport rep;

    double f0 = feval(x);
    rep.grad_inf = std::abs(f0);

    // five-point stencils: O(h^4) truncation keeps both checks well under 1e-8
    auto dir_second = [&](const std::vector<double>& v) {
        auto at = [&](double sgn) {
            std::vector<double> y(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) y[static_cast<std::size_t>(i)] = sgn * h * v[static_cast<std::size_t>(i)];
            return feval(y);
        };
        return (-at(2.0) + 16.0 * at(1.0) - 30.0 * f0 + 16.0 * at(-1.0) - at(-2.0)) /
               (12.0 * h * h);
    };

    std::vector<double> diag(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        auto at = [&](double step) {
            std::vector<double> y(static_cast<std::size_t>(d), 0.0);
            y[static_cast<std::size_t>(i)] = step;
            return feval(y);
        };
        double g = (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
        rep.grad_inf = std::max(rep.grad_inf, std::abs(g));
        std::vector<double> e(static_cast<std::size_t>(d), 0.0);
        e[static_cast<std::size_t>(i)] = 1.0;
        diag[static_cast<std::size_t>(i)] = dir_second(e);
        rep.hess_dev_inf = std::max(rep.hess_dev_inf, std::abs(diag[static_cast<std::size_t>(i)] - 1.0));
    }
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            std::vector<double> v(static_cast<std::size_t>(d), 0.0);
            v[static_cast<std::size_t>(i)] = 1.0;
            v[static_cast<std::size_t>(j)] = 1.0;
            double hij = (dir_second(v) - diag[static_cast<std::size_t>(i)] - diag[static_cast<std::size_t>(j)]) / 2.0;
            rep.hess_dev_inf = std::max(rep.hess_dev_inf, std::abs(hij));
        }
    }
    return rep;
}

Model with_expansion_order(const Model& m, int L) {
    if (L < 1) throw std::invalid_argument("with_expansion_order: L must be >= 1");
    Model out = m;
    out.L = L;
    std::erase_if(out.f_tensors, [&](const auto& kv) { return kv.first < 3 || kv.first > 2 * L + 1; });
    std::erase_if(out.logg_tensors, [&](const auto& kv) { return kv.first < 1 || kv.first > 2 * L - 1; });
    return out;
}

namespace {

// "name(k1=v1,k2=v2,...)" with xstar (if present) last, swallowing commas
bool parse_label(const std::string& label, std::string& name,
                 std::map<std::string, std::string>& kv) {
    auto open = label.find('(');
    if (open == std::string::npos || label.empty() || label.back() != ')') return false;
    name = label.substr(0, open);
    std::string body = label.substr(open + 1, label.size() - open - 2);
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto eq = body.find('=', pos);
        if (eq == std::string::npos) return false;
        std::string key = body.substr(pos, eq - pos);
        std::size_t end;
        if (key == "xstar") {
            end = body.size();
        } else {
            end = body.find(',', eq + 1);
            if (end == std::string::npos) end = body.size();
        }
        kv[key] = body.substr(eq + 1, end - eq - 1);
        pos = end + 1;
    }
    return !name.empty();
}

void crosscheck_jets(const Model& stored, const Model& rebuilt, const std::string& label) {
    if (stored.d != rebuilt.d || stored.L != rebuilt.L)
        throw std::runtime_error("integrand_from_model: label '" + label +
                                 "' disagrees with the stored d or L");
    double scale = std::max({1.0, stored.max_entry(), rebuilt.max_entry()});
    auto cmp = [&](const std::map<int, SymTensor>& a, const std::map<int, SymTensor>& b,
                   const char* which) {
        for (const auto& [k, T] : a) {
            const SymTensor* other = nullptr;
            auto it = b.find(k);
            if (it != b.end()) other = &it->second;
            double dev = 0.0;
            std::vector<std::vector<int>> classes;
            T.for_each_class([&](std::span<const int> idx, double) {
                classes.emplace_back(idx.begin(), idx.end());
            });
            for (const auto& cl : classes) {
                double ref = other ? other->at(cl) : 0.0;
                dev = std::max(dev, std::abs(T.at(cl) - ref));
            }
            if (dev > 1e-9 * scale)
                throw std::runtime_error("integrand_from_model: stored " + std::string(which) +
                                         " jets of order " + std::to_string(k) +
                                         " disagree with the builder for label '" + label + "'");
        }
    };
    cmp(stored.f_tensors, rebuilt.f_tensors, "f");
    cmp(rebuilt.f_tensors, stored.f_tensors, "f");
    cmp(stored.logg_tensors, rebuilt.logg_tensors, "log g");
    cmp(rebuilt.logg_tensors, stored.logg_tensors, "log g");
}

}  // namespace

LaplaceIntegrand integrand_from_model(const Model& m) {
    m.validate();
    std::string name;
    std::map<std::string, std::string> kv;
    if (parse_label(m.label, name, kv)) {
        try {
            if (name == "quartic") {
                auto built = quartic_model(std::stoi(kv.at("d")), std::stoi(kv.at("L")));
                crosscheck_jets(m, built.model, m.label);
                built.model = m;
                return built;
            }
            if (name == "random") {
                auto built = random_poly_model(std::stoi(kv.at("d")), std::stoi(kv.at("L")),
                                               std::stoull(kv.at("seed")),
                                               string_to_double(kv.at("scale")));
                crosscheck_jets(m, built.model, m.label);
                built.model = m;
                return built;
            }
            if (name == "logreg") {
                LogregConfig cfg;
                cfg.n = std::stoi(kv.at("n"));
                cfg.d = std::stoi(kv.at("d"));
                cfg.L = std::stoi(kv.at("L"));
                cfg.seed = std::stoull(kv.at("seed"));
                cfg.link = kv.at("link");
                cfg.x_star.clear();
                std::stringstream ss(kv.at("xstar"));
                std::string tok;
                while (std::getline(ss, tok, ',')) cfg.x_star.push_back(string_to_double(tok));
                auto built = logreg_model(cfg);
                crosscheck_jets(m, built.integrand.model, m.label);
                built.integrand.model = m;
                return built.integrand;
            }
        } catch (const std::out_of_range&) {
            throw std::runtime_error("integrand_from_model: label '" + m.label +
                                     "' is missing builder parameters");
        }
    }

    // no recognized label: integrate the jets directly, confined enough to
    // make the integral finite for any stored coefficients
    LaplaceIntegrand out;
    out.d = m.d;
    out.model = m;
    double conf = std::max(0.1, m.max_entry());
    out.f = JetIntegrand{jet_polynomial(m.f_tensors, m.d, 2 * m.L + 1), conf, m.L};
    if (!m.logg_tensors.empty()) {
        auto lg = jet_polynomial(m.logg_tensors, m.d, 2 * m.L - 1);
        out.log_g = [lg](std::span<const double> x) { return lg.eval(x); };
    }
    enforce_standardized(out, "integrand_from_model");
    return out;
}

}  // namespace laplace
