// laplace: compute log-expansion coefficients of Gaussian-standardized
// integrals and check them against numerical oracles.
//
// Subcommands: builtin (emit a model file), coeffs (expansion coefficients
// by one or both paths), verify (single-lambda oracle comparison), sweep
// (remainder decay across a lambda grid, CSV output).

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "laplace/cumulant.hpp"
#include "laplace/model_io.hpp"
#include "laplace/models.hpp"
#include "laplace/num_format.hpp"
#include "laplace/oracles.hpp"
#include "laplace/quadratizer.hpp"

namespace {

using laplace::double_to_string;
using nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr double kPathAgreementTol = 1e-6;

laplace::Model load_model(const std::string& path) {
    std::ostringstream ss;
    if (path == "-") {
        ss << std::cin.rdbuf();
    } else {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open model file: " + path);
        ss << in.rdbuf();
    }
    return laplace::model_from_json(ss.str());
}

// Reports must not carry NaN or infinities; fail loudly instead of letting
// the JSON writer turn them into null.
void ensure_finite(const ordered_json& j, const std::string& path) {
    if (j.is_number_float() && !std::isfinite(j.get<double>()))
        throw std::runtime_error("report field is not finite: " + path);
    if (j.is_object())
        for (const auto& [k, v] : j.items()) ensure_finite(v, path + "." + k);
    if (j.is_array())
        for (std::size_t i = 0; i < j.size(); ++i)
            ensure_finite(j[i], path + "[" + std::to_string(i) + "]");
}

void emit_report(const ordered_json& j) {
    ensure_finite(j, "$");
    std::cout << j.dump(2) << "\n";
}

std::vector<double> parse_lambdas(const std::string& grid) {
    std::vector<double> out;
    if (grid.find(':') != std::string::npos) {
        auto p1 = grid.find(':');
        auto p2 = grid.find(':', p1 + 1);
        if (p2 == std::string::npos || grid.find(':', p2 + 1) != std::string::npos)
            throw std::invalid_argument("lambda range must look like a:b:factor");
        double a = laplace::string_to_double(grid.substr(0, p1));
        double b = laplace::string_to_double(grid.substr(p1 + 1, p2 - p1 - 1));
        double factor = laplace::string_to_double(grid.substr(p2 + 1));
        if (!(a > 0.0) || !(b >= a) || !(factor > 1.0))
            throw std::invalid_argument("lambda range needs 0 < a <= b and factor > 1");
        for (double v = a; v <= b * (1.0 + 1e-12); v *= factor) out.push_back(v);
        return out;
    }
    std::stringstream ss(grid);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto l = tok.find_first_not_of(" \t");
        auto r = tok.find_last_not_of(" \t");
        if (l == std::string::npos) continue;
        out.push_back(laplace::string_to_double(tok.substr(l, r - l + 1)));
    }
    if (out.empty()) throw std::invalid_argument("no lambda values given");
    return out;
}

laplace::OracleKind parse_oracle(const std::string& name) {
    if (name == "radial") return laplace::OracleKind::radial;
    if (name == "ghq") return laplace::OracleKind::ghq;
    if (name == "mc") return laplace::OracleKind::mc;
    throw std::invalid_argument("unknown oracle: " + name);
}

ordered_json oracle_json(const laplace::OracleEstimate& est) {
    ordered_json j;
    j["method"] = est.method;
    j["log_I"] = est.log_I;
    j["std_error"] = est.std_error;
    j["samples_or_nodes"] = est.samples_or_nodes;
    if (est.seed) j["seed"] = *est.seed;
    j["converged"] = est.converged;
    return j;
}

double expansion_at(const std::vector<double>& coeffs, double lambda) {
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        acc += coeffs[k] / std::pow(lambda, static_cast<double>(k + 1));
    return acc;
}

struct OracleFlags {
    std::string oracle = "radial";
    double rel_tol = 1e-12;
    int nodes = 40;
    long long samples = 200000;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--oracle", oracle, "Oracle kind: radial|ghq|mc")
            ->check(CLI::IsMember({"radial", "ghq", "mc"}));
        cmd->add_option("--rel-tol", rel_tol, "Radial quadrature relative tolerance");
        cmd->add_option("--nodes", nodes, "Gauss-Hermite nodes per dimension");
        cmd->add_option("--samples", samples, "Monte Carlo sample count");
        cmd->add_option("--seed", seed, "Monte Carlo seed");
    }

    laplace::OracleOptions options() const {
        laplace::OracleOptions opt;
        opt.kind = parse_oracle(oracle);
        opt.rel_tol = rel_tol;
        opt.nodes_per_dim = nodes;
        opt.samples = samples;
        opt.seed = seed;
        return opt;
    }
};

int run_builtin(const std::string& name, int d, int L, int n, std::uint64_t seed, double scale,
                const std::string& link, const std::vector<double>& x_star) {
    laplace::Model m;
    if (name == "quartic") {
        m = laplace::quartic_model(d, L).model;
    } else if (name == "random") {
        m = laplace::random_poly_model(d, L, seed, scale).model;
    } else if (name == "logreg") {
        laplace::LogregConfig cfg;
        cfg.n = n;
        cfg.d = d;
        cfg.L = L;
        cfg.seed = seed;
        cfg.link = link;
        if (!x_star.empty()) cfg.x_star = x_star;
        m = laplace::logreg_model(cfg).integrand.model;
    } else {
        throw std::invalid_argument("unknown builtin: " + name);
    }
    std::cout << laplace::model_to_json(m);
    return 0;
}

int run_coeffs(const std::string& model_path, int L_override, const std::string& method) {
    laplace::Model m = load_model(model_path);
    if (L_override > 0) m = laplace::with_expansion_order(m, L_override);

    ordered_json rep;
    rep["schema_version"] = kSchemaVersion;
    rep["command"] = "coeffs";
    rep["d"] = m.d;
    rep["L"] = m.L;
    if (!m.label.empty()) rep["label"] = m.label;

    std::optional<laplace::ExpansionResult> cum, quad;
    if (method == "cumulant" || method == "both") cum = laplace::expand(m);
    if (method == "quadratize" || method == "both") quad = laplace::run_pipeline(m);

    if (cum) {
        ordered_json c;
        c["coefficients"] = cum->coefficients;
        c["b1_crosscheck_rel"] = cum->diagnostics.b1_crosscheck_rel;
        ordered_json per = ordered_json::array();
        for (const auto& pc : cum->diagnostics.per_coefficient)
            per.push_back({{"term_count", pc.term_count}, {"elapsed_ms", pc.elapsed_ms}});
        c["per_coefficient"] = per;
        rep["cumulant"] = c;
    }
    if (quad) {
        ordered_json q;
        q["coefficients"] = quad->coefficients;
        q["stage_monomials"] = quad->diagnostics.stage_monomials;
        q["max_elimination_residual_rel"] = quad->diagnostics.max_elimination_residual_rel;
        rep["quadratize"] = q;
    }

    bool ok = true;
    if (cum && quad) {
        double disc = 0.0;
        for (std::size_t k = 0; k < cum->coefficients.size(); ++k) {
            double c = cum->coefficients[k], q = quad->coefficients[k];
            disc = std::max(disc, std::abs(c - q) / std::max(1.0, std::abs(c)));
        }
        rep["max_rel_discrepancy"] = disc;
        if (disc > kPathAgreementTol) {
            ok = false;
            std::cerr << "invariant violated: coefficient paths disagree, max relative "
                         "discrepancy "
                      << double_to_string(disc) << " > " << double_to_string(kPathAgreementTol)
                      << "\n";
        }
    }
    emit_report(rep);
    return ok ? 0 : 1;
}

int run_verify(const std::string& model_path, int L_override, double lambda,
               const OracleFlags& flags) {
    laplace::Model stored = load_model(model_path);
    laplace::LaplaceIntegrand integrand = laplace::integrand_from_model(stored);
    laplace::Model jets = L_override > 0 ? laplace::with_expansion_order(stored, L_override)
                                         : stored;

    laplace::OracleEstimate est = laplace::run_oracle(integrand, lambda, flags.options());
    laplace::ExpansionResult res = laplace::expand(jets);
    double log_I_expansion = expansion_at(res.coefficients, lambda);
    double remainder = est.log_I - log_I_expansion;

    ordered_json rep;
    rep["schema_version"] = kSchemaVersion;
    rep["command"] = "verify";
    rep["d"] = jets.d;
    rep["L"] = jets.L;
    if (!stored.label.empty()) rep["label"] = stored.label;
    rep["lambda"] = lambda;
    rep["oracle"] = oracle_json(est);
    rep["coefficients"] = res.coefficients;
    rep["log_I_oracle"] = est.log_I;
    rep["log_I_expansion"] = log_I_expansion;
    rep["remainder"] = remainder;
    emit_report(rep);

    if (!est.converged) {
        std::cerr << "invariant violated: oracle did not converge\n";
        return 1;
    }
    return 0;
}

int run_sweep(const std::string& model_path, int L_override, const std::string& lambda_grid,
              const std::string& out_path, const OracleFlags& flags) {
    laplace::Model stored = load_model(model_path);
    laplace::LaplaceIntegrand integrand = laplace::integrand_from_model(stored);
    int L = L_override > 0 ? L_override : stored.L;
    std::vector<double> lambdas = parse_lambdas(lambda_grid);

    laplace::SweepResult sweep = laplace::remainder_sweep(integrand, lambdas, L, flags.options());

    std::ofstream csv(out_path);
    if (!csv) throw std::invalid_argument("cannot open output file: " + out_path);
    csv << "d,lambda,L,logI_oracle,logI_expansion,remainder,oracle_stderr\n";
    for (const auto& row : sweep.rows) {
        csv << row.d << ',' << double_to_string(row.lambda) << ',' << row.L << ','
            << double_to_string(row.log_I_oracle) << ',' << double_to_string(row.log_I_expansion)
            << ',' << double_to_string(row.remainder) << ','
            << double_to_string(row.oracle_std_error) << '\n';
    }
    csv.close();

    ordered_json rep;
    rep["schema_version"] = kSchemaVersion;
    rep["command"] = "sweep";
    rep["d"] = stored.d;
    rep["L"] = L;
    if (!stored.label.empty()) rep["label"] = stored.label;
    rep["oracle"] = flags.oracle;
    rep["coefficients"] = sweep.coefficients;
    rep["csv"] = out_path;
    rep["slope_fitted"] = sweep.slope_fitted;
    if (sweep.slope_fitted) {
        rep["slope"] = sweep.slope;
        rep["slope_std_error"] = sweep.slope_std_error;
    }
    ordered_json flagged = ordered_json::array();
    for (const auto& row : sweep.rows)
        if (!row.usable) flagged.push_back(row.lambda);
    rep["flagged_lambdas"] = flagged;
    emit_report(rep);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplace log-expansion coefficients and oracle checks"};
    app.require_subcommand(1);

    std::string model_path = "-";
    int L_override = 0;

    auto* builtin = app.add_subcommand("builtin", "Emit a builtin model file to stdout");
    std::string builtin_name;
    int b_d = 2, b_L = 2, b_n = 100;
    std::uint64_t b_seed = 1;
    double b_scale = 0.1;
    std::string b_link = "logistic";
    std::vector<double> b_xstar;
    builtin->add_option("name", builtin_name, "quartic|logreg|random")->required();
    builtin->add_option("-d,--dim", b_d, "Dimension");
    builtin->add_option("--L", b_L, "Expansion order");
    builtin->add_option("-n,--observations", b_n, "Observation count (logreg)");
    builtin->add_option("--seed", b_seed, "Generator seed (random, logreg)");
    builtin->add_option("--scale", b_scale, "Tensor entry scale (random)");
    builtin->add_option("--link", b_link, "logistic|quadratic (logreg)")
        ->check(CLI::IsMember({"logistic", "quadratic"}));
    builtin->add_option("--x-star", b_xstar, "Minimizer coordinates (logreg)")->delimiter(',');

    auto* coeffs = app.add_subcommand("coeffs", "Expansion coefficients from a model file");
    std::string method = "both";
    coeffs->add_option("--model", model_path, "Model file path, - for stdin");
    coeffs->add_option("--L", L_override, "Override the expansion order");
    coeffs->add_option("--method", method, "cumulant|quadratize|both")
        ->check(CLI::IsMember({"cumulant", "quadratize", "both"}));

    auto* verify = app.add_subcommand("verify", "Compare the expansion against an oracle");
    double lambda = 0.0;
    OracleFlags verify_flags;
    verify->add_option("--model", model_path, "Model file path, - for stdin");
    verify->add_option("--L", L_override, "Override the expansion order");
    verify->add_option("--lambda", lambda, "Scale parameter")->required()
        ->check(CLI::PositiveNumber);
    verify_flags.attach(verify);

    auto* sweep = app.add_subcommand("sweep", "Remainder decay across a lambda grid");
    std::string lambda_grid, out_path;
    OracleFlags sweep_flags;
    sweep->add_option("--model", model_path, "Model file path, - for stdin");
    sweep->add_option("--L", L_override, "Override the expansion order");
    sweep->add_option("--lambdas", lambda_grid, "Comma list or a:b:factor geometric range")
        ->required();
    sweep->add_option("--out", out_path, "CSV output path")->required();
    sweep_flags.attach(sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(builtin))
            return run_builtin(builtin_name, b_d, b_L, b_n, b_seed, b_scale, b_link, b_xstar);
        if (app.got_subcommand(coeffs)) return run_coeffs(model_path, L_override, method);
        if (app.got_subcommand(verify)) return run_verify(model_path, L_override, lambda,
                                                          verify_flags);
        if (app.got_subcommand(sweep))
            return run_sweep(model_path, L_override, lambda_grid, out_path, sweep_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
