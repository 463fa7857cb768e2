// Command-line front end: prices GMWB contracts and vanilla benchmarks,
// searches fair fees, and reproduces the published experiment tables.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "gmwb/config.hpp"
#include "gmwb/runner.hpp"

namespace {

struct Overrides {
    std::optional<double> rho, alpha_bp, sigma_r, strike, maturity, beta, n_sd;
    std::optional<int> threads, J, n_steps, n_dt;
    std::optional<long long> n_paths, seed;
    std::string mode, mesh, quad, kind, out, actions_out, strategy;
};

int apply_overrides(gmwb::RunConfig& cfg, const Overrides& o) {
    using namespace gmwb;
    if (o.rho) cfg.params.rho = *o.rho;
    if (o.alpha_bp) cfg.contract.alpha = *o.alpha_bp * 1e-4;
    if (o.sigma_r) cfg.params.sigma_r = *o.sigma_r;
    if (o.strike) cfg.strike = *o.strike;
    if (o.maturity) {
        cfg.maturity = *o.maturity;
        cfg.contract.T = *o.maturity;
    }
    if (o.beta) cfg.contract.beta = *o.beta;
    if (o.n_sd) cfg.spec.n_sd = *o.n_sd;
    if (o.threads) cfg.spec.threads = *o.threads;
    if (o.J) cfg.J = *o.J;
    if (o.n_steps) cfg.n_steps = *o.n_steps;
    if (o.n_dt) cfg.spec.N_dt = *o.n_dt;
    if (o.n_paths) cfg.n_paths = *o.n_paths;
    if (o.seed) cfg.seed = static_cast<std::uint64_t>(*o.seed);
    if (!o.out.empty()) cfg.out_path = o.out;
    if (!o.actions_out.empty()) cfg.actions_out = o.actions_out;
    if (!o.mesh.empty()) {
        const int th = cfg.spec.threads;
        const QuadMap mp = cfg.spec.map;
        const int ndt = cfg.spec.N_dt;
        if (o.mesh == "coarse") cfg.spec = GridSpec::coarse();
        else if (o.mesh == "fine") cfg.spec = GridSpec::fine();
        else {
            std::fprintf(stderr, "--mesh: expected coarse|fine\n");
            return 2;
        }
        cfg.spec.threads = th;
        cfg.spec.map = mp;
        cfg.spec.N_dt = ndt;
    }
    if (!o.quad.empty()) {
        int q1 = 0, q2 = 0;
        if (std::sscanf(o.quad.c_str(), "%d,%d", &q1, &q2) != 2 || q1 < 1 || q2 < 1 || q1 < q2) {
            std::fprintf(stderr, "--quad: expected q1,q2 with q1 >= q2 >= 1\n");
            return 2;
        }
        cfg.spec.q1 = q1;
        cfg.spec.q2 = q2;
    }
    if (!o.kind.empty()) {
        if (o.kind == "call") cfg.option = OptionKind::call;
        else if (o.kind == "put") cfg.option = OptionKind::put;
        else {
            std::fprintf(stderr, "--kind: expected call|put\n");
            return 2;
        }
    }
    if (!o.strategy.empty()) {
        if (o.strategy == "static") cfg.strategy = WithdrawalStrategy::Static;
        else if (o.strategy == "dynamic") cfg.strategy = WithdrawalStrategy::Dynamic;
        else {
            std::fprintf(stderr, "--strategy: expected static|dynamic\n");
            return 2;
        }
    }
    if (!o.mode.empty()) {
        if (o.mode == "static") {
            cfg.strategy = WithdrawalStrategy::Static;
            cfg.rate = RateModel::Stochastic;
        } else if (o.mode == "dynamic") {
            cfg.strategy = WithdrawalStrategy::Dynamic;
            cfg.rate = RateModel::Stochastic;
        } else if (o.mode == "deterministic") {
            cfg.rate = RateModel::Deterministic;
        } else {
            std::fprintf(stderr, "--mode: expected static|dynamic|deterministic\n");
            return 2;
        }
    }
    return 0;
}

int load_config(const std::string& path, gmwb::RunConfig& cfg) {
    if (path.empty()) {
        cfg = gmwb::paper_baseline();
        return 0;
    }
    std::ifstream f(path);
    if (!f) {
        std::fprintf(stderr, "cannot open config file: %s\n", path.c_str());
        return 2;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    const gmwb::ParseResult pr = gmwb::parse_config(ss.str());
    if (!pr.ok()) {
        for (const auto& e : pr.errors)
            std::fprintf(stderr, "%s:%d: %s\n", path.c_str(), e.line, e.message.c_str());
        return 2;
    }
    cfg = pr.config;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GMWB variable-annuity pricer under correlated Vasicek rates"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name

    std::string config_path;
    Overrides o;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--out", o.out, "CSV output path");
    app.add_option("--threads", o.threads, "worker thread count (0 = hardware)");
    app.add_option("--seed", o.seed, "Monte Carlo master seed");
    app.add_option("--mode", o.mode, "static|dynamic|deterministic");
    app.add_option("--strategy", o.strategy, "withdrawal strategy for deterministic/fair-fee runs");
    app.add_option("--rho", o.rho, "asset-rate correlation override");
    app.add_option("--alpha-bp", o.alpha_bp, "annual fee in basis points");
    app.add_option("--sigma-r", o.sigma_r, "rate volatility override");
    app.add_option("--mesh", o.mesh, "coarse|fine");
    app.add_option("--quad", o.quad, "quadrature orders q1,q2");
    app.add_option("--J", o.J, "guarantee grid levels");
    app.add_option("--n-dt", o.n_dt, "sub-steps per withdrawal period");
    app.add_option("--n-sd", o.n_sd, "grid half-width in standard deviations");

    auto* vanilla = app.add_subcommand("vanilla", "European option vs the closed form");
    vanilla->add_option("--strike", o.strike, "strike");
    vanilla->add_option("--maturity", o.maturity, "maturity in years");
    vanilla->add_option("--kind", o.kind, "call|put");
    vanilla->add_option("--n-steps", o.n_steps, "backward time steps");

    auto* bond = app.add_subcommand("bond", "zero-coupon bond price");
    bond->add_option("--maturity", o.maturity, "maturity in years");

    auto* price = app.add_subcommand("price", "GMWB contract value");
    price->add_option("--actions-out", o.actions_out,
                      "CSV of optimal withdrawal actions (dynamic runs)");
    auto* fee = app.add_subcommand("fair-fee", "fee alpha* with price = premium");
    auto* mc = app.add_subcommand("mc", "static-strategy Monte Carlo benchmark");
    mc->add_option("--n-paths", o.n_paths, "sample paths");

    int table = 0;
    int figure = 0;
    auto* rep = app.add_subcommand("reproduce", "re-run a published experiment");
    rep->add_option("--table", table, "table number 1..6");
    rep->add_option("--figure", figure, "figure number (2)");
    rep->add_option("--n-paths", o.n_paths, "Monte Carlo paths for the benchmark columns");

    CLI11_PARSE(app, argc, argv);

    gmwb::RunConfig cfg;
    int rc = load_config(config_path, cfg);
    if (rc != 0) return rc;
    rc = apply_overrides(cfg, o);
    if (rc != 0) return rc;

    try {
        if (vanilla->parsed()) {
            cfg.mode = gmwb::RunMode::vanilla;
            if (!o.maturity) cfg.maturity = 1.0;
            if (config_path.empty() && !o.alpha_bp) cfg.contract.alpha = 0.0;
            return gmwb::run(cfg);
        }
        if (bond->parsed()) {
            cfg.mode = gmwb::RunMode::bond;
            return gmwb::run(cfg);
        }
        if (price->parsed()) {
            cfg.mode = cfg.strategy == gmwb::WithdrawalStrategy::Dynamic
                           ? gmwb::RunMode::price_dynamic
                           : gmwb::RunMode::price_static;
            return gmwb::run(cfg);
        }
        if (fee->parsed()) {
            cfg.mode = gmwb::RunMode::fair_fee;
            return gmwb::run(cfg);
        }
        if (mc->parsed()) {
            cfg.mode = gmwb::RunMode::mc;
            return gmwb::run(cfg);
        }
        if (rep->parsed()) {
            if (figure == 2) return gmwb::run_reproduce_figure2(cfg);
            if (table >= 1 && table <= 6) return gmwb::run_reproduce_table(table, cfg);
            std::fprintf(stderr, "reproduce: pass --table 1..6 or --figure 2\n");
            return 2;
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 2;
}
