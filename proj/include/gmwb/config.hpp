#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gmwb/contract.hpp"
#include "gmwb/engine.hpp"
#include "gmwb/model.hpp"

namespace gmwb {

enum class RunMode { vanilla, bond, price_static, price_dynamic, fair_fee, mc };

struct RunConfig {
    ModelParams params;
    GMWBContract contract;
    GridSpec spec;
    RunMode mode = RunMode::price_static;
    RateModel rate = RateModel::Stochastic;
    WithdrawalStrategy strategy = WithdrawalStrategy::Static;
    int J = 100;
    // vanilla inputs
    double strike = 1.0;
    OptionKind option = OptionKind::call;
    int n_steps = 5;
    double maturity = 10.0; // also used by `bond`
    // mc inputs
    std::int64_t n_paths = 1'000'000;
    std::uint64_t seed = 1;
    bool antithetic = false;
    std::string out_path;
    std::string actions_out;
};

struct ParseError {
    int line = 0; // 0: file-level (e.g. missing key)
    std::string message;
};

struct ParseResult {
    RunConfig config;
    std::vector<ParseError> errors;
    bool ok() const { return errors.empty(); }
};

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && end != s.c_str();
}

inline bool parse_int(const std::string& s, long long& out) {
    char* end = nullptr;
    out = std::strtoll(s.c_str(), &end, 10);
    return end && *end == '\0' && end != s.c_str();
}

} // namespace detail

// key=value configuration, '#' comments, unknown keys rejected.  All module
// invariants are revalidated; every error carries its line number.
inline ParseResult parse_config(const std::string& text) {
    ParseResult res;
    RunConfig& c = res.config;
    c.contract.alpha = 0.006;
    c.contract.beta = 0.1;

    static const char* required_keys[] = {"sigma_s", "rho",     "kappa",   "theta",
                                          "sigma_r", "s0",      "r0",      "premium",
                                          "maturity", "withdrawals_per_year"};
    std::map<std::string, bool> seen;
    for (const char* k : required_keys) seen[k] = false;

    auto err = [&res](int line, const std::string& m) { res.errors.push_back({line, m}); };

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            err(line_no, "expected key=value, got '" + line + "'");
            continue;
        }
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b2 = s.find_first_not_of(" \t");
            const auto e2 = s.find_last_not_of(" \t");
            s = (b2 == std::string::npos) ? "" : s.substr(b2, e2 - b2 + 1);
        };
        trim(key);
        trim(val);
        if (seen.count(key)) seen[key] = true;

        double d = 0.0;
        long long n = 0;
        auto want_double = [&](double& target, double lo, double hi, const char* range_msg) {
            if (!detail::parse_double(val, d)) {
                err(line_no, key + ": not a number: '" + val + "'");
            } else if (d < lo || d > hi) {
                err(line_no, key + " " + range_msg + " at line " + std::to_string(line_no));
            } else {
                target = d;
            }
        };
        auto want_int = [&](auto& target, long long lo, long long hi, const char* range_msg) {
            if (!detail::parse_int(val, n)) {
                err(line_no, key + ": not an integer: '" + val + "'");
            } else if (n < lo || n > hi) {
                err(line_no, key + " " + range_msg + " at line " + std::to_string(line_no));
            } else {
                target = static_cast<std::remove_reference_t<decltype(target)>>(n);
            }
        };

        if (key == "sigma_s") want_double(c.params.sigma_S, 1e-12, 10.0, "out of (0, 10]");
        else if (key == "rho") want_double(c.params.rho, -1.0, 1.0, "out of [-1,1]");
        else if (key == "kappa") want_double(c.params.kappa, 1e-12, 100.0, "out of (0, 100]");
        else if (key == "theta") want_double(c.params.theta, -1.0, 1.0, "out of [-1, 1]");
        else if (key == "sigma_r") want_double(c.params.sigma_r, 0.0, 10.0, "out of [0, 10]");
        else if (key == "s0") want_double(c.params.S0, 1e-12, 1e12, "must be > 0");
        else if (key == "r0") want_double(c.params.r0, -1.0, 1.0, "out of [-1, 1]");
        else if (key == "premium") want_double(c.contract.premium, 1e-12, 1e12, "must be > 0");
        else if (key == "maturity") {
            want_double(c.contract.T, 1e-12, 200.0, "out of (0, 200]");
            c.maturity = c.contract.T;
        } else if (key == "withdrawals_per_year") want_int(c.contract.Nw, 1, 366, "out of [1, 366]");
        else if (key == "alpha") want_double(c.contract.alpha, 0.0, 1.0, "out of [0, 1]");
        else if (key == "alpha_bp") {
            if (!detail::parse_double(val, d)) err(line_no, "alpha_bp: not a number: '" + val + "'");
            else if (d < 0.0 || d > 10000.0) err(line_no, "alpha_bp out of [0, 10000] at line " + std::to_string(line_no));
            else c.contract.alpha = d * 1e-4;
        } else if (key == "beta") want_double(c.contract.beta, 0.0, 1.0, "out of [0,1]");
        else if (key == "m_nodes") want_int(c.spec.M, 4, 100000, "out of [4, 100000]");
        else if (key == "k_nodes") want_int(c.spec.K, 3, 100000, "out of [3, 100000]");
        else if (key == "q1") want_int(c.spec.q1, 1, 64, "out of [1, 64]");
        else if (key == "q2") want_int(c.spec.q2, 1, 64, "out of [1, 64]");
        else if (key == "n_dt") want_int(c.spec.N_dt, 1, 10000, "out of [1, 10000]");
        else if (key == "n_sd") want_double(c.spec.n_sd, 1.0, 40.0, "out of [1, 40]");
        else if (key == "threads") want_int(c.spec.threads, 0, 4096, "out of [0, 4096]");
        else if (key == "j_levels") want_int(c.J, 2, 100000, "out of [2, 100000]");
        else if (key == "n_steps") want_int(c.n_steps, 1, 100000, "out of [1, 100000]");
        else if (key == "strike") want_double(c.strike, 1e-12, 1e12, "must be > 0");
        else if (key == "n_paths") {
            long long np = 0;
            if (!detail::parse_int(val, np) || np < 2) err(line_no, "n_paths: need an integer >= 2");
            else c.n_paths = np;
        } else if (key == "seed") {
            long long sd = 0;
            if (!detail::parse_int(val, sd) || sd < 0) err(line_no, "seed: need a nonnegative integer");
            else c.seed = static_cast<std::uint64_t>(sd);
        } else if (key == "antithetic") {
            if (val == "true" || val == "1") c.antithetic = true;
            else if (val == "false" || val == "0") c.antithetic = false;
            else err(line_no, "antithetic: expected true/false");
        } else if (key == "option") {
            if (val == "call") c.option = OptionKind::call;
            else if (val == "put") c.option = OptionKind::put;
            else err(line_no, "option: expected call or put");
        } else if (key == "quad_map") {
            if (val == "rotation") c.spec.map = QuadMap::rotation;
            else if (val == "cholesky") c.spec.map = QuadMap::cholesky;
            else err(line_no, "quad_map: expected rotation or cholesky");
        } else if (key == "mesh") {
            if (val == "coarse") { const int th = c.spec.threads; const QuadMap mp = c.spec.map; c.spec = GridSpec::coarse(); c.spec.threads = th; c.spec.map = mp; }
            else if (val == "fine") { const int th = c.spec.threads; const QuadMap mp = c.spec.map; c.spec = GridSpec::fine(); c.spec.threads = th; c.spec.map = mp; }
            else err(line_no, "mesh: expected coarse or fine");
        } else if (key == "mode") {
            if (val == "vanilla") c.mode = RunMode::vanilla;
            else if (val == "bond") c.mode = RunMode::bond;
            else if (val == "static") { c.mode = RunMode::price_static; c.strategy = WithdrawalStrategy::Static; c.rate = RateModel::Stochastic; }
            else if (val == "dynamic") { c.mode = RunMode::price_dynamic; c.strategy = WithdrawalStrategy::Dynamic; c.rate = RateModel::Stochastic; }
            else if (val == "deterministic") c.rate = RateModel::Deterministic;
            else if (val == "fair-fee") c.mode = RunMode::fair_fee;
            else if (val == "mc") c.mode = RunMode::mc;
            else err(line_no, "mode: expected vanilla|bond|static|dynamic|deterministic|fair-fee|mc");
        } else if (key == "strategy") {
            if (val == "static") c.strategy = WithdrawalStrategy::Static;
            else if (val == "dynamic") c.strategy = WithdrawalStrategy::Dynamic;
            else err(line_no, "strategy: expected static or dynamic");
        } else if (key == "out") c.out_path = val;
        else if (key == "actions_out") c.actions_out = val;
        else err(line_no, "unknown key '" + key + "'");
    }

    for (const char* k : required_keys)
        if (!seen[k]) err(0, std::string("missing required key '") + k + "'");

    if (res.ok()) {
        try {
            c.params.validate();
            c.contract.validate();
            c.spec.validate();
        } catch (const std::exception& ex) {
            err(0, ex.what());
        }
    }
    return res;
}

} // namespace gmwb
