#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gmwb/config.hpp"
#include "gmwb/contract.hpp"
#include "gmwb/engine.hpp"
#include "gmwb/mc.hpp"
#include "gmwb/vanilla.hpp"

namespace gmwb {

// CSV cells carry 10 significant digits so reruns diff byte-for-byte.
inline std::string csv_num(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& os) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            os << header[i] << (i + 1 < header.size() ? "," : "\n");
        for (const auto& row : rows)
            for (std::size_t i = 0; i < row.size(); ++i)
                os << row[i] << (i + 1 < row.size() ? "," : "\n");
    }

    bool write_file(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) return false;
        write(f);
        return static_cast<bool>(f);
    }
};

inline void emit_csv(const CsvTable& t, const std::string& path) {
    if (path.empty()) return;
    if (!t.write_file(path)) throw std::runtime_error("cannot write CSV file: " + path);
}

// Baseline inputs of the GMWB experiments (sigma_S = 20%, sigma_r = 2%,
// kappa = 0.0349, theta = r0 = 5%, g = 10%, quarterly withdrawals).
inline RunConfig paper_baseline() {
    RunConfig c;
    c.params = {0.2, 0.0, 0.0349, 0.05, 0.02, 1.0, 0.05};
    c.contract.premium = 1.0;
    c.contract.T = 10.0;
    c.contract.Nw = 4;
    c.contract.alpha = 0.006;
    c.contract.beta = 0.1;
    c.maturity = 10.0;
    return c;
}

namespace detail {

inline GridSpec with_runtime(GridSpec s, const GridSpec& from) {
    s.threads = from.threads;
    s.map = from.map;
    return s;
}

} // namespace detail

inline int run_vanilla(const RunConfig& cfg) {
    const double ghqc = price_european(cfg.params, cfg.strike, cfg.option, cfg.maturity,
                                       cfg.n_steps, cfg.spec, cfg.contract.alpha);
    const double cf = vanilla_price(cfg.params, cfg.strike, cfg.maturity, cfg.option,
                                    cfg.contract.alpha);
    std::printf("vanilla %s: ghqc=%.8f closed_form=%.8f rel_err=%.3e\n",
                cfg.option == OptionKind::call ? "call" : "put", ghqc, cf,
                std::abs(ghqc - cf) / cf);
    CsvTable t;
    t.header = {"kind", "strike", "maturity", "fee", "ghqc", "closed_form", "rel_err"};
    t.rows.push_back({cfg.option == OptionKind::call ? "call" : "put", csv_num(cfg.strike),
                      csv_num(cfg.maturity), csv_num(cfg.contract.alpha), csv_num(ghqc),
                      csv_num(cf), csv_num(std::abs(ghqc - cf) / cf)});
    emit_csv(t, cfg.out_path);
    return 0;
}

inline int run_bond(const RunConfig& cfg) {
    const double pb = bond_price(cfg.params, cfg.params.r0, 0.0, cfg.maturity);
    std::printf("bond P(0,%g) = %.10f\n", cfg.maturity, pb);
    CsvTable t;
    t.header = {"maturity", "r0", "price"};
    t.rows.push_back({csv_num(cfg.maturity), csv_num(cfg.params.r0), csv_num(pb)});
    emit_csv(t, cfg.out_path);
    return 0;
}

inline void export_actions(const RunConfig& cfg, const DynamicResult& res) {
    if (cfg.actions_out.empty() || res.actions.empty()) return;
    CsvTable t;
    t.header = {"date", "j", "k", "m", "withdrawal_steps"};
    const int K = cfg.spec.K, M = cfg.spec.M;
    for (std::size_t di = 0; di < res.actions.size(); ++di) {
        const auto& a = res.actions[di];
        for (int j = 0; j < cfg.J; ++j)
            for (int k = 0; k <= K; ++k)
                for (int m = 0; m <= M; ++m) {
                    const std::uint16_t d =
                        a[(static_cast<std::size_t>(j) * (K + 1) + k) * (M + 1) + m];
                    if (d == 0) continue; // only non-trivial actions keep the file tractable
                    t.rows.push_back({std::to_string(res.action_dates[di]), std::to_string(j),
                                      std::to_string(k), std::to_string(m), std::to_string(d)});
                }
    }
    emit_csv(t, cfg.actions_out);
}

inline int run_price(const RunConfig& cfg) {
    double price = 0.0;
    const char* label = nullptr;
    if (cfg.rate == RateModel::Deterministic) {
        price = price_deterministic_rate(cfg.params, cfg.contract, cfg.spec, cfg.strategy, cfg.J);
        label = cfg.strategy == WithdrawalStrategy::Static ? "deterministic static"
                                                           : "deterministic dynamic";
    } else if (cfg.strategy == WithdrawalStrategy::Static) {
        price = price_static(cfg.params, cfg.contract, cfg.spec);
        label = "static";
    } else {
        const bool record = !cfg.actions_out.empty();
        const DynamicResult res = price_dynamic(cfg.params, cfg.contract, cfg.spec, cfg.J, record);
        export_actions(cfg, res);
        price = res.price;
        label = "dynamic";
    }
    std::printf("%s price (alpha=%g) = %.8f\n", label, cfg.contract.alpha, price);
    CsvTable t;
    t.header = {"mode", "alpha_bp", "rho", "price"};
    t.rows.push_back({label, csv_num(cfg.contract.alpha * 1e4), csv_num(cfg.params.rho),
                      csv_num(price)});
    emit_csv(t, cfg.out_path);
    return 0;
}

inline int run_fair_fee(const RunConfig& cfg) {
    const auto res = fair_fee(cfg.params, cfg.contract, cfg.spec, cfg.strategy, cfg.rate, cfg.J);
    if (!res) {
        std::fprintf(stderr, "fair-fee: no solution (price at alpha=0 is below the premium)\n");
        return 1;
    }
    std::printf("fair fee = %.2f bp (%d price evaluations)\n", res->alpha * 1e4, res->evaluations);
    CsvTable t;
    t.header = {"strategy", "rate_model", "rho", "fair_fee_bp"};
    t.rows.push_back({cfg.strategy == WithdrawalStrategy::Static ? "static" : "dynamic",
                      cfg.rate == RateModel::Stochastic ? "stochastic" : "deterministic",
                      csv_num(cfg.params.rho), csv_num(res->alpha * 1e4)});
    emit_csv(t, cfg.out_path);
    return 0;
}

inline int run_mc(const RunConfig& cfg) {
    MCConfig mc;
    mc.n_paths = cfg.n_paths;
    mc.seed = cfg.seed;
    mc.antithetic = cfg.antithetic;
    mc.threads = cfg.spec.threads;
    const MCResult res = mc_price_static(cfg.params, cfg.contract, mc);
    std::printf("mc static price = %.6f (se %.2e, %lld paths, %.2f s)\n", res.price, res.std_error,
                static_cast<long long>(res.n_paths), res.wall_seconds);
    CsvTable t;
    t.header = {"rho", "alpha_bp", "price", "std_error", "n_paths"};
    t.rows.push_back({csv_num(cfg.params.rho), csv_num(cfg.contract.alpha * 1e4),
                      csv_num(res.price), csv_num(res.std_error),
                      std::to_string(res.n_paths)});
    emit_csv(t, cfg.out_path);
    return 0;
}

// The published experiment grids.  Table 1/2 benchmark options on the fee-
// dragged wealth account with a 200 bp fee; the remaining tables use the
// GMWB baseline above.
inline int run_reproduce_table(int table, const RunConfig& base) {
    RunConfig cfg = paper_baseline();
    cfg.spec = base.spec;
    cfg.spec.threads = base.spec.threads;
    cfg.n_paths = base.n_paths;
    cfg.seed = base.seed;
    std::string out = base.out_path;

    CsvTable t;
    if (table == 1 || table == 2) {
        const OptionKind kind = table == 1 ? OptionKind::call : OptionKind::put;
        const double fee = 0.02, strike = 0.95, T = 1.0;
        GridSpec spec = detail::with_runtime(GridSpec::vanilla_bench(), base.spec);
        t.header = {"sigma_r", "rho", "closed_form", "ghqc", "rel_err"};
        for (double sr : {0.01, 0.03}) {
            for (double rho : {-0.2, 0.0, 0.2}) {
                ModelParams p = cfg.params;
                p.sigma_r = sr;
                p.rho = rho;
                const double cf = vanilla_price(p, strike, T, kind, fee);
                const double gh = price_european(p, strike, kind, T, 5, spec, fee);
                t.rows.push_back({csv_num(sr), csv_num(rho), csv_num(cf), csv_num(gh),
                                  csv_num(std::abs(gh - cf) / cf)});
                std::printf("sigma_r=%.2f rho=%+.1f closed=%.6f ghqc=%.6f (%.3f%%)\n", sr, rho, cf,
                            gh, 100.0 * std::abs(gh - cf) / cf);
            }
        }
        if (out.empty()) out = table == 1 ? "table1.csv" : "table2.csv";
    } else if (table == 3) {
        t.header = {"rho", "mc_price", "mc_se", "ghqc_coarse", "ghqc_fine"};
        for (double rho : {-0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6}) {
            RunConfig c = cfg;
            c.params.rho = rho;
            MCConfig mccfg{c.n_paths, c.seed, false, c.spec.threads};
            const MCResult mr = mc_price_static(c.params, c.contract, mccfg);
            const double coarse = price_static(c.params, c.contract,
                                               detail::with_runtime(GridSpec::coarse(), base.spec));
            const double fine = price_static(c.params, c.contract,
                                             detail::with_runtime(GridSpec::fine(), base.spec));
            t.rows.push_back({csv_num(rho), csv_num(mr.price), csv_num(mr.std_error),
                              csv_num(coarse), csv_num(fine)});
            std::printf("rho=%+.1f mc=%.6f (%.1e) coarse=%.6f fine=%.6f\n", rho, mr.price,
                        mr.std_error, coarse, fine);
        }
        if (out.empty()) out = "table3.csv";
    } else if (table == 4 || table == 5) {
        const double rho = table == 4 ? 0.3 : -0.3;
        t.header = {"alpha_bp", "mc_price", "mc_se", "ghqc_fine"};
        for (int bp = 0; bp <= 200; bp += 25) {
            RunConfig c = cfg;
            c.params.rho = rho;
            c.contract.alpha = bp * 1e-4;
            MCConfig mccfg{c.n_paths, c.seed, false, c.spec.threads};
            const MCResult mr = mc_price_static(c.params, c.contract, mccfg);
            const double fine = price_static(c.params, c.contract,
                                             detail::with_runtime(GridSpec::fine(), base.spec));
            t.rows.push_back({std::to_string(bp), csv_num(mr.price), csv_num(mr.std_error),
                              csv_num(fine)});
            std::printf("alpha=%3d bp mc=%.6f (%.1e) ghqc=%.6f\n", bp, mr.price, mr.std_error,
                        fine);
        }
        if (out.empty()) out = table == 4 ? "table4.csv" : "table5.csv";
    } else if (table == 6) {
        t.header = {"alpha_bp", "ghqc_rho_m03", "ghqc_rho_p03"};
        const GridSpec spec = detail::with_runtime(GridSpec::fine(), base.spec);
        for (int bp = 0; bp <= 200; bp += 25) {
            RunConfig c = cfg;
            c.contract.alpha = bp * 1e-4;
            c.params.rho = -0.3;
            const double pm = price_dynamic(c.params, c.contract, spec, 100).price;
            c.params.rho = 0.3;
            const double pp = price_dynamic(c.params, c.contract, spec, 100).price;
            t.rows.push_back({std::to_string(bp), csv_num(pm), csv_num(pp)});
            std::printf("alpha=%3d bp dynamic rho=-0.3: %.5f  rho=+0.3: %.5f\n", bp, pm, pp);
        }
        if (out.empty()) out = "table6.csv";
    } else {
        std::fprintf(stderr, "reproduce: table must be 1..6\n");
        return 2;
    }
    emit_csv(t, out);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

// Price-versus-fee ladders under optimal withdrawals: stochastic rate at
// rho = +/-0.3 and the deterministic-rate curve.
inline int run_reproduce_figure2(const RunConfig& base) {
    RunConfig cfg = paper_baseline();
    const GridSpec spec = detail::with_runtime(GridSpec::fine(), base.spec);
    CsvTable t;
    t.header = {"alpha_bp", "dynamic_rho_p03", "dynamic_rho_m03", "dynamic_deterministic"};
    for (int bp = 0; bp <= 200; bp += 25) {
        RunConfig c = cfg;
        c.contract.alpha = bp * 1e-4;
        c.params.rho = 0.3;
        const double pp = price_dynamic(c.params, c.contract, spec, 100).price;
        c.params.rho = -0.3;
        const double pm = price_dynamic(c.params, c.contract, spec, 100).price;
        const double pd =
            price_deterministic_rate(c.params, c.contract, spec, WithdrawalStrategy::Dynamic, 100);
        t.rows.push_back({std::to_string(bp), csv_num(pp), csv_num(pm), csv_num(pd)});
        std::printf("alpha=%3d bp rho=+0.3: %.5f rho=-0.3: %.5f deterministic: %.5f\n", bp, pp, pm,
                    pd);
    }
    const std::string out = base.out_path.empty() ? "figure2.csv" : base.out_path;
    emit_csv(t, out);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

inline int run(const RunConfig& cfg) {
    try {
        switch (cfg.mode) {
            case RunMode::vanilla: return run_vanilla(cfg);
            case RunMode::bond: return run_bond(cfg);
            case RunMode::fair_fee: return run_fair_fee(cfg);
            case RunMode::mc: return run_mc(cfg);
            default: return run_price(cfg);
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}

} // namespace gmwb
