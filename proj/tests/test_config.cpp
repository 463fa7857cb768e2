#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gmwb/config.hpp"
#include "gmwb/runner.hpp"

using namespace gmwb;

namespace {

const char* table3_cfg =
    "# Table 3 baseline\n"
    "sigma_s = 0.2\n"
    "rho = 0.0\n"
    "kappa = 0.0349\n"
    "theta = 0.05\n"
    "sigma_r = 0.02\n"
    "s0 = 1.0\n"
    "r0 = 0.05\n"
    "premium = 1.0\n"
    "maturity = 10\n"
    "withdrawals_per_year = 4\n"
    "alpha = 0.006\n"
    "beta = 0.1\n";

} // namespace

TEST_CASE("config parses the baseline parameter set", "[config]") {
    const ParseResult r = parse_config(table3_cfg);
    REQUIRE(r.ok());
    CHECK(r.config.params.sigma_S == 0.2);
    CHECK(r.config.params.kappa == 0.0349);
    CHECK(r.config.contract.T == 10.0);
    CHECK(r.config.contract.Nw == 4);
    CHECK(r.config.contract.alpha == 0.006);
}

TEST_CASE("config rejects out-of-range values with line numbers", "[config]") {
    std::string text = table3_cfg;
    text += "rho = 1.5\n"; // line 14
    const ParseResult r = parse_config(text);
    REQUIRE_FALSE(r.ok());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line == 14);
    CHECK(r.errors[0].message.find("rho out of [-1,1]") != std::string::npos);
    CHECK(r.errors[0].message.find("line 14") != std::string::npos);
}

TEST_CASE("empty config lists every missing required key", "[config]") {
    const ParseResult r = parse_config("");
    REQUIRE_FALSE(r.ok());
    CHECK(r.errors.size() == 10);
    std::string all;
    for (const auto& e : r.errors) all += e.message + ";";
    for (const char* key : {"sigma_s", "rho", "kappa", "theta", "sigma_r", "s0", "r0", "premium",
                            "maturity", "withdrawals_per_year"})
        CHECK(all.find(key) != std::string::npos);
}

TEST_CASE("config rejects unknown keys and malformed lines", "[config]") {
    std::string text = table3_cfg;
    text += "frobnicate = 3\nnot a key value pair\n";
    const ParseResult r = parse_config(text);
    REQUIRE_FALSE(r.ok());
    REQUIRE(r.errors.size() == 2);
    CHECK(r.errors[0].message.find("unknown key 'frobnicate'") != std::string::npos);
    CHECK(r.errors[0].line == 14);
    CHECK(r.errors[1].line == 15);
}

TEST_CASE("config mode and mesh selections", "[config]") {
    std::string text = table3_cfg;
    text += "mode = dynamic\nmesh = coarse\nquad_map = cholesky\nj_levels = 81\nseed = 17\n";
    const ParseResult r = parse_config(text);
    REQUIRE(r.ok());
    CHECK(r.config.mode == RunMode::price_dynamic);
    CHECK(r.config.strategy == WithdrawalStrategy::Dynamic);
    CHECK(r.config.spec.M == 50);
    CHECK(r.config.spec.q1 == 5);
    CHECK(r.config.spec.map == QuadMap::cholesky);
    CHECK(r.config.J == 81);
    CHECK(r.config.seed == 17);
}

TEST_CASE("csv output is byte-stable across runs", "[config][csv]") {
    CsvTable t;
    t.header = {"a", "b"};
    t.rows.push_back({csv_num(1.0 / 3.0), csv_num(1234.56789012345)});
    t.rows.push_back({csv_num(-2.5e-7), csv_num(0.0)});
    std::ostringstream s1, s2;
    t.write(s1);
    t.write(s2);
    CHECK(s1.str() == s2.str());
    CHECK(s1.str() == "a,b\n0.3333333333,1234.56789\n-2.5e-07,0\n");
}

TEST_CASE("run dispatch covers bond and vanilla modes", "[config][runner]") {
    ParseResult r = parse_config(table3_cfg);
    REQUIRE(r.ok());
    RunConfig cfg = r.config;
    cfg.mode = RunMode::bond;
    cfg.maturity = 1.0;
    CHECK(run(cfg) == 0);

    cfg.mode = RunMode::vanilla;
    cfg.strike = 0.95;
    cfg.n_steps = 2;
    cfg.spec = GridSpec::coarse();
    cfg.out_path = "test_vanilla_out.csv";
    CHECK(run(cfg) == 0);
    std::ifstream f(cfg.out_path);
    REQUIRE(f.good());
    std::string header;
    std::getline(f, header);
    CHECK(header == "kind,strike,maturity,fee,ghqc,closed_form,rel_err");
    std::remove(cfg.out_path.c_str());
}
