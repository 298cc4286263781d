#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "asclt/experiments.hpp"
#include "asclt/parallel.hpp"

using namespace asclt;
using experiments::json;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("asclt_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config validation reports the failing field") {
    json cfg = presets::by_name("smoke_asclt_zero");
    cfg["law"] = {{"type", "gaussian"}};  // missing sigma2
    try {
        (void)experiments::run_experiment(cfg, 1);
        FAIL("expected ConfigError");
    } catch (const config::ConfigError& err) {
        CHECK(err.field == "law.sigma2");
    }

    json bad_kind = presets::by_name("smoke_asclt_zero");
    bad_kind["kind"] = "Nonsense";
    CHECK_THROWS_AS((void)experiments::run_experiment(bad_kind, 1), config::ConfigError);

    json bad_stable = presets::by_name("c01_stable_iid_clt");
    bad_stable["iid"]["type"] = "gaussian";
    CHECK_THROWS_AS((void)experiments::run_experiment(bad_stable, 1), config::ConfigError);
}

TEST_CASE("zero-observable preset runs clean and exits pass") {
    auto result = experiments::run_experiment(presets::by_name("smoke_asclt_zero"), 2);
    CHECK(result.pass());
    REQUIRE(!result.assertions.empty());
    CHECK(result.assertions.front().value == doctest::Approx(0.0));
}

TEST_CASE("bundles embed the config hash and reports consume them") {
    const auto dir = temp_dir("bundle");
    auto result = experiments::run_experiment(presets::by_name("smoke_asclt_zero"), 2);
    experiments::write_bundle(result, dir);

    const auto bundle = dir / "smoke_asclt_zero";
    CHECK(std::filesystem::exists(bundle / "config.json"));
    CHECK(std::filesystem::exists(bundle / "summary.json"));
    CHECK(std::filesystem::exists(bundle / "ks_by_seed.csv"));
    const std::string csv = slurp(bundle / "ks_by_seed.csv");
    CHECK(csv.find("# config_hash=" + result.hash) == 0);

    std::ostringstream report_out;
    CHECK(experiments::report(dir, report_out) == 0);
    CHECK(report_out.str().find("smoke_asclt_zero") != std::string::npos);
    CHECK(report_out.str().find("FAIL") == std::string::npos);
    CHECK(std::filesystem::exists(dir / "report.csv"));
}

TEST_CASE("report refuses bundles with mismatched hashes") {
    const auto dir = temp_dir("mismatch");
    auto result = experiments::run_experiment(presets::by_name("smoke_asclt_zero"), 2);
    experiments::write_bundle(result, dir);
    {
        std::ofstream f(dir / "smoke_asclt_zero" / "ks_by_seed.csv");
        f << "# config_hash=0000000000000000\nseed,N,ks\n";
    }
    std::ostringstream report_out;
    CHECK(experiments::report(dir, report_out) == 1);
    CHECK(report_out.str().find("CONFIG_HASH_MISMATCH") != std::string::npos);
}

TEST_CASE("report of an empty directory is a header-only table") {
    const auto dir = temp_dir("empty");
    std::ostringstream report_out;
    CHECK(experiments::report(dir, report_out) == 0);
    CHECK(report_out.str() ==
          "experiment,statistic,value,tolerance,relation,pass,runtime_s,seed\n");
}

TEST_CASE("identical config and seed give bit-identical csv output") {
    const auto dir_a = temp_dir("det_a");
    const auto dir_b = temp_dir("det_b");
    auto first = experiments::run_experiment(presets::by_name("smoke_asclt_zero"), 1);
    auto second = experiments::run_experiment(presets::by_name("smoke_asclt_zero"), 4);
    experiments::write_bundle(first, dir_a);
    experiments::write_bundle(second, dir_b);
    CHECK(slurp(dir_a / "smoke_asclt_zero" / "ks_by_seed.csv") ==
          slurp(dir_b / "smoke_asclt_zero" / "ks_by_seed.csv"));
}

TEST_CASE("presets cover every acceptance scenario and validate") {
    const auto presets_list = presets::all();
    CHECK(presets_list.size() >= 18);
    for (const auto& [name, cfg] : presets_list) {
        CAPTURE(name);
        CHECK_NOTHROW(config::validate_config(cfg));
    }
    CHECK_THROWS_AS((void)presets::by_name("nope"), std::out_of_range);
}

TEST_CASE("config hash is stable and order-insensitive") {
    json a = {{"x", 1}, {"y", 2}};
    json b = {{"y", 2}, {"x", 1}};
    CHECK(config::config_hash_hex(a) == config::config_hash_hex(b));
    json c = a;
    c["x"] = 3;
    CHECK(config::config_hash_hex(a) != config::config_hash_hex(c));
}

TEST_SUITE_END();
