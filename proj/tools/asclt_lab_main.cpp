#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "asclt/experiments.hpp"
#include "asclt/parallel.hpp"

namespace {

asclt::experiments::json load_config(const std::string& spec) {
    namespace fs = std::filesystem;
    if (fs::exists(spec)) {
        std::ifstream f(spec);
        asclt::experiments::json cfg;
        f >> cfg;
        return cfg;
    }
    return asclt::presets::by_name(spec);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asclt-lab: almost-sure limit theorem experiments for dynamical systems"};
    app.require_subcommand(1);

    std::string config_spec;
    std::string out_dir = "out";
    int threads = asclt::default_threads();

    auto* run = app.add_subcommand("run", "run one experiment config (file path or preset name)");
    run->add_option("config", config_spec, "config file or preset name")->required();
    run->add_option("--threads", threads, "worker threads");
    run->add_option("--out", out_dir, "output directory");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "consolidate result bundles into a table");
    report->add_option("dir", report_dir, "directory holding result bundles")->required();

    std::string presets_out;
    auto* presets = app.add_subcommand("presets", "list presets or write them to a directory");
    presets->add_option("--out", presets_out, "write every preset as <name>.json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = load_config(config_spec);
            const auto result = asclt::experiments::run_experiment(std::move(cfg), threads);
            asclt::experiments::write_bundle(result, out_dir);
            for (const auto& a : result.assertions)
                std::cout << (a.pass ? "PASS " : "FAIL ") << a.statistic << " = " << a.value
                          << " (" << a.relation << " " << a.tolerance << ")\n";
            std::cout << (result.pass() ? "PASS" : "FAIL") << " "
                      << result.resolved_config.at("name").get<std::string>() << " ["
                      << result.runtime_seconds << " s]\n";
            return result.pass() ? 0 : 1;
        }
        if (*report) {
            return asclt::experiments::report(report_dir, std::cout);
        }
        if (*presets) {
            if (presets_out.empty()) {
                for (const auto& [name, cfg] : asclt::presets::all())
                    std::cout << name << "\n";
            } else {
                std::filesystem::create_directories(presets_out);
                for (const auto& [name, cfg] : asclt::presets::all()) {
                    std::ofstream f(std::filesystem::path(presets_out) / (name + ".json"));
                    f << cfg.dump(2) << "\n";
                }
                std::cout << "wrote " << asclt::presets::all().size() << " presets to "
                          << presets_out << "\n";
            }
            return 0;
        }
    } catch (const asclt::config::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    }
    return 0;
}
