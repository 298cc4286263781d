#include "asclt/config.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>

namespace asclt::config {

std::uint64_t config_hash(const json& config) {
    const std::string canonical = config.dump();
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string config_hash_hex(const json& config) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, config_hash(config));
    return buf;
}

namespace {

const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(path + "." + key, "missing required field");
    return j.at(key);
}

double require_number(const json& j, const char* key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

std::string require_string(const json& j, const char* key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

}  // namespace

systems::System parse_system(const json& j, const std::string& path) {
    const std::string type = require_string(j, "type", path);
    try {
        if (type == "doubling") return systems::System::doubling();
        if (type == "lsv") return systems::System::lsv(require_number(j, "alpha", path));
        if (type == "bernoulli") {
            const double tau = j.value("tau", 0.5);
            if (j.contains("geometric_q"))
                return systems::System::bernoulli_geometric(j.at("geometric_q").get<double>(),
                                                            tau);
            const auto& probs = require(j, "probs", path);
            if (!probs.is_array()) throw ConfigError(path + ".probs", "expected an array");
            return systems::System::bernoulli(probs.get<std::vector<double>>(), tau);
        }
    } catch (const std::invalid_argument& err) {
        throw ConfigError(path, err.what());
    }
    throw ConfigError(path + ".type", "unknown system type '" + type + "'");
}

systems::Observable parse_observable(const json& j, const std::string& path) {
    const std::string type = require_string(j, "type", path);
    const double offset = j.value("offset", 0.0);
    try {
        if (type == "zero") return systems::Observable::zero().with_offset(offset);
        if (type == "constant")
            return systems::Observable::constant(require_number(j, "value", path))
                .with_offset(offset);
        if (type == "locally_constant") {
            const auto& values = require(j, "values", path);
            if (!values.is_array()) throw ConfigError(path + ".values", "expected an array");
            return systems::Observable::locally_constant(values.get<std::vector<double>>())
                .with_offset(offset);
        }
        if (type == "fourier") {
            const auto& coeffs = require(j, "coeffs", path);
            if (!coeffs.is_array()) throw ConfigError(path + ".coeffs", "expected an array");
            std::vector<std::pair<int, double>> cs;
            for (const auto& c : coeffs)
                cs.emplace_back(c.at(0).get<int>(), c.at(1).get<double>());
            return systems::Observable::fourier(std::move(cs)).with_offset(offset);
        }
        if (type == "heavy_tail")
            return systems::Observable::heavy_tail(
                       require_number(j, "p", path), require_number(j, "c1", path),
                       require_number(j, "c2", path), j.value("centered", true))
                .with_offset(offset);
        if (type == "holder") {
            const auto& anchors = require(j, "anchors", path);
            if (!anchors.is_array()) throw ConfigError(path + ".anchors", "expected an array");
            std::vector<std::pair<double, double>> as;
            for (const auto& a : anchors)
                as.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
            return systems::Observable::holder(require_number(j, "gamma", path), std::move(as),
                                               offset);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& err) {
        throw ConfigError(path, err.what());
    }
    throw ConfigError(path + ".type", "unknown observable type '" + type + "'");
}

renorm::SlowVar parse_slow_var(const json& j, const std::string& path) {
    const std::string kind = require_string(j, "kind", path);
    try {
        if (kind == "constant") return renorm::SlowVar::constant(j.value("value", 1.0));
        if (kind == "log_power")
            return renorm::SlowVar::log_power(require_number(j, "exponent", path));
        if (kind == "table")
            return renorm::SlowVar::table(require(j, "grid", path).get<std::vector<double>>(),
                                          require(j, "values", path).get<std::vector<double>>());
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& err) {
        throw ConfigError(path, err.what());
    }
    throw ConfigError(path + ".kind", "unknown slow-variation kind '" + kind + "'");
}

renorm::RenormSeq parse_renorm(const json& j, const std::string& path) {
    const double d = require_number(j, "d", path);
    auto L = j.contains("L") ? parse_slow_var(j.at("L"), path + ".L")
                             : renorm::SlowVar::constant(1.0);
    try {
        return renorm::RenormSeq(d, std::move(L));
    } catch (const std::invalid_argument& err) {
        throw ConfigError(path + ".d", err.what());
    }
}

laws::TargetLaw parse_law(json& j, const std::string& path) {
    const std::string type = require_string(j, "type", path);
    try {
        if (type == "gaussian")
            return laws::TargetLaw::gaussian(require_number(j, "sigma2", path));
        if (type == "dirac0") return laws::TargetLaw::dirac0();
        if (type == "stable")
            return laws::TargetLaw::stable(require_number(j, "p", path),
                                           require_number(j, "c", path),
                                           require_number(j, "beta", path));
        if (type == "from_tails") {
            const auto law = laws::stable_from_tails(require_number(j, "p", path),
                                                     require_number(j, "c1", path),
                                                     require_number(j, "c2", path));
            j["resolved"] = {{"p", law.p()}, {"c", law.c()}, {"beta", law.beta()}};
            return law;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& err) {
        throw ConfigError(path, err.what());
    }
    throw ConfigError(path + ".type", "unknown law type '" + type + "'");
}

bool is_known_kind(const std::string& kind) {
    static const std::array<const char*, 12> kinds = {
        "ClassicalCLT", "StableLimit",     "ASCLT",       "TightMaxima",
        "Inducing",     "ASCLTInducing",   "Spectral",    "EigenConvergence",
        "Gordin",       "ReverseMDASCLT",  "RandomIndex", "WeightedLogAvg"};
    for (const char* k : kinds)
        if (kind == k) return true;
    return false;
}

void validate_config(const json& config) {
    if (!config.is_object()) throw ConfigError("", "config must be a JSON object");
    if (!config.contains("name") || !config.at("name").is_string())
        throw ConfigError("name", "missing experiment name");
    const std::string kind = require_string(config, "kind", "");
    if (!is_known_kind(kind)) throw ConfigError("kind", "unknown experiment kind '" + kind + "'");
    if (!config.contains("base_seed") || !config.at("base_seed").is_number())
        throw ConfigError("base_seed", "missing base seed");

    if (config.contains("system")) (void)parse_system(config.at("system"));
    if (config.contains("observable")) (void)parse_observable(config.at("observable"));
    if (config.contains("renorm")) (void)parse_renorm(config.at("renorm"));
    if (config.contains("law")) {
        json law = config.at("law");
        (void)parse_law(law);
    }

    // cross-field checks
    if (kind == "StableLimit") {
        if (!config.contains("iid") || config.at("iid").value("type", "") != "pareto")
            throw ConfigError("iid.type",
                              "StableLimit requires a condition-III (pareto) source");
    }
    if (kind == "ClassicalCLT" || kind == "RandomIndex" ||
        (kind == "Inducing" && config.value("mode", "lift") == "lift")) {
        if (!config.contains("n")) throw ConfigError("n", "missing horizon");
    }
    if (kind == "ASCLT" || kind == "ASCLTInducing" || kind == "ReverseMDASCLT" ||
        kind == "WeightedLogAvg") {
        if (!config.contains("N")) throw ConfigError("N", "missing log-average horizon");
        if (!config.contains("seeds")) throw ConfigError("seeds", "missing seed count");
    }
}

}  // namespace asclt::config
