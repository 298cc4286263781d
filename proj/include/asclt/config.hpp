#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "asclt/laws.hpp"
#include "asclt/renorm.hpp"
#include "asclt/systems.hpp"

namespace asclt::config {

using json = nlohmann::json;

/// Config validation failure carrying the offending field path.
struct ConfigError : std::runtime_error {
    ConfigError(std::string field_path, const std::string& what)
        : std::runtime_error("config field '" + field_path + "': " + what),
          field(std::move(field_path)) {}
    std::string field;
};

/// FNV-1a over the canonical (sorted-key) dump; embedded in every artifact.
std::uint64_t config_hash(const json& config);
std::string config_hash_hex(const json& config);

systems::System parse_system(const json& j, const std::string& path = "system");
systems::Observable parse_observable(const json& j, const std::string& path = "observable");
renorm::SlowVar parse_slow_var(const json& j, const std::string& path);
renorm::RenormSeq parse_renorm(const json& j, const std::string& path = "renorm");

/// Parses a law spec; "from_tails" resolves through the tail constants and
/// the resolved (p, c, beta) is written back into the json.
laws::TargetLaw parse_law(json& j, const std::string& path = "law");

/// The experiment kinds the runner understands.
bool is_known_kind(const std::string& kind);

/// Structural validation (cross-field checks included); throws ConfigError.
void validate_config(const json& config);

}  // namespace asclt::config
