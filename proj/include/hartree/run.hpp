#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hartree/config.hpp"

namespace hartree {

inline constexpr const char* kVersion = "0.1.0";

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Executes the configured experiment, writing every artifact under
/// config.output_dir plus manifest.json. `config_bytes` is the raw config
/// file, hashed into the manifest when non-empty. Returns the process exit
/// status: 0 on success, 1 when a lemma check fails.
int run(const RunConfig& config, std::ostream& log, const std::string& config_bytes = {});

}  // namespace hartree
