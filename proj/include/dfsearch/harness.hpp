#pragma once

#include "dfsearch/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dfsearch {

/// Runs `curves`, `simulate` or `stein-check` with `config`, writing CSVs
/// (and SVGs when svg=true) plus resolved-config.txt into `out_dir`.
/// All configuration is validated before any computation starts.
/// Returns the written files in order.
std::vector<std::filesystem::path> run_command(const std::string& command, Config& config,
                                               const std::filesystem::path& out_dir);

}  // namespace dfsearch
