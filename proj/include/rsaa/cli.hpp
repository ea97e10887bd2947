// Copyright 2026-present the rsaa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Batch front end: one experiment per process, results under an output
// directory.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "rsaa/io.hpp"

namespace rsaa::cli {

inline constexpr std::string_view kVersion = "0.1.0";

struct ExperimentConfig {
  /// oce | solve | true-value | clt | deviation | bounds | bracket-check
  std::string command;
  /// Resolved problem object (no file references).
  io::json problem = io::json::object();
  io::json params = io::json::object();
  std::optional<std::uint64_t> master_seed;
  std::filesystem::path out_dir;
};

/// Reads an experiment config; "problem" may be an object or a path relative
/// to the config file. Throws ConfigError.
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Parses an in-memory config (e.g. the "config" block of a report).
ExperimentConfig parse_experiment(const io::json& j, const std::filesystem::path& base);

/// The embedded, re-runnable form of a config (out_dir excluded).
io::json resolved_config(const ExperimentConfig& cfg);

/// Runs the command, writes report.json and the command's CSVs into
/// cfg.out_dir, and returns the report.
io::json execute(const ExperimentConfig& cfg);

/// 0 ok, 2 config / parameter error, 3 numerical error, 4 refusal, 1 other.
int exit_code_for(const std::exception_ptr& e);

/// Flags: [command] --config <path> [--seed <u64>] [--threads <n>] [--out <dir>].
/// RISK_SAA_THREADS is the fallback for --threads.
int run(int argc, char** argv);

}  // namespace rsaa::cli
