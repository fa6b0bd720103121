#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "toric/io.hpp"

namespace toric::cli {

constexpr const char* kToolName = "toric-extremal";
constexpr const char* kVersion = "1.0.0";

const std::vector<std::string>& commands();

struct JobConfig {
  std::string command;
  io::Json spec;  // the config file as read, command key included
  std::uint64_t seed = 0;
};

// validates the command name and the generic fields (tolerances positive, known keys typed right)
JobConfig parse_job(const io::Json& spec, const std::string& command);

// runs one job, writes tables and plot data into out, returns the results payload
io::Json run(const JobConfig& job, const std::filesystem::path& out);

// full report: inputs echo, results, constants with provenance, version, wall time
io::Json run_report(const JobConfig& job, const std::filesystem::path& out);

// machine readable error object for stderr
io::Json error_json(const std::string& kind, const std::string& message, int exit_code);

// argv front door; returns the process exit code
int main(int argc, char** argv);

}  // namespace toric::cli
