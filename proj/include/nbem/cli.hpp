#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nbem/adapt.hpp"

namespace nbem {

/// Everything one command-line run needs: the resolved study, where the
/// results go, and how the configuration was given.
struct RunManifest {
  StudyConfig config;
  std::string csv_path = "convergence.csv";
  std::string summary_path;  // defaults to <csv stem>_summary.txt
  std::string config_path;
  std::string config_text;  // the config file as read
  std::vector<std::string> arguments;
  /// Runs contain no random numbers; identical inputs give identical CSV.
  bool deterministic = true;
};

/// Command-line flags, optionally merged with a `key = value` config file
/// (flags win). Throws InputError for out-of-range values and CLI::ParseError
/// for malformed or unknown flags (including --help).
RunManifest parse_config(int argc, const char* const* argv);

/// Runs the study and writes the CSV, the summary and any requested meshes.
/// Returns 0 on success and 1 if a step failed (the partial CSV is kept).
int execute(const RunManifest& m, std::ostream& log);

/// parse_config + execute with error reporting; the body of main(). Exit
/// codes: 0 success, 1 numerical failure, 2 bad input.
int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace nbem
