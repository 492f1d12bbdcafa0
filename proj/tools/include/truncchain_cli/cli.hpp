#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace truncchain::cli {

enum ExitCode : int { kOk = 0, kVerdictFail = 1, kConfigError = 2 };

inline const std::vector<std::string>& experiments() {
  static const std::vector<std::string> names{"chain-info", "estimate",  "bias-sweep", "clt-test",
                                              "oscillation", "necessity", "lemma21"};
  return names;
}

struct Options {
  std::string experiment;
  std::string config_path;
  /// Overrides the config's "seed".
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

/// Runs one experiment and writes <out>/<experiment>.csv and
/// <out>/<experiment>.json. Progress and the verdict go to `out`,
/// diagnostics to `err`.
int run(const Options& options, std::ostream& out, std::ostream& err);

/// Checks a config without running anything. Prints "OK" plus derived
/// quantities, one line per diagnostic otherwise. Keys are checked against the
/// config's "experiment" entry when it has one. Returns kOk or kConfigError.
int validate(const std::string& config_path, std::ostream& out, std::ostream& err);

/// Command-line entry point: `truncchain <experiment> --config <path>
/// [--seed N] [--out DIR]` or `truncchain validate --config <path>`.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace truncchain::cli
