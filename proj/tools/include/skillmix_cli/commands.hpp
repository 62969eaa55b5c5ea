#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skillmix/judge.hpp"
#include "skillmix/provider.hpp"

namespace skillmix::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kValidation = 1, kProviderFailure = 2, kPartialRun = 3 };

/// Parses `args` (without the program name), runs the subcommand and maps
/// failures to exit codes. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Ledger totals and exact cost as written to usage.json.
nlohmann::ordered_json usage_to_json(const Provider& provider);

/// One model output per line: {"id", "instruction"?, "output" or "response"}.
struct ModelOutput {
  std::string id;
  std::string instruction;
  std::string text;
};
std::vector<ModelOutput> read_outputs(const std::filesystem::path& path);

/// Pairs candidate and baseline outputs by id, in baseline order. Every
/// baseline id needs a candidate and the instructions must agree.
std::vector<ComparisonItem> pair_outputs(const std::vector<ModelOutput>& candidate,
                                         const std::vector<ModelOutput>& baseline);

/// Reads epochs.json: a list, or {"epochs": [...]}, of
/// {"epoch", "lc_wr", "raw_wr"?, "validation_loss"?}.
std::vector<EpochScore> read_epoch_table(const std::filesystem::path& path);

}  // namespace skillmix::cli
