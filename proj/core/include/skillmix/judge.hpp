#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skillmix/provider.hpp"
#include "skillmix/templates.hpp"

namespace skillmix {

struct ComparisonItem {
  std::string id;
  std::string instruction;
  std::string candidate;
  std::string baseline;
  /// Unicode code points of candidate and baseline.
  std::size_t candidate_len = 0;
  std::size_t baseline_len = 0;
};

/// Builds an item with consistent lengths. Throws ValidationError on an
/// empty id or text.
ComparisonItem make_item(std::string id, std::string instruction, std::string candidate, std::string baseline);

enum class Preference { kCandidate, kBaseline };

std::string_view to_string(Preference p);
Preference preference_from_string(std::string_view s);

struct Verdict {
  std::string item_id;
  /// Already un-swapped: refers to candidate/baseline, not to A/B.
  Preference preferred = Preference::kCandidate;
  bool swapped = false;
  std::string judge;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

enum class SwapPolicy { kSeeded, kNever, kAlways };

struct JudgeOptions {
  std::uint64_t seed = 0;
  SwapPolicy swap = SwapPolicy::kSeeded;
  double temperature = 0.0;
  int max_output_tokens = 16;
  std::size_t workers = 4;
  /// Defaults to TemplateLibrary::shipped().
  const TemplateLibrary* templates = nullptr;
};

/// Whether the candidate is shown second (as Output (B)). Under the seeded
/// policy this is a fair coin keyed by (seed, item id).
bool presentation_swapped(const std::string& item_id, const JudgeOptions& options);

/// Reads "A" or "B" from a judge reply. Accepts a bare letter with
/// punctuation or markdown around it, "Output (A)", or a reply that opens
/// with the letter followed by a non-letter. Throws ParseError otherwise.
char parse_judge_reply(std::string_view reply);

/// One judge call (task id "judge:<item id>"); an unparsable reply gets one
/// reminder turn before ParseError.
Verdict judge_pair(const ComparisonItem& item, Provider& provider, const JudgeOptions& options = {});

struct JudgeRun {
  /// In item order, judged items only.
  std::vector<Verdict> verdicts;
  /// Ids whose replies stayed unparsable. Excluded from every rate.
  std::vector<std::string> unjudged;
};

JudgeRun judge_all(const std::vector<ComparisonItem>& items, Provider& provider, const JudgeOptions& options = {});

/// 100 * wins / n. Throws EmptyError for no verdicts.
double raw_win_rate(const std::vector<Verdict>& verdicts);

/// Logistic model of P(candidate preferred) = sigmoid(theta0 + theta_len * x)
/// with x = (candidate_len - baseline_len) / scale and scale the root mean
/// square of the length differences (1 when they are all zero). Only
/// theta_len is ridge-penalized, so theta0 alone sets the zero-gap rate.
struct LcModel {
  double theta0 = 0.0;
  double theta_len = 0.0;
  double ridge_lambda = 1e-4;
  double scale = 1.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
};

inline constexpr double kLcRidgeLambda = 1e-4;
inline constexpr double kLcGradientTolerance = 1e-10;
inline constexpr int kLcMaxIterations = 100;

/// Penalized log-likelihood, shared by the Newton fit and its tests.
double lc_objective(const std::vector<int>& wins, const std::vector<double>& x, double theta0, double theta_len,
                    double lambda);

/// Newton's method with backtracking from zero. Throws PreconditionError
/// for n < 2 or mismatched sizes, and NonConvergence when every outcome is
/// the same (the maximum lies at infinity) or the tolerance is not reached
/// within kLcMaxIterations.
LcModel fit_length_model(const std::vector<int>& wins, const std::vector<double>& length_diffs,
                         double lambda = kLcRidgeLambda);

/// Joins verdicts with their items by id (PreconditionError for an unknown
/// id) and fits on candidate_len - baseline_len.
LcModel fit_length_model(const std::vector<Verdict>& verdicts, const std::vector<ComparisonItem>& items,
                         double lambda = kLcRidgeLambda);

/// 100 * sigmoid(theta0): the predicted win rate at zero length gap.
double lc_win_rate(const LcModel& model);

struct WinRateReport {
  std::size_t n = 0;
  std::size_t unjudged = 0;
  double raw_wr = 0.0;
  /// Absent when the fit did not converge; lc_note says why.
  std::optional<double> lc_wr;
  std::optional<LcModel> model;
  std::string lc_note;
  double mean_candidate_len = 0.0;
  double mean_baseline_len = 0.0;
  std::string judge;
};

/// Raw and LC rates over the judged items. When every verdict agrees the LC
/// rate is reported as its limit (0 or 100, equal to the raw rate).
WinRateReport build_report(const std::vector<Verdict>& verdicts, const std::vector<ComparisonItem>& items,
                           std::size_t unjudged = 0);

nlohmann::ordered_json report_to_json(const WinRateReport& report);
WinRateReport report_from_json(const nlohmann::json& j);
std::string report_table(const WinRateReport& report);

nlohmann::ordered_json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);
void write_verdicts_jsonl(const std::vector<Verdict>& verdicts, const std::filesystem::path& path);
std::vector<Verdict> read_verdicts_jsonl(const std::filesystem::path& path);

struct EpochScore {
  int epoch = 0;
  double lc_wr = 0.0;
  std::optional<double> raw_wr;
  std::optional<double> validation_loss;
};

/// Epoch with the highest LC WR, ties going to the smallest epoch number,
/// so the answer does not depend on the order of `epochs`. Throws
/// EmptyError for no epochs and ValidationError for a repeated epoch.
int select_checkpoint(const std::vector<EpochScore>& epochs);

/// Epoch with the lowest validation loss (ties to the earliest), for
/// comparison against the selected one. Throws EmptyError when no epoch
/// carries a loss.
int min_loss_epoch(const std::vector<EpochScore>& epochs);

}  // namespace skillmix
