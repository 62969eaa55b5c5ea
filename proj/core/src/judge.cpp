#include "skillmix/judge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "skillmix/errors.hpp"
#include "skillmix/parallel.hpp"
#include "skillmix/rng.hpp"
#include "skillmix/text.hpp"

namespace skillmix {

ComparisonItem make_item(std::string id, std::string instruction, std::string candidate, std::string baseline) {
  if (trim(id).empty()) throw ValidationError("comparison item has an empty id");
  if (trim(instruction).empty()) throw ValidationError("item '" + id + "' has an empty instruction");
  if (trim(candidate).empty()) throw ValidationError("item '" + id + "' has an empty candidate output");
  if (trim(baseline).empty()) throw ValidationError("item '" + id + "' has an empty baseline output");
  ComparisonItem item{std::move(id), std::move(instruction), std::move(candidate), std::move(baseline), 0, 0};
  item.candidate_len = utf8_length(item.candidate);
  item.baseline_len = utf8_length(item.baseline);
  return item;
}

std::string_view to_string(Preference p) { return p == Preference::kCandidate ? "candidate" : "baseline"; }

Preference preference_from_string(std::string_view s) {
  if (s == "candidate") return Preference::kCandidate;
  if (s == "baseline") return Preference::kBaseline;
  throw ValidationError("unknown preference '" + std::string(s) + "' (expected candidate or baseline)");
}

bool presentation_swapped(const std::string& item_id, const JudgeOptions& options) {
  switch (options.swap) {
    case SwapPolicy::kNever:
      return false;
    case SwapPolicy::kAlways:
      return true;
    case SwapPolicy::kSeeded:
      break;
  }
  RandomStream rng(derive_seed(options.seed, "judge-order"), fnv1a64(item_id));
  return rng.coin();
}

char parse_judge_reply(std::string_view reply) {
  std::string s(trim(reply));
  // Peel markdown and quotes off both ends.
  auto decoration = [](char c) { return c == '*' || c == '_' || c == '`' || c == '"' || c == '\'' || c == '#'; };
  while (!s.empty() && decoration(s.front())) s.erase(s.begin());
  while (!s.empty() && (decoration(s.back()) || s.back() == '.' || s.back() == '!')) s.pop_back();
  s = std::string(trim(s));
  if (s.size() == 1 || (s.size() == 3 && s.front() == '(' && s.back() == ')')) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s.size() == 1 ? s[0] : s[1])));
    if (c == 'A' || c == 'B') return c;
  }

  static const std::regex kOutput(R"(output\s*\(?\s*([AB])\s*\)?)", std::regex::icase);
  char found = 0;
  bool ambiguous = false;
  for (std::sregex_iterator it(s.begin(), s.end(), kOutput), end; it != end; ++it) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>((*it)[1].str()[0])));
    if (found != 0 && found != c) ambiguous = true;
    found = c;
  }
  if (found != 0 && !ambiguous) return found;

  static const std::regex kLabelled(R"(^(?:final\s+)?(?:answer|verdict|choice)\s*:\s*\(?([AB])\)?(?:[^A-Za-z]|$))",
                                    std::regex::icase);
  std::smatch m;
  if (std::regex_search(s, m, kLabelled)) return static_cast<char>(std::toupper(m[1].str()[0]));

  static const std::regex kLeading(R"(^\(?([AB])\)?[.:),\n])");
  if (std::regex_search(s, m, kLeading)) return m[1].str()[0];
  throw ParseError("judge reply names neither A nor B: '" + std::string(trim(reply)).substr(0, 80) + "'");
}

Verdict judge_pair(const ComparisonItem& item, Provider& provider, const JudgeOptions& options) {
  const auto& lib = options.templates ? *options.templates : TemplateLibrary::shipped();
  const bool swapped = presentation_swapped(item.id, options);
  const std::string& a = swapped ? item.baseline : item.candidate;
  const std::string& b = swapped ? item.candidate : item.baseline;

  ChatRequest request;
  request.messages = {{Role::kUser, lib.render("judge_pairwise",
                                               {{"instruction", item.instruction}, {"output_a", a}, {"output_b", b}})}};
  request.temperature = options.temperature;
  request.max_output_tokens = options.max_output_tokens;
  request.task_id = "judge:" + item.id;

  auto reply = provider.complete_chat(request);
  char letter = 0;
  try {
    letter = parse_judge_reply(reply.content);
  } catch (const ParseError&) {
    request.messages.push_back({Role::kAssistant, reply.content.empty() ? std::string("(empty)") : reply.content});
    request.messages.push_back({Role::kUser, lib.render("judge_reminder", {})});
    reply = provider.complete_chat(request);
    letter = parse_judge_reply(reply.content);
  }
  const bool first_shown_won = letter == 'A';
  // Un-swap: "A" is the candidate unless the order was swapped.
  const bool candidate_won = first_shown_won != swapped;
  return {item.id, candidate_won ? Preference::kCandidate : Preference::kBaseline, swapped,
          provider.config().model_id};
}

JudgeRun judge_all(const std::vector<ComparisonItem>& items, Provider& provider, const JudgeOptions& options) {
  std::vector<std::optional<Verdict>> slots(items.size());
  parallel_for(items.size(), options.workers, [&](std::size_t i) {
    try {
      slots[i] = judge_pair(items[i], provider, options);
    } catch (const ParseError&) {
      // Left empty: reported as unjudged.
    }
  });
  JudgeRun run;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (slots[i]) {
      run.verdicts.push_back(std::move(*slots[i]));
    } else {
      run.unjudged.push_back(items[i].id);
    }
  }
  return run;
}

double raw_win_rate(const std::vector<Verdict>& verdicts) {
  if (verdicts.empty()) throw EmptyError("win rate of zero verdicts is undefined");
  const auto wins = std::count_if(verdicts.begin(), verdicts.end(),
                                  [](const Verdict& v) { return v.preferred == Preference::kCandidate; });
  return 100.0 * static_cast<double>(wins) / static_cast<double>(verdicts.size());
}

// ---- length-controlled fit ----

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double lc_objective(const std::vector<int>& wins, const std::vector<double>& x, double theta0, double theta_len,
                    double lambda) {
  double ll = 0.0;
  for (std::size_t i = 0; i < wins.size(); ++i) {
    const double z = theta0 + theta_len * x[i];
    // y log s(z) + (1 - y) log s(-z) = y z - log(1 + e^z)
    ll += (wins[i] != 0 ? z : 0.0) - softplus(z);
  }
  return ll - 0.5 * lambda * theta_len * theta_len;
}

LcModel fit_length_model(const std::vector<int>& wins, const std::vector<double>& length_diffs, double lambda) {
  if (wins.size() != length_diffs.size()) throw PreconditionError("outcomes and length differences differ in size");
  if (wins.size() < 2) throw PreconditionError("the length model needs at least two verdicts");
  if (!(lambda > 0.0)) throw PreconditionError("ridge lambda must be positive");
  const auto n_wins = std::count_if(wins.begin(), wins.end(), [](int y) { return y != 0; });
  if (n_wins == 0 || static_cast<std::size_t>(n_wins) == wins.size()) {
    throw NonConvergence("every verdict prefers the same side; the intercept has no finite maximum");
  }

  LcModel m;
  m.ridge_lambda = lambda;
  double ss = 0.0;
  for (double d : length_diffs) ss += d * d;
  m.scale = ss > 0.0 ? std::sqrt(ss / static_cast<double>(length_diffs.size())) : 1.0;
  std::vector<double> x(length_diffs.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = length_diffs[i] / m.scale;

  double t0 = 0.0;
  double t1 = 0.0;
  double f = lc_objective(wins, x, t0, t1, lambda);
  for (m.iterations = 0; m.iterations <= kLcMaxIterations; ++m.iterations) {
    double g0 = 0.0, g1 = -lambda * t1, h00 = 0.0, h01 = 0.0, h11 = lambda;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double p = sigmoid(t0 + t1 * x[i]);
      const double r = (wins[i] != 0 ? 1.0 : 0.0) - p;
      const double w = p * (1.0 - p);
      g0 += r;
      g1 += r * x[i];
      h00 += w;
      h01 += w * x[i];
      h11 += w * x[i] * x[i];
    }
    m.gradient_norm = std::hypot(g0, g1);
    if (m.gradient_norm <= kLcGradientTolerance) {
      m.converged = true;
      break;
    }
    if (m.iterations == kLcMaxIterations) break;
    // Newton direction: solve (negated Hessian) * step = gradient.
    const double det = h00 * h11 - h01 * h01;
    double s0 = (h11 * g0 - h01 * g1) / det;
    double s1 = (h00 * g1 - h01 * g0) / det;
    if (!std::isfinite(s0) || !std::isfinite(s1)) {
      s0 = g0;
      s1 = g1;
    }
    double step = 1.0;
    // Near the optimum the predicted gain drops below the objective's
    // rounding, so comparisons are noise; take the full Newton step there.
    const double predicted_gain = 0.5 * (g0 * s0 + g1 * s1);
    if (predicted_gain <= 1e-12 * (1.0 + std::abs(f))) {
      f = lc_objective(wins, x, t0 + s0, t1 + s1, lambda);
    } else {
      for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
        const double f_new = lc_objective(wins, x, t0 + step * s0, t1 + step * s1, lambda);
        if (f_new >= f) {
          f = f_new;
          break;
        }
      }
    }
    t0 += step * s0;
    t1 += step * s1;
  }
  m.theta0 = t0;
  m.theta_len = t1;
  if (!m.converged) {
    throw NonConvergence("length model gradient norm " + std::to_string(m.gradient_norm) + " after " +
                         std::to_string(kLcMaxIterations) + " Newton iterations");
  }
  return m;
}

LcModel fit_length_model(const std::vector<Verdict>& verdicts, const std::vector<ComparisonItem>& items,
                         double lambda) {
  std::unordered_map<std::string_view, const ComparisonItem*> by_id;
  for (const auto& it : items) by_id.emplace(it.id, &it);
  std::vector<int> wins;
  std::vector<double> diffs;
  for (const auto& v : verdicts) {
    auto found = by_id.find(v.item_id);
    if (found == by_id.end()) throw PreconditionError("verdict for unknown item '" + v.item_id + "'");
    wins.push_back(v.preferred == Preference::kCandidate ? 1 : 0);
    diffs.push_back(static_cast<double>(found->second->candidate_len) -
                    static_cast<double>(found->second->baseline_len));
  }
  return fit_length_model(wins, diffs, lambda);
}

double lc_win_rate(const LcModel& model) { return 100.0 * sigmoid(model.theta0); }

// ---- reports ----

WinRateReport build_report(const std::vector<Verdict>& verdicts, const std::vector<ComparisonItem>& items,
                           std::size_t unjudged) {
  WinRateReport r;
  r.n = verdicts.size();
  r.unjudged = unjudged;
  r.raw_wr = raw_win_rate(verdicts);
  r.judge = verdicts.front().judge;

  std::unordered_map<std::string_view, const ComparisonItem*> by_id;
  for (const auto& it : items) by_id.emplace(it.id, &it);
  double cand = 0.0, base = 0.0;
  for (const auto& v : verdicts) {
    auto found = by_id.find(v.item_id);
    if (found == by_id.end()) throw PreconditionError("verdict for unknown item '" + v.item_id + "'");
    cand += static_cast<double>(found->second->candidate_len);
    base += static_cast<double>(found->second->baseline_len);
  }
  r.mean_candidate_len = cand / static_cast<double>(r.n);
  r.mean_baseline_len = base / static_cast<double>(r.n);

  if (r.raw_wr == 0.0 || r.raw_wr == 100.0) {
    r.lc_wr = r.raw_wr;
    r.lc_note = "all verdicts agree; LC WR is the limit of the fit";
    return r;
  }
  try {
    r.model = fit_length_model(verdicts, items);
    r.lc_wr = lc_win_rate(*r.model);
  } catch (const NonConvergence& e) {
    r.lc_note = e.what();
  } catch (const PreconditionError& e) {
    r.lc_note = e.what();
  }
  return r;
}

nlohmann::ordered_json report_to_json(const WinRateReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["unjudged"] = r.unjudged;
  j["raw_wr"] = r.raw_wr;
  j["lc_wr"] = r.lc_wr ? nlohmann::ordered_json(*r.lc_wr) : nlohmann::ordered_json(nullptr);
  if (r.model) {
    j["lc_model"] = {{"theta0", r.model->theta0},
                     {"theta_len", r.model->theta_len},
                     {"ridge_lambda", r.model->ridge_lambda},
                     {"scale", r.model->scale},
                     {"converged", r.model->converged},
                     {"iterations", r.model->iterations}};
  }
  if (!r.lc_note.empty()) j["lc_note"] = r.lc_note;
  j["mean_candidate_len"] = r.mean_candidate_len;
  j["mean_baseline_len"] = r.mean_baseline_len;
  j["judge"] = r.judge;
  return j;
}

WinRateReport report_from_json(const nlohmann::json& j) {
  try {
    WinRateReport r;
    r.n = j.at("n").get<std::size_t>();
    r.unjudged = j.value("unjudged", std::size_t{0});
    r.raw_wr = j.at("raw_wr").get<double>();
    if (j.contains("lc_wr") && !j["lc_wr"].is_null()) r.lc_wr = j["lc_wr"].get<double>();
    if (j.contains("lc_model")) {
      const auto& m = j["lc_model"];
      LcModel model;
      model.theta0 = m.at("theta0").get<double>();
      model.theta_len = m.at("theta_len").get<double>();
      model.ridge_lambda = m.value("ridge_lambda", kLcRidgeLambda);
      model.scale = m.value("scale", 1.0);
      model.converged = m.value("converged", true);
      model.iterations = m.value("iterations", 0);
      r.model = model;
    }
    r.lc_note = j.value("lc_note", std::string());
    r.mean_candidate_len = j.value("mean_candidate_len", 0.0);
    r.mean_baseline_len = j.value("mean_baseline_len", 0.0);
    r.judge = j.value("judge", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed win-rate report: ") + e.what());
  }
}

std::string report_table(const WinRateReport& r) {
  char buf[256];
  std::ostringstream out;
  std::snprintf(buf, sizeof buf, "%-22s %s\n", "judge", r.judge.c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "%-22s %zu\n%-22s %zu\n", "judged", r.n, "unjudged", r.unjudged);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-22s %.2f\n", "raw WR (%)", r.raw_wr);
  out << buf;
  if (r.lc_wr) {
    std::snprintf(buf, sizeof buf, "%-22s %.2f\n", "LC WR (%)", *r.lc_wr);
  } else {
    std::snprintf(buf, sizeof buf, "%-22s %s\n", "LC WR (%)", "n/a");
  }
  out << buf;
  std::snprintf(buf, sizeof buf, "%-22s %.1f\n%-22s %.1f\n", "mean candidate chars", r.mean_candidate_len,
                "mean baseline chars", r.mean_baseline_len);
  out << buf;
  if (!r.lc_note.empty()) out << "note: " << r.lc_note << '\n';
  return out.str();
}

nlohmann::ordered_json verdict_to_json(const Verdict& v) {
  return {{"item_id", v.item_id}, {"preferred", to_string(v.preferred)}, {"swapped", v.swapped}, {"judge", v.judge}};
}

Verdict verdict_from_json(const nlohmann::json& j) {
  try {
    return {j.at("item_id").get<std::string>(), preference_from_string(j.at("preferred").get<std::string>()),
            j.at("swapped").get<bool>(), j.at("judge").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed verdict: ") + e.what());
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("malformed verdict: ") + e.what());
  }
}

void write_verdicts_jsonl(const std::vector<Verdict>& verdicts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write verdicts '" + path.string() + "'");
  for (const auto& v : verdicts) out << verdict_to_json(v).dump() << '\n';
  if (!out) throw IoError("failed writing verdicts '" + path.string() + "'");
}

std::vector<Verdict> read_verdicts_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open verdicts '" + path.string() + "'");
  std::vector<Verdict> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(verdict_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("verdict is not valid JSON: ") + e.what(), line_no);
    } catch (const SchemaError& e) {
      throw SchemaError(e.what(), line_no);
    }
  }
  return out;
}

// ---- checkpoint selection ----

namespace {

void check_unique_epochs(const std::vector<EpochScore>& epochs) {
  std::vector<int> ids;
  for (const auto& e : epochs) ids.push_back(e.epoch);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ValidationError("epoch listed twice");
}

}  // namespace

int select_checkpoint(const std::vector<EpochScore>& epochs) {
  if (epochs.empty()) throw EmptyError("no epochs to select from");
  check_unique_epochs(epochs);
  const EpochScore* best = &epochs.front();
  for (const auto& e : epochs) {
    if (!std::isfinite(e.lc_wr)) throw ValidationError("epoch " + std::to_string(e.epoch) + " has a non-finite LC WR");
    if (e.lc_wr > best->lc_wr || (e.lc_wr == best->lc_wr && e.epoch < best->epoch)) best = &e;
  }
  return best->epoch;
}

int min_loss_epoch(const std::vector<EpochScore>& epochs) {
  const EpochScore* best = nullptr;
  for (const auto& e : epochs) {
    if (!e.validation_loss) continue;
    if (best == nullptr || *e.validation_loss < *best->validation_loss ||
        (*e.validation_loss == *best->validation_loss && e.epoch < best->epoch)) {
      best = &e;
    }
  }
  if (best == nullptr) throw EmptyError("no epoch reports a validation loss");
  return best->epoch;
}

}  // namespace skillmix
