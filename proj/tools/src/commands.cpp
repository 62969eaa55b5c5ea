#include "skillmix_cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <unordered_map>

#include <CLI11.hpp>

#include "skillmix/catalog.hpp"
#include "skillmix/dataset.hpp"
#include "skillmix/errors.hpp"
#include "skillmix/extraction.hpp"
#include "skillmix/generator.hpp"
#include "skillmix/injection.hpp"
#include "skillmix/judge.hpp"
#include "skillmix/mixer.hpp"
#include "skillmix/text.hpp"
#include "skillmix_cli/run_config.hpp"

namespace skillmix::cli {

nlohmann::ordered_json usage_to_json(const Provider& provider) {
  const auto ledger = provider.ledger();
  nlohmann::ordered_json j;
  auto models = nlohmann::ordered_json::object();
  for (const auto& [model, u] : ledger.per_model) {
    models[model] = {{"prompt_tokens", u.prompt_tokens},
                     {"completion_tokens", u.completion_tokens},
                     {"call_count", u.call_count}};
  }
  j["models"] = std::move(models);
  const auto total = ledger.total();
  j["total"] = {{"prompt_tokens", total.prompt_tokens},
                {"completion_tokens", total.completion_tokens},
                {"call_count", total.call_count}};
  j["attempts"] = provider.total_attempts();
  const Money cost = provider.cost();
  j["cost_usd"] = cost.to_string(6);
  j["cost_picodollars"] = cost.picodollars();
  return j;
}

std::vector<ModelOutput> read_outputs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open outputs '" + path.string() + "'");
  std::vector<ModelOutput> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ModelOutput o;
      o.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
      o.instruction = j.value("instruction", std::string());
      if (j.contains("output")) {
        o.text = j["output"].get<std::string>();
      } else if (j.contains("response")) {
        o.text = j["response"].get<std::string>();
      } else {
        throw SchemaError("record has neither \"output\" nor \"response\"", line_no);
      }
      if (!ids.insert(o.id).second) throw SchemaError("repeated id '" + o.id + "'", line_no);
      out.push_back(std::move(o));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("malformed output record: ") + e.what(), line_no);
    }
  }
  return out;
}

std::vector<ComparisonItem> pair_outputs(const std::vector<ModelOutput>& candidate,
                                         const std::vector<ModelOutput>& baseline) {
  std::unordered_map<std::string, const ModelOutput*> by_id;
  for (const auto& c : candidate) by_id.emplace(c.id, &c);
  std::vector<ComparisonItem> items;
  for (const auto& b : baseline) {
    auto it = by_id.find(b.id);
    if (it == by_id.end()) throw ValidationError("no candidate output for baseline id '" + b.id + "'");
    const ModelOutput& c = *it->second;
    if (!b.instruction.empty() && !c.instruction.empty() && b.instruction != c.instruction) {
      throw ValidationError("instructions differ between candidate and baseline for id '" + b.id + "'");
    }
    items.push_back(make_item(b.id, b.instruction.empty() ? c.instruction : b.instruction, c.text, b.text));
  }
  return items;
}

std::vector<EpochScore> read_epoch_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open epoch table '" + path.string() + "'");
  try {
    nlohmann::json doc;
    in >> doc;
    const auto& list = doc.is_object() ? doc.at("epochs") : doc;
    std::vector<EpochScore> epochs;
    for (const auto& e : list) {
      EpochScore s;
      s.epoch = e.at("epoch").get<int>();
      s.lc_wr = e.at("lc_wr").get<double>();
      if (e.contains("raw_wr") && !e["raw_wr"].is_null()) s.raw_wr = e["raw_wr"].get<double>();
      if (e.contains("validation_loss") && !e["validation_loss"].is_null()) {
        s.validation_loss = e["validation_loss"].get<double>();
      }
      epochs.push_back(s);
    }
    return epochs;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("epoch table '" + path.string() + "' is malformed: " + e.what());
  }
}

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::filesystem::path sibling_summary(const std::filesystem::path& out) {
  return std::filesystem::path(out.string() + ".summary.json");
}

// ---- extract-skills ----

struct ExtractArgs {
  std::string config;
  std::string mode;
  std::string seed_dataset;
  std::size_t sample = 0;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

int cmd_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig rc = load_run_config(a.config);
  if (a.seed) rc.seed = *a.seed;
  const CatalogMode mode = catalog_mode_from_string(a.mode);
  ExtractionSection section = rc.extraction.value_or(ExtractionSection{});
  if (!a.seed_dataset.empty()) section.seed_dataset = a.seed_dataset;
  if (a.sample > 0) section.sample = a.sample;
  if (a.workers) section.workers = *a.workers;
  if (mode == CatalogMode::kSdd && (!section.seed_dataset || section.sample == 0)) {
    throw ValidationError("--mode sdd requires --seed-dataset PATH and --sample N");
  }

  ExtractionOptions opts;
  opts.workers = section.workers;
  opts.cluster_token_budget = section.cluster_token_budget;
  auto provider = make_provider(provider_for(rc, "teacher"));

  Extracted<SkillCatalog> result;
  if (mode == CatalogMode::kSda) {
    result = build_sda_catalog(*provider, opts);
  } else {
    const auto seeds = sample_seed_examples(*section.seed_dataset, section.sample, rc.seed);
    result = build_sdd_catalog(seeds, *provider, opts);
  }
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  const SkillCatalog& catalog = result.items.front();
  const std::filesystem::path out_path(a.out);
  if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
  save_catalog(catalog, out_path);

  nlohmann::ordered_json summary;
  summary["command"] = "extract-skills";
  summary["mode"] = to_string(mode);
  summary["seed"] = rc.seed;
  summary["teacher"] = provider->config().model_id;
  summary["counts"] = {{"topics", catalog.topics().size()},
                       {"skills", catalog.skills().size()},
                       {"query_types", catalog.query_types().size()},
                       {"clusters", catalog.clusters().size()}};
  summary["warnings"] = result.warnings;
  summary["usage"] = usage_to_json(*provider);
  write_json(sibling_summary(out_path), summary);

  out << "catalog (" << to_string(mode) << "): " << catalog.topics().size() << " topics, " << catalog.skills().size()
      << " skills, " << catalog.query_types().size() << " query types, " << catalog.clusters().size()
      << " clusters -> " << out_path.string() << '\n';
  out << "cost: $" << provider->cost().to_string(6) << '\n';
  return kOk;
}

// ---- generate ----

struct GenerateArgs {
  std::string config;
  std::string catalog;
  std::optional<std::size_t> n;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> holdout;
  std::optional<std::size_t> workers;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig rc = load_run_config(a.config);
  if (!a.catalog.empty()) rc.catalog = a.catalog;
  if (a.n) rc.plan.n = *a.n;
  if (a.k) rc.plan.k = *a.k;
  if (a.seed) rc.seed = *a.seed;
  if (a.holdout) rc.plan.holdout_count = *a.holdout;
  if (a.workers) rc.generation.workers = *a.workers;
  if (!a.out.empty()) rc.output_dir = a.out;
  if (!rc.catalog) throw ValidationError("generate needs --catalog or a 'catalog' entry in the config");
  if (rc.generation.workers == 0) throw ValidationError("--workers must be at least 1");
  rc.plan.seed = rc.seed;

  const SkillCatalog catalog = load_catalog(*rc.catalog);
  const auto tuples = sample_tuples(catalog, rc.plan, rc.generation.workers);
  const auto [train_tuples, holdout_tuples] = split_holdout(tuples, rc.plan.holdout_count, rc.seed);
  std::set<std::size_t> holdout_tasks;
  for (const auto& t : holdout_tuples) holdout_tasks.insert(t.task_index);

  auto provider = make_provider(provider_for(rc, "teacher"));
  const auto run = generate_dataset(tuples, catalog, *provider, rc.generation);

  Dataset train, holdout;
  std::unordered_map<std::string, std::size_t> task_of;
  for (const auto& t : run.transcripts) task_of.emplace(t.example_id, t.task_index);
  for (const auto& ex : run.examples) {
    (holdout_tasks.contains(task_of.at(ex.id)) ? holdout : train).push_back(ex);
  }

  const auto& dir = rc.output_dir;
  ensure_dir(dir);
  write_jsonl(train, dir / "dataset.jsonl");
  write_transcripts_jsonl(run.transcripts, dir / "transcripts.jsonl");
  write_tuples_jsonl(train_tuples, dir / "tuples.jsonl");
  if (!holdout_tuples.empty()) {
    write_jsonl(holdout, dir / "holdout.jsonl");
    write_tuples_jsonl(holdout_tuples, dir / "holdout_tuples.jsonl");
  }
  const auto usage = usage_to_json(*provider);
  write_json(dir / "usage.json", usage);

  const auto& g = rc.generation;
  nlohmann::ordered_json summary;
  summary["command"] = "generate";
  summary["schema_version"] = rc.schema_version;
  summary["seed"] = rc.seed;
  summary["catalog"] = {{"mode", to_string(catalog.mode())},
                        {"skills", catalog.skills().size()},
                        {"query_types", catalog.query_types().size()},
                        {"combinations", combination_count(catalog.skills().size(), rc.plan.k).str()}};
  summary["teacher"] = provider->config().model_id;
  summary["sample_plan"] = {{"n", rc.plan.n},
                            {"k", rc.plan.k},
                            {"allow_repeat_tuples", rc.plan.allow_repeat_tuples},
                            {"holdout_count", rc.plan.holdout_count}};
  summary["generation"] = {{"temperature", g.temperature},
                           {"max_output_tokens", g.max_output_tokens},
                           {"max_parse_retries", g.max_parse_retries},
                           {"truncation_policy", to_string(g.truncation_policy)},
                           {"refine", g.refine},
                           {"run_id", g.run_id},
                           {"created_at", g.created_at}};
  summary["counts"] = {{"requested", rc.plan.n},
                       {"train", train.size()},
                       {"holdout", holdout.size()},
                       {"abandoned", run.abandoned.size()}};
  auto abandoned = nlohmann::ordered_json::array();
  for (const auto& ab : run.abandoned) abandoned.push_back({{"id", ab.id}, {"reason", ab.reason}});
  summary["abandoned"] = std::move(abandoned);
  summary["usage"] = usage;
  write_json(dir / "RUN_SUMMARY.json", summary);

  for (const auto& ab : run.abandoned) err << "abandoned " << ab.id << ": " << ab.reason << '\n';
  out << "generated " << train.size() << " train + " << holdout.size() << " holdout examples ("
      << run.abandoned.size() << " abandoned) -> " << dir.string() << '\n';
  out << "cost: $" << provider->cost().to_string(6) << '\n';
  return run.abandoned.empty() ? kOk : kPartialRun;
}

// ---- inject ----

struct InjectArgs {
  std::string config;
  std::string in;
  std::string out;
  std::string mode;
  std::optional<double> fraction;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

int cmd_inject(const InjectArgs& a, std::ostream& out, std::ostream&) {
  RunConfig rc = load_run_config(a.config);
  if (a.seed) rc.seed = *a.seed;
  InjectionPlan plan = rc.injection.value_or(InjectionPlan{});
  if (!a.mode.empty()) plan.mode = corruption_from_string(a.mode);
  if (a.fraction) plan.fraction = *a.fraction;
  if (!rc.injection && !a.fraction) throw ValidationError("inject needs --fraction or an 'injection' config section");
  plan.seed = rc.seed;

  const Dataset input = read_jsonl(a.in);
  auto provider = make_provider(provider_for(rc, "teacher"));
  InjectionOptions opts;
  opts.workers = a.workers.value_or(rc.generation.workers);
  const Dataset output = inject(input, plan, *provider, opts);
  const std::filesystem::path out_path(a.out);
  if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
  write_jsonl(output, out_path);

  std::vector<std::string> replaced;
  for (auto i : select_for_injection(input, plan)) replaced.push_back(input[i].id);
  nlohmann::ordered_json summary;
  summary["command"] = "inject";
  summary["mode"] = to_string(plan.mode);
  summary["fraction"] = plan.fraction;
  summary["seed"] = rc.seed;
  summary["records"] = input.size();
  summary["replaced"] = replaced.size();
  summary["replaced_ids"] = replaced;
  summary["usage"] = usage_to_json(*provider);
  write_json(sibling_summary(out_path), summary);

  out << "replaced " << replaced.size() << " of " << input.size() << " responses (" << to_string(plan.mode)
      << ") -> " << out_path.string() << '\n';
  return kOk;
}

// ---- stats ----

int cmd_stats(const std::string& in, const std::string& tokenizer, bool as_json, std::ostream& out) {
  const Dataset ds = read_jsonl(in);
  const Tokenizer* tok = nullptr;
  if (tokenizer == "whitespace-v1") tok = &whitespace_tokenizer();
  const auto st = compute_stats(ds, tok);
  if (as_json) {
    out << stats_to_json(st).dump(2) << '\n';
  } else {
    out << stats_table(st);
  }
  return kOk;
}

// ---- judge ----

struct JudgeArgs {
  std::string config;
  std::string candidate;
  std::string baseline;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

struct JudgeOutcome {
  WinRateReport report;
  std::vector<Verdict> verdicts;
  std::vector<std::string> unjudged;
};

JudgeOutcome judge_files(const RunConfig& rc, const std::filesystem::path& candidate,
                         const std::filesystem::path& baseline, Provider& provider, std::size_t workers) {
  const auto items = pair_outputs(read_outputs(candidate), read_outputs(baseline));
  if (items.empty()) throw ValidationError("no items to judge in '" + baseline.string() + "'");
  JudgeOptions opts;
  opts.seed = rc.seed;
  opts.swap = rc.judge.swap;
  opts.workers = workers;
  opts.max_output_tokens = rc.judge.max_output_tokens;
  auto run = judge_all(items, provider, opts);
  if (run.verdicts.empty()) throw ParseError("the judge produced no parsable verdict");
  JudgeOutcome o;
  o.report = build_report(run.verdicts, items, run.unjudged.size());
  o.verdicts = std::move(run.verdicts);
  o.unjudged = std::move(run.unjudged);
  return o;
}

void write_judge_outputs(const std::filesystem::path& dir, const JudgeOutcome& o) {
  ensure_dir(dir);
  write_verdicts_jsonl(o.verdicts, dir / "verdicts.jsonl");
  auto report = report_to_json(o.report);
  report["unjudged_ids"] = o.unjudged;
  write_json(dir / "report.json", report);
  write_text(dir / "report.txt", report_table(o.report));
}

int cmd_judge(const JudgeArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig rc = load_run_config(a.config);
  if (a.seed) rc.seed = *a.seed;
  const std::filesystem::path dir = a.out.empty() ? rc.output_dir / "judge" : std::filesystem::path(a.out);
  auto provider = make_provider(provider_for(rc, "judge"));
  const auto o = judge_files(rc, a.candidate, a.baseline, *provider, a.workers.value_or(rc.judge.workers));
  write_judge_outputs(dir, o);

  nlohmann::ordered_json summary;
  summary["command"] = "judge";
  summary["seed"] = rc.seed;
  summary["judge"] = provider->config().model_id;
  summary["counts"] = {{"judged", o.verdicts.size()}, {"unjudged", o.unjudged.size()}};
  summary["usage"] = usage_to_json(*provider);
  write_json(dir / "RUN_SUMMARY.json", summary);

  for (const auto& id : o.unjudged) err << "unjudged: " << id << '\n';
  out << report_table(o.report);
  return kOk;
}

// ---- select-checkpoint ----

struct SelectArgs {
  std::string epochs;
  std::string config;
  std::string baseline;
  std::string out;
  std::optional<std::uint64_t> seed;
};

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

int cmd_select(const SelectArgs& a, std::ostream& out, std::ostream&) {
  const std::filesystem::path root(a.epochs);
  std::vector<EpochScore> epochs;
  if (std::filesystem::is_regular_file(root)) {
    epochs = read_epoch_table(root);
  } else if (std::filesystem::is_regular_file(root / "epochs.json")) {
    epochs = read_epoch_table(root / "epochs.json");
  } else if (std::filesystem::is_directory(root)) {
    static const std::regex kEpochDir(R"(epoch_(\d+))");
    std::map<int, std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (entry.is_directory() && std::regex_match(name, m, kEpochDir)) dirs.emplace(std::stoi(m[1]), entry.path());
    }
    std::optional<RunConfig> rc;
    std::unique_ptr<Provider> provider;
    for (const auto& [epoch, dir] : dirs) {
      EpochScore s;
      s.epoch = epoch;
      WinRateReport report;
      if (std::filesystem::is_regular_file(dir / "report.json")) {
        std::ifstream in(dir / "report.json", std::ios::binary);
        nlohmann::json j;
        try {
          in >> j;
        } catch (const nlohmann::json::exception& e) {
          throw SchemaError("'" + (dir / "report.json").string() + "' is not valid JSON: " + e.what());
        }
        report = report_from_json(j);
      } else if (std::filesystem::is_regular_file(dir / "candidate.jsonl")) {
        if (a.config.empty() || a.baseline.empty()) {
          throw ValidationError("epoch " + std::to_string(epoch) +
                                " has generations but no report; pass --config and --baseline to judge it");
        }
        if (!rc) {
          rc = load_run_config(a.config);
          if (a.seed) rc->seed = *a.seed;
          provider = make_provider(provider_for(*rc, "judge"));
        }
        const auto o = judge_files(*rc, dir / "candidate.jsonl", a.baseline, *provider, rc->judge.workers);
        if (!a.out.empty()) write_judge_outputs(std::filesystem::path(a.out) / dir.filename(), o);
        report = o.report;
      } else {
        throw ValidationError("'" + dir.string() + "' has neither report.json nor candidate.jsonl");
      }
      if (!report.lc_wr) {
        throw ValidationError("epoch " + std::to_string(epoch) + " has no LC WR: " + report.lc_note);
      }
      s.lc_wr = *report.lc_wr;
      s.raw_wr = report.raw_wr;
      if (std::filesystem::is_regular_file(dir / "validation_loss.txt")) {
        std::ifstream in(dir / "validation_loss.txt");
        double loss = 0;
        if (in >> loss) s.validation_loss = loss;
      }
      epochs.push_back(s);
    }
  } else {
    throw ValidationError("'" + root.string() + "' is neither an epoch table nor a directory");
  }

  const int selected = select_checkpoint(epochs);
  char line[128];
  std::snprintf(line, sizeof line, "%-6s %8s %8s %9s\n", "epoch", "LC WR", "WR", "val loss");
  out << line;
  auto sorted = epochs;
  std::sort(sorted.begin(), sorted.end(), [](const EpochScore& x, const EpochScore& y) { return x.epoch < y.epoch; });
  bool any_loss = false;
  for (const auto& e : sorted) {
    any_loss = any_loss || e.validation_loss.has_value();
    std::snprintf(line, sizeof line, "%-6d %8s %8s %9s%s\n", e.epoch, fmt(e.lc_wr, 1).c_str(),
                  e.raw_wr ? fmt(*e.raw_wr, 1).c_str() : "-",
                  e.validation_loss ? fmt(*e.validation_loss, 2).c_str() : "-", e.epoch == selected ? "  *" : "");
    out << line;
  }
  out << "selected: epoch " << selected << '\n';
  nlohmann::ordered_json summary;
  summary["command"] = "select-checkpoint";
  summary["selected_epoch"] = selected;
  if (any_loss) {
    const int by_loss = min_loss_epoch(epochs);
    out << "lowest validation loss: epoch " << by_loss << '\n';
    summary["min_validation_loss_epoch"] = by_loss;
  }
  if (!a.out.empty()) {
    ensure_dir(a.out);
    write_json(std::filesystem::path(a.out) / "RUN_SUMMARY.json", summary);
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skill-mixing instruction data pipeline", "skillmix"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "skillmix 0.1.0");

  ExtractArgs ea;
  auto* extract = app.add_subcommand("extract-skills", "Build a skill catalog with the teacher model");
  extract->add_option("--config", ea.config, "Run config (YAML)")->required()->check(CLI::ExistingFile);
  extract->add_option("--mode", ea.mode, "Extraction pipeline")->required()->check(CLI::IsMember({"sda", "sdd"}));
  extract->add_option("--seed-dataset", ea.seed_dataset, "JSONL seed examples (sdd)")->check(CLI::ExistingFile);
  extract->add_option("--sample", ea.sample, "Seed examples to label (sdd)");
  extract->add_option("--out", ea.out, "Catalog path to write")->required();
  extract->add_option("--seed", ea.seed, "Global seed (overrides the config)");
  extract->add_option("--workers", ea.workers, "Concurrent extraction tasks")->check(CLI::PositiveNumber);

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "Sample skill tuples and generate examples");
  generate->add_option("--config", ga.config, "Run config (YAML)")->required()->check(CLI::ExistingFile);
  generate->add_option("--catalog", ga.catalog, "Catalog JSON (overrides the config)")->check(CLI::ExistingFile);
  generate->add_option("--n", ga.n, "Tuples to sample, holdout included");
  generate->add_option("--k", ga.k, "Skills per tuple");
  generate->add_option("--seed", ga.seed, "Global seed (overrides the config)");
  generate->add_option("--holdout", ga.holdout, "Tuples held out from the training split");
  generate->add_option("--workers", ga.workers, "Concurrent conversations")->check(CLI::PositiveNumber);
  generate->add_option("--out", ga.out, "Output directory (overrides the config)");

  InjectArgs ia;
  auto* inject_cmd = app.add_subcommand("inject", "Replace a seeded fraction of responses with BREV/JUNK ones");
  inject_cmd->add_option("--config", ia.config, "Run config (YAML)")->required()->check(CLI::ExistingFile);
  inject_cmd->add_option("--in", ia.in, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  inject_cmd->add_option("--out", ia.out, "Corrupted dataset JSONL")->required();
  inject_cmd->add_option("--mode", ia.mode, "Corruption")->check(CLI::IsMember({"brev", "junk"}));
  inject_cmd->add_option("--fraction", ia.fraction, "Fraction of records to replace")->check(CLI::Range(0.0, 1.0));
  inject_cmd->add_option("--seed", ia.seed, "Global seed (overrides the config)");
  inject_cmd->add_option("--workers", ia.workers, "Concurrent regenerations")->check(CLI::PositiveNumber);

  std::string stats_in, tokenizer = "none";
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "Describe a dataset");
  stats->add_option("--in", stats_in, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  stats->add_option("--tokenizer", tokenizer, "Token counter")->check(CLI::IsMember({"none", "whitespace-v1"}));
  stats->add_flag("--json", stats_json, "Emit JSON instead of a table");

  JudgeArgs ja;
  auto* judge = app.add_subcommand("judge", "Pairwise-judge candidate outputs against baseline outputs");
  judge->add_option("--config", ja.config, "Run config (YAML)")->required()->check(CLI::ExistingFile);
  judge->add_option("--candidate", ja.candidate, "Candidate outputs JSONL")->required()->check(CLI::ExistingFile);
  judge->add_option("--baseline", ja.baseline, "Baseline outputs JSONL")->required()->check(CLI::ExistingFile);
  judge->add_option("--out", ja.out, "Output directory");
  judge->add_option("--seed", ja.seed, "Global seed (overrides the config)");
  judge->add_option("--workers", ja.workers, "Concurrent judge calls")->check(CLI::PositiveNumber);

  SelectArgs sa;
  auto* select = app.add_subcommand("select-checkpoint", "Pick the epoch with the best held-out LC WR");
  select->add_option("--epochs", sa.epochs, "epochs.json or a directory of epoch_N/")->required()->check(CLI::ExistingPath);
  select->add_option("--config", sa.config, "Run config, needed to judge raw generations")->check(CLI::ExistingFile);
  select->add_option("--baseline", sa.baseline, "Baseline outputs for raw generations")->check(CLI::ExistingFile);
  select->add_option("--out", sa.out, "Directory for fresh reports and the summary");
  select->add_option("--seed", sa.seed, "Global seed (overrides the config)");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("skillmix");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*extract) return cmd_extract(ea, out, err);
    if (*generate) return cmd_generate(ga, out, err);
    if (*inject_cmd) return cmd_inject(ia, out, err);
    if (*stats) return cmd_stats(stats_in, tokenizer, stats_json, out);
    if (*judge) return cmd_judge(ja, out, err);
    if (*select) return cmd_select(sa, out, err);
  } catch (const Abandoned& e) {
    err << "error: " << e.what() << '\n';
    return kPartialRun;
  } catch (const ProviderError& e) {
    err << "provider error: " << e.what() << '\n';
    return kProviderFailure;
  } catch (const ParseError& e) {
    err << "unusable model output: " << e.what() << '\n';
    return kProviderFailure;
  } catch (const CoverageError& e) {
    err << "unusable model output: " << e.what() << '\n';
    return kProviderFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace skillmix::cli
