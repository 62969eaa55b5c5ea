#include "skillmix_cli/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "skillmix/errors.hpp"
#include "skillmix/rng.hpp"

namespace skillmix::cli {
namespace {

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError("config key '" + key + "' has the wrong type");
  }
}

template <typename T>
void read_opt(const YAML::Node& parent, const char* key, const std::string& path, T& out) {
  if (const auto n = parent[key]; n && !n.IsNull()) out = scalar<T>(n, path + "." + key);
}

void reject_unknown(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> known) {
  if (!node.IsMap()) throw ValidationError("config key '" + path + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ValidationError("unknown config key '" + (path.empty() ? key : path + "." + key) + "'");
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

ProviderEntry parse_provider(const YAML::Node& node, std::size_t index, const std::filesystem::path& base) {
  const std::string path = "providers[" + std::to_string(index) + "]";
  reject_unknown(node, path,
                 {"name", "roles", "dialect", "model_id", "endpoint", "credential_env_var", "price_per_1k_prompt",
                  "price_per_1k_completion", "max_concurrent", "retry_limit", "backoff_base_ms", "backoff_max_ms",
                  "timeout_s", "mock_script"});
  ProviderEntry e;
  read_opt(node, "name", path, e.name);
  if (const auto roles = node["roles"]) {
    if (roles.IsScalar()) {
      e.roles.push_back(roles.as<std::string>());
    } else {
      e.roles = scalar<std::vector<std::string>>(roles, path + ".roles");
    }
  }
  for (const auto& r : e.roles) {
    if (r != "teacher" && r != "judge") throw ValidationError(path + ".roles: unknown role '" + r + "'");
  }
  auto& c = e.config;
  std::string dialect = "mock";
  read_opt(node, "dialect", path, dialect);
  c.dialect = dialect_from_string(dialect);
  read_opt(node, "model_id", path, c.model_id);
  read_opt(node, "endpoint", path, c.endpoint);
  read_opt(node, "credential_env_var", path, c.credential_env_var);
  std::string price;
  if (node["price_per_1k_prompt"]) {
    c.price_per_1k_prompt = PricePer1k::parse(scalar<std::string>(node["price_per_1k_prompt"], path));
  }
  if (node["price_per_1k_completion"]) {
    c.price_per_1k_completion = PricePer1k::parse(scalar<std::string>(node["price_per_1k_completion"], path));
  }
  read_opt(node, "max_concurrent", path, c.max_concurrent);
  read_opt(node, "retry_limit", path, c.retry_limit);
  long long ms = 0;
  if (node["backoff_base_ms"]) {
    read_opt(node, "backoff_base_ms", path, ms);
    c.backoff_base = std::chrono::milliseconds(ms);
  }
  if (node["backoff_max_ms"]) {
    read_opt(node, "backoff_max_ms", path, ms);
    c.backoff_max = std::chrono::milliseconds(ms);
  }
  if (node["timeout_s"]) {
    read_opt(node, "timeout_s", path, ms);
    c.timeout = std::chrono::seconds(ms);
  }
  if (node["mock_script"]) c.mock_script = resolve(base, scalar<std::string>(node["mock_script"], path)).string();
  if (c.model_id.empty()) c.model_id = c.dialect == Dialect::kMock ? "mock-teacher" : "";
  if (e.name.empty()) e.name = c.model_id;
  return e;
}

}  // namespace

const ProviderEntry& RunConfig::with_role(const std::string& role) const {
  for (const auto& p : providers) {
    if (std::find(p.roles.begin(), p.roles.end(), role) != p.roles.end()) return p;
  }
  throw ValidationError("no provider has the '" + role + "' role");
}

RunConfig parse_run_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ValidationError("config must be a YAML mapping");
  reject_unknown(root, "",
                 {"schema_version", "seed", "output_dir", "providers", "catalog", "extraction", "sample_plan",
                  "generation", "injection", "judge"});

  RunConfig rc;
  rc.base_dir = base_dir;
  if (!root["schema_version"]) throw ValidationError("config needs 'schema_version'");
  rc.schema_version = scalar<int>(root["schema_version"], "schema_version");
  if (rc.schema_version != kRunConfigSchema) {
    throw ValidationError("config schema_version " + std::to_string(rc.schema_version) + " is not supported (expected " +
                          std::to_string(kRunConfigSchema) + ")");
  }
  read_opt(root, "seed", "", rc.seed);
  if (root["output_dir"]) rc.output_dir = resolve(base_dir, scalar<std::string>(root["output_dir"], "output_dir"));

  if (const auto providers = root["providers"]) {
    if (!providers.IsSequence()) throw ValidationError("config key 'providers' must be a list");
    for (std::size_t i = 0; i < providers.size(); ++i) rc.providers.push_back(parse_provider(providers[i], i, base_dir));
  }
  if (root["catalog"]) rc.catalog = resolve(base_dir, scalar<std::string>(root["catalog"], "catalog"));

  if (const auto ex = root["extraction"]) {
    reject_unknown(ex, "extraction", {"mode", "seed_dataset", "sample", "cluster_token_budget", "workers"});
    ExtractionSection s;
    std::string mode = "sda";
    read_opt(ex, "mode", "extraction", mode);
    s.mode = catalog_mode_from_string(mode);
    if (ex["seed_dataset"]) s.seed_dataset = resolve(base_dir, scalar<std::string>(ex["seed_dataset"], "extraction"));
    read_opt(ex, "sample", "extraction", s.sample);
    read_opt(ex, "cluster_token_budget", "extraction", s.cluster_token_budget);
    read_opt(ex, "workers", "extraction", s.workers);
    rc.extraction = s;
  }

  if (const auto sp = root["sample_plan"]) {
    reject_unknown(sp, "sample_plan", {"n", "k", "allow_repeat_tuples", "holdout_count"});
    read_opt(sp, "n", "sample_plan", rc.plan.n);
    read_opt(sp, "k", "sample_plan", rc.plan.k);
    read_opt(sp, "allow_repeat_tuples", "sample_plan", rc.plan.allow_repeat_tuples);
    read_opt(sp, "holdout_count", "sample_plan", rc.plan.holdout_count);
  }

  if (const auto g = root["generation"]) {
    reject_unknown(g, "generation",
                   {"temperature", "max_output_tokens", "max_parse_retries", "truncation_policy", "refine", "workers",
                    "run_id", "created_at"});
    auto& gc = rc.generation;
    read_opt(g, "temperature", "generation", gc.temperature);
    read_opt(g, "max_output_tokens", "generation", gc.max_output_tokens);
    read_opt(g, "max_parse_retries", "generation", gc.max_parse_retries);
    if (g["truncation_policy"]) {
      gc.truncation_policy = truncation_policy_from_string(scalar<std::string>(g["truncation_policy"], "generation"));
    }
    read_opt(g, "refine", "generation", gc.refine);
    read_opt(g, "workers", "generation", gc.workers);
    read_opt(g, "run_id", "generation", gc.run_id);
    read_opt(g, "created_at", "generation", gc.created_at);
  }

  if (const auto inj = root["injection"]) {
    reject_unknown(inj, "injection", {"mode", "fraction"});
    InjectionPlan ip;
    std::string mode = "brev";
    read_opt(inj, "mode", "injection", mode);
    ip.mode = corruption_from_string(mode);
    read_opt(inj, "fraction", "injection", ip.fraction);
    rc.injection = ip;
  }

  if (const auto j = root["judge"]) {
    reject_unknown(j, "judge", {"swap", "workers", "max_output_tokens"});
    std::string swap = "seeded";
    read_opt(j, "swap", "judge", swap);
    if (swap == "seeded") {
      rc.judge.swap = SwapPolicy::kSeeded;
    } else if (swap == "never") {
      rc.judge.swap = SwapPolicy::kNever;
    } else if (swap == "always") {
      rc.judge.swap = SwapPolicy::kAlways;
    } else {
      throw ValidationError("judge.swap must be seeded, never or always");
    }
    read_opt(j, "workers", "judge", rc.judge.workers);
    read_opt(j, "max_output_tokens", "judge", rc.judge.max_output_tokens);
  }
  validate_run_config(rc);
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void validate_run_config(const RunConfig& rc) {
  if (rc.schema_version != kRunConfigSchema) throw ValidationError("unsupported config schema_version");
  std::set<std::string> names;
  int teachers = 0, judges = 0;
  for (const auto& p : rc.providers) {
    if (!names.insert(p.name).second) throw ValidationError("provider name '" + p.name + "' is used twice");
    teachers += static_cast<int>(std::count(p.roles.begin(), p.roles.end(), "teacher"));
    judges += static_cast<int>(std::count(p.roles.begin(), p.roles.end(), "judge"));
    validate_config(p.config);
    if (p.config.dialect == Dialect::kMock && !std::filesystem::exists(p.config.mock_script)) {
      throw ValidationError("provider '" + p.name + "': mock_script '" + p.config.mock_script + "' does not exist");
    }
  }
  if (!rc.providers.empty() && (teachers != 1 || judges != 1)) {
    throw ValidationError("exactly one provider must have the teacher role and one the judge role (found " +
                          std::to_string(teachers) + " and " + std::to_string(judges) + ")");
  }
  if (rc.catalog && !std::filesystem::exists(*rc.catalog)) {
    throw ValidationError("catalog '" + rc.catalog->string() + "' does not exist");
  }
  if (rc.extraction && rc.extraction->seed_dataset && !std::filesystem::exists(*rc.extraction->seed_dataset)) {
    throw ValidationError("seed dataset '" + rc.extraction->seed_dataset->string() + "' does not exist");
  }
  if (rc.injection && !(rc.injection->fraction >= 0.0 && rc.injection->fraction <= 1.0)) {
    throw ValidationError("injection.fraction must lie in [0, 1]");
  }
  if (rc.generation.max_parse_retries < 0) throw ValidationError("generation.max_parse_retries must be non-negative");
  if (rc.generation.workers == 0) throw ValidationError("generation.workers must be at least 1");
}

ProviderConfig provider_for(const RunConfig& config, const std::string& role) {
  ProviderConfig pc = config.with_role(role).config;
  pc.retry_seed = derive_seed(config.seed, "retry:" + role);
  return pc;
}

}  // namespace skillmix::cli
