#include "skillmix/extraction.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <unordered_map>
#include <unordered_set>

#include "skillmix/errors.hpp"
#include "skillmix/parallel.hpp"
#include "skillmix/rng.hpp"
#include "skillmix/text.hpp"

namespace skillmix {
namespace {

const TemplateLibrary& templates_of(const ExtractionOptions& options) {
  return options.templates ? *options.templates : TemplateLibrary::shipped();
}

// Sends the conversation and appends the assistant reply to it.
const std::string& ask(Provider& provider, std::vector<ChatMessage>& messages, const std::string& task_id,
                       const ExtractionOptions& options) {
  ChatRequest request;
  request.messages = messages;
  request.temperature = options.temperature;
  request.max_output_tokens = options.max_output_tokens;
  request.task_id = task_id;
  auto response = provider.complete_chat(std::move(request));
  messages.push_back({Role::kAssistant, std::move(response.content)});
  return messages.back().content;
}

std::size_t estimate_tokens(std::size_t chars) { return (chars + 3) / 4; }

// Splits "head: tail" / "head - tail"; returns the head (or the whole line).
std::string_view list_item_head(std::string_view line) {
  const auto colon = line.find(':');
  const auto dash = line.find(" - ");
  const auto cut = std::min(colon, dash);
  return cut == std::string_view::npos ? line : trim(line.substr(0, cut));
}

std::string_view after_separator(std::string_view line) {
  const auto colon = line.find(':');
  const auto dash = line.find(" - ");
  if (colon == std::string_view::npos && dash == std::string_view::npos) return {};
  if (colon < dash) return trim(line.substr(colon + 1));
  return trim(line.substr(dash + 3));
}

std::vector<std::string> split_members(std::string_view list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto end = list.find(',', start);
    auto item = strip_list_decoration(list.substr(start, end == std::string_view::npos ? end : end - start));
    auto norm = normalize_snake_case(item);
    if (!norm.empty()) out.push_back(std::move(norm));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- SDD ----

SkillLabel parse_skill_label(std::string_view reply) {
  static const std::regex kShape(R"(^\s*(.+?)\s*,\s*reason\s*:\s*(.+?)\s*$)", std::regex::icase);
  for (auto line : split_lines(reply)) {
    std::smatch m;
    const std::string s(line);
    if (!std::regex_match(s, m, kShape)) continue;
    SkillLabel label{strip_list_decoration(m[1].str()), std::string(trim(m[2].str()))};
    if (!is_snake_case(label.skill)) {
      throw ValidationError("skill label '" + label.skill + "' is not snake_case");
    }
    return label;
  }
  throw ParseError("reply does not follow '<name of the skill>, reason: <reason>'");
}

SkillLabel label_skill_sdd(std::string_view example_text, Provider& provider, const std::string& task_id,
                           const ExtractionOptions& options) {
  if (trim(example_text).empty()) throw PreconditionError("cannot label an empty example");
  const auto& lib = templates_of(options);
  std::vector<ChatMessage> messages{{Role::kUser, lib.render("sdd_label", {{"text", std::string(example_text)}})}};
  const std::string* reply = &ask(provider, messages, task_id, options);
  try {
    return parse_skill_label(*reply);
  } catch (const ParseError&) {
    messages.push_back({Role::kUser, lib.render("sdd_label_reminder", {})});
    reply = &ask(provider, messages, task_id, options);
  }
  return parse_skill_label(*reply);
}

std::vector<SkillCluster> parse_clusters(std::string_view reply) {
  static const std::regex kName(R"(^(?:\*\*)?\s*category\s*name\s*(?:\*\*)?\s*:\s*(?:\*\*)?\s*(.*)$)",
                                std::regex::icase);
  static const std::regex kMembers(R"(^(?:\*\*)?\s*included\s*skills\s*(?:\*\*)?\s*:\s*(?:\*\*)?\s*(.*)$)",
                                   std::regex::icase);
  static const std::regex kRationale(R"(^(?:\*\*)?\s*rationale\s*(?:\*\*)?\s*:\s*(?:\*\*)?\s*(.*)$)",
                                     std::regex::icase);
  std::vector<SkillCluster> clusters;
  bool in_rationale = false;
  for (auto raw : split_lines(reply)) {
    std::string line(trim(raw));
    while (!line.empty() && (line.front() == '-' || (line.front() == '*' && !line.starts_with("**")))) {
      line = std::string(trim(std::string_view(line).substr(1)));
    }
    std::smatch m;
    if (std::regex_match(line, m, kName)) {
      clusters.push_back({normalize_snake_case(strip_list_decoration(m[1].str())), {}, {}});
      in_rationale = false;
    } else if (!clusters.empty() && std::regex_match(line, m, kMembers)) {
      auto members = split_members(m[1].str());
      auto& dst = clusters.back().members;
      dst.insert(dst.end(), members.begin(), members.end());
      in_rationale = false;
    } else if (!clusters.empty() && std::regex_match(line, m, kRationale)) {
      clusters.back().rationale = std::string(trim(m[1].str()));
      in_rationale = true;
    } else if (in_rationale && !line.empty()) {
      clusters.back().rationale += " " + line;
    } else if (line.empty()) {
      in_rationale = false;
    }
  }
  std::erase_if(clusters, [](const SkillCluster& c) { return c.name.empty(); });
  return clusters;
}

std::vector<std::vector<std::string>> batch_for_budget(const std::vector<std::string>& names,
                                                       std::size_t token_budget, std::size_t overhead_tokens) {
  std::vector<std::vector<std::string>> batches;
  std::size_t used = overhead_tokens;
  for (const auto& n : names) {
    const std::size_t cost = estimate_tokens(n.size() + 2);  // ", " separator
    if (!batches.empty() && !batches.back().empty() && used + cost > token_budget) {
      batches.emplace_back();
      used = overhead_tokens;
    }
    if (batches.empty()) batches.emplace_back();
    batches.back().push_back(n);
    used += cost;
  }
  return batches;
}

Extracted<SkillCluster> cluster_skills_sdd(const std::vector<std::string>& skill_names, Provider& provider,
                                           const ExtractionOptions& options) {
  if (skill_names.empty()) throw PreconditionError("cannot cluster an empty skill list");
  Extracted<SkillCluster> result;
  auto inputs = dedup_names(skill_names);

  if (inputs.size() == 1) {
    // A lone skill is its own category; no call needed.
    result.items.push_back({inputs.front(), {inputs.front()}, "single input skill"});
    return result;
  }

  const auto& lib = templates_of(options);
  const std::size_t overhead = estimate_tokens(lib.render("sdd_cluster", {{"skills_joined_str", ""}}).size());
  const auto batches = batch_for_budget(inputs, options.cluster_token_budget, overhead);

  std::vector<std::vector<SkillCluster>> per_batch(batches.size());
  parallel_for(batches.size(), options.workers, [&](std::size_t b) {
    const std::string task = "cluster:" + std::to_string(b);
    std::vector<ChatMessage> messages{
        {Role::kUser, lib.render("sdd_cluster", {{"skills_joined_str", join(batches[b], ", ")}})}};
    auto parsed = parse_clusters(ask(provider, messages, task, options));
    if (parsed.empty()) {
      messages.push_back({Role::kUser, lib.render("sdd_cluster_reminder", {})});
      parsed = parse_clusters(ask(provider, messages, task, options));
      if (parsed.empty()) throw ParseError("clustering reply for batch " + std::to_string(b) + " has no categories");
    }
    per_batch[b] = std::move(parsed);
  });

  // Merge by exact cluster name, then enforce the partition.
  std::vector<SkillCluster> merged;
  std::unordered_map<std::string, std::size_t> by_name;
  for (auto& batch : per_batch) {
    for (auto& c : batch) {
      auto [it, inserted] = by_name.emplace(c.name, merged.size());
      if (inserted) {
        merged.push_back(std::move(c));
      } else {
        auto& dst = merged[it->second].members;
        dst.insert(dst.end(), c.members.begin(), c.members.end());
      }
    }
  }

  const std::unordered_set<std::string> input_set(inputs.begin(), inputs.end());
  std::unordered_map<std::string, std::string> owner;
  for (auto& c : merged) {
    std::vector<std::string> kept;
    for (auto& m : c.members) {
      if (!input_set.contains(m)) {
        result.warnings.push_back("cluster '" + c.name + "' lists unknown skill '" + m + "'; dropped");
      } else if (auto [it, inserted] = owner.emplace(m, c.name); !inserted) {
        if (it->second != c.name) {
          result.warnings.push_back("skill '" + m + "' already in cluster '" + it->second + "'; removed from '" +
                                    c.name + "'");
        }
      } else {
        kept.push_back(std::move(m));
      }
    }
    c.members = std::move(kept);
    if (c.members.empty()) {
      result.warnings.push_back("cluster '" + c.name + "' has no valid members; dropped");
    } else {
      result.items.push_back(std::move(c));
    }
  }

  std::vector<std::string> orphans;
  for (const auto& s : inputs) {
    if (!owner.contains(s)) orphans.push_back(s);
  }
  if (!orphans.empty()) {
    throw CoverageError("clustering left " + std::to_string(orphans.size()) + " skill(s) unassigned: " +
                            join(orphans, ", "),
                        orphans);
  }
  return result;
}

std::vector<SeedExample> sample_seed_examples(const std::filesystem::path& path, std::size_t count,
                                              std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open seed dataset '" + path.string() + "'");
  std::vector<SeedExample> all;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("seed dataset record is not JSON: ") + e.what(), line_no);
    }
    SeedExample ex;
    ex.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                             : std::to_string(all.size());
    if (j.contains("text") && j["text"].is_string()) {
      ex.text = j["text"].get<std::string>();
    } else if (j.contains("instruction") && j["instruction"].is_string()) {
      ex.text = j["instruction"].get<std::string>();
      const std::string input = j.value("input", std::string());
      if (!trim(input).empty()) ex.text += "\n" + input;
    } else {
      throw SchemaError("seed dataset record needs a \"text\" or \"instruction\" field", line_no);
    }
    if (trim(ex.text).empty()) throw SchemaError("seed dataset record has empty text", line_no);
    all.push_back(std::move(ex));
  }
  if (count > all.size()) {
    throw DomainError("requested " + std::to_string(count) + " seed examples but the dataset has " +
                      std::to_string(all.size()));
  }
  // Partial Fisher-Yates over indices.
  std::vector<std::size_t> idx(all.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  RandomStream rng(derive_seed(seed, "seed-sample"), 0);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<SeedExample> out;
  out.reserve(count);
  for (auto i : idx) out.push_back(std::move(all[i]));
  return out;
}

Extracted<SkillCatalog> build_sdd_catalog(const std::vector<SeedExample>& examples, Provider& provider,
                                          const ExtractionOptions& options) {
  if (examples.empty()) throw PreconditionError("SDD extraction needs at least one seed example");
  std::vector<SkillLabel> labels(examples.size());
  parallel_for(examples.size(), options.workers, [&](std::size_t i) {
    labels[i] = label_skill_sdd(examples[i].text, provider, "label:" + std::to_string(i), options);
  });

  Extracted<SkillCatalog> result;
  std::vector<std::string> names;
  names.reserve(labels.size());
  for (const auto& l : labels) names.push_back(l.skill);
  auto clustering = cluster_skills_sdd(names, provider, options);
  result.warnings = std::move(clustering.warnings);

  SkillCatalog catalog(CatalogMode::kSdd);
  catalog.set_provenance(provider.config().model_id, options.created_at);
  for (const auto& c : clustering.items) catalog.add_skill({c.name, CatalogMode::kSdd, std::nullopt});
  catalog.set_clusters(std::move(clustering.items));
  catalog.validate();
  result.items.push_back(std::move(catalog));
  return result;
}

// ---------------------------------------------------------------- SDA ----

Extracted<std::string> parse_name_list(std::string_view reply) {
  Extracted<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto raw : split_lines(reply)) {
    auto line = trim(raw);
    if (line.empty() || line.ends_with(':')) continue;  // blank or a header line
    const std::string stripped = strip_list_decoration(line);
    const std::string head = strip_list_decoration(list_item_head(stripped));
    if (std::count(head.begin(), head.end(), ' ') > 6) {
      out.warnings.push_back("skipped prose line '" + std::string(line) + "'");
      continue;
    }
    std::string name = normalize_snake_case(head);
    if (name.empty()) continue;
    if (name != head) out.warnings.push_back("normalized '" + head + "' to '" + name + "'");
    if (!seen.insert(name).second) {
      out.warnings.push_back("dropped duplicate '" + name + "'");
      continue;
    }
    out.items.push_back(std::move(name));
  }
  return out;
}

Extracted<QueryType> parse_query_types(std::string_view reply) {
  Extracted<QueryType> out;
  std::unordered_set<std::string> seen;
  for (auto raw : split_lines(reply)) {
    auto line = trim(raw);
    if (line.empty() || line.ends_with(':')) continue;
    const std::string stripped = strip_list_decoration(line);
    const std::string name = strip_list_decoration(list_item_head(stripped));
    const std::string description(after_separator(stripped));
    if (name == stripped || name.empty()) {
      out.warnings.push_back("skipped line without 'Name: description' shape: '" + std::string(line) + "'");
      continue;
    }
    if (!seen.insert(name).second) {
      out.warnings.push_back("dropped duplicate query type '" + name + "'");
      continue;
    }
    out.items.push_back({name, description});
  }
  return out;
}

Extracted<std::string> extract_topics_sda(Provider& provider, const ExtractionOptions& options) {
  const auto& lib = templates_of(options);
  std::vector<ChatMessage> messages{{Role::kUser, lib.render("sda_topics", {})}};
  auto parsed = parse_name_list(ask(provider, messages, "topics", options));
  if (parsed.items.empty()) {
    messages.push_back({Role::kUser, lib.render("sda_list_reminder", {})});
    parsed = parse_name_list(ask(provider, messages, "topics", options));
    if (parsed.items.empty()) throw ParseError("topic extraction reply contains no topics");
  }
  return parsed;
}

Extracted<Skill> extract_skills_for_topic_sda(const std::string& topic, Provider& provider,
                                              const ExtractionOptions& options) {
  if (!is_snake_case(topic)) throw PreconditionError("topic '" + topic + "' is not snake_case");
  const auto& lib = templates_of(options);
  std::vector<ChatMessage> messages{{Role::kUser, lib.render("sda_skills", {{"topic", topic}})}};
  auto names = parse_name_list(ask(provider, messages, "skills:" + topic, options));
  Extracted<Skill> out;
  out.warnings = std::move(names.warnings);
  for (auto& n : names.items) out.items.push_back({std::move(n), CatalogMode::kSda, topic});
  if (out.items.empty()) out.warnings.push_back("topic '" + topic + "' yielded no skills");
  return out;
}

Extracted<QueryType> extract_query_types_sda(Provider& provider, const ExtractionOptions& options) {
  const auto& lib = templates_of(options);
  std::vector<ChatMessage> messages{{Role::kUser, lib.render("sda_query_types", {})}};
  auto parsed = parse_query_types(ask(provider, messages, "query_types", options));
  if (parsed.items.empty()) {
    messages.push_back({Role::kUser, lib.render("sda_list_reminder", {})});
    parsed = parse_query_types(ask(provider, messages, "query_types", options));
    if (parsed.items.empty()) throw ParseError("query type extraction reply contains no query types");
  }
  return parsed;
}

Extracted<SkillCatalog> build_sda_catalog(Provider& provider, const ExtractionOptions& options) {
  Extracted<SkillCatalog> result;
  auto topics = extract_topics_sda(provider, options);
  result.warnings = std::move(topics.warnings);

  std::vector<Extracted<Skill>> per_topic(topics.items.size());
  parallel_for(topics.items.size(), options.workers, [&](std::size_t i) {
    per_topic[i] = extract_skills_for_topic_sda(topics.items[i], provider, options);
  });
  auto query_types = extract_query_types_sda(provider, options);

  SkillCatalog catalog(CatalogMode::kSda);
  catalog.set_provenance(provider.config().model_id, options.created_at);
  for (const auto& t : topics.items) catalog.add_topic(t);
  for (auto& extracted : per_topic) {
    result.warnings.insert(result.warnings.end(), extracted.warnings.begin(), extracted.warnings.end());
    for (auto& s : extracted.items) {
      if (const Skill* prior = catalog.find_skill(s.name)) {
        result.warnings.push_back("skill '" + s.name + "' under topic '" + s.topic.value_or("") +
                                  "' already listed under '" + prior->topic.value_or("") + "'");
        continue;
      }
      catalog.add_skill(std::move(s));
    }
  }
  result.warnings.insert(result.warnings.end(), query_types.warnings.begin(), query_types.warnings.end());
  for (auto& q : query_types.items) catalog.add_query_type(std::move(q));
  catalog.validate();
  result.items.push_back(std::move(catalog));
  return result;
}

}  // namespace skillmix
