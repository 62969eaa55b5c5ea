#include "skillmix/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "skillmix/errors.hpp"
#include "skillmix/text.hpp"

namespace skillmix {

std::string_view to_string(CatalogMode mode) { return mode == CatalogMode::kSda ? "sda" : "sdd"; }

CatalogMode catalog_mode_from_string(std::string_view s) {
  if (s == "sda") return CatalogMode::kSda;
  if (s == "sdd") return CatalogMode::kSdd;
  throw ValidationError("unknown catalog mode '" + std::string(s) + "' (expected sda or sdd)");
}

namespace {

void require_snake(std::string_view what, std::string_view name) {
  if (!is_snake_case(name)) {
    throw ValidationError(std::string(what) + " name '" + std::string(name) + "' is not snake_case");
  }
}

}  // namespace

bool SkillCatalog::add_topic(const std::string& name) {
  require_snake("topic", name);
  if (std::find(topics_.begin(), topics_.end(), name) != topics_.end()) return false;
  topics_.push_back(name);
  return true;
}

bool SkillCatalog::add_skill(Skill skill) {
  require_snake("skill", skill.name);
  if (skill.topic) require_snake("topic", *skill.topic);
  if (skill_index_.contains(skill.name)) return false;
  skill_index_.emplace(skill.name, skills_.size());
  skills_.push_back(std::move(skill));
  return true;
}

bool SkillCatalog::add_query_type(QueryType qt) {
  if (trim(qt.name).empty()) throw ValidationError("query type name is empty");
  if (find_query_type(qt.name) != nullptr) return false;
  query_types_.push_back(std::move(qt));
  return true;
}

bool SkillCatalog::has_skill(std::string_view name) const { return skill_index_.contains(std::string(name)); }

const Skill* SkillCatalog::find_skill(std::string_view name) const {
  auto it = skill_index_.find(std::string(name));
  return it == skill_index_.end() ? nullptr : &skills_[it->second];
}

const QueryType* SkillCatalog::find_query_type(std::string_view name) const {
  for (const auto& qt : query_types_) {
    if (qt.name == name) return &qt;
  }
  return nullptr;
}

void SkillCatalog::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& t : topics_) {
    require_snake("topic", t);
    if (!seen.insert(t).second) throw ValidationError("duplicate topic '" + t + "'");
  }
  seen.clear();
  for (const auto& s : skills_) {
    require_snake("skill", s.name);
    if (!seen.insert(s.name).second) throw ValidationError("duplicate skill '" + s.name + "'");
  }
  seen.clear();
  for (const auto& q : query_types_) {
    if (!seen.insert(q.name).second) throw ValidationError("duplicate query type '" + q.name + "'");
  }
  if (mode_ == CatalogMode::kSda && !skills_.empty() && query_types_.empty()) {
    throw ValidationError("an sda catalog needs at least one query type");
  }
  seen.clear();
  for (const auto& c : clusters_) {
    require_snake("cluster", c.name);
    if (c.members.empty()) throw ValidationError("cluster '" + c.name + "' has no members");
    for (const auto& m : c.members) {
      if (!seen.insert(m).second) throw ValidationError("skill '" + m + "' belongs to two clusters");
    }
  }
}

nlohmann::ordered_json catalog_to_json(const SkillCatalog& catalog) {
  nlohmann::ordered_json doc;
  doc["version"] = SkillCatalog::kFormatVersion;
  doc["mode"] = to_string(catalog.mode());
  doc["teacher"] = catalog.teacher();
  doc["created_at"] = catalog.created_at() ? nlohmann::ordered_json(*catalog.created_at()) : nlohmann::ordered_json(nullptr);
  doc["topics"] = catalog.topics();
  auto qts = nlohmann::ordered_json::array();
  for (const auto& q : catalog.query_types()) qts.push_back({{"name", q.name}, {"description", q.description}});
  doc["query_types"] = std::move(qts);
  auto skills = nlohmann::ordered_json::array();
  for (const auto& s : catalog.skills()) {
    nlohmann::ordered_json j{{"name", s.name}, {"source", to_string(s.source)}};
    if (s.topic) j["topic"] = *s.topic;
    skills.push_back(std::move(j));
  }
  doc["skills"] = std::move(skills);
  if (!catalog.clusters().empty()) {
    auto clusters = nlohmann::ordered_json::array();
    for (const auto& c : catalog.clusters()) {
      clusters.push_back({{"name", c.name}, {"members", c.members}, {"rationale", c.rationale}});
    }
    doc["clusters"] = std::move(clusters);
  }
  return doc;
}

SkillCatalog catalog_from_json(const nlohmann::json& doc) {
  try {
    const int version = doc.at("version").get<int>();
    if (version != SkillCatalog::kFormatVersion) {
      throw SchemaError("catalog format version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(SkillCatalog::kFormatVersion) + ")");
    }
    SkillCatalog catalog(catalog_mode_from_string(doc.at("mode").get<std::string>()));
    std::optional<std::string> created_at;
    if (doc.contains("created_at") && !doc["created_at"].is_null()) created_at = doc["created_at"].get<std::string>();
    catalog.set_provenance(doc.value("teacher", std::string()), created_at);

    for (const auto& t : doc.at("topics")) {
      if (!catalog.add_topic(t.get<std::string>())) throw SchemaError("duplicate topic '" + t.get<std::string>() + "'");
    }
    for (const auto& q : doc.at("query_types")) {
      QueryType qt{q.at("name").get<std::string>(), q.value("description", std::string())};
      if (!catalog.add_query_type(qt)) throw SchemaError("duplicate query type '" + qt.name + "'");
    }
    for (const auto& s : doc.at("skills")) {
      Skill skill;
      skill.name = s.at("name").get<std::string>();
      skill.source = catalog_mode_from_string(s.at("source").get<std::string>());
      if (s.contains("topic") && !s["topic"].is_null()) skill.topic = s["topic"].get<std::string>();
      if (!catalog.add_skill(skill)) throw SchemaError("duplicate skill '" + skill.name + "'");
    }
    if (doc.contains("clusters")) {
      std::vector<SkillCluster> clusters;
      for (const auto& c : doc["clusters"]) {
        clusters.push_back({c.at("name").get<std::string>(), c.at("members").get<std::vector<std::string>>(),
                            c.value("rationale", std::string())});
      }
      catalog.set_clusters(std::move(clusters));
    }
    catalog.validate();
    return catalog;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed catalog: ") + e.what());
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("invalid catalog: ") + e.what());
  }
}

void save_catalog(const SkillCatalog& catalog, const std::filesystem::path& path) {
  catalog.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write catalog '" + path.string() + "'");
  out << catalog_to_json(catalog).dump(2) << '\n';
  if (!out) throw IoError("failed writing catalog '" + path.string() + "'");
}

SkillCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open catalog '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("catalog '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return catalog_from_json(doc);
}

std::vector<std::string> read_listing(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open listing '" + path.string() + "'");
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    auto t = trim(line);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::vector<std::string> dedup_names(const std::vector<std::string>& names, std::vector<std::string>* dropped) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& raw : names) {
    std::string n = normalize_snake_case(raw);
    if (n.empty() || !seen.insert(n).second) {
      if (dropped) dropped->push_back(raw);
      continue;
    }
    out.push_back(std::move(n));
  }
  return out;
}

}  // namespace skillmix
