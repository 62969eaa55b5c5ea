#include "skillmix/generator.hpp"

#include <cstdio>
#include <fstream>
#include <optional>

#include "skillmix/parallel.hpp"
#include "skillmix/text.hpp"

namespace skillmix {

std::string_view to_string(TruncationPolicy p) {
  return p == TruncationPolicy::kFinishReasonOnly ? "finish_reason_only" : "finish_reason_or_heuristic";
}

TruncationPolicy truncation_policy_from_string(std::string_view s) {
  if (s == "finish_reason_only") return TruncationPolicy::kFinishReasonOnly;
  if (s == "finish_reason_or_heuristic") return TruncationPolicy::kFinishReasonOrHeuristic;
  throw ValidationError("unknown truncation policy '" + std::string(s) +
                        "' (expected finish_reason_only or finish_reason_or_heuristic)");
}

std::string example_id(const std::string& run_id, std::size_t task_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", task_index);
  return run_id + "-" + buf;
}

std::string generation_task_id(std::size_t task_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "gen:%06zu", task_index);
  return buf;
}

// ---- transcripts ----

nlohmann::ordered_json transcript_to_json(const ConversationTranscript& t) {
  nlohmann::ordered_json j;
  j["id"] = t.example_id;
  j["task_index"] = t.task_index;
  auto messages = nlohmann::ordered_json::array();
  for (const auto& m : t.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  j["messages"] = std::move(messages);
  auto usage = nlohmann::ordered_json::array();
  for (const auto& u : t.usage) {
    usage.push_back({{"prompt_tokens", u.prompt_tokens},
                     {"completion_tokens", u.completion_tokens},
                     {"finish_reason", to_string(u.finish_reason)},
                     {"attempts", u.attempts}});
  }
  j["usage"] = std::move(usage);
  j["truncation_fix_applied"] = t.truncation_fix_applied;
  j["critique_applied"] = t.critique_applied;
  j["parse_retries"] = t.parse_retries;
  return j;
}

ConversationTranscript transcript_from_json(const nlohmann::json& j) {
  try {
    ConversationTranscript t;
    t.example_id = j.at("id").get<std::string>();
    t.task_index = j.at("task_index").get<std::size_t>();
    for (const auto& m : j.at("messages")) {
      t.messages.push_back({role_from_string(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
    }
    for (const auto& u : j.at("usage")) {
      t.usage.push_back({u.at("prompt_tokens").get<std::int64_t>(), u.at("completion_tokens").get<std::int64_t>(),
                         finish_reason_from_string(u.at("finish_reason").get<std::string>()),
                         u.value("attempts", 1)});
    }
    t.truncation_fix_applied = j.at("truncation_fix_applied").get<int>();
    t.critique_applied = j.at("critique_applied").get<bool>();
    t.parse_retries = j.value("parse_retries", 0);
    if (t.usage.size() != assistant_turns(t.messages)) {
      throw SchemaError("transcript '" + t.example_id + "' has usage for " + std::to_string(t.usage.size()) +
                        " turns but " + std::to_string(assistant_turns(t.messages)) + " assistant turns");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed transcript: ") + e.what());
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("malformed transcript: ") + e.what());
  }
}

void write_transcripts_jsonl(const std::vector<ConversationTranscript>& transcripts,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write transcripts '" + path.string() + "'");
  for (const auto& t : transcripts) out << transcript_to_json(t).dump() << '\n';
  if (!out) throw IoError("failed writing transcripts '" + path.string() + "'");
}

std::vector<ConversationTranscript> read_transcripts_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open transcripts '" + path.string() + "'");
  std::vector<ConversationTranscript> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(transcript_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("transcript is not valid JSON: ") + e.what(), line_no);
    } catch (const SchemaError& e) {
      throw SchemaError(e.what(), line_no);
    }
  }
  return out;
}

// ---- prompts and parsing ----

std::string render_prompt1(const SkillTuple& tuple, const SkillCatalog& catalog, const TemplateLibrary& templates) {
  if (tuple.skills.empty()) throw PreconditionError("tuple has no skills");
  for (const auto& s : tuple.skills) {
    if (!catalog.has_skill(s)) throw PreconditionError("skill '" + s + "' is not in the catalog");
  }
  std::map<std::string, std::string> values{{"num_skills", std::to_string(tuple.skills.size())},
                                            {"skills_str", join(tuple.skills, ", ")}};
  if (catalog.mode() == CatalogMode::kSdd) {
    if (tuple.query_type) throw PreconditionError("sdd tuples carry no query type");
    return templates.render("sdd_generate_p1", values);
  }
  if (!tuple.query_type) throw PreconditionError("sda tuples need a query type");
  const QueryType* qt = catalog.find_query_type(*tuple.query_type);
  if (qt == nullptr) throw PreconditionError("query type '" + *tuple.query_type + "' is not in the catalog");
  values["query_type"] = qt->description.empty() ? qt->name : qt->name + ": " + qt->description;
  values["query_str"] = qt->name;
  return templates.render("sda_generate_p1", values);
}

bool ends_mid_sentence(std::string_view text) {
  text = trim(text);
  if (text.empty()) return true;
  static constexpr std::string_view kClosers[] = {"\xE2\x80\x9D", "\xE2\x80\x99", "\xE2\x80\xA6"};  // ” ’ …
  for (auto c : kClosers) {
    if (text.ends_with(c)) return false;
  }
  switch (text.back()) {
    case '.': case '!': case '?': case ':': case '"': case '\'':
    case ')': case ']': case '}': case '`': case '*':
      return false;
    default:
      return true;
  }
}

bool detect_truncation(const ChatResponse& response, TruncationPolicy policy) {
  if (response.finish_reason == FinishReason::kLength) return true;
  return policy == TruncationPolicy::kFinishReasonOrHeuristic && ends_mid_sentence(response.content);
}

std::pair<std::string, std::string> parse_example(std::string_view final_text) {
  static constexpr std::string_view kInstruction = "### Instruction:";
  static constexpr std::string_view kResponse = "### Response:";
  const auto ins = final_text.rfind(kInstruction);
  if (ins == std::string_view::npos) throw ParseError("final turn has no \"### Instruction:\" marker");
  const auto body = final_text.substr(ins + kInstruction.size());
  const auto res = body.rfind(kResponse);
  if (res == std::string_view::npos) throw ParseError("final turn has no \"### Response:\" after the instruction");
  std::string instruction(trim(body.substr(0, res)));
  std::string response(trim(body.substr(res + kResponse.size())));
  if (instruction.empty()) throw ParseError("instruction section is empty");
  if (response.empty()) throw ParseError("response section is empty");
  return {std::move(instruction), std::move(response)};
}

// ---- protocol ----

ProtocolResult run_protocol(const SkillTuple& tuple, const SkillCatalog& catalog, Provider& provider,
                            const GenerationConfig& config) {
  if (config.max_parse_retries < 0) throw ValidationError("max_parse_retries must be non-negative");
  const auto& lib = config.templates ? *config.templates : TemplateLibrary::shipped();
  const std::string task_id = generation_task_id(tuple.task_index);

  ConversationTranscript tr;
  tr.example_id = example_id(config.run_id, tuple.task_index);
  tr.task_index = tuple.task_index;
  tr.messages.push_back({Role::kUser, render_prompt1(tuple, catalog, lib)});

  auto turn = [&](double temperature) {
    ChatRequest request;
    request.messages = tr.messages;
    request.temperature = temperature;
    request.max_output_tokens = config.max_output_tokens;
    request.task_id = task_id;
    ChatResponse r = provider.complete_chat(std::move(request));
    tr.usage.push_back({r.prompt_tokens, r.completion_tokens, r.finish_reason, r.attempts});
    tr.messages.push_back({Role::kAssistant, r.content});
    if (trim(r.content).empty()) throw AbandonedProtocol("teacher returned an empty reply", tr);
    return r;
  };
  auto user = [&](std::string_view name) { tr.messages.push_back({Role::kUser, lib.render(name, {})}); };

  ChatResponse reply = turn(config.temperature);
  if (detect_truncation(reply, config.truncation_policy)) {
    user("generate_p2");
    reply = turn(config.temperature);
    ++tr.truncation_fix_applied;
  }
  if (config.refine) {
    user("generate_p3");
    turn(config.temperature);
    tr.critique_applied = true;
    user("generate_p4");
    reply = turn(config.temperature);
    if (detect_truncation(reply, config.truncation_policy)) {
      user("generate_p5");
      reply = turn(config.temperature);
      ++tr.truncation_fix_applied;
    }
  }

  std::optional<std::pair<std::string, std::string>> parsed;
  for (;;) {
    try {
      parsed = parse_example(tr.messages.back().content);
      break;
    } catch (const ParseError& e) {
      if (tr.parse_retries >= config.max_parse_retries) {
        throw AbandonedProtocol(tr.example_id + ": " + e.what() + " after " + std::to_string(tr.parse_retries) +
                                    " restatement turn(s)",
                                tr);
      }
    }
    user("generate_parse_reminder");
    turn(0.0);
    ++tr.parse_retries;
  }

  ProtocolResult out;
  auto& ex = out.example;
  ex.id = tr.example_id;
  ex.instruction = std::move(parsed->first);
  ex.response = std::move(parsed->second);
  ex.skills = tuple.skills;
  ex.query_type = tuple.query_type;
  ex.mode = catalog.mode();
  ex.k = tuple.skills.size();
  ex.teacher = provider.config().model_id;
  ex.refined = tr.critique_applied;
  ex.created_at = config.created_at;
  validate_example(ex);
  out.transcript = std::move(tr);
  return out;
}

GenerationRun generate_dataset(const std::vector<SkillTuple>& tuples, const SkillCatalog& catalog, Provider& provider,
                               const GenerationConfig& config) {
  struct Slot {
    std::optional<GeneratedExample> example;
    std::optional<ConversationTranscript> transcript;
    std::optional<AbandonedExample> abandoned;
  };
  std::vector<Slot> slots(tuples.size());
  parallel_for(tuples.size(), config.workers, [&](std::size_t i) {
    try {
      auto r = run_protocol(tuples[i], catalog, provider, config);
      slots[i].example = std::move(r.example);
      slots[i].transcript = std::move(r.transcript);
    } catch (const AbandonedProtocol& e) {
      slots[i].transcript = e.transcript();
      slots[i].abandoned = AbandonedExample{tuples[i].task_index, e.transcript().example_id, e.what()};
    }
  });

  GenerationRun run;
  for (auto& s : slots) {
    if (s.example) run.examples.push_back(std::move(*s.example));
    if (s.transcript) run.transcripts.push_back(std::move(*s.transcript));
    if (s.abandoned) run.abandoned.push_back(std::move(*s.abandoned));
  }
  return run;
}

}  // namespace skillmix
