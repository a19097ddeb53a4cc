#include "paraug/provenance.hpp"

#include "paraug/errors.hpp"
#include "paraug/text_util.hpp"

#include <json.hpp>

#include <fstream>

namespace paraug {

using json = nlohmann::ordered_json;

std::vector<ProvenanceEntry> build_provenance(std::span<const AugmentedSet> sets) {
  std::vector<ProvenanceEntry> out;
  for (const auto& set : sets) {
    const auto& accepted = set.result->accepted;
    for (std::size_t i = 0; i < accepted.size(); ++i) {
      ProvenanceEntry e;
      e.record_id = out.size();
      e.set = set.name;
      e.record = accepted[i].record;
      e.source_tokens = accepted[i].source_tokens;
      e.target_tokens = accepted[i].target_tokens;
      e.accepted = !set.kept || (*set.kept)[i];
      if (!e.accepted) e.record.rejection = RejectReason::duplicate;
      out.push_back(std::move(e));
    }
    for (const auto& rec : set.result->rejected) {
      ProvenanceEntry e;
      e.record_id = out.size();
      e.set = set.name;
      e.record = rec;
      out.push_back(std::move(e));
    }
  }
  return out;
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json span_json(const std::optional<TokenSpan>& s) {
  return s ? json::array({s->start, s->end}) : json(nullptr);
}

std::optional<TokenSpan> span_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_array() || j.size() != 2) throw ParseError("span must be a 2-element array");
  return TokenSpan{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

template <typename T>
std::optional<T> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

} // namespace

std::string to_json_line(const ProvenanceEntry& e) {
  const auto& r = e.record;
  json j;
  j["record_id"] = e.record_id;
  j["set"] = e.set;
  j["status"] = e.accepted ? "accepted" : "rejected";
  j["reason"] = r.rejection ? json(std::string(to_string(*r.rejection))) : json(nullptr);
  j["item_kind"] = std::string(to_string(r.item_kind));
  j["item_surface"] = r.item_surface;
  j["base_sentence_id"] = opt(r.base_sentence_id);
  j["source_span"] = span_json(r.source_span);
  j["source_replaced"] = r.source_replaced;
  j["source_inserted"] = r.source_inserted;
  j["target_span"] = span_json(r.target_span);
  j["target_replaced"] = r.target_replaced;
  j["target_inserted"] = r.target_inserted;
  j["word_sim"] = opt(r.word_sim);
  j["sent_sim"] = opt(r.sent_sim);
  j["syntactic"] = r.syntactic ? json{{"ok", r.syntactic->ok}, {"reason", r.syntactic->reason}} : json(nullptr);
  j["lm_ratio_src"] = opt(r.lm_ratio_src);
  j["lm_ratio_tgt"] = opt(r.lm_ratio_tgt);
  j["source_tokens"] = e.source_tokens;
  j["target_tokens"] = e.target_tokens;
  return j.dump();
}

ProvenanceEntry provenance_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    ProvenanceEntry e;
    e.record_id = j.at("record_id").get<std::size_t>();
    e.set = j.at("set").get<std::string>();
    e.accepted = j.at("status").get<std::string>() == "accepted";
    auto& r = e.record;
    if (!j.at("reason").is_null()) r.rejection = parse_reject_reason(j.at("reason").get<std::string>());
    r.item_kind = parse_item_kind(j.at("item_kind").get<std::string>());
    r.item_surface = j.at("item_surface").get<std::vector<std::string>>();
    r.base_sentence_id = opt_from<std::size_t>(j.at("base_sentence_id"));
    r.source_span = span_from(j.at("source_span"));
    r.source_replaced = j.at("source_replaced").get<std::vector<std::string>>();
    r.source_inserted = j.at("source_inserted").get<std::vector<std::string>>();
    r.target_span = span_from(j.at("target_span"));
    r.target_replaced = j.at("target_replaced").get<std::vector<std::string>>();
    r.target_inserted = j.at("target_inserted").get<std::vector<std::string>>();
    r.word_sim = opt_from<double>(j.at("word_sim"));
    r.sent_sim = opt_from<double>(j.at("sent_sim"));
    if (const auto& s = j.at("syntactic"); !s.is_null())
      r.syntactic = SyntacticVerdict{s.at("ok").get<bool>(), s.at("reason").get<std::string>()};
    r.lm_ratio_src = opt_from<double>(j.at("lm_ratio_src"));
    r.lm_ratio_tgt = opt_from<double>(j.at("lm_ratio_tgt"));
    e.source_tokens = j.at("source_tokens").get<std::vector<std::string>>();
    e.target_tokens = j.at("target_tokens").get<std::vector<std::string>>();
    return e;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed provenance record: ") + ex.what());
  }
}

void write_provenance(const std::filesystem::path& path, std::span<const ProvenanceEntry> entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  for (const auto& e : entries) out << to_json_line(e) << '\n';
}

std::vector<ProvenanceEntry> read_provenance(const std::filesystem::path& path) {
  const std::string buf = read_file(path.string());
  std::vector<ProvenanceEntry> out;
  const auto lines = split_lines(buf);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      out.push_back(provenance_from_json_line(lines[i]));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), i + 1);
    }
  }
  return out;
}

} // namespace paraug
