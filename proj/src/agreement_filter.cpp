#include "paraug/agreement_filter.hpp"

#include "paraug/errors.hpp"
#include "paraug/text_util.hpp"

namespace paraug {

bool AnnotatedLexicon::add(const std::string& token, TokenAnnotation annotation) {
  return entries_.emplace(token, std::move(annotation)).second;
}

const TokenAnnotation* AnnotatedLexicon::find(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

TokenAnnotation parse_annotation(std::string_view pos, std::string_view morph) {
  TokenAnnotation out;
  out.pos = std::string(pos);
  if (morph.empty() || morph == "_") return out;
  for (const auto& feature : split_fields(morph, '|')) {
    if (feature.empty()) continue;
    const auto eq = feature.find('=');
    if (eq == std::string::npos)
      out.morph.emplace(feature, "");
    else
      out.morph.emplace(feature.substr(0, eq), feature.substr(eq + 1));
  }
  return out;
}

Loaded<AnnotatedLexicon> load_annotations(const std::filesystem::path& path) {
  const std::string buf = read_file(path.string());
  if (auto bad = find_invalid_utf8(buf))
    throw InputError("invalid UTF-8 in " + path.string() + " at byte offset " + std::to_string(*bad));

  Loaded<AnnotatedLexicon> out;
  const auto lines = split_lines(buf);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i], '\t');
    const std::string where = "annotation line " + std::to_string(i + 1);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      out.warnings.push_back(where + ": need at least token and POS columns");
      continue;
    }
    auto annotation = parse_annotation(fields[1], fields.size() > 2 ? std::string_view(fields[2]) : "_");
    if (!out.value.add(fields[0], std::move(annotation)))
      out.warnings.push_back(where + ": duplicate token '" + fields[0] + "', first annotation kept");
  }
  return out;
}

bool pos_agree(const TokenAnnotation& a, const TokenAnnotation& b) { return a.pos == b.pos; }

bool morph_agree(const TokenAnnotation& a, const TokenAnnotation& b) {
  for (const auto& [key, value] : a.morph) {
    auto it = b.morph.find(key);
    if (it != b.morph.end() && it->second != value) return false;
  }
  return true;
}

bool number_agree(const TokenAnnotation& a, const TokenAnnotation& b) {
  auto x = a.morph.find("Number");
  auto y = b.morph.find("Number");
  return x == a.morph.end() || y == b.morph.end() || x->second == y->second;
}

std::string_view to_string(LanguageRole role) {
  return role == LanguageRole::morph_rich ? "morph_rich" : "number_only";
}

std::string_view to_string(SyntacticMode mode) {
  switch (mode) {
  case SyntacticMode::off: return "off";
  case SyntacticMode::pos: return "pos";
  case SyntacticMode::pos_morph: return "pos_morph";
  }
  return "off";
}

LanguageRole parse_language_role(std::string_view s) {
  if (s == "morph_rich") return LanguageRole::morph_rich;
  if (s == "number_only") return LanguageRole::number_only;
  throw ConfigError("unknown language role: " + std::string(s));
}

SyntacticFailure syntactic_failure(LanguageRole role, const TokenAnnotation& a, const TokenAnnotation& b,
                                   SyntacticMode mode) {
  if (mode == SyntacticMode::off) return SyntacticFailure::none;
  if (!pos_agree(a, b)) return SyntacticFailure::pos;
  if (mode == SyntacticMode::pos) return SyntacticFailure::none;
  const bool agree = role == LanguageRole::morph_rich ? morph_agree(a, b) : number_agree(a, b);
  return agree ? SyntacticFailure::none : SyntacticFailure::morph;
}

bool syntactic_ok(LanguageRole role, const TokenAnnotation& a, const TokenAnnotation& b, SyntacticMode mode) {
  return syntactic_failure(role, a, b, mode) == SyntacticFailure::none;
}

} // namespace paraug
