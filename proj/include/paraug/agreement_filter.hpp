#pragma once

#include "paraug/corpus_io.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace paraug {

struct TokenAnnotation {
  std::string pos;
  std::map<std::string, std::string> morph;  // feature key -> value

  bool operator==(const TokenAnnotation&) const = default;
};

// Type-level annotations: one entry per token string.
class AnnotatedLexicon {
public:
  // Returns false if the token already has an annotation (first one wins).
  bool add(const std::string& token, TokenAnnotation annotation);
  const TokenAnnotation* find(const std::string& token) const;
  bool contains(const std::string& token) const { return entries_.count(token) != 0; }
  std::size_t size() const noexcept { return entries_.size(); }

private:
  std::unordered_map<std::string, TokenAnnotation> entries_;
};

// TSV: token, pos, morph ("|"-separated key=value list, or "_").
Loaded<AnnotatedLexicon> load_annotations(const std::filesystem::path& path);

// Parses "Number=Plur|Case=Nom" or "_". Repeated keys keep their first value.
TokenAnnotation parse_annotation(std::string_view pos, std::string_view morph);

bool pos_agree(const TokenAnnotation& a, const TokenAnnotation& b);

// Every feature key present on both sides must carry the same value.
bool morph_agree(const TokenAnnotation& a, const TokenAnnotation& b);

// morph_agree restricted to the "Number" feature.
bool number_agree(const TokenAnnotation& a, const TokenAnnotation& b);

// morph_rich languages check full morphology; number_only checks Number.
enum class LanguageRole { morph_rich, number_only };
enum class SyntacticMode { off, pos, pos_morph };

std::string_view to_string(LanguageRole role);
std::string_view to_string(SyntacticMode mode);
LanguageRole parse_language_role(std::string_view s);

bool syntactic_ok(LanguageRole role, const TokenAnnotation& a, const TokenAnnotation& b, SyntacticMode mode);

// Which check failed, if any. Used for reason-coded rejections.
enum class SyntacticFailure { none, pos, morph };
SyntacticFailure syntactic_failure(LanguageRole role, const TokenAnnotation& a, const TokenAnnotation& b,
                                   SyntacticMode mode);

} // namespace paraug
