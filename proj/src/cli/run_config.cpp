#include "paraug/run_config.hpp"

#include "paraug/errors.hpp"
#include "paraug/text_util.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

namespace paraug {

namespace {

using Path = std::filesystem::path;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("setting " + std::string(key) + " expects a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

double to_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("setting " + std::string(key) + " expects a real number, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("setting " + std::string(key) + " expects a boolean, got '" + std::string(v) + "'");
}

Path to_path(std::string_view v, const Path& base) {
  Path p{std::string(v)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

std::string real_text(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view, const Path&)>;
using Getter = std::function<std::optional<std::string>(const RunConfig&)>;

struct Key {
  std::string name;
  Setter set;
  Getter get;  // empty: excluded from resolved settings
};

Key path_key(std::string name, Path RunConfig::*member) {
  return {name, [member](RunConfig& c, std::string_view, std::string_view v, const Path& b) { c.*member = to_path(v, b); },
          [member](const RunConfig& c) -> std::optional<std::string> { return (c.*member).string(); }};
}

Key opt_path_key(std::string name, std::optional<Path> RunConfig::*member) {
  return {name,
          [member](RunConfig& c, std::string_view, std::string_view v, const Path& b) {
            if (v.empty())
              (c.*member).reset();
            else
              c.*member = to_path(v, b);
          },
          [member](const RunConfig& c) -> std::optional<std::string> {
            return c.*member ? (c.*member)->string() : std::string();
          }};
}

template <typename T>
Key size_key(std::string name, T member) {
  return {name, [member](RunConfig& c, std::string_view k, std::string_view v, const Path&) { c.*member = to_size(k, v); },
          [member](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.*member); }};
}

template <typename T>
Key bool_key(std::string name, T member) {
  return {name, [member](RunConfig& c, std::string_view k, std::string_view v, const Path&) { c.*member = to_bool(k, v); },
          [member](const RunConfig& c) -> std::optional<std::string> { return bool_text(c.*member); }};
}

#define PARAUG_AUG_SIZE(field)                                                                                   \
  Key {                                                                                                        \
    #field, [](RunConfig& c, std::string_view k, std::string_view v, const Path&) { c.augment.field = to_size(k, v); }, \
        [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.augment.field); }       \
  }
#define PARAUG_AUG_REAL(field)                                                                                   \
  Key {                                                                                                        \
    #field, [](RunConfig& c, std::string_view k, std::string_view v, const Path&) { c.augment.field = to_real(k, v); }, \
        [](const RunConfig& c) -> std::optional<std::string> { return real_text(c.augment.field); }            \
  }
#define PARAUG_AUG_BOOL(field)                                                                                   \
  Key {                                                                                                        \
    #field, [](RunConfig& c, std::string_view k, std::string_view v, const Path&) { c.augment.field = to_bool(k, v); }, \
        [](const RunConfig& c) -> std::optional<std::string> { return bool_text(c.augment.field); }            \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back(path_key("source_corpus", &RunConfig::source_corpus));
    k.push_back(path_key("target_corpus", &RunConfig::target_corpus));
    k.push_back(opt_path_key("mono_source", &RunConfig::mono_source));
    k.push_back(opt_path_key("mono_target", &RunConfig::mono_target));
    k.push_back(opt_path_key("embeddings_source", &RunConfig::embeddings_source));
    k.push_back(opt_path_key("embeddings_target", &RunConfig::embeddings_target));
    k.push_back(opt_path_key("annotations_source", &RunConfig::annotations_source));
    k.push_back(opt_path_key("annotations_target", &RunConfig::annotations_target));
    k.push_back(opt_path_key("dictionary", &RunConfig::dictionary));
    k.push_back(opt_path_key("reference_source", &RunConfig::reference_source));
    k.push_back(opt_path_key("lm_source_arpa", &RunConfig::lm_source_arpa));
    k.push_back(opt_path_key("lm_target_arpa", &RunConfig::lm_target_arpa));
    k.push_back({"output_dir",
                 [](RunConfig& c, std::string_view, std::string_view v, const Path& b) { c.output_dir = to_path(v, b); },
                 {}});
    k.push_back({"workers",
                 [](RunConfig& c, std::string_view key, std::string_view v, const Path&) {
                   c.workers = std::max<std::size_t>(1, to_size(key, v));
                 },
                 {}});
    k.push_back({"log_level", [](RunConfig& c, std::string_view, std::string_view v, const Path&) { c.log_level = v; }, {}});

    k.push_back(PARAUG_AUG_SIZE(t_r));
    k.push_back(PARAUG_AUG_REAL(alpha_src));
    k.push_back(PARAUG_AUG_REAL(alpha_tgt));
    k.push_back(PARAUG_AUG_BOOL(use_sent_sim));
    k.push_back(PARAUG_AUG_SIZE(sent_k));
    k.push_back(PARAUG_AUG_BOOL(use_word_sim));
    k.push_back(PARAUG_AUG_REAL(word_sim_min));
    k.push_back(PARAUG_AUG_BOOL(use_pos));
    k.push_back(PARAUG_AUG_BOOL(use_morph));
    k.push_back(PARAUG_AUG_REAL(lm_threshold));
    k.push_back(PARAUG_AUG_SIZE(max_per_item));
    k.push_back(PARAUG_AUG_SIZE(max_span));
    k.push_back(PARAUG_AUG_SIZE(soft_cap));
    k.push_back({"source_role",
                 [](RunConfig& c, std::string_view, std::string_view v, const Path&) {
                   c.augment.source_role = parse_language_role(v);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return std::string(to_string(c.augment.source_role));
                 }});
    k.push_back({"dict_scope",
                 [](RunConfig& c, std::string_view, std::string_view v, const Path&) {
                   c.augment.dict_scope = parse_dictionary_scope(v);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return std::string(to_string(c.augment.dict_scope));
                 }});
    k.push_back({"ablation",
                 [](RunConfig& c, std::string_view, std::string_view v, const Path&) {
                   apply_ablation_preset(c.augment, v);
                   c.ablation = std::string(v);
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return c.ablation.value_or("custom"); }});
    k.push_back(size_key("em_iterations", &RunConfig::em_iterations));
    k.push_back(size_key("lm_min_count", &RunConfig::lm_min_count));
    k.push_back(bool_key("filter_digits", &RunConfig::filter_digits));
    k.push_back(bool_key("filter_punctuation", &RunConfig::filter_punctuation));
    k.push_back(bool_key("filter_embeddings", &RunConfig::filter_embeddings));
    k.push_back(bool_key("filter_annotations", &RunConfig::filter_annotations));
    return k;
  }();
  return keys;
}

#undef PARAUG_AUG_SIZE
#undef PARAUG_AUG_REAL
#undef PARAUG_AUG_BOOL

} // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.push_back(k.name);
    return out;
  }();
  return names;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value, const Path& base_dir) {
  for (const auto& k : key_table()) {
    if (k.name == key) {
      k.set(config, key, value, base_dir);
      return;
    }
  }
  throw ConfigError("unknown config key: " + std::string(key));
}

void apply_settings_text(RunConfig& config, std::string_view text, const Path& base_dir) {
  const auto lines = split_lines(text);
  // ablation is applied first so explicit gate keys in the same file win.
  std::vector<std::pair<std::string, std::string>> settings;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) throw ParseError("config line needs key = value", i + 1);
    auto key = trim(std::string_view(trimmed).substr(0, eq));
    auto value = trim(std::string_view(trimmed).substr(eq + 1));
    if (key == "ablation")
      settings.insert(settings.begin(), {key, value});
    else
      settings.emplace_back(key, value);
  }
  for (const auto& [k, v] : settings) apply_setting(config, k, v, base_dir);
}

RunConfig load_run_config(const Path& path) {
  if (!std::filesystem::exists(path)) throw InputError("config file not found: " + path.string());
  RunConfig config;
  apply_settings_text(config, read_file(path.string()), path.parent_path());
  return config;
}

std::map<std::string, std::string> resolved_settings(const RunConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& k : key_table())
    if (k.get) out[k.name] = *k.get(config);
  return out;
}

void require_paths(const RunConfig& config, const std::vector<std::string>& keys) {
  const auto settings = resolved_settings(config);
  for (const auto& key : keys) {
    auto it = settings.find(key);
    if (it == settings.end() || it->second.empty()) throw InputError("missing required setting: " + key);
    if (!std::filesystem::exists(it->second)) throw InputError("input file not found: " + it->second);
  }
}

} // namespace paraug
