#include "paraug/commands.hpp"

#include "paraug/errors.hpp"
#include "paraug/fingerprint.hpp"
#include "paraug/provenance.hpp"
#include "paraug/text_util.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>

namespace paraug::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

AugmentMode parse_augment_mode(std::string_view s) {
  if (s == "rare") return AugmentMode::rare;
  if (s == "dict") return AugmentMode::dict;
  if (s == "both") return AugmentMode::both;
  throw ConfigError("unknown augment mode: " + std::string(s));
}

std::string_view to_string(AugmentMode mode) {
  switch (mode) {
  case AugmentMode::rare: return "rare";
  case AugmentMode::dict: return "dict";
  case AugmentMode::both: return "both";
  }
  return "rare";
}

fs::path cache_dir(const RunConfig& config) { return config.output_dir / "cache"; }

namespace {

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const StaleCacheError& e) {
    spdlog::error("{}", e.what());
    return exit_stale_cache;
  } catch (const NumericError& e) {
    spdlog::error("numeric failure: {}", e.what());
    return exit_numeric_error;
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return exit_input_error;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return exit_input_error;
  }
}

void log_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) spdlog::warn("{}", w);
}

// A cached artifact. Its key hashes the input files together with the build parameters.
struct Artifact {
  std::string name;
  std::string file;
  std::vector<fs::path> inputs;
  json params;
};

std::string double_text(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<Artifact> cache_artifacts(const RunConfig& c) {
  std::vector<Artifact> out;
  out.push_back({"alignment",
                 "alignment.t1.tsv",
                 {c.source_corpus, c.target_corpus},
                 json{{"model", "ibm1"}, {"direction", "src_given_tgt"}, {"em_iterations", c.em_iterations}}});
  const json lm_params{{"discount", double_text(TrigramModel::default_discount)}, {"min_count", c.lm_min_count}};
  if (!c.lm_source_arpa)
    out.push_back({"lm_source", "lm_source.counts.tsv", {c.mono_source.value_or(c.source_corpus)}, lm_params});
  if (!c.lm_target_arpa)
    out.push_back({"lm_target", "lm_target.counts.tsv", {c.mono_target.value_or(c.target_corpus)}, lm_params});
  if (c.embeddings_source)
    out.push_back({"embeddings_source", "embeddings_source.vec", {*c.embeddings_source},
                   json{{"alpha", double_text(c.augment.alpha_src)}}});
  if (c.embeddings_target)
    out.push_back({"embeddings_target", "embeddings_target.vec", {*c.embeddings_target},
                   json{{"alpha", double_text(c.augment.alpha_tgt)}}});
  return out;
}

std::string artifact_key(const Artifact& a) {
  json j{{"artifact", a.name}, {"params", a.params}, {"inputs", json::array()}};
  for (const auto& p : a.inputs) {
    if (!fs::exists(p)) throw InputError("input file not found: " + p.string());
    j["inputs"].push_back(sha256_file(p));
  }
  return sha256_hex(j.dump());
}

fs::path fingerprint_path(const RunConfig& c) { return cache_dir(c) / "fingerprint.json"; }

json read_fingerprint(const RunConfig& c) {
  const auto path = fingerprint_path(c);
  if (!fs::exists(path)) return json{{"artifacts", json::object()}};
  try {
    return json::parse(read_file(path.string()));
  } catch (const json::exception&) {
    return json{{"artifacts", json::object()}};
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << text;
}

void build_artifact(const RunConfig& c, const Artifact& a, const fs::path& out_path) {
  if (a.name == "alignment") {
    auto corpus = load_parallel_corpus(c.source_corpus, c.target_corpus);
    log_warnings(corpus.warnings);
    if (corpus.value.size() == 0) throw InputError("parallel corpus is empty after removing blank lines");
    const auto table = train_ibm1(corpus.value, c.em_iterations, AlignDirection::src_given_tgt, c.workers);
    const auto& ll = table.log_likelihood();
    for (std::size_t i = 1; i < ll.size(); ++i)
      spdlog::info("IBM1 iteration {}: log-likelihood {:.6f} (delta {:.6f})", i, ll[i], ll[i] - ll[i - 1]);
    save_translation_table(out_path, table);
  } else if (a.name == "lm_source" || a.name == "lm_target") {
    auto mono = load_monolingual(a.inputs.front());
    log_warnings(mono.warnings);
    if (mono.value.empty()) throw InputError("monolingual corpus is empty: " + a.inputs.front().string());
    save_lm_counts(out_path, train_lm(mono.value, c.lm_min_count));
  } else {
    auto table = load_embeddings(a.inputs.front());
    log_warnings(table.warnings);
    const double alpha = a.name == "embeddings_source" ? c.augment.alpha_src : c.augment.alpha_tgt;
    write_embeddings(out_path, postprocess_alpha(table.value, alpha));
  }
}

} // namespace

PrepareReport prepare_cache(const RunConfig& c) {
  require_paths(c, {"source_corpus", "target_corpus", "embeddings_source"});
  c.augment.validate();
  fs::create_directories(cache_dir(c));

  json fp = read_fingerprint(c);
  PrepareReport report;
  for (const auto& a : cache_artifacts(c)) {
    const auto key = artifact_key(a);
    const auto out_path = cache_dir(c) / a.file;
    const auto& known = fp["artifacts"];
    if (known.contains(a.name) && known[a.name].value("key", "") == key && fs::exists(out_path)) {
      spdlog::info("{}: up to date", a.name);
      report.reused.push_back(a.name);
      continue;
    }
    spdlog::info("{}: building", a.name);
    build_artifact(c, a, out_path);
    fp["artifacts"][a.name] = json{{"file", a.file}, {"key", key}, {"params", a.params}};
    write_text(fingerprint_path(c), fp.dump(2) + "\n");
    report.rebuilt.push_back(a.name);
  }
  return report;
}

void check_cache(const RunConfig& c) {
  const json fp = read_fingerprint(c);
  for (const auto& a : cache_artifacts(c)) {
    const auto& known = fp["artifacts"];
    if (!known.contains(a.name) || !fs::exists(cache_dir(c) / a.file))
      throw StaleCacheError("cached " + a.name + " is missing; run `paraug prepare` first");
    if (known[a.name].value("key", "") != artifact_key(a))
      throw StaleCacheError("cached " + a.name + " was built from different inputs or settings; rerun `paraug prepare`");
  }
}

namespace {

// Everything the augment and verify commands read.
struct LoadedResources {
  ParallelCorpus corpus;
  EmbeddingTable embeddings_src;
  TranslationTable alignment;
  std::unique_ptr<LanguageModel> lm_src;
  std::unique_ptr<LanguageModel> lm_tgt;
  std::optional<AnnotatedLexicon> lexicon_src;

  PipelineResources pipeline() const {
    return {corpus, embeddings_src, alignment, *lm_src, *lm_tgt, lexicon_src ? &*lexicon_src : nullptr};
  }
};

std::unique_ptr<LanguageModel> load_lm(const std::optional<fs::path>& arpa, const fs::path& counts) {
  if (arpa) return std::make_unique<ArpaModel>(import_arpa(*arpa));
  return std::make_unique<TrigramModel>(load_lm_counts(counts));
}

LoadedResources load_resources(const RunConfig& c) {
  require_paths(c, {"source_corpus", "target_corpus", "embeddings_source"});
  if (c.augment.use_pos && !c.annotations_source)
    throw ConfigError("syntactic gates need annotations_source");
  check_cache(c);

  LoadedResources r;
  auto corpus = load_parallel_corpus(c.source_corpus, c.target_corpus);
  log_warnings(corpus.warnings);
  r.corpus = std::move(corpus.value);
  r.embeddings_src = load_embeddings(cache_dir(c) / "embeddings_source.vec").value;
  r.alignment = load_translation_table(cache_dir(c) / "alignment.t1.tsv");
  r.lm_src = load_lm(c.lm_source_arpa, cache_dir(c) / "lm_source.counts.tsv");
  r.lm_tgt = load_lm(c.lm_target_arpa, cache_dir(c) / "lm_target.counts.tsv");
  if (c.annotations_source) {
    auto lex = load_annotations(*c.annotations_source);
    log_warnings(lex.warnings);
    r.lexicon_src = std::move(lex.value);
  }
  return r;
}

json reason_counts(const std::vector<ProvenanceEntry>& entries, const std::string& set) {
  std::map<std::string, std::size_t> counts;
  for (auto reason : all_reject_reasons()) counts[std::string(to_string(reason))] = 0;
  for (const auto& e : entries)
    if (e.set == set && e.record.rejection) ++counts[std::string(to_string(*e.record.rejection))];
  json j = json::object();
  for (const auto& [k, v] : counts) j[k] = v;
  return j;
}

int run_augment(const RunConfig& c, AugmentMode mode) {
  c.augment.validate();
  if (mode == AugmentMode::dict && c.augment.use_sent_sim)
    throw ConfigError("dictionary augmentation considers every sentence; use_sent_sim cannot be enabled in dict mode");
  if (mode != AugmentMode::rare) require_paths(c, {"dictionary"});

  const LoadedResources r = load_resources(c);
  const auto res = r.pipeline();

  struct SetRun {
    std::string name;
    std::size_t items = 0;
    AugmentResult result;
  };
  std::vector<SetRun> runs;

  if (mode != AugmentMode::dict) {
    const Vocabulary vocab = build_vocabulary(r.corpus.source);
    RareWordValidity validity;
    validity.reject_digits = c.filter_digits;
    validity.reject_punctuation = c.filter_punctuation;
    if (c.filter_embeddings)
      validity.in_embeddings = [&](const std::string& w) { return r.embeddings_src.contains(w); };
    if (c.filter_annotations && r.lexicon_src)
      validity.in_annotations = [&](const std::string& w) { return r.lexicon_src->contains(w); };
    const auto rare = extract_rare_words(vocab, r.corpus.source, c.augment.t_r, validity);
    spdlog::info("{} valid rare words at t_r={}", rare.size(), c.augment.t_r);
    runs.push_back({"rare_words", rare.size(), augment_rare_words(res, rare, c.augment, c.workers)});
  }
  if (mode != AugmentMode::rare) {
    auto dict = load_dictionary(*c.dictionary);
    log_warnings(dict.warnings);
    AugmentationConfig dict_config = c.augment;
    dict_config.use_sent_sim = false;
    runs.push_back({"dictionary", dict.value.size(), augment_dictionary(res, dict.value, dict_config, c.workers)});
  }

  std::vector<NamedSet> named;
  for (const auto& run : runs) named.push_back({run.name, run.result.accepted});
  const MergeResult merged = merge_and_dedup(r.corpus, named, c.augment.soft_cap);
  log_warnings(merged.warnings);

  std::vector<AugmentedSet> prov_sets;
  for (std::size_t i = 0; i < runs.size(); ++i) prov_sets.push_back({runs[i].name, &runs[i].result, &merged.kept[i]});
  const auto provenance = build_provenance(prov_sets);

  fs::create_directories(c.output_dir);
  write_sentences(c.output_dir / "augmented.src", merged.corpus.source);
  write_sentences(c.output_dir / "augmented.tgt", merged.corpus.target);
  write_provenance(c.output_dir / "provenance.jsonl", provenance);

  json manifest;
  manifest["mode"] = std::string(to_string(mode));
  json resolved = json::object();
  for (const auto& [k, v] : resolved_settings(c)) resolved[k] = v;
  manifest["resolved_config"] = resolved;
  json inputs = json::object();
  static const std::vector<std::string> input_keys{
      "source_corpus",      "target_corpus",      "mono_source",    "mono_target",    "embeddings_source",
      "embeddings_target",  "annotations_source", "annotations_target", "dictionary", "lm_source_arpa",
      "lm_target_arpa"};
  const auto settings = resolved_settings(c);
  for (const auto& k : input_keys) {
    const auto it = settings.find(k);
    if (it != settings.end() && !it->second.empty() && fs::exists(it->second)) inputs[k] = sha256_file(it->second);
  }
  manifest["input_fingerprints"] = inputs;
  json sets = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    sets.push_back(json{{"name", runs[i].name},
                        {"items", runs[i].items},
                        {"accepted", merged.sets[i].accepted},
                        {"deduped", merged.sets[i].deduped},
                        {"rejected_records", runs[i].result.rejected.size()},
                        {"rejected_by_reason", reason_counts(provenance, runs[i].name)}});
  }
  manifest["sets"] = sets;
  manifest["merged"] = json{{"base_pairs", merged.base_pairs},
                            {"synthetic_pairs", merged.synthetic_pairs},
                            {"total_pairs", merged.corpus.size()}};
  manifest["warnings"] = merged.warnings;
  manifest["notes"] = json{
      {"sentence_vectors", "mean of post-processed word vectors, not re-normalized"},
      {"candidate_word_selector", c.augment.use_word_sim ? "max cosine, rejected below word_sim_min"
                                                         : "max cosine, similarity not gated"},
      {"dictionary_candidates", "all sentences; sentence-similarity filtering not applied"}};
  write_text(c.output_dir / "manifest.json", manifest.dump(2) + "\n");

  for (std::size_t i = 0; i < runs.size(); ++i)
    spdlog::info("{}: {} items, {} accepted, {} deduplicated", runs[i].name, runs[i].items, merged.sets[i].accepted,
                 merged.sets[i].deduped);
  if (merged.synthetic_pairs == 0) spdlog::warn("no synthetic pairs accepted; see manifest rejected_by_reason");
  return exit_ok;
}

} // namespace

VerifyReport verify_run(const RunConfig& config, const std::optional<fs::path>& provenance_path) {
  const fs::path prov = provenance_path.value_or(config.output_dir / "provenance.jsonl");
  if (!fs::exists(prov)) throw InputError("provenance file not found: " + prov.string());

  // Gates come from the run's manifest when one sits next to the provenance.
  RunConfig gates = config;
  const auto manifest_path = prov.parent_path() / "manifest.json";
  if (fs::exists(manifest_path)) {
    try {
      const auto m = json::parse(read_file(manifest_path.string()));
      static const std::vector<std::string> gate_keys{"t_r",          "use_sent_sim", "sent_k",    "use_word_sim",
                                                      "word_sim_min", "use_pos",      "use_morph", "lm_threshold",
                                                      "max_per_item", "max_span",     "source_role"};
      for (const auto& k : gate_keys)
        if (m.at("resolved_config").contains(k))
          apply_setting(gates, k, m.at("resolved_config").at(k).get<std::string>());
    } catch (const json::exception& e) {
      throw InputError("unreadable manifest " + manifest_path.string() + ": " + e.what());
    }
  }

  const auto entries = read_provenance(prov);
  const LoadedResources r = load_resources(gates);
  const VerifyResources vr{r.corpus, r.embeddings_src, *r.lm_src, *r.lm_tgt,
                           r.lexicon_src ? &*r.lexicon_src : nullptr};
  VerifyReport report;
  for (const auto& e : entries)
    if (e.accepted) ++report.accepted_records;
  report.violations = verify_provenance(entries, vr, gates.augment);
  return report;
}

int cmd_stats(const RunConfig& c, std::ostream& out, const std::optional<fs::path>& json_path) {
  return guarded([&] {
    require_paths(c, {"source_corpus", "target_corpus"});
    auto corpus = load_parallel_corpus(c.source_corpus, c.target_corpus);
    log_warnings(corpus.warnings);
    std::optional<std::vector<DictionaryEntry>> dict;
    if (c.dictionary) {
      require_paths(c, {"dictionary"});
      auto d = load_dictionary(*c.dictionary);
      log_warnings(d.warnings);
      dict = std::move(d.value);
    }
    std::optional<Vocabulary> reference;
    if (c.reference_source) {
      require_paths(c, {"reference_source"});
      auto mono = load_monolingual(*c.reference_source);
      reference = build_vocabulary(mono.value);
    }
    const auto report = corpus_stats(corpus.value, c.augment.t_r, dict ? &*dict : nullptr,
                                     reference ? &*reference : nullptr);
    out << format_stats(report);
    const fs::path target = json_path.value_or(c.output_dir / "stats.json");
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    write_text(target, stats_to_json(report) + "\n");
    return exit_ok;
  });
}

int cmd_prepare(const RunConfig& c) {
  return guarded([&] {
    const auto report = prepare_cache(c);
    spdlog::info("prepare: {} rebuilt, {} up to date", report.rebuilt.size(), report.reused.size());
    return exit_ok;
  });
}

int cmd_augment(const RunConfig& c, AugmentMode mode) {
  return guarded([&] { return run_augment(c, mode); });
}

int cmd_verify(const RunConfig& c, const std::optional<fs::path>& provenance) {
  return guarded([&] {
    const auto report = verify_run(c, provenance);
    if (report.violations.empty()) {
      spdlog::info("verify: {} accepted records, 0 violations", report.accepted_records);
      return exit_ok;
    }
    for (const auto& v : report.violations)
      spdlog::error("record {}: {} check failed: {}", v.record_id, v.check, v.detail);
    spdlog::error("verify: {} violation(s) in {} accepted records", report.violations.size(), report.accepted_records);
    return exit_verification_failed;
  });
}

namespace {

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  for (auto& ch : out)
    if (ch == '_') ch = '-';
  return out;
}

void setup_logging(const std::string& level) {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_color_mt("paraug");
    spdlog::set_default_logger(l);
    return l;
  }();
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::from_str(level));
}

} // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Pseudo-parallel corpus augmentation by rare-word and dictionary-term replacement"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> override_opts;
  std::string mode = "rare";
  std::string provenance;
  std::string stats_json;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Config file of key = value lines");
    for (const auto& key : config_keys()) {
      auto* opt = sub->add_option(flag_name(key), overrides[key], "Override config key " + key);
      override_opts[sub->get_name() + "/" + key] = opt;
    }
  };

  auto* stats = app.add_subcommand("stats", "Corpus, rare-word and dictionary statistics");
  add_common(stats);
  stats->add_option("--json", stats_json, "Where to write the JSON report (default <output_dir>/stats.json)");
  auto* prepare = app.add_subcommand("prepare", "Train aligner and LMs, post-process embeddings, fill the cache");
  add_common(prepare);
  auto* augment = app.add_subcommand("augment", "Generate the pseudo-parallel corpus");
  add_common(augment);
  augment->add_option("--mode", mode, "rare, dict or both")->check(CLI::IsMember({"rare", "dict", "both"}));
  auto* verify = app.add_subcommand("verify", "Re-check every accepted record against the enabled gates");
  add_common(verify);
  verify->add_option("--provenance", provenance, "Provenance JSONL (default <output_dir>/provenance.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_input_error;
  }

  CLI::App* active = app.get_subcommands().front();
  RunConfig config;
  setup_logging("info");
  const int loaded = guarded([&] {
    if (!config_path.empty()) config = load_run_config(config_path);
    auto given = [&](const std::string& key) { return override_opts.at(active->get_name() + "/" + key)->count() > 0; };
    if (given("ablation")) apply_setting(config, "ablation", overrides["ablation"]);
    for (const auto& key : config_keys())
      if (key != "ablation" && given(key)) apply_setting(config, key, overrides[key]);
    return exit_ok;
  });
  if (loaded != exit_ok) return loaded;
  setup_logging(config.log_level);

  const std::string name = active->get_name();
  if (name == "stats")
    return cmd_stats(config, std::cout, stats_json.empty() ? std::nullopt : std::optional<fs::path>(stats_json));
  if (name == "prepare") return cmd_prepare(config);
  if (name == "augment") return cmd_augment(config, parse_augment_mode(mode));
  return cmd_verify(config, provenance.empty() ? std::nullopt : std::optional<fs::path>(provenance));
}

} // namespace paraug::cli
