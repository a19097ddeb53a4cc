// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance <toy-fixture-dir>

#include "paraug/commands.hpp"
#include "paraug/embedding_space.hpp"
#include "paraug/provenance.hpp"
#include "paraug/trigram_lm.hpp"
#include "paraug/word_aligner.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace paraug;

namespace {

fs::path toy_dir;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0 && secs >= limit_seconds)
    o.require(false, "runtime " + std::to_string(secs) + " s over the " + std::to_string(limit_seconds) + " s limit");
  if (!o.pass) ++failures;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", secs);
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << buf << " s)";
  if (!o.detail.empty()) std::cout << ": " << o.detail;
  std::cout << std::endl;
}

class ScratchDir {
public:
  explicit ScratchDir(const std::string& tag) {
    static int n = 0;
    path_ = fs::temp_directory_path() / ("paraug-accept-" + tag + "-" + std::to_string(::getpid()) + "-" +
                                         std::to_string(n++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli(const fs::path& out, const std::string& command, std::vector<std::string> extra = {}) {
  std::vector<std::string> args{"paraug",  command, "-c", (toy_dir / "toy.conf").string(), "--output-dir",
                                out.string(), "--log-level", "warn"};
  args.insert(args.end(), extra.begin(), extra.end());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

nlohmann::json manifest(const fs::path& out) { return nlohmann::json::parse(slurp(out / "manifest.json")); }

Sentence sent(std::size_t id, const std::string& line) {
  Sentence s{id, {}};
  std::istringstream in(line);
  for (std::string w; in >> w;) s.tokens.push_back(w);
  return s;
}

std::vector<Sentence> random_sentences(std::mt19937_64& rng, std::size_t count, std::size_t vocab,
                                       std::size_t max_len) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < count; ++i) {
    Sentence s{i, {}};
    for (std::size_t n = 1 + rng() % max_len; n > 0; --n) s.tokens.push_back("w" + std::to_string(rng() % vocab));
    out.push_back(std::move(s));
  }
  return out;
}

// Criteria.

void em_correctness(Outcome& o) {
  ParallelCorpus c;
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"the house", "das haus"}, {"the book", "das buch"}, {"a book", "ein buch"}};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    c.source.push_back(sent(i, pairs[i].first));
    c.target.push_back(sent(i, pairs[i].second));
  }
  for (auto dir : {AlignDirection::tgt_given_src, AlignDirection::src_given_tgt}) {
    const auto t = train_ibm1(c, 20, dir);
    if (dir == AlignDirection::tgt_given_src) {
      o.require(t.prob("haus", "house") > 0.9, "t(haus|house) = " + std::to_string(t.prob("haus", "house")));
      o.require(t.prob("buch", "book") > 0.9, "t(buch|book) = " + std::to_string(t.prob("buch", "book")));
    }
    const auto& ll = t.log_likelihood();
    o.require(ll.size() == 21, "expected 21 log-likelihood values");
    for (std::size_t i = 1; i < ll.size(); ++i) o.require(ll[i] >= ll[i - 1] - 1e-9, "log-likelihood decreased");
    std::map<std::string, double> sums;
    t.for_each([&](const std::string&, const std::string& cond, double p) { sums[cond] += p; });
    for (const auto& [cond, s] : sums) o.require(std::abs(s - 1.0) <= 1e-6, "t(.|" + cond + ") sums to " + std::to_string(s));
  }
}

void lm_normalization(Outcome& o) {
  std::mt19937_64 rng(7);
  const auto mono = random_sentences(rng, 400, 50, 12);
  const auto model = train_lm(mono);
  const auto words = model.predictable_tokens();
  auto histories = model.vocab();
  histories.push_back("unseen-history");
  o.require(model.vocab().size() <= 50 + 3, "vocabulary above 50 tokens");
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& u : histories)
    for (const auto& v : histories) {
      double sum = 0.0;
      for (const auto& w : words) {
        const double p = model.prob(u, v, w);
        o.require(p > 0.0 && p <= 1.0, "probability outside (0,1]");
        sum += p;
      }
      worst = std::max(worst, std::abs(sum - 1.0));
      ++checked;
    }
  o.require(worst <= 1e-6, "worst deviation " + std::to_string(worst));
  if (o.pass) o.detail = std::to_string(checked) + " histories, max |sum-1| = " + sci(worst);
}

void alpha_spectrum(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    EmbeddingTable table(8);
    for (int r = 0; r < 50; ++r) {
      std::vector<double> v(8);
      for (auto& x : v) x = g(rng);
      table.add("t" + std::to_string(r), v);
    }
    Eigen::MatrixXd x(50, 8);
    for (int r = 0; r < 50; ++r) {
      const auto row = table.row(static_cast<std::size_t>(r));
      for (int c = 0; c < 8; ++c) x(r, c) = row[static_cast<std::size_t>(c)];
      x.row(r).normalize();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> base(x.transpose() * x);
    for (double alpha : {-0.5, -0.15, 0.0, 0.15, 1.0}) {
      const auto out = postprocess_alpha(table, alpha);
      Eigen::MatrixXd y(50, 8);
      for (int r = 0; r < 50; ++r)
        for (int c = 0; c < 8; ++c) y(r, c) = out.row(static_cast<std::size_t>(r))[static_cast<std::size_t>(c)];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> got(y.transpose() * y);
      std::vector<double> expected;
      for (int i = 0; i < 8; ++i) expected.push_back(std::pow(std::max(base.eigenvalues()(i), 1e-10), alpha));
      std::sort(expected.begin(), expected.end());
      for (int i = 0; i < 8; ++i) {
        const double rel = std::abs(got.eigenvalues()(i) - expected[static_cast<std::size_t>(i)]) /
                           expected[static_cast<std::size_t>(i)];
        worst = std::max(worst, rel);
      }
      if (alpha == 1.0)
        for (std::size_t a = 0; a < 50; ++a)
          for (std::size_t b = 0; b < 50; ++b)
            o.require(std::abs(cosine(out.row(a), out.row(b)) - cosine(table.row(a), table.row(b))) <= 1e-6,
                      "alpha=1 changed a cosine");
    }
  }
  o.require(worst <= 1e-6, "worst relative eigenvalue error " + sci(worst));
  if (o.pass) o.detail = "max relative eigenvalue error " + sci(worst);
}

void gate_soundness(Outcome& o) {
  ScratchDir out("gates");
  o.require(cli(out.path(), "prepare") == 0, "prepare failed");
  for (const auto& preset : ablation_presets()) {
    o.require(cli(out.path(), "augment", {"--mode", "both", "--ablation", preset}) == 0, preset + ": augment failed");
    o.require(cli(out.path(), "verify") == 0, preset + ": verify reported violations");
  }
  // Mutation: lower the recorded target LM ratio of one accepted record.
  const auto prov = out.path() / "provenance.jsonl";
  std::vector<std::string> lines;
  {
    std::ifstream in(prov);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  bool mutated = false;
  for (auto& l : lines) {
    auto e = provenance_from_json_line(l);
    if (!e.accepted) continue;
    e.record.lm_ratio_tgt = *e.record.lm_ratio_tgt * 0.5;
    l = to_json_line(e);
    mutated = true;
    break;
  }
  o.require(mutated, "no accepted record to mutate");
  {
    std::ofstream f(prov, std::ios::trunc);
    for (const auto& l : lines) f << l << '\n';
  }
  o.require(cli(out.path(), "verify") == cli::exit_verification_failed, "mutated provenance did not exit 5");
}

void monotonicity(Outcome& o) {
  ScratchDir out("mono");
  o.require(cli(out.path(), "prepare") == 0, "prepare failed");
  const std::vector<std::string> chain{"off", "wordSim", "wordSim_pos", "wordSim_pos_morph"};
  // Frozen after hand-checking individual records of the bundled fixture.
  const std::map<std::string, std::map<std::string, int>> golden{
      {"rare", {{"off", 75}, {"wordSim", 69}, {"wordSim_pos", 69}, {"wordSim_pos_morph", 67}}},
      {"dict", {{"off", 86}, {"wordSim", 85}, {"wordSim_pos", 79}, {"wordSim_pos_morph", 74}}}};
  std::string summary;
  for (const auto& [mode, expected] : golden) {
    int previous = -1;
    summary += (summary.empty() ? "" : "; ") + mode;
    for (const auto& preset : chain) {
      o.require(cli(out.path(), "augment", {"--mode", mode, "--ablation", preset}) == 0, "augment failed");
      const auto m = manifest(out.path());
      const int n = m["sets"][0]["accepted"].get<int>();
      const std::size_t items = m["sets"][0]["items"].get<std::size_t>();
      o.require(mode == "rare" ? items >= 20 : items >= 30, mode + ": too few items in the fixture");
      o.require(m["merged"]["base_pairs"].get<int>() >= 200, "fewer than 200 sentence pairs");
      o.require(previous < 0 || n <= previous, mode + " " + preset + " increased the accepted count");
      o.require(n == expected.at(preset), mode + " " + preset + ": " + std::to_string(n) + " accepted, golden " +
                                              std::to_string(expected.at(preset)));
      previous = n;
      summary += " " + std::to_string(n);
    }
  }
  if (o.pass) o.detail = summary;
}

void dictionary_contract(Outcome& o) {
  ScratchDir out("dict");
  o.require(cli(out.path(), "prepare") == 0, "prepare failed");
  o.require(cli(out.path(), "augment", {"--mode", "dict", "--use-sent-sim", "true"}) == cli::exit_input_error,
            "sentence similarity in dict mode was not refused");
  o.require(!fs::exists(out.path() / "manifest.json"), "refused run still wrote outputs");

  // Without a cap every covered entry must visit every sentence exactly once.
  o.require(cli(out.path(), "augment", {"--mode", "dict", "--max-per-item", "100000"}) == 0, "augment failed");
  const std::size_t n_sentences = manifest(out.path())["merged"]["base_pairs"].get<std::size_t>();
  std::map<std::string, std::multiset<std::size_t>> visited;
  std::ifstream in(out.path() / "provenance.jsonl");
  for (std::string l; std::getline(in, l);) {
    const auto e = provenance_from_json_line(l);
    o.require(!e.record.sent_sim, "dictionary record carries a sentence similarity");
    if (!e.record.base_sentence_id) continue;
    std::string key;
    for (const auto& t : e.record.item_surface) key += t + " ";
    visited[key].insert(*e.record.base_sentence_id);
  }
  o.require(!visited.empty(), "no dictionary entry reached candidate selection");
  for (const auto& [term, ids] : visited) {
    o.require(ids.size() == n_sentences, term + "visited " + std::to_string(ids.size()) + " sentences");
    o.require(std::set<std::size_t>(ids.begin(), ids.end()).size() == n_sentences, term + "repeated a sentence");
  }
}

void determinism(Outcome& o) {
  ScratchDir one("w1");
  ScratchDir eight("w8");
  for (const auto& [dir, workers] : {std::pair{&one, "1"}, std::pair{&eight, "8"}}) {
    o.require(cli(dir->path(), "prepare", {"--workers", workers}) == 0, "prepare failed");
    o.require(cli(dir->path(), "augment", {"--mode", "both", "--workers", workers}) == 0, "augment failed");
  }
  for (const char* f : {"augmented.src", "augmented.tgt", "provenance.jsonl", "manifest.json",
                        "cache/alignment.t1.tsv", "cache/embeddings_source.vec"})
    o.require(slurp(one.path() / f) == slurp(eight.path() / f), std::string(f) + " differs between 1 and 8 workers");
}

void defaults_parity(Outcome& o) {
  ScratchDir out("defaults");
  o.require(cli(out.path(), "prepare") == 0, "prepare failed");
  o.require(cli(out.path(), "augment") == 0, "augment failed");
  const auto cfg = manifest(out.path())["resolved_config"];
  o.require(cfg["t_r"] == "1", "t_r = " + cfg["t_r"].dump());
  o.require(cfg["alpha_src"] == "-0.15", "alpha_src = " + cfg["alpha_src"].dump());
  o.require(cfg["alpha_tgt"] == "0.15", "alpha_tgt = " + cfg["alpha_tgt"].dump());
  o.require(cfg["lm_threshold"] == "0.6", "lm_threshold = " + cfg["lm_threshold"].dump());
}

void format_round_trips(Outcome& o) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    std::set<AlignmentLink> links;
    for (std::size_t n = rng() % 12; n > 0; --n) links.insert({rng() % 20, rng() % 20});
    const SentenceAlignment a{{links.begin(), links.end()}};
    const auto text = export_pharaoh(a);
    o.require(import_pharaoh(text) == a && export_pharaoh(import_pharaoh(text)) == text, "Pharaoh mismatch");
  }

  ScratchDir dir("formats");
  const auto model = train_lm(random_sentences(rng, 60, 8, 7));
  export_arpa(model, dir.path() / "m.arpa");
  const auto arpa = import_arpa(dir.path() / "m.arpa");
  auto hist = model.vocab();
  hist.push_back("unseen");
  double worst = 0.0;
  for (const auto& u : hist)
    for (const auto& v : hist)
      for (const auto& w : model.predictable_tokens())
        worst = std::max(worst, std::abs(arpa.prob(u, v, w) - model.prob(u, v, w)));
  o.require(worst <= 1e-4, "ARPA deviation " + sci(worst));

  std::normal_distribution<double> g;
  EmbeddingTable table(6);
  for (int r = 0; r < 40; ++r) {
    std::vector<double> v(6);
    for (auto& x : v) x = g(rng);
    table.add("tok" + std::to_string(r), v);
  }
  write_embeddings(dir.path() / "e.vec", table);
  const auto back = load_embeddings(dir.path() / "e.vec").value;
  o.require(back.size() == table.size(), "embedding row count changed");
  for (std::size_t r = 0; r < table.size(); ++r) {
    o.require(back.token(r) == table.token(r), "embedding token order changed");
    for (std::size_t c = 0; c < 6; ++c)
      o.require(std::abs(back.row(r)[c] - table.row(r)[c]) <= 5e-7, "embedding value beyond 6-decimal precision");
  }
  write_embeddings(dir.path() / "e2.vec", back);
  o.require(slurp(dir.path() / "e.vec") == slurp(dir.path() / "e2.vec"), "re-export is not byte-identical");
  if (o.pass) o.detail = "max ARPA deviation " + sci(worst);
}

} // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <toy-fixture-dir>\n";
    return 2;
  }
  toy_dir = fs::absolute(argv[1]);

  criterion("EM correctness", 1.0, em_correctness);
  criterion("LM normalization", 10.0, lm_normalization);
  criterion("Alpha transform spectrum", 5.0, alpha_spectrum);
  criterion("Gate soundness", 0, gate_soundness);
  criterion("Constraint monotonicity", 0, monotonicity);
  criterion("Dictionary-mode contract", 0, dictionary_contract);
  criterion("Determinism", 30.0, determinism);
  criterion("Defaults parity", 0, defaults_parity);
  criterion("Format round trips", 0, format_round_trips);

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
