#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/dataset.hpp"
#include "medgnn/graph.hpp"

namespace medgnn {

using TokenStream = std::vector<std::string>;

// Lowercase alphabetic runs; everything else separates tokens.
inline TokenStream tokenize(std::string_view text) {
  TokenStream tokens;
  std::string cur;
  for (char ch : text) {
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

struct WanSpec {
  std::vector<std::string> function_words;
  int window = 10;        // co-appearance window, in tokens
  bool normalize = false; // row-normalize outgoing arc weights

  void validate() const {
    if (function_words.empty()) throw ValidationError("wan: empty function word list");
    if (window < 1) throw ValidationError("wan: window must be >= 1");
    std::set<std::string> seen;
    for (const std::string& w : function_words) {
      if (w.empty()) throw ValidationError("wan: empty function word");
      for (char ch : w)
        if (std::isupper(static_cast<unsigned char>(ch)))
          throw ValidationError("wan: function word '" + w + "' not lowercase");
      if (!seen.insert(w).second)
        throw ValidationError("wan: duplicate function word '" + w + "'");
    }
  }
};

// Word adjacency network: one node per function word; arc (u, v) counts the
// occurrences where v follows u within `window` tokens. Order matters, so the
// graph is directed. Pairs of the same word are skipped (no self-loops).
inline Graph build_wan(const std::vector<TokenStream>& texts, const WanSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(spec.function_words.size());
  std::map<std::string, int> word_id;
  for (int i = 0; i < n; ++i) word_id.emplace(spec.function_words[i], i);

  std::vector<double> counts(static_cast<std::size_t>(n) * n, 0.0);
  std::size_t occurrences = 0;
  std::vector<std::pair<int, int>> hits;  // (token position, word id)
  for (const TokenStream& text : texts) {
    hits.clear();
    for (std::size_t pos = 0; pos < text.size(); ++pos) {
      auto it = word_id.find(text[pos]);
      if (it != word_id.end()) hits.emplace_back(static_cast<int>(pos), it->second);
    }
    occurrences += hits.size();
    for (std::size_t a = 0; a < hits.size(); ++a)
      for (std::size_t b = a + 1; b < hits.size(); ++b) {
        if (hits[b].first - hits[a].first > spec.window) break;
        if (hits[a].second == hits[b].second) continue;
        counts[static_cast<std::size_t>(hits[a].second) * n + hits[b].second] += 1.0;
      }
  }
  if (occurrences == 0)
    throw ValidationError("wan: no function word occurs in the given texts");

  if (spec.normalize) {
    for (int u = 0; u < n; ++u) {
      double row_sum = 0.0;
      for (int v = 0; v < n; ++v) row_sum += counts[static_cast<std::size_t>(u) * n + v];
      if (row_sum > 0.0)
        for (int v = 0; v < n; ++v) counts[static_cast<std::size_t>(u) * n + v] /= row_sum;
    }
  }

  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      const double w = counts[static_cast<std::size_t>(u) * n + v];
      if (w != 0.0) edges.push_back({u, v, w});
    }
  return make_graph(n, std::move(edges), /*directed=*/true);
}

// Per-word occurrence counts divided by the excerpt length.
inline std::vector<double> excerpt_features(const TokenStream& excerpt, const WanSpec& spec) {
  spec.validate();
  if (excerpt.empty()) throw ValidationError("excerpt_features: empty excerpt");
  std::map<std::string, int> word_id;
  for (std::size_t i = 0; i < spec.function_words.size(); ++i)
    word_id.emplace(spec.function_words[i], static_cast<int>(i));
  std::vector<double> feat(spec.function_words.size(), 0.0);
  for (const std::string& tok : excerpt) {
    auto it = word_id.find(tok);
    if (it != word_id.end()) feat[it->second] += 1.0;
  }
  for (double& v : feat) v /= static_cast<double>(excerpt.size());
  return feat;
}

// ---------------------------------------------------------------------------
// Corpus I/O. A corpus is a directory with one subdirectory per author, each
// holding plain-text files; the function-word list is one word per line.

inline std::vector<std::string> load_function_words(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    TokenStream toks = tokenize(line);
    for (auto& t : toks) words.push_back(std::move(t));
  }
  return words;
}

inline std::vector<std::string> load_function_words_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open function word list: " + path.string());
  return load_function_words(in);
}

struct Corpus {
  std::vector<std::string> authors;
  std::vector<std::vector<TokenStream>> texts;  // per author, per file

  int author_index(const std::string& name) const {
    for (std::size_t i = 0; i < authors.size(); ++i)
      if (authors[i] == name) return static_cast<int>(i);
    throw ValidationError("corpus: unknown author '" + name + "'");
  }
};

inline Corpus load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("corpus: not a directory: " + dir.string());
  Corpus c;
  std::vector<fs::path> author_dirs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) author_dirs.push_back(entry.path());
  std::sort(author_dirs.begin(), author_dirs.end());
  for (const auto& adir : author_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(adir))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<TokenStream> texts;
    for (const auto& f : files) {
      std::ifstream in(f);
      if (!in) throw IoError("corpus: cannot open " + f.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      texts.push_back(tokenize(ss.str()));
    }
    if (!texts.empty()) {
      c.authors.push_back(adir.filename().string());
      c.texts.push_back(std::move(texts));
    }
  }
  if (c.authors.empty()) throw ValidationError("corpus: no author subdirectories with texts");
  return c;
}

// Splits each text into disjoint full chunks of excerpt_tokens tokens; the
// trailing remainder is dropped.
inline std::vector<TokenStream> chunk_excerpts(const std::vector<TokenStream>& texts,
                                               int excerpt_tokens) {
  if (excerpt_tokens < 1) throw ValidationError("chunk_excerpts: excerpt_tokens must be >= 1");
  std::vector<TokenStream> out;
  for (const TokenStream& text : texts) {
    std::size_t pos = 0;
    while (pos + excerpt_tokens <= text.size()) {
      out.emplace_back(text.begin() + pos, text.begin() + pos + excerpt_tokens);
      pos += excerpt_tokens;
    }
  }
  return out;
}

struct AuthorshipRound {
  Graph wan;       // built from the target author's training excerpts only
  Dataset train;   // label 1 = target author, label 0 = other
  Dataset test;
};

// One round of the authorship pipeline: chunk excerpts, balance the negative
// pool by seeded sampling, split stratified, build the WAN from positive
// training excerpts, then featurize both sides.
inline AuthorshipRound make_authorship_round(const Corpus& corpus, int target_author,
                                             const WanSpec& spec, int excerpt_tokens,
                                             double train_fraction, std::uint64_t seed) {
  spec.validate();
  if (target_author < 0 || target_author >= static_cast<int>(corpus.authors.size()))
    throw ValidationError("authorship: target author index out of range");

  std::vector<TokenStream> positives = chunk_excerpts(corpus.texts[target_author], excerpt_tokens);
  std::vector<TokenStream> negative_pool;
  for (std::size_t a = 0; a < corpus.texts.size(); ++a) {
    if (static_cast<int>(a) == target_author) continue;
    auto chunks = chunk_excerpts(corpus.texts[a], excerpt_tokens);
    for (auto& ch : chunks) negative_pool.push_back(std::move(ch));
  }
  if (positives.empty()) throw ValidationError("authorship: target author has no full excerpt");
  if (negative_pool.size() < positives.size())
    throw ValidationError("authorship: negative pool smaller than positive excerpt count");

  // Evenly balanced: as many negatives as positives, picked at random.
  Rng rng(mix_seed(seed, 0xa77));
  std::vector<int> neg_idx(negative_pool.size());
  std::iota(neg_idx.begin(), neg_idx.end(), 0);
  rng.shuffle(neg_idx);
  neg_idx.resize(positives.size());
  std::sort(neg_idx.begin(), neg_idx.end());

  // Pool order: positives first (label 1), then the sampled negatives.
  const int n_pos = static_cast<int>(positives.size());
  std::vector<const TokenStream*> pool;
  std::vector<int> labels;
  for (int i = 0; i < n_pos; ++i) {
    pool.push_back(&positives[i]);
    labels.push_back(1);
  }
  for (int idx : neg_idx) {
    pool.push_back(&negative_pool[idx]);
    labels.push_back(0);
  }

  auto [train_idx, test_idx] =
      split_indices(labels, 2, train_fraction, mix_seed(seed, 0x59117));

  std::vector<TokenStream> train_pos_texts;
  for (int i : train_idx)
    if (labels[i] == 1) train_pos_texts.push_back(*pool[i]);

  AuthorshipRound round;
  round.wan = build_wan(train_pos_texts, spec);
  auto fill = [&](Dataset& d, const std::vector<int>& idx) {
    d.n = static_cast<int>(spec.function_words.size());
    d.classes = 2;
    d.seed = seed;
    d.class_map = {"other", corpus.authors[target_author]};
    for (int i : idx) d.samples.push_back({excerpt_features(*pool[i], spec), labels[i]});
  };
  fill(round.train, train_idx);
  fill(round.test, test_idx);
  return round;
}

// ---------------------------------------------------------------------------
// Synthetic two-author corpus: both authors draw function words from skewed,
// oppositely ordered frequency profiles, embedded in filler vocabulary. Used
// to exercise the authorship pipeline end to end without a real text corpus.

struct SyntheticCorpusSpec {
  int function_words = 30;
  int filler_words = 400;
  int texts_per_author = 6;
  int tokens_per_text = 12000;
  double function_word_rate = 0.4;
};

inline std::vector<std::string> synthetic_function_words(int count) {
  std::vector<std::string> words;
  for (int i = 0; i < count; ++i) {
    std::string w = "fw";
    w.push_back(static_cast<char>('a' + i / 26));
    w.push_back(static_cast<char>('a' + i % 26));
    words.push_back(std::move(w));
  }
  return words;
}

inline void write_synthetic_corpus(const std::filesystem::path& dir, std::uint64_t seed,
                                   const SyntheticCorpusSpec& spec = {}) {
  namespace fs = std::filesystem;
  const std::vector<std::string> words = synthetic_function_words(spec.function_words);

  // Author profiles: harmonic weights, one ascending and one descending.
  std::vector<std::vector<double>> cdf(2, std::vector<double>(spec.function_words));
  for (int a = 0; a < 2; ++a) {
    double total = 0.0;
    for (int i = 0; i < spec.function_words; ++i) {
      const int rank = a == 0 ? i : spec.function_words - 1 - i;
      total += 1.0 / (1.0 + rank);
      cdf[a][i] = total;
    }
    for (double& v : cdf[a]) v /= total;
  }

  fs::create_directories(dir);
  {
    std::ofstream out(dir / "function_words.txt");
    if (!out) throw IoError("cannot write function word list under " + dir.string());
    for (const auto& w : words) out << w << '\n';
  }
  const char* author_names[2] = {"author_a", "author_b"};
  for (int a = 0; a < 2; ++a) {
    const fs::path adir = dir / author_names[a];
    fs::create_directories(adir);
    for (int t = 0; t < spec.texts_per_author; ++t) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(a) * 1000 + t));
      std::ofstream out(adir / ("text_" + std::to_string(t) + ".txt"));
      if (!out) throw IoError("cannot write synthetic text under " + adir.string());
      for (int k = 0; k < spec.tokens_per_text; ++k) {
        if (rng.uniform() < spec.function_word_rate) {
          const double u = rng.uniform();
          const auto it = std::lower_bound(cdf[a].begin(), cdf[a].end(), u);
          out << words[std::min<std::size_t>(it - cdf[a].begin(), words.size() - 1)];
        } else {
          // Alphabetic filler so the tokenizer keeps each word distinct.
          const std::size_t f = rng.uniform_index(static_cast<std::size_t>(spec.filler_words));
          out << "fl" << static_cast<char>('a' + f / 26) << static_cast<char>('a' + f % 26);
        }
        out << ((k + 1) % 16 == 0 ? '\n' : ' ');
      }
      out << '\n';
    }
  }
}

}  // namespace medgnn
