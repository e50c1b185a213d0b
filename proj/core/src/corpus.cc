#include "cepbp/corpus.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cepbp/rng.h"

namespace cepbp {

ParseError::ParseError(std::size_t line, const std::string& what)
    : CorpusError("line " + std::to_string(line) + ": " + what), line_(line) {}

std::int64_t SparseCorpus::doc_length(DocId d) const {
  std::int64_t n = 0;
  for (const Cell& c : doc(d)) n += c.count;
  return n;
}

void SparseCorpus::add_document(std::span<const Cell> doc_cells) {
  for (const Cell& c : doc_cells) {
    cells.push_back(c);
    total_tokens += c.count;
  }
  doc_offsets.push_back(static_cast<std::int64_t>(cells.size()));
}

void validate(const SparseCorpus& corpus) {
  if (corpus.doc_offsets.empty() || corpus.doc_offsets.front() != 0 ||
      corpus.doc_offsets.back() != corpus.nnz()) {
    throw CorpusError("corpus offsets are inconsistent");
  }
  if (!corpus.vocab.empty() &&
      corpus.vocab.size() != static_cast<std::size_t>(corpus.num_words)) {
    throw CorpusError("vocabulary size does not match W");
  }
  std::int64_t tokens = 0;
  std::vector<DocId> seen(corpus.num_words, -1);
  for (DocId d = 0; d < corpus.num_docs(); ++d) {
    if (corpus.doc_offsets[d + 1] <= corpus.doc_offsets[d]) {
      throw CorpusError("document " + std::to_string(d) + " is empty");
    }
    for (const Cell& c : corpus.doc(d)) {
      if (c.word < 0 || c.word >= corpus.num_words) {
        throw BoundsError("word id out of range in document " +
                          std::to_string(d));
      }
      if (c.count <= 0) throw ValueError("non-positive count");
      if (seen[c.word] == d) throw CorpusError("duplicate word in document");
      seen[c.word] = d;
      tokens += c.count;
    }
  }
  if (tokens != corpus.total_tokens) {
    throw CorpusError("total_tokens does not match cell counts");
  }
}

namespace {

// Splits a line into whitespace-separated fields without allocating.
std::size_t split_fields(const std::string& line, std::string_view* out,
                         std::size_t max_fields) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (n < max_fields) out[n] = std::string_view(line).substr(i, j - i);
    ++n;
    i = j;
  }
  return n;
}

std::int64_t parse_int(std::string_view field, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line_no, "expected an integer, got '" + std::string(field) + "'");
  }
  return value;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char ch) { return std::isspace(ch); });
}

}  // namespace

LoadResult load_uci_bow(std::istream& docword, std::istream* vocab) {
  LoadResult result;
  std::string line;
  std::size_t line_no = 0;
  std::int64_t header[3] = {0, 0, 0};
  int header_read = 0;
  while (header_read < 3 && std::getline(docword, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::string_view fields[2];
    if (split_fields(line, fields, 2) != 1) {
      throw ParseError(line_no, "header line must hold a single integer");
    }
    header[header_read++] = parse_int(fields[0], line_no);
  }
  if (header_read < 3) throw ParseError(line_no, "truncated header");
  if (header[0] < 0 || header[1] <= 0 || header[2] < 0 ||
      header[0] > INT32_MAX || header[1] > INT32_MAX) {
    throw ValueError("invalid header dimensions");
  }
  result.header_docs = static_cast<std::int32_t>(header[0]);
  result.header_words = static_cast<std::int32_t>(header[1]);
  result.header_nnz = header[2];

  std::vector<std::vector<Cell>> docs(result.header_docs);
  std::int64_t triples = 0;
  while (std::getline(docword, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::string_view fields[3];
    if (split_fields(line, fields, 3) != 3) {
      throw ParseError(line_no, "expected 'docID wordID count'");
    }
    const std::int64_t d = parse_int(fields[0], line_no);
    const std::int64_t w = parse_int(fields[1], line_no);
    const std::int64_t c = parse_int(fields[2], line_no);
    if (d < 1 || d > result.header_docs) {
      throw BoundsError("line " + std::to_string(line_no) + ": document id " +
                        std::to_string(d) + " outside [1, " +
                        std::to_string(result.header_docs) + "]");
    }
    if (w < 1 || w > result.header_words) {
      throw BoundsError("line " + std::to_string(line_no) + ": word id " +
                        std::to_string(w) + " outside [1, " +
                        std::to_string(result.header_words) + "]");
    }
    if (c <= 0 || c > INT32_MAX) {
      throw ValueError("line " + std::to_string(line_no) + ": count " +
                       std::to_string(c) + " must be positive");
    }
    docs[d - 1].push_back({static_cast<WordId>(w - 1), static_cast<std::int32_t>(c)});
    ++triples;
  }
  if (triples != result.header_nnz) {
    result.warnings.push_back("header declares " + std::to_string(result.header_nnz) +
                              " entries but " + std::to_string(triples) + " were read");
  }

  SparseCorpus& corpus = result.corpus;
  corpus.num_words = result.header_words;
  std::int64_t merged = 0;
  std::int32_t dropped = 0;
  for (auto& cells : docs) {
    if (cells.empty()) {
      ++dropped;
      continue;
    }
    std::stable_sort(cells.begin(), cells.end(),
                     [](const Cell& a, const Cell& b) { return a.word < b.word; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (out > 0 && cells[out - 1].word == cells[i].word) {
        const std::int64_t sum =
            static_cast<std::int64_t>(cells[out - 1].count) + cells[i].count;
        if (sum > INT32_MAX) throw ValueError("aggregated count overflows");
        cells[out - 1].count = static_cast<std::int32_t>(sum);
        ++merged;
      } else {
        cells[out++] = cells[i];
      }
    }
    cells.resize(out);
    corpus.add_document(cells);
  }
  if (merged > 0) {
    result.warnings.push_back("aggregated " + std::to_string(merged) +
                              " duplicate (doc, word) entries");
  }
  if (dropped > 0) {
    result.warnings.push_back("dropped " + std::to_string(dropped) +
                              " empty documents; D is now " +
                              std::to_string(corpus.num_docs()));
  }
  if (corpus.nnz() != result.header_nnz && triples == result.header_nnz) {
    result.warnings.push_back("nnz is " + std::to_string(corpus.nnz()) +
                              " after aggregation, header declared " +
                              std::to_string(result.header_nnz));
  }

  if (vocab != nullptr) {
    std::vector<std::string> words;
    while (std::getline(*vocab, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      words.push_back(line);
    }
    while (!words.empty() && words.back().empty() &&
           words.size() > static_cast<std::size_t>(corpus.num_words)) {
      words.pop_back();
    }
    if (words.size() < static_cast<std::size_t>(corpus.num_words)) {
      throw ValueError("vocabulary has " + std::to_string(words.size()) +
                       " entries, expected " + std::to_string(corpus.num_words));
    }
    if (words.size() > static_cast<std::size_t>(corpus.num_words)) {
      result.warnings.push_back("vocabulary truncated to W entries");
      words.resize(corpus.num_words);
    }
    corpus.vocab = std::move(words);
  }
  return result;
}

LoadResult load_uci_bow_file(const std::string& docword_path,
                             const std::string& vocab_path) {
  std::ifstream docword(docword_path);
  if (!docword) throw CorpusError("cannot open " + docword_path);
  if (vocab_path.empty()) return load_uci_bow(docword);
  std::ifstream vocab(vocab_path);
  if (!vocab) throw CorpusError("cannot open " + vocab_path);
  return load_uci_bow(docword, &vocab);
}

void write_uci_bow(std::ostream& out, const SparseCorpus& corpus) {
  out << corpus.num_docs() << '\n' << corpus.num_words << '\n' << corpus.nnz() << '\n';
  for (DocId d = 0; d < corpus.num_docs(); ++d) {
    for (const Cell& c : corpus.doc(d)) {
      out << (d + 1) << ' ' << (c.word + 1) << ' ' << c.count << '\n';
    }
  }
}

void write_vocab(std::ostream& out, const SparseCorpus& corpus) {
  for (const auto& w : corpus.vocab) out << w << '\n';
}

FrequencyTable word_frequencies(const SparseCorpus& corpus) {
  if (corpus.num_docs() == 0 || corpus.num_words == 0) {
    throw CorpusError("word_frequencies needs a non-empty corpus");
  }
  FrequencyTable ft;
  ft.freq.assign(corpus.num_words, 0);
  for (const Cell& c : corpus.cells) ft.freq[c.word] += c.count;
  ft.rank_order.resize(corpus.num_words);
  std::iota(ft.rank_order.begin(), ft.rank_order.end(), 0);
  std::stable_sort(ft.rank_order.begin(), ft.rank_order.end(),
                   [&](WordId a, WordId b) { return ft.freq[a] > ft.freq[b]; });
  return ft;
}

std::vector<std::int32_t> block_sizes(std::int32_t n, std::int32_t parts) {
  if (parts < 1 || parts > n) {
    throw std::invalid_argument("block count must lie in [1, " + std::to_string(n) + "]");
  }
  std::vector<std::int32_t> sizes(parts, n / parts);
  for (std::int32_t i = 0; i < n % parts; ++i) ++sizes[i];
  return sizes;
}

ZipfFit fit_zipf_points(std::span<const double> ranks, std::span<const double> freqs) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ranks.size() && i < freqs.size(); ++i) {
    if (freqs[i] > 0.0 && ranks[i] > 0.0) {
      xs.push_back(std::log(ranks[i]));
      ys.push_back(std::log(freqs[i]));
    }
  }
  if (xs.size() < 2) throw FitError("Zipf fit needs at least two usable points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw FitError("Zipf fit needs at least two distinct ranks");
  ZipfFit fit;
  const double slope = sxy / sxx;
  fit.slope_h = -slope;
  fit.intercept = my - slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

ZipfFit fit_zipf(const FrequencyTable& ft, std::int32_t n_points) {
  if (n_points < 2) throw FitError("Zipf fit needs n_points >= 2");
  const auto w = static_cast<std::int32_t>(ft.rank_order.size());
  if (n_points > w) throw FitError("more fit points than words");
  const auto sizes = block_sizes(w, n_points);
  std::vector<double> ranks, means;
  std::size_t pos = 0;
  for (std::int32_t r = 0; r < n_points; ++r) {
    double sum = 0.0;
    for (std::int32_t i = 0; i < sizes[r]; ++i) sum += static_cast<double>(ft.freq[ft.rank_order[pos++]]);
    ranks.push_back(r + 1.0);
    means.push_back(sum / sizes[r]);
  }
  return fit_zipf_points(ranks, means);
}

SparseCorpus select_documents(const SparseCorpus& corpus, std::span<const DocId> docs) {
  SparseCorpus out;
  out.num_words = corpus.num_words;
  out.vocab = corpus.vocab;
  for (DocId d : docs) out.add_document(corpus.doc(d));
  return out;
}

EvalSplit split_for_eval(const SparseCorpus& corpus, double test_doc_fraction,
                         double heldout_word_fraction, std::uint64_t seed) {
  if (!(test_doc_fraction > 0.0 && test_doc_fraction < 1.0)) {
    throw std::invalid_argument("test_doc_fraction must lie in (0, 1)");
  }
  if (!(heldout_word_fraction > 0.0 && heldout_word_fraction < 1.0)) {
    throw std::invalid_argument("heldout_word_fraction must lie in (0, 1)");
  }
  const DocId num_docs = corpus.num_docs();
  if (num_docs < 2) throw std::invalid_argument("split needs at least two documents");

  std::vector<DocId> candidates;
  for (DocId d = 0; d < num_docs; ++d) {
    if (corpus.doc_length(d) >= 2) candidates.push_back(d);
  }
  auto n_test = static_cast<std::int64_t>(std::llround(test_doc_fraction * num_docs));
  n_test = std::clamp<std::int64_t>(n_test, 1, num_docs - 1);
  if (n_test > static_cast<std::int64_t>(candidates.size())) {
    throw std::invalid_argument("not enough documents with two or more tokens to split");
  }

  Rng rng = make_rng(seed, streams::kSplit);
  // Partial Fisher-Yates with our own uniform draws for portability.
  for (std::int64_t i = 0; i < n_test; ++i) {
    const auto span = static_cast<std::uint64_t>(candidates.size() - i);
    const auto j = i + static_cast<std::int64_t>(rng() % span);
    std::swap(candidates[i], candidates[j]);
  }
  std::vector<DocId> test(candidates.begin(), candidates.begin() + n_test);
  std::sort(test.begin(), test.end());

  EvalSplit split;
  split.seed = seed;
  split.test_doc_ids = test;
  std::vector<char> is_test(num_docs, 0);
  for (DocId d : test) is_test[d] = 1;
  for (DocId d = 0; d < num_docs; ++d) {
    if (!is_test[d]) split.train_doc_ids.push_back(d);
  }
  split.train = select_documents(corpus, split.train_doc_ids);
  split.test_observed.num_words = split.test_heldout.num_words = corpus.num_words;
  split.test_observed.vocab = split.test_heldout.vocab = corpus.vocab;

  std::vector<WordId> tokens;
  std::vector<std::int32_t> observed_count(corpus.num_words, 0);
  std::vector<std::int32_t> heldout_count(corpus.num_words, 0);
  std::vector<Cell> observed_cells, heldout_cells;
  for (DocId d : test) {
    tokens.clear();
    for (const Cell& c : corpus.doc(d)) tokens.insert(tokens.end(), c.count, c.word);
    const auto n = static_cast<std::int64_t>(tokens.size());
    auto n_heldout = static_cast<std::int64_t>(std::llround(heldout_word_fraction * n));
    n_heldout = std::clamp<std::int64_t>(n_heldout, 1, n - 1);
    for (std::int64_t i = 0; i < n_heldout; ++i) {
      const auto j = i + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n - i));
      std::swap(tokens[i], tokens[j]);
    }
    for (std::int64_t i = 0; i < n; ++i) {
      (i < n_heldout ? heldout_count : observed_count)[tokens[i]]++;
    }
    observed_cells.clear();
    heldout_cells.clear();
    for (const Cell& c : corpus.doc(d)) {
      if (observed_count[c.word] > 0) observed_cells.push_back({c.word, observed_count[c.word]});
      if (heldout_count[c.word] > 0) heldout_cells.push_back({c.word, heldout_count[c.word]});
      observed_count[c.word] = heldout_count[c.word] = 0;
    }
    split.test_observed.add_document(observed_cells);
    split.test_heldout.add_document(heldout_cells);
  }
  return split;
}

}  // namespace cepbp
