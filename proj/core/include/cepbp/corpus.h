#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cepbp {

using WordId = std::int32_t;
using DocId = std::int32_t;

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text, reported with the 1-based line number.
class ParseError : public CorpusError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class BoundsError : public CorpusError {
 public:
  using CorpusError::CorpusError;
};

class ValueError : public CorpusError {
 public:
  using CorpusError::CorpusError;
};

struct Cell {
  WordId word;
  std::int32_t count;

  friend bool operator==(const Cell&, const Cell&) = default;
};

// Document-word count matrix x_{W x D}, compressed by document. The global
// index of a cell in `cells` is also its index into a MessageStore.
struct SparseCorpus {
  std::int32_t num_words = 0;
  std::vector<std::int64_t> doc_offsets{0};
  std::vector<Cell> cells;
  std::vector<std::string> vocab;  // optional; empty or size num_words
  std::int64_t total_tokens = 0;

  std::int32_t num_docs() const {
    return static_cast<std::int32_t>(doc_offsets.size()) - 1;
  }
  std::int64_t nnz() const { return static_cast<std::int64_t>(cells.size()); }
  std::span<const Cell> doc(DocId d) const {
    return {cells.data() + doc_offsets[d],
            static_cast<std::size_t>(doc_offsets[d + 1] - doc_offsets[d])};
  }
  std::int64_t doc_length(DocId d) const;

  // Appends a document; cells must have distinct words and positive counts.
  void add_document(std::span<const Cell> doc_cells);

  friend bool operator==(const SparseCorpus&, const SparseCorpus&) = default;
};

// Throws CorpusError if any structural invariant is broken.
void validate(const SparseCorpus& corpus);

struct LoadResult {
  SparseCorpus corpus;
  std::int32_t header_docs = 0;
  std::int32_t header_words = 0;
  std::int64_t header_nnz = 0;
  std::vector<std::string> warnings;
};

// UCI bag-of-words reader: three header lines D, W, NNZ followed by
// "docID wordID count" triples with 1-based ids. Duplicate (d, w) lines are
// summed and documents left empty are dropped; both produce warnings.
LoadResult load_uci_bow(std::istream& docword, std::istream* vocab = nullptr);
LoadResult load_uci_bow_file(const std::string& docword_path,
                             const std::string& vocab_path = {});

void write_uci_bow(std::ostream& out, const SparseCorpus& corpus);
void write_vocab(std::ostream& out, const SparseCorpus& corpus);

struct FrequencyTable {
  std::vector<std::int64_t> freq;      // indexed by word id
  std::vector<WordId> rank_order;      // rank_order[0] is rank 1
};

// Ties are broken by ascending word id.
FrequencyTable word_frequencies(const SparseCorpus& corpus);

// Sizes of `parts` near-equal contiguous blocks over `n` positions; the
// first n % parts blocks are one larger.
std::vector<std::int32_t> block_sizes(std::int32_t n, std::int32_t parts);

struct ZipfFit {
  double intercept = 0.0;  // C
  double slope_h = 0.0;    // H
  double r_squared = 0.0;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Groups the rank order into n_points blocks (as the vocabulary partition
// does), takes the mean frequency per block and fits a line through
// (log r, log f). H is the negated slope, so f ~ r^-H.
ZipfFit fit_zipf(const FrequencyTable& ft, std::int32_t n_points);

// Same fit over explicit (rank, frequency) points.
ZipfFit fit_zipf_points(std::span<const double> ranks,
                        std::span<const double> freqs);

struct EvalSplit {
  SparseCorpus train;
  SparseCorpus test_observed;
  SparseCorpus test_heldout;
  std::vector<DocId> train_doc_ids;  // index into the source corpus
  std::vector<DocId> test_doc_ids;
  std::uint64_t seed = 0;
};

inline constexpr double kDefaultTestDocFraction = 0.1;
inline constexpr double kDefaultHeldoutWordFraction = 0.2;

// Picks round(test_doc_fraction * D) test documents uniformly at random among
// documents with at least two tokens, then splits each test document's
// tokens into round(heldout_word_fraction * n) held-out tokens and the rest
// observed, keeping both sides non-empty.
EvalSplit split_for_eval(const SparseCorpus& corpus, double test_doc_fraction,
                         double heldout_word_fraction, std::uint64_t seed);

// Keeps the listed documents in the given order.
SparseCorpus select_documents(const SparseCorpus& corpus,
                              std::span<const DocId> docs);

}  // namespace cepbp
