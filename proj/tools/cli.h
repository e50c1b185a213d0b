#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cepbp/corpus.h"
#include "cepbp/metrics.h"

namespace cepbp::cli {

struct RunConfig {
  std::string algo = "cepbp";  // bp | pbp | cepbp | gs | pgs
  std::string corpus;
  std::string vocab;
  std::int32_t topics = 100;
  std::int32_t iterations = 500;
  std::int32_t workers = 1;
  std::int32_t parts = 16;
  double zipf_h = 1.0;
  double alpha = 0.01;
  double beta = 0.01;
  std::uint64_t seed = 1;
  double test_frac = kDefaultTestDocFraction;
  double heldout_frac = kDefaultHeldoutWordFraction;
  std::string out = "out";
  std::int32_t perplexity_every = 10;
  std::string report_format = "csv";
  std::int32_t sync_every = 1;  // PGS only
  std::int32_t threads = 0;     // 0 = min(M, cores)
  std::string model;            // eval only
};

// Throws std::invalid_argument describing the first inconsistency.
void validate(const RunConfig& config);

// Resolves --corpus: an existing docword file, "synthetic:kos[:seed]" for the
// KOS-shaped generated corpus, or a name looked up as
// $CEPBP_DATA_DIR/docword.<name>.txt (with vocab.<name>.txt when present).
LoadResult resolve_corpus(const std::string& corpus, const std::string& vocab);

// Each command returns a process exit status and never leaves a partially
// written model behind.
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err);

struct ReportOptions {
  std::vector<std::string> reports;
  std::vector<std::string> references;
  std::string format = "csv";
  std::string out;  // optional output file; stdout always receives the table
};

int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err);

// Renders the comparison table for already-parsed reports.
std::string comparison_table(const std::vector<RunReport>& runs,
                             const std::vector<RunReport>& references, ReportFormat format,
                             std::vector<std::string>* warnings);

int cmd_synth(const std::string& out_path, std::uint64_t seed, std::ostream& err);

// Full command line entry point (argv[0] is the program name).
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cepbp::cli
