#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cepbp {

// One training iteration as seen by the coordinator.
struct IterationRecord {
  std::int32_t t = 0;
  double comp_s = 0.0;  // max worker sweep wall-time
  double comm_s = 0.0;  // delta packing + reduction + broadcast wall-time
  std::uint64_t bytes = 0;
  std::optional<double> train_perplexity;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct RunConfigEcho {
  std::string algo;
  std::int32_t num_topics = 0;
  std::int32_t workers = 1;
  std::int32_t parts = 1;
  double zipf_h = 0.0;
  std::int32_t iterations = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::int32_t sync_every = 1;
  std::int32_t num_docs = 0;
  std::int32_t num_words = 0;
  std::int64_t nnz = 0;
  std::uint32_t entry_bytes = 8;

  friend bool operator==(const RunConfigEcho&, const RunConfigEcho&) = default;
};

struct RunTotals {
  double comp_s = 0.0;
  double comm_s = 0.0;
  std::uint64_t bytes = 0;
};

struct RunReport {
  RunConfigEcho config;
  std::vector<IterationRecord> records;
  // Bytes of the forced terminal sync beyond what the schedule had due at
  // t = T. Included in record bytes; kept here so formula checks can remove it.
  std::uint64_t terminal_extra_bytes = 0;
  std::optional<double> final_train_perplexity;
  std::optional<double> final_predictive_perplexity;

  RunTotals totals() const;
  std::uint64_t scheduled_bytes() const { return totals().bytes - terminal_extra_bytes; }

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

double speedup(double t0, std::int32_t workers, double tc);

// Total computation over total communication time; +infinity when no
// communication time was recorded.
double ccr(const RunReport& report);

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(const std::string& name);

std::string emit_report(const RunReport& report, ReportFormat format);
RunReport parse_report_json(const std::string& text);

}  // namespace cepbp
