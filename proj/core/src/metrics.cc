#include "cepbp/metrics.h"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cepbp {

using nlohmann::ordered_json;

RunTotals RunReport::totals() const {
  RunTotals t;
  for (const auto& r : records) {
    t.comp_s += r.comp_s;
    t.comm_s += r.comm_s;
    t.bytes += r.bytes;
  }
  return t;
}

double speedup(double t0, std::int32_t workers, double tc) {
  if (!(t0 > 0.0) || workers < 1 || tc < 0.0) {
    throw std::invalid_argument("speedup needs T0 > 0, M >= 1, Tc >= 0");
  }
  return t0 / (t0 / workers + tc);
}

double ccr(const RunReport& report) {
  const RunTotals t = report.totals();
  if (t.comm_s <= 0.0) return std::numeric_limits<double>::infinity();
  return t.comp_s / t.comm_s;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw std::invalid_argument("report format must be csv or json, got '" + name + "'");
}

namespace {

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> read_optional(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string emit_report(const RunReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "t,comp_s,comm_s,bytes,perplexity\n";
    for (const auto& r : report.records) {
      out << r.t << ',' << r.comp_s << ',' << r.comm_s << ',' << r.bytes << ',';
      if (r.train_perplexity) out << *r.train_perplexity;
      out << '\n';
    }
    return out.str();
  }

  const auto& c = report.config;
  ordered_json j;
  j["config"] = {{"algo", c.algo},           {"K", c.num_topics},
                 {"M", c.workers},           {"N", c.parts},
                 {"H", c.zipf_h},            {"T", c.iterations},
                 {"alpha", c.alpha},         {"beta", c.beta},
                 {"seed", c.seed},           {"sync_every", c.sync_every},
                 {"D", c.num_docs},          {"W", c.num_words},
                 {"nnz", c.nnz},             {"entry_bytes", c.entry_bytes}};
  ordered_json records = ordered_json::array();
  for (const auto& r : report.records) {
    records.push_back({{"t", r.t},
                       {"comp_s", r.comp_s},
                       {"comm_s", r.comm_s},
                       {"bytes", r.bytes},
                       {"perplexity", optional_number(r.train_perplexity)}});
  }
  j["records"] = std::move(records);
  const RunTotals t = report.totals();
  j["totals"] = {{"comp_s", t.comp_s},
                 {"comm_s", t.comm_s},
                 {"bytes", t.bytes},
                 {"terminal_extra_bytes", report.terminal_extra_bytes},
                 {"scheduled_bytes", report.scheduled_bytes()}};
  j["final_train_perplexity"] = optional_number(report.final_train_perplexity);
  j["final_predictive_perplexity"] = optional_number(report.final_predictive_perplexity);
  return j.dump(2) + "\n";
}

RunReport parse_report_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  RunReport report;
  const auto& c = j.at("config");
  auto& e = report.config;
  e.algo = c.at("algo").get<std::string>();
  e.num_topics = c.at("K").get<std::int32_t>();
  e.workers = c.at("M").get<std::int32_t>();
  e.parts = c.at("N").get<std::int32_t>();
  e.zipf_h = c.at("H").get<double>();
  e.iterations = c.at("T").get<std::int32_t>();
  e.alpha = c.at("alpha").get<double>();
  e.beta = c.at("beta").get<double>();
  e.seed = c.at("seed").get<std::uint64_t>();
  e.sync_every = c.at("sync_every").get<std::int32_t>();
  e.num_docs = c.at("D").get<std::int32_t>();
  e.num_words = c.at("W").get<std::int32_t>();
  e.nnz = c.at("nnz").get<std::int64_t>();
  e.entry_bytes = c.at("entry_bytes").get<std::uint32_t>();
  for (const auto& r : j.at("records")) {
    IterationRecord rec;
    rec.t = r.at("t").get<std::int32_t>();
    rec.comp_s = r.at("comp_s").get<double>();
    rec.comm_s = r.at("comm_s").get<double>();
    rec.bytes = r.at("bytes").get<std::uint64_t>();
    rec.train_perplexity = read_optional(r, "perplexity");
    report.records.push_back(rec);
  }
  report.terminal_extra_bytes = j.at("totals").at("terminal_extra_bytes").get<std::uint64_t>();
  report.final_train_perplexity = read_optional(j, "final_train_perplexity");
  report.final_predictive_perplexity = read_optional(j, "final_predictive_perplexity");
  return report;
}

}  // namespace cepbp
