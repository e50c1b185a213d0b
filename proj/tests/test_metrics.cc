#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cepbp/metrics.h"

using namespace cepbp;

namespace {

RunReport sample_report() {
  RunReport r;
  r.config.algo = "cepbp";
  r.config.num_topics = 10;
  r.config.workers = 4;
  r.config.parts = 16;
  r.config.zipf_h = 1.0;
  r.config.iterations = 2;
  r.config.seed = 9;
  r.config.entry_bytes = 8;
  r.records.push_back({1, 0.5, 0.25, 100, std::nullopt});
  r.records.push_back({2, 0.1 + 0.2, 0.125, 60, 123.456789012345678});
  r.terminal_extra_bytes = 20;
  r.final_train_perplexity = 123.456789012345678;
  return r;
}

}  // namespace

TEST(Metrics, Totals) {
  const auto r = sample_report();
  const auto t = r.totals();
  EXPECT_DOUBLE_EQ(t.comp_s, 0.8);
  EXPECT_DOUBLE_EQ(t.comm_s, 0.375);
  EXPECT_EQ(t.bytes, 160u);
  EXPECT_EQ(r.scheduled_bytes(), 140u);
}

TEST(Metrics, Speedup) {
  EXPECT_DOUBLE_EQ(speedup(100.0, 4, 0.0), 4.0);
  EXPECT_DOUBLE_EQ(speedup(100.0, 4, 25.0), 2.0);
  EXPECT_DOUBLE_EQ(speedup(10.0, 1, 0.0), 1.0);
  EXPECT_THROW(speedup(0.0, 4, 1.0), std::invalid_argument);
  EXPECT_THROW(speedup(1.0, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(speedup(1.0, 2, -1.0), std::invalid_argument);
}

TEST(Metrics, Ccr) {
  auto r = sample_report();
  EXPECT_DOUBLE_EQ(ccr(r), 0.8 / 0.375);
  for (auto& rec : r.records) rec.comm_s = 0.0;
  EXPECT_EQ(ccr(r), std::numeric_limits<double>::infinity());
}

TEST(Metrics, CsvShape) {
  const auto csv = emit_report(sample_report(), ReportFormat::csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,comp_s,comm_s,bytes,perplexity");
  EXPECT_NE(csv.find("\n1,0.5,0.25,100,\n"), std::string::npos);
}

TEST(Metrics, JsonRoundTripIsExact) {
  const auto r = sample_report();
  const auto back = parse_report_json(emit_report(r, ReportFormat::json));
  EXPECT_EQ(back, r);
}

TEST(Metrics, FormatParsing) {
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::csv);
  EXPECT_EQ(parse_report_format("json"), ReportFormat::json);
  EXPECT_THROW(parse_report_format("xml"), std::invalid_argument);
}

TEST(Metrics, MalformedJsonThrows) {
  EXPECT_ANY_THROW(parse_report_json("{}"));
  EXPECT_ANY_THROW(parse_report_json("not json"));
}
