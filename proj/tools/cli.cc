#include "cli.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cepbp/bp.h"
#include "cepbp/gibbs.h"
#include "cepbp/model_io.h"
#include "cepbp/parallel.h"
#include "cepbp/synthetic.h"
#include "cepbp/zipf_schedule.h"
#include "json.hpp"

namespace cepbp::cli {

namespace fs = std::filesystem;

namespace {

const char* kAlgos[] = {"bp", "pbp", "cepbp", "gs", "pgs"};

bool is_serial(const std::string& algo) { return algo == "bp" || algo == "gs"; }

std::string family(const std::string& algo) {
  return (algo == "gs" || algo == "pgs") ? "gs" : "bp";
}

// Writes through a sibling temp file and renames, so readers never observe a
// half-written artifact.
void write_atomically(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Hyper hyper_of(const RunConfig& c) {
  Hyper h;
  h.num_topics = c.topics;
  h.alpha = c.alpha;
  h.beta = c.beta;
  h.iterations = c.iterations;
  return h;
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

}  // namespace

void validate(const RunConfig& c) {
  if (std::find(std::begin(kAlgos), std::end(kAlgos), c.algo) == std::end(kAlgos)) {
    throw std::invalid_argument("unknown --algo '" + c.algo + "' (bp, pbp, cepbp, gs, pgs)");
  }
  if (c.corpus.empty()) throw std::invalid_argument("--corpus is required");
  hyper_of(c).validate();
  if (c.workers < 1) throw std::invalid_argument("--m must be >= 1");
  if (is_serial(c.algo) && c.workers != 1) {
    throw std::invalid_argument("--algo " + c.algo + " runs on one worker; use --m 1");
  }
  if (c.algo == "cepbp") {
    if (c.parts < 1) throw std::invalid_argument("--n must be >= 1 for cepbp");
    if (!(c.zipf_h > 0.0)) throw std::invalid_argument("--h must be > 0 for cepbp");
  }
  if (c.sync_every < 1) throw std::invalid_argument("--sync-every must be >= 1");
  if (!(c.test_frac >= 0.0 && c.test_frac < 1.0)) {
    throw std::invalid_argument("--test-frac must lie in [0, 1)");
  }
  if (!(c.heldout_frac > 0.0 && c.heldout_frac < 1.0)) {
    throw std::invalid_argument("--heldout-frac must lie in (0, 1)");
  }
  if (c.perplexity_every < 0) throw std::invalid_argument("--perplexity-every must be >= 0");
  parse_report_format(c.report_format);
}

LoadResult resolve_corpus(const std::string& corpus, const std::string& vocab) {
  const std::string synth_prefix = "synthetic:kos";
  if (corpus.rfind(synth_prefix, 0) == 0) {
    std::uint64_t seed = kos_like_spec().seed;
    if (corpus.size() > synth_prefix.size()) {
      if (corpus[synth_prefix.size()] != ':') {
        throw std::invalid_argument("expected synthetic:kos or synthetic:kos:<seed>");
      }
      seed = std::stoull(corpus.substr(synth_prefix.size() + 1));
    }
    LoadResult result;
    result.corpus = generate_lda_corpus(kos_like_spec(seed));
    result.header_docs = result.corpus.num_docs();
    result.header_words = result.corpus.num_words;
    result.header_nnz = result.corpus.nnz();
    return result;
  }
  if (fs::is_regular_file(corpus)) return load_uci_bow_file(corpus, vocab);
  if (const char* dir = std::getenv("CEPBP_DATA_DIR")) {
    const fs::path docword = fs::path(dir) / ("docword." + corpus + ".txt");
    if (fs::is_regular_file(docword)) {
      std::string v = vocab;
      const fs::path default_vocab = fs::path(dir) / ("vocab." + corpus + ".txt");
      if (v.empty() && fs::is_regular_file(default_vocab)) v = default_vocab.string();
      return load_uci_bow_file(docword.string(), v);
    }
  }
  throw CorpusError("corpus '" + corpus +
                    "' is neither a file, synthetic:kos, nor docword.<name>.txt under "
                    "$CEPBP_DATA_DIR");
}

namespace {

struct TrainArtifacts {
  TrainResult result;
  std::optional<CommSchedule> schedule;
};

TrainArtifacts train_algo(const RunConfig& c, const SparseCorpus& corpus) {
  TrainOptions options;
  options.hyper = hyper_of(c);
  options.seed = c.seed;
  options.perplexity_every = c.perplexity_every;

  TrainArtifacts a;
  if (c.algo == "bp") {
    a.result = bp_train(corpus, options);
  } else if (c.algo == "gs") {
    a.result = gs_train(corpus, options);
  } else if (c.algo == "pgs") {
    PgsOptions p;
    p.train = options;
    p.workers = c.workers;
    p.sync_every = c.sync_every;
    p.threads = c.threads;
    a.result = pgs_train(corpus, p);
    a.schedule = fixed_period_schedule(partition_vocab(word_frequencies(corpus), 1),
                                       c.sync_every, c.iterations);
  } else {
    PbpOptions p;
    p.train = options;
    p.workers = c.workers;
    p.threads = c.threads;
    p.algo = c.algo;
    const FrequencyTable ft = word_frequencies(corpus);
    if (c.algo == "pbp") {
      a.schedule = fixed_period_schedule(partition_vocab(ft, 1), 1, c.iterations);
    } else {
      a.schedule = zipf_schedule(partition_vocab(ft, c.parts), c.zipf_h, c.iterations);
    }
    a.result = pbp_train(corpus, p, *a.schedule);
  }
  return a;
}

}  // namespace

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    LoadResult loaded = resolve_corpus(config.corpus, config.vocab);
    for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
    validate(loaded.corpus);

    std::optional<EvalSplit> split;
    const SparseCorpus* train_corpus = &loaded.corpus;
    if (config.test_frac > 0.0) {
      split = split_for_eval(loaded.corpus, config.test_frac, config.heldout_frac, config.seed);
      train_corpus = &split->train;
    }
    if (config.workers > train_corpus->num_docs()) {
      throw std::invalid_argument("--m exceeds the number of training documents");
    }

    TrainArtifacts a = train_algo(config, *train_corpus);
    RunReport& report = a.result.report;
    if (split) {
      report.final_predictive_perplexity =
          predictive_perplexity(*split, a.result.model, hyper_of(config), config.seed);
    }

    ModelHeader header;
    header.algo = config.algo;
    header.num_docs = a.result.model.docs;
    header.num_words = a.result.model.words;
    header.num_topics = a.result.model.topics;
    header.alpha = config.alpha;
    header.beta = config.beta;
    header.seed = config.seed;
    std::ostringstream model_bytes(std::ios::binary);
    write_model(model_bytes, header, a.result.model);

    const fs::path dir(config.out);
    fs::create_directories(dir);
    write_atomically(dir / "report.csv", emit_report(report, ReportFormat::csv));
    write_atomically(dir / "report.json", emit_report(report, ReportFormat::json));
    if (a.schedule) write_atomically(dir / "schedule.json", schedule_to_json(*a.schedule));
    write_atomically(dir / "model.bin", model_bytes.str());

    const ReportFormat fmt = parse_report_format(config.report_format);
    if (fmt == ReportFormat::json) {
      out << emit_report(report, fmt);
    } else {
      const RunTotals t = report.totals();
      out << "algo,K,M,T,bytes,comp_s,comm_s,train_perplexity,predictive_perplexity\n"
          << config.algo << ',' << config.topics << ',' << config.workers << ','
          << config.iterations << ',' << t.bytes << ',' << format_number(t.comp_s) << ','
          << format_number(t.comm_s) << ','
          << format_number(report.final_train_perplexity.value_or(0.0)) << ','
          << (report.final_predictive_perplexity
                  ? format_number(*report.final_predictive_perplexity)
                  : std::string())
          << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.model.empty()) throw std::invalid_argument("--model is required");
    if (!(config.test_frac > 0.0 && config.test_frac < 1.0)) {
      throw std::invalid_argument("eval needs --test-frac in (0, 1)");
    }
    const LoadedModel loaded_model = read_model_file(config.model);
    LoadResult loaded = resolve_corpus(config.corpus, config.vocab);
    for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
    if (loaded_model.model.words != loaded.corpus.num_words) {
      throw std::invalid_argument("model has W=" + std::to_string(loaded_model.model.words) +
                                  " but the corpus has W=" +
                                  std::to_string(loaded.corpus.num_words));
    }
    const EvalSplit split =
        split_for_eval(loaded.corpus, config.test_frac, config.heldout_frac, config.seed);
    Hyper hyper;
    hyper.num_topics = loaded_model.header.num_topics;
    hyper.alpha = loaded_model.header.alpha;
    hyper.beta = loaded_model.header.beta;
    hyper.iterations = 1;
    const double value = predictive_perplexity(split, loaded_model.model, hyper, config.seed);

    nlohmann::ordered_json j;
    j["model"] = config.model;
    j["algo"] = loaded_model.header.algo;
    j["K"] = hyper.num_topics;
    j["test_docs"] = split.test_heldout.num_docs();
    j["heldout_tokens"] = split.test_heldout.total_tokens;
    j["seed"] = config.seed;
    j["predictive_perplexity"] = value;
    const fs::path dir(config.out);
    fs::create_directories(dir);
    write_atomically(dir / "eval.json", j.dump(2) + "\n");
    out << std::setprecision(10) << value << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

std::string comparison_table(const std::vector<RunReport>& runs,
                             const std::vector<RunReport>& references, ReportFormat format,
                             std::vector<std::string>* warnings) {
  std::map<std::string, double> reference_time;
  for (const auto& r : references) {
    if (r.config.workers != 1) {
      if (warnings) warnings->push_back("reference run '" + r.config.algo + "' has M != 1; ignored");
      continue;
    }
    const RunTotals t = r.totals();
    reference_time.emplace(family(r.config.algo), t.comp_s + t.comm_s);
  }

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::ostringstream csv;
  csv << std::setprecision(10);
  csv << "algo,K,M,N,H,T,bytes,scheduled_bytes,comp_s,comm_s,ccr,speedup,"
         "train_perplexity,predictive_perplexity\n";
  for (const auto& r : runs) {
    const RunTotals t = r.totals();
    const double ratio = ccr(r);
    std::optional<double> su;
    const auto ref = reference_time.find(family(r.config.algo));
    if (ref != reference_time.end() && ref->second > 0.0) {
      su = speedup(ref->second, r.config.workers, t.comm_s);
    } else if (warnings) {
      warnings->push_back("no M=1 reference for '" + r.config.algo + "'; speedup left empty");
    }
    const auto& c = r.config;
    csv << c.algo << ',' << c.num_topics << ',' << c.workers << ',' << c.parts << ','
        << c.zipf_h << ',' << c.iterations << ',' << t.bytes << ',' << r.scheduled_bytes()
        << ',' << t.comp_s << ',' << t.comm_s << ',';
    if (std::isinf(ratio)) {
      csv << "inf";
    } else {
      csv << ratio;
    }
    csv << ',';
    if (su) csv << *su;
    csv << ',';
    if (r.final_train_perplexity) csv << *r.final_train_perplexity;
    csv << ',';
    if (r.final_predictive_perplexity) csv << *r.final_predictive_perplexity;
    csv << '\n';

    nlohmann::ordered_json row;
    row["algo"] = c.algo;
    row["K"] = c.num_topics;
    row["M"] = c.workers;
    row["N"] = c.parts;
    row["H"] = c.zipf_h;
    row["T"] = c.iterations;
    row["bytes"] = t.bytes;
    row["scheduled_bytes"] = r.scheduled_bytes();
    row["comp_s"] = t.comp_s;
    row["comm_s"] = t.comm_s;
    row["ccr"] = std::isinf(ratio) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(ratio);
    row["speedup"] = su ? nlohmann::ordered_json(*su) : nlohmann::ordered_json(nullptr);
    row["train_perplexity"] = r.final_train_perplexity
                                  ? nlohmann::ordered_json(*r.final_train_perplexity)
                                  : nlohmann::ordered_json(nullptr);
    row["predictive_perplexity"] = r.final_predictive_perplexity
                                       ? nlohmann::ordered_json(*r.final_predictive_perplexity)
                                       : nlohmann::ordered_json(nullptr);
    rows.push_back(std::move(row));
  }
  if (format == ReportFormat::json) return rows.dump(2) + "\n";
  return csv.str();
}

int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.reports.empty()) throw std::invalid_argument("report needs at least one run");
    std::vector<RunReport> runs, references;
    for (const auto& p : options.reports) runs.push_back(parse_report_json(read_text(p)));
    for (const auto& p : options.references) references.push_back(parse_report_json(read_text(p)));
    std::vector<std::string> warnings;
    const std::string table =
        comparison_table(runs, references, parse_report_format(options.format), &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    if (!options.out.empty()) write_atomically(options.out, table);
    out << table;
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_synth(const std::string& out_path, std::uint64_t seed, std::ostream& err) {
  try {
    const SparseCorpus corpus = generate_lda_corpus(kos_like_spec(seed));
    std::ostringstream ss;
    write_uci_bow(ss, corpus);
    write_atomically(out_path, ss.str());
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

namespace {

void add_corpus_flags(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--corpus", c.corpus, "docword file, synthetic:kos[:seed], or corpus name")
      ->required();
  cmd->add_option("--vocab", c.vocab, "vocabulary file (one word per line)");
  cmd->add_option("--seed", c.seed, "random seed (initialization and split)");
  cmd->add_option("--test-frac", c.test_frac, "fraction of documents held out for testing");
  cmd->add_option("--heldout-frac", c.heldout_frac,
                  "fraction of each test document's tokens scored");
  cmd->add_option("--out", c.out, "output directory");
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallel LDA training with belief propagation and Zipf-scheduled sync"};
  app.require_subcommand(1);
  // -h is left free because --h is the Zipf slope.
  app.set_help_flag("--help", "print help and exit");

  RunConfig train;
  auto* train_cmd = app.add_subcommand("train", "train a topic model");
  train_cmd->add_option("--algo", train.algo, "bp, pbp, cepbp, gs or pgs");
  add_corpus_flags(train_cmd, train);
  train_cmd->add_option("--k", train.topics, "number of topics");
  train_cmd->add_option("--t", train.iterations, "training iterations");
  train_cmd->add_option("--m", train.workers, "number of workers");
  train_cmd->add_option("--n", train.parts, "vocabulary parts (cepbp)");
  train_cmd->add_option("--h", train.zipf_h, "Zipf slope for sync periods (cepbp)");
  train_cmd->add_option("--alpha", train.alpha, "document-topic Dirichlet parameter");
  train_cmd->add_option("--beta", train.beta, "topic-word Dirichlet parameter");
  train_cmd->add_option("--perplexity-every", train.perplexity_every,
                        "training perplexity cadence (0 disables)");
  train_cmd->add_option("--report-format", train.report_format, "csv or json summary")
      ->check(CLI::IsMember({"csv", "json"}));
  train_cmd->add_option("--sync-every", train.sync_every, "PGS sync period T'");
  train_cmd->add_option("--threads", train.threads, "threads for workers (0 = auto)");

  RunConfig eval;
  auto* eval_cmd = app.add_subcommand("eval", "predictive perplexity of a trained model");
  add_corpus_flags(eval_cmd, eval);
  eval_cmd->add_option("--model", eval.model, "model.bin written by train")->required();

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "compare run reports");
  report_cmd->add_option("reports", report.reports, "report.json files")->required();
  report_cmd->add_option("--reference", report.references, "M=1 report.json for speedup");
  report_cmd->add_option("--report-format", report.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  report_cmd->add_option("--out", report.out, "also write the table here");

  std::string synth_out;
  std::uint64_t synth_seed = kos_like_spec().seed;
  auto* synth_cmd = app.add_subcommand("synth", "write the KOS-shaped synthetic corpus");
  synth_cmd->add_option("--out", synth_out, "docword output path")->required();
  synth_cmd->add_option("--seed", synth_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code;
  }
  if (*train_cmd) return cmd_train(train, out, err);
  if (*eval_cmd) return cmd_eval(eval, out, err);
  if (*report_cmd) return cmd_report(report, out, err);
  return cmd_synth(synth_out, synth_seed, err);
}

}  // namespace cepbp::cli
