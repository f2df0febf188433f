// atomkg — command-line front end for the atomization / extraction /
// knowledge-graph toolkit.
//
// Subcommands mirror the pipeline stages and can be chained through files:
//   atomize   corpus.jsonl -> atoms.jsonl
//   extract   corpus.jsonl + atoms.jsonl -> triplets.jsonl
//   kg        triplets.jsonl -> graph.json + graph.dot
//   eval      gold.jsonl vs triplets.jsonl -> metrics (table + JSON)
//   sweep     gold.jsonl vs triplets.jsonl -> relation recall per threshold
//   pipeline  config.json + corpus.jsonl -> full artifact directory
//   logic     formula diagnostics (content, information, atomicity)
//
// Exit codes: 0 success; 2 command-level errors (bad flags caught by the
// library, parse errors, caps); stage failures use 3 (config), 10
// (atomize), 11 (extract), 12 (kg), 13 (eval). Stage failures always name
// their stage on stderr, and artifacts of completed stages stay on disk.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "atomkg/atomizer.hpp"
#include "atomkg/errors.hpp"
#include "atomkg/eval.hpp"
#include "atomkg/extract.hpp"
#include "atomkg/jsonl.hpp"
#include "atomkg/kg.hpp"
#include "atomkg/logic/calculus.hpp"
#include "atomkg/logic/formula.hpp"
#include "atomkg/logic/worlds.hpp"
#include "atomkg/pipeline.hpp"

namespace {

using nlohmann::ordered_json;

int stage_exit_code(const std::string& stage) {
  if (stage == "config") return 3;
  if (stage == "atomize") return 10;
  if (stage == "extract") return 11;
  if (stage == "kg") return 12;
  if (stage == "eval") return 13;
  return 2;
}

std::string fmt_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.4f", value);
  return buffer;
}

void print_row(const std::string& key, const std::string& value) {
  std::cout << std::left << std::setw(24) << key << value << '\n';
}

void print_row(const std::string& key, long long value) {
  print_row(key, std::to_string(value));
}

// Remote-endpoint flags shared by every subcommand that can talk to a
// backend over HTTP. The API key is never a flag: it comes from
// $ATOMKG_API_KEY (or a config file) so it cannot leak into shell history.
struct RemoteFlags {
  std::string base_url;
  std::string model;
  double timeout_seconds = 30.0;
  int max_attempts = 3;
  int backoff_initial_ms = 250;

  void attach(CLI::App& cmd) {
    cmd.add_option("--base-url", base_url,
                   "Remote endpoint base URL (http only)");
    cmd.add_option("--model", model, "Remote model name");
    cmd.add_option("--timeout", timeout_seconds, "Request timeout, seconds")
        ->capture_default_str();
    cmd.add_option("--max-attempts", max_attempts,
                   "Attempts per request before giving up")
        ->capture_default_str();
    cmd.add_option("--backoff-ms", backoff_initial_ms,
                   "Initial retry backoff, milliseconds (doubles per retry)")
        ->capture_default_str();
  }

  atomkg::RemoteConfig to_config() const {
    atomkg::RemoteConfig remote;
    remote.base_url = base_url;
    remote.model = model;
    remote.timeout_seconds = timeout_seconds;
    remote.max_attempts = max_attempts;
    remote.backoff_initial_ms = backoff_initial_ms;
    return remote;
  }
};

// Resolves the user-facing backend spelling to a pipeline selector:
// "rules", "remote", "scripted:<path>", or plain "scripted" combined with
// --transcript FILE.
std::string resolve_selector(const std::string& backend,
                             const std::string& transcript,
                             const std::string& role) {
  if (backend == "scripted") {
    if (transcript.empty()) {
      throw atomkg::UsageError("--backend scripted needs --transcript FILE "
                               "(or use --backend scripted:FILE)");
    }
    return "scripted:" + transcript;
  }
  if (!transcript.empty()) {
    throw atomkg::UsageError("--transcript only applies to --backend "
                             "scripted (got \"" + backend + "\" for " +
                             role + ")");
  }
  return backend;
}

// ---------------------------------------------------------------------------
// atomize

struct AtomizeArgs {
  std::string in;
  std::string out;
  std::string backend = "rules";
  std::string transcript;
  int cap = 5;
  int concurrency = 4;
  RemoteFlags remote;
};

void run_atomize(const AtomizeArgs& args) {
  if (args.cap < 1) throw atomkg::UsageError("--cap must be at least 1");
  if (args.concurrency < 1) {
    throw atomkg::UsageError("--concurrency must be at least 1");
  }

  const std::vector<atomkg::CorpusRecord> corpus = atomkg::read_corpus(args.in);

  atomkg::PipelineConfig config;
  config.propositioner =
      resolve_selector(args.backend, args.transcript, "propositioner");
  config.remote = args.remote.to_config();
  std::unique_ptr<atomkg::PropositionerBackend> backend =
      atomkg::make_propositioner(config);

  std::vector<atomkg::Proposition> all_atoms;
  long long iterations = 0;
  long long backend_calls = 0;
  long long physical_calls = 0;
  long long unproved = 0;
  long long dropped_empty = 0;

  const auto flush = [&]() { atomkg::write_atoms_jsonl(args.out, all_atoms); };

  for (const atomkg::CorpusRecord& record : corpus) {
    try {
      if (auto* remote =
              dynamic_cast<atomkg::RemotePropositioner*>(backend.get())) {
        remote->set_title(record.title);
      }
      atomkg::AtomizationOptions options;
      options.cap = args.cap;
      options.concurrency = args.concurrency;
      options.source_id = record.source_id;
      const atomkg::AtomizationResult result =
          atomkg::atomize(record.text, *backend, options);
      all_atoms.insert(all_atoms.end(), result.atoms.begin(),
                       result.atoms.end());
      iterations += result.iterations_used;
      backend_calls += result.backend_calls;
      physical_calls += result.physical_backend_calls;
      unproved += result.unproved_discarded;
      dropped_empty += result.dropped_empty;
    } catch (const atomkg::Error& e) {
      flush();  // atoms of completed records stay on disk
      throw atomkg::StageError(
          "atomize", "record \"" + record.source_id + "\": " + e.what());
    }
  }
  flush();

  print_row("records", static_cast<long long>(corpus.size()));
  print_row("atoms", static_cast<long long>(all_atoms.size()));
  print_row("iterations", iterations);
  print_row("backend_calls", backend_calls);
  print_row("physical_backend_calls", physical_calls);
  print_row("unproved_discarded", unproved);
  print_row("dropped_empty", dropped_empty);
  print_row("wrote", args.out);
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
  std::string in;
  std::string atoms;
  std::string out;
  std::string mode = "open";
  std::string config = "union";
  std::string backend;
  std::string transcript;
  std::string labels;
  int concurrency = 4;
  RemoteFlags remote;
};

void run_extract(const ExtractArgs& args) {
  if (args.concurrency < 1) {
    throw atomkg::UsageError("--concurrency must be at least 1");
  }
  const atomkg::ExtractionMode mode = atomkg::parse_mode(args.mode);
  const atomkg::ExtractionConfig config = atomkg::parse_config(args.config);

  if (config != atomkg::ExtractionConfig::Direct && args.atoms.empty()) {
    throw atomkg::UsageError("configuration \"" + args.config +
                             "\" needs --atoms atoms.jsonl");
  }
  if (mode == atomkg::ExtractionMode::ClosedIE && args.labels.empty()) {
    throw atomkg::UsageError("closed mode needs --labels FILE");
  }
  if (config == atomkg::ExtractionConfig::Comb &&
      mode != atomkg::ExtractionMode::ClosedIE) {
    throw atomkg::UsageError(
        "the comb configuration is defined for closed mode only");
  }

  const std::vector<atomkg::CorpusRecord> corpus = atomkg::read_corpus(args.in);

  std::map<std::string, std::vector<atomkg::Proposition>> atoms_by_source;
  if (!args.atoms.empty()) {
    std::vector<atomkg::Proposition> rows =
        atomkg::read_atoms_jsonl(args.atoms);
    for (atomkg::Proposition& atom : rows) {
      atoms_by_source[atom.source_id].push_back(std::move(atom));
    }
  }

  std::vector<std::string> labels;
  if (!args.labels.empty()) labels = atomkg::read_relation_list(args.labels);

  atomkg::PipelineConfig pipeline_config;
  pipeline_config.extractor =
      resolve_selector(args.backend, args.transcript, "extractor");
  pipeline_config.remote = args.remote.to_config();
  std::unique_ptr<atomkg::ExtractorBackend> backend =
      atomkg::make_extractor(pipeline_config);

  std::vector<atomkg::Triplet> all_triplets;
  long long dropped_lines = 0;
  const auto flush = [&]() {
    atomkg::write_triplets_jsonl(args.out, all_triplets);
  };

  for (const atomkg::CorpusRecord& record : corpus) {
    try {
      atomkg::ExtractionTask task;
      task.mode = mode;
      task.config = config;
      task.text = record.text;
      task.source_id = record.source_id;
      task.entity1 = record.entity1;
      task.entity2 = record.entity2;
      task.labels = labels;

      atomkg::AtomizationResult atomized;
      if (auto it = atoms_by_source.find(record.source_id);
          it != atoms_by_source.end()) {
        atomized.atoms = it->second;
      }
      const atomkg::ExtractionRun run = atomkg::run_config(
          task, &atomized, *backend, args.concurrency);
      all_triplets.insert(all_triplets.end(), run.triplets.begin(),
                          run.triplets.end());
      dropped_lines += run.dropped_lines;
    } catch (const atomkg::Error& e) {
      flush();  // triplets of completed records stay on disk
      throw atomkg::StageError(
          "extract", "record \"" + record.source_id + "\": " + e.what());
    }
  }
  flush();

  print_row("records", static_cast<long long>(corpus.size()));
  print_row("triplets", static_cast<long long>(all_triplets.size()));
  print_row("dropped_lines", dropped_lines);
  print_row("wrote", args.out);
}

// ---------------------------------------------------------------------------
// kg

struct KgArgs {
  std::string in;
  std::string transitive;
  std::string out_json = "graph.json";
  std::string out_dot = "graph.dot";
};

void run_kg(const KgArgs& args) {
  const std::vector<atomkg::Triplet> triplets =
      atomkg::read_triplets_jsonl(args.in);

  std::set<std::string> transitive;
  if (!args.transitive.empty()) {
    const std::vector<std::string> rows =
        atomkg::read_relation_list(args.transitive);
    transitive.insert(rows.begin(), rows.end());
  }

  try {
    atomkg::KnowledgeGraph graph = atomkg::build_graph(triplets);
    graph = atomkg::infer_transitive(graph, transitive);
    atomkg::write_graph_json(args.out_json, graph);
    atomkg::write_graph_dot(args.out_dot, graph);

    long long derived = 0;
    for (const atomkg::GraphEdge& edge : graph.edges) {
      if (edge.derived) ++derived;
    }
    print_row("nodes", static_cast<long long>(graph.nodes.size()));
    print_row("edges", static_cast<long long>(graph.edges.size()));
    print_row("derived_edges", derived);
    print_row("wrote", args.out_json + ", " + args.out_dot);
  } catch (const atomkg::StageError&) {
    throw;
  } catch (const atomkg::Error& e) {
    throw atomkg::StageError("kg", e.what());
  }
}

// ---------------------------------------------------------------------------
// eval + sweep

std::unique_ptr<atomkg::SimilarityBackend> make_similarity_backend(
    const std::string& sim, const RemoteFlags& remote) {
  atomkg::PipelineConfig config;
  config.embeddings = sim;
  config.remote = remote.to_config();
  return atomkg::make_similarity(config);
}

// Closed-IE scoring expects every gold record to carry the pairwise task
// fields; read_gold_jsonl synthesizes a gold triplet from them, so a record
// that still has none is structurally open-IE.
void check_closed_gold(const std::vector<atomkg::GoldRecord>& gold) {
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const atomkg::GoldRecord& record = gold[i];
    if (record.entity1.empty() || record.entity2.empty() ||
        record.relation.empty()) {
      throw atomkg::UsageError(
          "closed-mode gold record " + std::to_string(i + 1) + " (\"" +
          record.source_id + "\") lacks e1/e2/relation fields");
    }
  }
}

ordered_json eval_report_json(const atomkg::EvalReport& report) {
  ordered_json doc;
  doc["accuracy"] = report.accuracy;
  doc["entity_recall"] = report.entity_recall;
  doc["relation_recall"] = report.relation_recall;
  doc["precision"] = report.precision;
  doc["recall"] = report.recall;
  doc["f1"] = report.f1;
  doc["auc"] = report.auc;
  doc["counts"] = ordered_json{{"matched", report.counts.matched},
                               {"gold", report.counts.gold},
                               {"predicted", report.counts.predicted}};
  if (report.p_value.has_value()) {
    doc["p_value"] = *report.p_value;
  } else {
    doc["p_value"] = nullptr;
  }
  return doc;
}

struct EvalArgs {
  std::string gold;
  std::string pred;
  std::string mode = "open";
  std::string sim = "lexical";
  double threshold = 0.8;
  std::string compare;
  int iterations = 10000;
  std::uint64_t seed = 7;
  std::string json_out;
  RemoteFlags remote;
};

void run_eval(const EvalArgs& args) {
  const atomkg::ExtractionMode mode = atomkg::parse_mode(args.mode);

  const std::vector<atomkg::GoldRecord> gold =
      atomkg::read_gold_jsonl(args.gold);
  if (mode == atomkg::ExtractionMode::ClosedIE) check_closed_gold(gold);

  const std::vector<atomkg::Triplet> predicted =
      atomkg::read_triplets_jsonl(args.pred);

  std::unique_ptr<atomkg::SimilarityBackend> backend =
      make_similarity_backend(args.sim, args.remote);

  atomkg::EvalReport report;
  try {
    report = atomkg::evaluate(gold, predicted, *backend, args.threshold);
    if (!args.compare.empty()) {
      const std::vector<atomkg::Triplet> other =
          atomkg::read_triplets_jsonl(args.compare);
      const std::vector<int> hits_a =
          atomkg::per_gold_hits(gold, predicted, *backend, args.threshold);
      const std::vector<int> hits_b =
          atomkg::per_gold_hits(gold, other, *backend, args.threshold);
      report.p_value = atomkg::bootstrap_significance(hits_a, hits_b,
                                                      args.iterations,
                                                      args.seed);
    }
  } catch (const atomkg::StageError&) {
    throw;
  } catch (const atomkg::Error& e) {
    throw atomkg::StageError("eval", e.what());
  }

  print_row("metric", "value");
  print_row("accuracy", fmt_double(report.accuracy));
  print_row("entity_recall", fmt_double(report.entity_recall));
  print_row("relation_recall", fmt_double(report.relation_recall));
  print_row("precision", fmt_double(report.precision));
  print_row("recall", fmt_double(report.recall));
  print_row("f1", fmt_double(report.f1));
  print_row("auc", fmt_double(report.auc));
  print_row("matched", static_cast<long long>(report.counts.matched));
  print_row("gold", static_cast<long long>(report.counts.gold));
  print_row("predicted", static_cast<long long>(report.counts.predicted));
  if (report.p_value.has_value()) {
    print_row("p_value", fmt_double(*report.p_value));
  }

  ordered_json doc = eval_report_json(report);
  doc["mode"] = args.mode;
  doc["sim"] = args.sim;
  doc["threshold"] = args.threshold;
  if (!args.compare.empty()) {
    doc["compare"] = args.compare;
    doc["iterations"] = args.iterations;
    doc["seed"] = args.seed;
  }
  const std::string text = doc.dump(2) + "\n";
  if (args.json_out.empty()) {
    std::cout << text;
  } else {
    atomkg::write_text_file(args.json_out, text);
    print_row("wrote", args.json_out);
  }
}

struct SweepArgs {
  std::string gold;
  std::string pred;
  std::string sim = "lexical";
  int steps = 21;
  std::string json_out;
  RemoteFlags remote;
};

void run_sweep(const SweepArgs& args) {
  if (args.steps < 2) throw atomkg::UsageError("--steps must be at least 2");

  const std::vector<atomkg::GoldRecord> gold =
      atomkg::read_gold_jsonl(args.gold);
  const std::vector<atomkg::Triplet> predicted =
      atomkg::read_triplets_jsonl(args.pred);
  std::unique_ptr<atomkg::SimilarityBackend> backend =
      make_similarity_backend(args.sim, args.remote);

  ordered_json points = ordered_json::array();
  print_row("threshold", "relation_recall");
  try {
    for (int i = 0; i < args.steps; ++i) {
      const double threshold =
          static_cast<double>(i) / static_cast<double>(args.steps - 1);
      const double recall =
          atomkg::relation_recall(gold, predicted, *backend, threshold);
      print_row(fmt_double(threshold), fmt_double(recall));
      points.push_back(ordered_json{{"threshold", threshold},
                                    {"relation_recall", recall}});
    }
  } catch (const atomkg::StageError&) {
    throw;
  } catch (const atomkg::Error& e) {
    throw atomkg::StageError("eval", e.what());
  }

  if (!args.json_out.empty()) {
    atomkg::write_text_file(args.json_out, points.dump(2) + "\n");
    print_row("wrote", args.json_out);
  }
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineArgs {
  std::string config_file;
  std::string corpus;
  std::optional<std::string> propositioner;
  std::optional<std::string> extractor;
  std::optional<std::string> embeddings;
  std::optional<std::string> out_dir;
  std::optional<std::string> labels;
  std::optional<std::string> transitive;
  std::optional<std::string> gold;
  std::optional<std::string> mode;
  std::optional<std::string> extraction_config;
  std::optional<int> cap;
  std::optional<int> concurrency;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> base_url;
  std::optional<std::string> model;
  std::optional<double> timeout_seconds;
  std::optional<int> max_attempts;
};

void run_pipeline_cmd(const PipelineArgs& args) {
  atomkg::PipelineConfig config;
  if (!args.config_file.empty()) {
    config = atomkg::load_pipeline_config(args.config_file);
  }

  // Flags override config-file keys.
  if (args.propositioner) config.propositioner = *args.propositioner;
  if (args.extractor) config.extractor = *args.extractor;
  if (args.embeddings) config.embeddings = *args.embeddings;
  if (args.out_dir) config.out_dir = *args.out_dir;
  if (args.labels) config.labels_file = *args.labels;
  if (args.transitive) config.transitive_relations_file = *args.transitive;
  if (args.gold) config.gold_file = *args.gold;
  if (args.cap) config.cap = *args.cap;
  if (args.concurrency) config.concurrency = *args.concurrency;
  if (args.threshold) config.threshold = *args.threshold;
  if (args.seed) config.seed = *args.seed;
  if (args.base_url) config.remote.base_url = *args.base_url;
  if (args.model) config.remote.model = *args.model;
  if (args.timeout_seconds) config.remote.timeout_seconds = *args.timeout_seconds;
  if (args.max_attempts) config.remote.max_attempts = *args.max_attempts;
  try {
    if (args.mode) config.mode = atomkg::parse_mode(*args.mode);
    if (args.extraction_config) {
      config.config = atomkg::parse_config(*args.extraction_config);
    }
  } catch (const atomkg::UsageError& e) {
    throw atomkg::StageError("config", e.what());
  }

  const atomkg::RunManifest manifest =
      atomkg::run_pipeline(config, args.corpus);

  print_row("records", manifest.records);
  print_row("atoms", manifest.atoms);
  print_row("iterations", manifest.iterations);
  print_row("backend_calls", manifest.backend_calls);
  print_row("physical_backend_calls", manifest.physical_backend_calls);
  print_row("unproved_discarded", manifest.unproved_discarded);
  print_row("triplets", manifest.triplets);
  print_row("dropped_lines", manifest.dropped_lines);
  print_row("nodes", manifest.nodes);
  print_row("edges", manifest.edges);
  print_row("derived_edges", manifest.derived_edges);
  if (manifest.eval.has_value()) {
    print_row("relation_recall", fmt_double(manifest.eval->relation_recall));
    print_row("f1", fmt_double(manifest.eval->f1));
    print_row("auc", fmt_double(manifest.eval->auc));
  }
  print_row("artifacts", config.out_dir);
}

// ---------------------------------------------------------------------------
// logic

struct LogicArgs {
  std::vector<std::string> formula_parts;
};

void run_logic_eval(const LogicArgs& args) {
  std::string text;
  for (const std::string& part : args.formula_parts) {
    if (!text.empty()) text += ' ';
    text += part;
  }

  const atomkg::logic::Formula formula = atomkg::logic::parse_formula(text);
  const atomkg::logic::WorldSpace space =
      atomkg::logic::WorldSpace::spanning({&formula, 1});

  const atomkg::logic::TruthTable table =
      atomkg::logic::content(formula, space);
  const atomkg::logic::InfoValue info =
      atomkg::logic::information(formula, space);

  print_row("formula", formula.to_string());
  print_row("variables", static_cast<long long>(space.variable_count()));
  print_row("worlds", static_cast<long long>(space.world_count()));
  print_row("content", static_cast<long long>(table.count()));
  if (info.is_infinite()) {
    print_row("information_bits", "inf");
  } else {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6g", info.bits);
    print_row("information_bits", buffer);
  }
  try {
    if (atomkg::logic::is_atomic(formula)) {
      const std::optional<atomkg::logic::Formula> witness =
          atomkg::logic::equivalent_clause(formula);
      print_row("atomic",
                "yes (" + (witness ? witness->to_string() : text) + ")");
    } else {
      print_row("atomic", "no");
    }
  } catch (const atomkg::CapError&) {
    print_row("atomic", "not checked (more than 10 variables)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "atomkg: recursive text atomization, triplet extraction, knowledge-"
      "graph construction, and extraction-quality scoring"};
  app.require_subcommand(1);

  AtomizeArgs atomize_args;
  CLI::App* atomize_cmd = app.add_subcommand(
      "atomize", "Decompose corpus texts into atomic propositions");
  atomize_cmd->add_option("--in", atomize_args.in, "Corpus JSONL file")
      ->required();
  atomize_cmd->add_option("--out", atomize_args.out, "Output atoms.jsonl")
      ->required();
  atomize_cmd
      ->add_option("--backend", atomize_args.backend,
                   "rules | remote | scripted:FILE | scripted")
      ->capture_default_str();
  atomize_cmd->add_option("--transcript", atomize_args.transcript,
                          "Transcript file for --backend scripted");
  atomize_cmd
      ->add_option("--cap", atomize_args.cap, "Maximum refinement iterations")
      ->capture_default_str();
  atomize_cmd
      ->add_option("--concurrency", atomize_args.concurrency,
                   "In-flight backend calls")
      ->capture_default_str();
  atomize_args.remote.attach(*atomize_cmd);
  atomize_cmd->callback([&]() { run_atomize(atomize_args); });

  ExtractArgs extract_args;
  CLI::App* extract_cmd = app.add_subcommand(
      "extract", "Extract (subject, relation, object) triplets");
  extract_cmd->add_option("--in", extract_args.in, "Corpus JSONL file")
      ->required();
  extract_cmd->add_option("--atoms", extract_args.atoms,
                          "atoms.jsonl from the atomize step");
  extract_cmd->add_option("--out", extract_args.out, "Output triplets.jsonl")
      ->required();
  extract_cmd->add_option("--mode", extract_args.mode, "open | closed")
      ->capture_default_str();
  extract_cmd
      ->add_option("--config", extract_args.config,
                   "direct | prop | comb | union")
      ->capture_default_str();
  extract_cmd
      ->add_option("--backend", extract_args.backend,
                   "remote | scripted:FILE | scripted")
      ->required();
  extract_cmd->add_option("--transcript", extract_args.transcript,
                          "Transcript file for --backend scripted");
  extract_cmd->add_option("--labels", extract_args.labels,
                          "Relation label vocabulary (closed mode)");
  extract_cmd
      ->add_option("--concurrency", extract_args.concurrency,
                   "In-flight backend calls")
      ->capture_default_str();
  extract_args.remote.attach(*extract_cmd);
  extract_cmd->callback([&]() { run_extract(extract_args); });

  KgArgs kg_args;
  CLI::App* kg_cmd = app.add_subcommand(
      "kg", "Build the knowledge graph and infer transitive edges");
  kg_cmd->add_option("--in", kg_args.in, "triplets.jsonl file")->required();
  kg_cmd->add_option("--transitive", kg_args.transitive,
                     "Transitive relation list (one per line)");
  kg_cmd->add_option("--out", kg_args.out_json, "Output graph JSON")
      ->capture_default_str();
  kg_cmd->add_option("--dot", kg_args.out_dot, "Output Graphviz DOT")
      ->capture_default_str();
  kg_cmd->callback([&]() { run_kg(kg_args); });

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Score predicted triplets against gold annotations");
  eval_cmd->add_option("--gold", eval_args.gold, "Gold JSONL file")
      ->required();
  eval_cmd->add_option("--pred", eval_args.pred, "Predicted triplets.jsonl")
      ->required();
  eval_cmd->add_option("--mode", eval_args.mode, "open | closed")
      ->capture_default_str();
  eval_cmd->add_option("--sim", eval_args.sim, "lexical | remote")
      ->capture_default_str();
  eval_cmd
      ->add_option("--threshold", eval_args.threshold,
                   "Semantic-mapping similarity threshold")
      ->capture_default_str();
  eval_cmd->add_option("--compare", eval_args.compare,
                       "Second system's triplets.jsonl for paired bootstrap");
  eval_cmd
      ->add_option("--iterations", eval_args.iterations,
                   "Bootstrap resamples (with --compare)")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_args.seed, "Bootstrap RNG seed")
      ->capture_default_str();
  eval_cmd->add_option("--json", eval_args.json_out,
                       "Write the JSON report here instead of stdout");
  eval_args.remote.attach(*eval_cmd);
  eval_cmd->callback([&]() { run_eval(eval_args); });

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Relation recall across evenly spaced thresholds");
  sweep_cmd->add_option("--gold", sweep_args.gold, "Gold JSONL file")
      ->required();
  sweep_cmd->add_option("--pred", sweep_args.pred, "Predicted triplets.jsonl")
      ->required();
  sweep_cmd->add_option("--sim", sweep_args.sim, "lexical | remote")
      ->capture_default_str();
  sweep_cmd
      ->add_option("--steps", sweep_args.steps,
                   "Number of thresholds between 0 and 1 inclusive")
      ->capture_default_str();
  sweep_cmd->add_option("--json", sweep_args.json_out,
                        "Also write the sweep as JSON here");
  sweep_args.remote.attach(*sweep_cmd);
  sweep_cmd->callback([&]() { run_sweep(sweep_args); });

  PipelineArgs pipeline_args;
  CLI::App* pipeline_cmd = app.add_subcommand(
      "pipeline", "Run atomize, extract, kg, and eval end to end");
  pipeline_cmd->add_option("--config", pipeline_args.config_file,
                           "Pipeline config JSON (flags override its keys)");
  pipeline_cmd->add_option("--corpus", pipeline_args.corpus,
                           "Corpus JSONL file")
      ->required();
  pipeline_cmd->add_option("--propositioner", pipeline_args.propositioner,
                           "rules | remote | scripted:FILE");
  pipeline_cmd->add_option("--extractor", pipeline_args.extractor,
                           "remote | scripted:FILE");
  pipeline_cmd->add_option("--embeddings", pipeline_args.embeddings,
                           "lexical | remote");
  pipeline_cmd->add_option("--out-dir", pipeline_args.out_dir,
                           "Artifact output directory");
  pipeline_cmd->add_option("--labels", pipeline_args.labels,
                           "Relation label vocabulary (closed mode)");
  pipeline_cmd->add_option("--transitive", pipeline_args.transitive,
                           "Transitive relation list");
  pipeline_cmd->add_option("--gold", pipeline_args.gold,
                           "Gold JSONL (enables the eval stage)");
  pipeline_cmd->add_option("--mode", pipeline_args.mode, "open | closed");
  pipeline_cmd->add_option("--extraction-config",
                           pipeline_args.extraction_config,
                           "direct | prop | comb | union");
  pipeline_cmd->add_option("--cap", pipeline_args.cap,
                           "Maximum refinement iterations");
  pipeline_cmd->add_option("--concurrency", pipeline_args.concurrency,
                           "In-flight backend calls");
  pipeline_cmd->add_option("--threshold", pipeline_args.threshold,
                           "Semantic-mapping similarity threshold");
  pipeline_cmd->add_option("--seed", pipeline_args.seed,
                           "Seed echoed into the report");
  pipeline_cmd->add_option("--base-url", pipeline_args.base_url,
                           "Remote endpoint base URL");
  pipeline_cmd->add_option("--model", pipeline_args.model,
                           "Remote model name");
  pipeline_cmd->add_option("--timeout", pipeline_args.timeout_seconds,
                           "Request timeout, seconds");
  pipeline_cmd->add_option("--max-attempts", pipeline_args.max_attempts,
                           "Attempts per request");
  pipeline_cmd->callback([&]() { run_pipeline_cmd(pipeline_args); });

  LogicArgs logic_args;
  CLI::App* logic_cmd =
      app.add_subcommand("logic", "Semantic-information calculus utilities");
  logic_cmd->require_subcommand(1);
  CLI::App* logic_eval_cmd = logic_cmd->add_subcommand(
      "eval", "Content, information, and atomicity of a formula");
  logic_eval_cmd
      ->add_option("formula", logic_args.formula_parts,
                   "Propositional formula, e.g. \"A & !A\"")
      ->required()
      ->expected(-1);
  logic_eval_cmd->callback([&]() { run_logic_eval(logic_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const atomkg::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return stage_exit_code(e.stage);
  } catch (const atomkg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
