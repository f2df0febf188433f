#include "atomkg/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "atomkg/jsonl.hpp"
#include "atomkg/kg.hpp"

namespace atomkg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

// Splits "scripted:<path>" selectors; returns empty when not scripted.
std::string scripted_path(const std::string& selector) {
  const std::string prefix = "scripted:";
  if (selector.rfind(prefix, 0) == 0) return selector.substr(prefix.size());
  return "";
}

void require_file(const std::string& path, const std::string& what) {
  if (!std::filesystem::exists(path)) {
    throw StageError("config", what + " not found: " + path);
  }
}

void read_remote_config(const nlohmann::json& value, RemoteConfig& remote) {
  for (const auto& [key, field] : value.items()) {
    if (key == "base_url") {
      remote.base_url = field.get<std::string>();
    } else if (key == "model") {
      remote.model = field.get<std::string>();
    } else if (key == "api_key") {
      remote.api_key = field.get<std::string>();
    } else if (key == "timeout_seconds") {
      remote.timeout_seconds = field.get<double>();
    } else if (key == "max_attempts") {
      remote.max_attempts = field.get<int>();
    } else if (key == "backoff_initial_ms") {
      remote.backoff_initial_ms = field.get<int>();
    } else {
      throw StageError("config", "unknown remote config key: " + key);
    }
  }
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = parse_json_file(path);
  } catch (const Error& e) {
    throw StageError("config", e.what());
  }
  if (!doc.is_object()) {
    throw StageError("config", "config must be a JSON object: " + path);
  }

  PipelineConfig config;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "propositioner") {
        config.propositioner = value.get<std::string>();
      } else if (key == "extractor") {
        config.extractor = value.get<std::string>();
      } else if (key == "embeddings") {
        config.embeddings = value.get<std::string>();
      } else if (key == "remote") {
        read_remote_config(value, config.remote);
      } else if (key == "cap") {
        config.cap = value.get<int>();
      } else if (key == "mode") {
        config.mode = parse_mode(value.get<std::string>());
      } else if (key == "config") {
        config.config = parse_config(value.get<std::string>());
      } else if (key == "labels_file") {
        config.labels_file = value.get<std::string>();
      } else if (key == "transitive_relations_file") {
        config.transitive_relations_file = value.get<std::string>();
      } else if (key == "gold_file") {
        config.gold_file = value.get<std::string>();
      } else if (key == "threshold") {
        config.threshold = value.get<double>();
      } else if (key == "concurrency") {
        config.concurrency = value.get<int>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "out_dir") {
        config.out_dir = value.get<std::string>();
      } else {
        throw StageError("config", "unknown config key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw StageError("config", std::string("bad config value: ") + e.what());
  } catch (const UsageError& e) {  // bad mode/config name
    throw StageError("config", e.what());
  }
  return config;
}

void validate_pipeline_config(const PipelineConfig& config) {
  if (config.cap < 1) {
    throw StageError("config", "cap must be at least 1");
  }
  if (config.concurrency < 1) {
    throw StageError("config", "concurrency must be at least 1");
  }
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    throw StageError("config", "threshold must lie in [0, 1]");
  }

  const auto check_selector = [&](const std::string& selector,
                                  const std::string& role, bool rules_allowed,
                                  bool lexical_allowed,
                                  bool scripted_allowed) {
    if (selector == "remote") {
      if (config.remote.base_url.empty()) {
        throw StageError("config", role + " is remote but remote.base_url "
                                          "is empty");
      }
      return;
    }
    if (rules_allowed && selector == "rules") return;
    if (lexical_allowed && selector == "lexical") return;
    if (scripted_allowed) {
      const std::string path = scripted_path(selector);
      if (!path.empty()) {
        require_file(path, role + " transcript");
        return;
      }
    }
    throw StageError("config", "unusable " + role + " selector: \"" +
                                   selector + "\"");
  };
  check_selector(config.propositioner, "propositioner", true, false, true);
  check_selector(config.extractor, "extractor", false, false, true);
  check_selector(config.embeddings, "embeddings", false, true, false);

  if (!config.labels_file.empty()) {
    require_file(config.labels_file, "labels file");
  }
  if (!config.transitive_relations_file.empty()) {
    require_file(config.transitive_relations_file,
                 "transitive relations file");
  }
  if (!config.gold_file.empty()) {
    require_file(config.gold_file, "gold file");
  }

  if (config.mode == ExtractionMode::ClosedIE && config.labels_file.empty()) {
    throw StageError("config", "closed mode needs a labels_file");
  }
  if (config.config == ExtractionConfig::Comb &&
      config.mode != ExtractionMode::ClosedIE) {
    throw StageError("config", "the Comb configuration is defined for "
                               "closed mode only");
  }
}

std::unique_ptr<PropositionerBackend> make_propositioner(
    const PipelineConfig& config) {
  if (config.propositioner == "rules") {
    return std::make_unique<RuleBasedPropositioner>();
  }
  if (config.propositioner == "remote") {
    return std::make_unique<RemotePropositioner>(config.remote);
  }
  const std::string path = scripted_path(config.propositioner);
  if (!path.empty()) {
    return std::make_unique<ScriptedPropositioner>(
        ScriptedPropositioner::from_file(path));
  }
  throw StageError("config", "unusable propositioner selector: \"" +
                                 config.propositioner + "\"");
}

std::unique_ptr<ExtractorBackend> make_extractor(
    const PipelineConfig& config) {
  if (config.extractor == "remote") {
    return std::make_unique<RemoteExtractor>(config.remote);
  }
  const std::string path = scripted_path(config.extractor);
  if (!path.empty()) {
    return std::make_unique<ScriptedExtractor>(
        ScriptedExtractor::from_file(path));
  }
  throw StageError("config", "unusable extractor selector: \"" +
                                 config.extractor + "\"");
}

std::unique_ptr<SimilarityBackend> make_similarity(
    const PipelineConfig& config) {
  if (config.embeddings == "lexical") {
    return std::make_unique<LexicalSimilarity>();
  }
  if (config.embeddings == "remote") {
    return std::make_unique<RemoteSimilarity>(config.remote);
  }
  throw StageError("config", "unusable embeddings selector: \"" +
                                 config.embeddings + "\"");
}

namespace {

nlohmann::ordered_json config_echo(const PipelineConfig& config) {
  // The API key is a secret and never lands in an artifact.
  nlohmann::ordered_json remote;
  remote["base_url"] = config.remote.base_url;
  remote["model"] = config.remote.model;
  return nlohmann::ordered_json{
      {"propositioner", config.propositioner},
      {"extractor", config.extractor},
      {"embeddings", config.embeddings},
      {"remote", remote},
      {"cap", config.cap},
      {"mode", mode_name(config.mode)},
      {"config", config_name(config.config)},
      {"labels_file", config.labels_file},
      {"transitive_relations_file", config.transitive_relations_file},
      {"gold_file", config.gold_file},
      {"threshold", config.threshold},
      {"concurrency", config.concurrency},
      {"seed", config.seed},
  };
}

nlohmann::ordered_json counts_body(const RunManifest& manifest) {
  nlohmann::ordered_json body;
  body["records"] = manifest.records;
  body["atomize"] = {{"atoms", manifest.atoms},
                     {"iterations", manifest.iterations},
                     {"backend_calls", manifest.backend_calls},
                     {"physical_backend_calls",
                      manifest.physical_backend_calls},
                     {"unproved_discarded", manifest.unproved_discarded}};
  body["extract"] = {{"triplets", manifest.triplets},
                     {"dropped_lines", manifest.dropped_lines}};
  body["kg"] = {{"nodes", manifest.nodes},
                {"edges", manifest.edges},
                {"derived_edges", manifest.derived_edges}};
  if (manifest.eval.has_value()) {
    const EvalReport& r = *manifest.eval;
    nlohmann::ordered_json eval_body{
        {"accuracy", r.accuracy},
        {"entity_recall", r.entity_recall},
        {"relation_recall", r.relation_recall},
        {"precision", r.precision},
        {"recall", r.recall},
        {"f1", r.f1},
        {"auc", r.auc},
        {"counts",
         {{"matched", r.counts.matched},
          {"gold", r.counts.gold},
          {"predicted", r.counts.predicted}}},
    };
    if (r.p_value.has_value()) eval_body["p_value"] = *r.p_value;
    body["eval"] = eval_body;
  } else {
    body["eval"] = nullptr;
  }
  return body;
}

}  // namespace

std::string report_json_text(const PipelineConfig& config,
                             const RunManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["config"] = config_echo(config);
  doc.update(counts_body(manifest));
  return doc.dump(2) + "\n";
}

std::string manifest_json_text(const PipelineConfig& config,
                               const RunManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["config"] = config_echo(config);
  doc.update(counts_body(manifest));
  doc["timings_ms"] = {{"atomize", manifest.atomize_ms},
                       {"extract", manifest.extract_ms},
                       {"kg", manifest.kg_ms},
                       {"eval", manifest.eval_ms}};
  return doc.dump(2) + "\n";
}

RunManifest run_pipeline(const PipelineConfig& config,
                         const std::string& corpus_path) {
  validate_pipeline_config(config);

  std::vector<CorpusRecord> corpus;
  try {
    corpus = read_corpus(corpus_path);
  } catch (const Error& e) {
    throw StageError("config", e.what());
  }

  std::vector<std::string> labels;
  std::set<std::string> transitive;
  try {
    if (!config.labels_file.empty()) {
      labels = read_relation_list(config.labels_file);
    }
    if (!config.transitive_relations_file.empty()) {
      const std::vector<std::string> rows =
          read_relation_list(config.transitive_relations_file);
      transitive.insert(rows.begin(), rows.end());
    }
    std::filesystem::create_directories(config.out_dir);
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }

  const std::filesystem::path out(config.out_dir);
  const std::string atoms_path = (out / "atoms.jsonl").string();
  const std::string triplets_path = (out / "triplets.jsonl").string();

  std::unique_ptr<PropositionerBackend> propositioner =
      make_propositioner(config);
  std::unique_ptr<ExtractorBackend> extractor = make_extractor(config);

  RunManifest manifest;
  manifest.records = static_cast<int>(corpus.size());

  std::vector<Proposition> all_atoms;
  std::vector<Triplet> all_triplets;
  const auto flush_text_stages = [&]() {
    write_atoms_jsonl(atoms_path, all_atoms);
    write_triplets_jsonl(triplets_path, all_triplets);
  };

  for (const CorpusRecord& record : corpus) {
    // -- atomize ----------------------------------------------------------
    const Clock::time_point atomize_start = Clock::now();
    AtomizationResult atomized;
    try {
      if (auto* remote =
              dynamic_cast<RemotePropositioner*>(propositioner.get())) {
        remote->set_title(record.title);
      }
      AtomizationOptions options;
      options.cap = config.cap;
      options.concurrency = config.concurrency;
      options.source_id = record.source_id;
      atomized = atomize(record.text, *propositioner, options);
    } catch (const Error& e) {
      flush_text_stages();
      throw StageError("atomize",
                       "record \"" + record.source_id + "\": " + e.what());
    }
    all_atoms.insert(all_atoms.end(), atomized.atoms.begin(),
                     atomized.atoms.end());
    manifest.atoms += static_cast<int>(atomized.atoms.size());
    manifest.iterations += atomized.iterations_used;
    manifest.backend_calls += atomized.backend_calls;
    manifest.physical_backend_calls += atomized.physical_backend_calls;
    manifest.unproved_discarded += atomized.unproved_discarded;
    manifest.atomize_ms += ms_since(atomize_start);

    // -- extract ----------------------------------------------------------
    const Clock::time_point extract_start = Clock::now();
    try {
      ExtractionTask task;
      task.mode = config.mode;
      task.config = config.config;
      task.text = record.text;
      task.source_id = record.source_id;
      task.entity1 = record.entity1;
      task.entity2 = record.entity2;
      task.labels = labels;
      const ExtractionRun run =
          run_config(task, &atomized, *extractor, config.concurrency);
      all_triplets.insert(all_triplets.end(), run.triplets.begin(),
                          run.triplets.end());
      manifest.dropped_lines += run.dropped_lines;
    } catch (const Error& e) {
      flush_text_stages();
      throw StageError("extract",
                       "record \"" + record.source_id + "\": " + e.what());
    }
    manifest.extract_ms += ms_since(extract_start);
  }
  manifest.triplets = static_cast<int>(all_triplets.size());
  flush_text_stages();

  // -- kg ------------------------------------------------------------------
  const Clock::time_point kg_start = Clock::now();
  try {
    KnowledgeGraph graph = build_graph(all_triplets);
    graph = infer_transitive(graph, transitive);
    write_graph_json((out / "graph.json").string(), graph);
    write_graph_dot((out / "graph.dot").string(), graph);
    manifest.nodes = static_cast<int>(graph.nodes.size());
    manifest.edges = static_cast<int>(graph.edges.size());
    for (const GraphEdge& edge : graph.edges) {
      if (edge.derived) ++manifest.derived_edges;
    }
  } catch (const Error& e) {
    throw StageError("kg", e.what());
  }
  manifest.kg_ms = ms_since(kg_start);

  // -- eval (optional) -----------------------------------------------------
  if (!config.gold_file.empty()) {
    const Clock::time_point eval_start = Clock::now();
    try {
      const std::vector<GoldRecord> gold = read_gold_jsonl(config.gold_file);
      std::unique_ptr<SimilarityBackend> similarity =
          make_similarity(config);
      manifest.eval =
          evaluate(gold, all_triplets, *similarity, config.threshold);
    } catch (const Error& e) {
      throw StageError("eval", e.what());
    }
    manifest.eval_ms = ms_since(eval_start);
  }

  write_text_file((out / "report.json").string(),
                  report_json_text(config, manifest));
  write_text_file((out / "manifest.json").string(),
                  manifest_json_text(config, manifest));
  return manifest;
}

}  // namespace atomkg
