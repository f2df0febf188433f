#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "atomkg/atomizer.hpp"
#include "atomkg/chat.hpp"
#include "atomkg/errors.hpp"
#include "atomkg/eval.hpp"
#include "atomkg/extract.hpp"

namespace atomkg {

// A stage of the end-to-end run failed; `stage` is one of "config",
// "atomize", "extract", "kg", "eval". Artifacts written by earlier stages
// stay on disk.
struct StageError : Error {
  StageError(std::string stage_name, const std::string& message)
      : Error(stage_name + " stage failed: " + message),
        stage(std::move(stage_name)) {}
  std::string stage;
};

// Backend selectors are strings so a config file can name them:
//   propositioner: "rules" | "scripted:<transcript.json>" | "remote"
//   extractor:     "scripted:<transcript.json>" | "remote"
//   embeddings:    "lexical" | "remote"
// Remote backends share the `remote` connection settings.
struct PipelineConfig {
  std::string propositioner = "rules";
  std::string extractor;
  std::string embeddings = "lexical";
  RemoteConfig remote;

  int cap = 5;                         // atomization iteration cap
  ExtractionMode mode = ExtractionMode::OpenIE;
  ExtractionConfig config = ExtractionConfig::Union;
  std::string labels_file;             // closed-task label vocabulary
  std::string transitive_relations_file;
  std::string gold_file;               // optional: enables the eval stage
  double threshold = 0.8;              // semantic-mapping threshold
  int concurrency = 4;                 // global in-flight backend calls
  std::uint64_t seed = 7;              // echoed into the report
  std::string out_dir = ".";
};

// Reads a config JSON document. Unknown keys are an error (they are
// usually typos); missing keys keep their defaults.
PipelineConfig load_pipeline_config(const std::string& path);

// Startup validation: cap >= 1, concurrency >= 1, threshold in [0,1],
// every referenced file resolvable, closed mode has labels, Comb implies
// closed mode. Throws StageError("config", ...).
void validate_pipeline_config(const PipelineConfig& config);

// Backend factories shared by the pipeline and the CLI subcommands.
std::unique_ptr<PropositionerBackend> make_propositioner(
    const PipelineConfig& config);
std::unique_ptr<ExtractorBackend> make_extractor(const PipelineConfig& config);
std::unique_ptr<SimilarityBackend> make_similarity(
    const PipelineConfig& config);

// Per-stage counters and wall-clock timings for one run.
struct RunManifest {
  int records = 0;

  // atomize
  int atoms = 0;
  int iterations = 0;
  long long backend_calls = 0;
  long long physical_backend_calls = 0;
  int unproved_discarded = 0;

  // extract
  int triplets = 0;
  int dropped_lines = 0;

  // kg
  int nodes = 0;
  int edges = 0;
  int derived_edges = 0;

  // eval (present when a gold file was configured)
  std::optional<EvalReport> eval;

  double atomize_ms = 0.0;
  double extract_ms = 0.0;
  double kg_ms = 0.0;
  double eval_ms = 0.0;
};

// Runs atomize → extract → kg (→ eval when configured) over a corpus
// JSONL file, writing into config.out_dir:
//   atoms.jsonl, triplets.jsonl, graph.json, graph.dot, report.json
// plus manifest.json. report.json carries counts, metrics, and the config
// echo — never wall-clock times — so two runs with identical config and
// scripted backends are byte-identical across all five artifacts;
// manifest.json repeats the counts with timings added and is exempt from
// that guarantee. Records advance sequentially; the concurrency budget
// parallelizes backend calls within each record, bounding in-flight
// requests globally. A stage failure flushes completed work and throws
// StageError naming the stage.
RunManifest run_pipeline(const PipelineConfig& config,
                         const std::string& corpus_path);

// The report/manifest JSON bodies (report omits timings by design).
std::string report_json_text(const PipelineConfig& config,
                             const RunManifest& manifest);
std::string manifest_json_text(const PipelineConfig& config,
                               const RunManifest& manifest);

}  // namespace atomkg
