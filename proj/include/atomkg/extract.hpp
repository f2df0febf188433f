#pragma once

#include <map>
#include <string>
#include <vector>

#include "atomkg/atomizer.hpp"
#include "atomkg/chat.hpp"
#include "atomkg/errors.hpp"

namespace atomkg {

// Sentinel returned by relation classification when the model's answer is
// not in the label vocabulary (or the backend has no scripted answer).
inline constexpr const char* kNoRelation = "NO_RELATION";

// Where a triplet came from: straight from the source text, or from one of
// its atomic propositions.
enum class Origin { Direct, Prop };

std::string origin_name(Origin origin);
Origin parse_origin(const std::string& name);

struct Provenance {
  std::string source_id;
  Origin origin = Origin::Direct;
  // The atomic proposition the triplet was extracted from; empty for
  // Direct provenance.
  std::string proposition;

  bool operator==(const Provenance&) const = default;
};

struct Triplet {
  std::string subject;
  std::string relation;
  std::string object;
  double confidence = 1.0;
  std::vector<Provenance> provenance;
};

enum class ExtractionMode { OpenIE, ClosedIE };
enum class ExtractionConfig { Direct, Prop, Comb, Union };

std::string mode_name(ExtractionMode mode);
ExtractionMode parse_mode(const std::string& name);
std::string config_name(ExtractionConfig config);
ExtractionConfig parse_config(const std::string& name);

// One unit of extraction work: a source text plus everything the chosen
// mode and configuration need to run on it.
struct ExtractionTask {
  ExtractionMode mode = ExtractionMode::OpenIE;
  ExtractionConfig config = ExtractionConfig::Direct;
  std::string text;
  std::string source_id;
  std::string entity1;                // ClosedIE only
  std::string entity2;                // ClosedIE only
  std::vector<std::string> labels;    // ClosedIE vocabulary
};

// Raw open-IE output for one text: parsed triplets plus the count of model
// output lines that did not conform to "subject | predicate | object".
struct OpenExtraction {
  std::vector<Triplet> triplets;
  int dropped_lines = 0;
};

class ExtractorBackend {
 public:
  virtual ~ExtractorBackend() = default;

  // Extracts (subject, relation, object) triplets from one text.
  virtual OpenExtraction extract_open(const std::string& text) = 0;

  // Names the relation between e1 and e2 in the text, or kNoRelation.
  // The result is always a member of labels or the sentinel.
  virtual std::string classify(const std::string& text,
                               const std::string& e1, const std::string& e2,
                               const std::vector<std::string>& labels) = 0;

  virtual std::string kind() const = 0;
};

// Resolves a model reply to a vocabulary label: first nonempty line,
// exact match first, then ASCII-case-insensitive, else kNoRelation.
std::string match_label(const std::string& reply,
                        const std::vector<std::string>& labels);

// Parses "subject | predicate | object" lines (exactly two pipes) into
// deduplicated triplets with confidence 1.0; nonconforming lines are
// counted, not errors.
OpenExtraction parse_triplet_lines(const std::string& reply);

// Validates and runs one classification. Throws UsageError on an empty
// label vocabulary.
std::string classify_relation(const std::string& text, const std::string& e1,
                              const std::string& e2,
                              const std::vector<std::string>& labels,
                              ExtractorBackend& backend);

// Canonicalizes a triplet list: sorts by (subject, relation, object),
// merges duplicates keeping the maximum confidence and the union of
// provenance records in first-occurrence order. Idempotent.
std::vector<Triplet> merge_triplets(std::vector<Triplet> triplets);

struct ExtractionRun {
  std::vector<Triplet> triplets;  // canonically sorted, deduplicated
  int dropped_lines = 0;          // nonconforming open-IE output lines
};

// Executes one task under its configuration:
//   Direct — extract from the raw text;
//   Prop   — extract from each proved atom, union the results;
//   Comb   — (ClosedIE only) keep Direct when both entities appear in its
//            output fields, otherwise fall back to Prop;
//   Union  — deduplicated union of Direct and Prop.
// atoms may be null for Direct; every other configuration requires it.
// Per-atom calls are issued with at most `concurrency` in flight.
ExtractionRun run_config(const ExtractionTask& task,
                         const AtomizationResult* atoms,
                         ExtractorBackend& backend, int concurrency = 4);

// Backend that talks to a chat-completions endpoint with the fixed
// open-IE and relation-classification prompts.
class RemoteExtractor : public ExtractorBackend {
 public:
  explicit RemoteExtractor(RemoteConfig config);
  OpenExtraction extract_open(const std::string& text) override;
  std::string classify(const std::string& text, const std::string& e1,
                       const std::string& e2,
                       const std::vector<std::string>& labels) override;
  std::string kind() const override { return "remote"; }

 private:
  RemoteConfig config_;
};

// Deterministic offline backend replaying a transcript keyed on
// normalized text. Unknown open-IE texts yield no triplets; unknown
// classification queries yield kNoRelation.
class ScriptedExtractor : public ExtractorBackend {
 public:
  struct ClosedAnswer {
    std::string text;
    std::string e1;
    std::string e2;
    std::string label;
  };

  ScriptedExtractor() = default;
  ScriptedExtractor(std::map<std::string, std::vector<Triplet>> open,
                    std::vector<ClosedAnswer> closed);

  // File format: {"open": {text: [{"s","r","o","confidence"?}...]},
  //               "closed": [{"text","e1","e2","label"}...]} — both keys
  // optional.
  static ScriptedExtractor from_file(const std::string& path);

  OpenExtraction extract_open(const std::string& text) override;
  std::string classify(const std::string& text, const std::string& e1,
                       const std::string& e2,
                       const std::vector<std::string>& labels) override;
  std::string kind() const override { return "scripted"; }

 private:
  std::map<std::string, std::vector<Triplet>> open_;
  std::vector<ClosedAnswer> closed_;
};

// Triplet JSONL rows: {"s","r","o","confidence","origin","source_id",
// "proposition"} with the first provenance record flattened in; rows with
// merged provenance additionally carry "merged_origins". Reading restores
// one provenance record per row.
void write_triplets_jsonl(const std::string& path,
                          const std::vector<Triplet>& triplets);
std::vector<Triplet> read_triplets_jsonl(const std::string& path);

}  // namespace atomkg
