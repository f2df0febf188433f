#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atomkg/chat.hpp"
#include "atomkg/errors.hpp"
#include "atomkg/extract.hpp"

namespace atomkg {

struct GoldTriplet {
  std::string subject;
  std::string relation;
  std::string object;

  bool operator==(const GoldTriplet&) const = default;
};

struct GoldRecord {
  std::string source_id;
  std::string text;
  std::vector<GoldTriplet> gold_triplets;
  std::string entity1;   // closed-IE records
  std::string entity2;   // closed-IE records
  std::string relation;  // closed-IE gold label
  std::string lang;
};

// Gold JSONL rows: {"source_id","text","gold_triplets":[{"s","r","o"}],
// "e1","e2","relation","lang"} — all optional except that a scoring record
// needs either gold_triplets or the (e1, relation, e2) closed-IE fields,
// which are synthesized into a single gold triplet.
std::vector<GoldRecord> read_gold_jsonl(const std::string& path);

class SimilarityBackend {
 public:
  virtual ~SimilarityBackend() = default;
  // Embeds text as a vector; all vectors from one instance share a
  // dimension.
  virtual std::vector<double> embed(const std::string& text) = 0;
  virtual std::string kind() const = 0;
};

// Deterministic offline similarity: case-folded character-trigram counts
// over 29 character classes (a-z, digit, space, other); strings shorter
// than three characters are padded with spaces.
class LexicalSimilarity : public SimilarityBackend {
 public:
  static constexpr std::size_t kClasses = 29;
  std::vector<double> embed(const std::string& text) override;
  std::string kind() const override { return "lexical"; }
};

// Embeddings from a remote endpoint, cached per normalized text.
class RemoteSimilarity : public SimilarityBackend {
 public:
  explicit RemoteSimilarity(RemoteConfig config);
  std::vector<double> embed(const std::string& text) override;
  std::string kind() const override { return "remote"; }

 private:
  EmbeddingClient client_;
  std::map<std::string, std::vector<double>> cache_;
};

// Cosine similarity; zero vectors compare as 0. Throws Error on dimension
// mismatch.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Entity match per the matching rule: equal, or either side a substring of
// the other, case-insensitively (Unicode case folding). Symmetric.
bool entity_match(const std::string& gold_entity,
                  const std::string& predicted);

// Fraction of gold entities with an entity_match against any predicted
// subject or object. Throws Error on empty gold.
double entity_recall(const std::vector<std::string>& gold_entities,
                     const std::vector<Triplet>& predicted);

// Maps a free-form relation onto the vocabulary: argmax cosine, returned
// only when it reaches the threshold; ties break toward the earlier
// vocabulary entry. Throws UsageError on an empty vocabulary or a
// threshold outside [0,1].
std::optional<std::string> semantic_map(
    const std::string& relation, const std::vector<std::string>& vocabulary,
    SimilarityBackend& backend, double threshold);

// Per gold triplet: 1 when some scoped prediction matches both entities in
// order and its relation semantically maps to the gold relation, else 0.
// The mapping vocabulary is the sorted set of gold relations. Predictions
// are scoped to a record when the record has a source_id and the
// prediction carries it in some provenance record; records without a
// source_id accept every prediction.
std::vector<int> per_gold_hits(const std::vector<GoldRecord>& gold,
                               const std::vector<Triplet>& predicted,
                               SimilarityBackend& backend, double threshold);

// Mean of per_gold_hits. Throws Error when the records carry no gold
// triplets.
double relation_recall(const std::vector<GoldRecord>& gold,
                       const std::vector<Triplet>& predicted,
                       SimilarityBackend& backend, double threshold);

struct EvalCounts {
  int matched = 0;
  int gold = 0;
  int predicted = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  double entity_recall = 0.0;
  double relation_recall = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  EvalCounts counts;
  std::optional<double> p_value;
};

using TripletMatcher =
    std::function<bool(const Triplet&, const GoldTriplet&)>;

// Precision/recall/F1 under a maximum one-to-one matching between
// predictions and gold triplets, plus the area under the precision-recall
// curve swept over distinct confidence values (largest first, trapezoidal
// over recall, equal-recall points keep the best precision). Zero
// predictions give P = 0 and AUC = 0; empty gold is an error.
EvalReport prf1_auc(const std::vector<Triplet>& predicted,
                    const std::vector<GoldTriplet>& gold,
                    const TripletMatcher& matcher);

// Full scoring pass: entity recall, semantic relation recall, strict
// accuracy (exact case-insensitive relation equality), and matched
// P/R/F1/AUC under the entity + semantic-relation matcher.
EvalReport evaluate(const std::vector<GoldRecord>& gold,
                    const std::vector<Triplet>& predicted,
                    SimilarityBackend& backend, double threshold);

// Paired one-sided bootstrap: p = fraction of resamples in which system A
// fails to beat system B (mean(a*) - mean(b*) <= 0). Deterministic for a
// fixed seed regardless of thread count; the serial and parallel kernels
// return bit-identical values. Throws UsageError on length mismatch,
// empty input, or iterations < 1000.
double bootstrap_significance(const std::vector<int>& scores_a,
                              const std::vector<int>& scores_b,
                              int iterations = 10000,
                              std::uint64_t seed = 7);
double bootstrap_significance_serial(const std::vector<int>& scores_a,
                                     const std::vector<int>& scores_b,
                                     int iterations, std::uint64_t seed);
double bootstrap_significance_parallel(const std::vector<int>& scores_a,
                                       const std::vector<int>& scores_b,
                                       int iterations, std::uint64_t seed);

}  // namespace atomkg
