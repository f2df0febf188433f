#include "atomkg/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "atomkg/jsonl.hpp"
#include "atomkg/text.hpp"

namespace atomkg {

std::vector<GoldRecord> read_gold_jsonl(const std::string& path) {
  std::vector<GoldRecord> records;
  for (const nlohmann::json& row : read_jsonl(path)) {
    GoldRecord record;
    record.source_id = normalize_text(row.value("source_id", std::string{}));
    record.text = row.value("text", std::string{});
    record.entity1 = normalize_text(row.value("e1", std::string{}));
    record.entity2 = normalize_text(row.value("e2", std::string{}));
    record.relation = normalize_text(row.value("relation", std::string{}));
    record.lang = row.value("lang", std::string{});
    if (row.contains("gold_triplets")) {
      for (const nlohmann::json& item : row.at("gold_triplets")) {
        GoldTriplet triplet;
        triplet.subject = normalize_text(item.at("s").get<std::string>());
        triplet.relation = normalize_text(item.at("r").get<std::string>());
        triplet.object = normalize_text(item.at("o").get<std::string>());
        record.gold_triplets.push_back(std::move(triplet));
      }
    }
    // Closed-IE records synthesize their single gold triplet.
    if (record.gold_triplets.empty() && !record.relation.empty() &&
        !record.entity1.empty() && !record.entity2.empty()) {
      record.gold_triplets.push_back(
          {record.entity1, record.relation, record.entity2});
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<double> LexicalSimilarity::embed(const std::string& text) {
  // Byte-level classes: ASCII letters fold to 26 classes 0-25, digits 26,
  // space 27, everything else (including non-ASCII bytes) 28.
  const auto classify = [](unsigned char c) -> std::size_t {
    const unsigned char folded =
        static_cast<unsigned char>(std::tolower(c));
    if (folded >= 'a' && folded <= 'z') return folded - 'a';
    if (folded >= '0' && folded <= '9') return 26;
    if (folded == ' ') return 27;
    return 28;
  };

  std::vector<std::size_t> classes;
  classes.reserve(text.size());
  for (const char c : text) {
    classes.push_back(classify(static_cast<unsigned char>(c)));
  }
  while (classes.size() < 3) classes.push_back(27);  // pad with spaces

  std::vector<double> vec(kClasses * kClasses * kClasses, 0.0);
  for (std::size_t i = 0; i + 3 <= classes.size(); ++i) {
    vec[classes[i] * kClasses * kClasses + classes[i + 1] * kClasses +
        classes[i + 2]] += 1.0;
  }
  return vec;
}

RemoteSimilarity::RemoteSimilarity(RemoteConfig config)
    : client_(std::move(config)) {}

std::vector<double> RemoteSimilarity::embed(const std::string& text) {
  const std::string key = normalize_text(text);
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  std::vector<double> vec = client_.embed(key);
  cache_.emplace(key, vec);
  return vec;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error("embedding dimension mismatch: " + std::to_string(a.size()) +
                " vs " + std::to_string(b.size()));
  }
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

bool entity_match(const std::string& gold_entity,
                  const std::string& predicted) {
  const std::string gold = fold_case(gold_entity);
  const std::string pred = fold_case(predicted);
  return gold == pred || pred.find(gold) != std::string::npos ||
         gold.find(pred) != std::string::npos;
}

double entity_recall(const std::vector<std::string>& gold_entities,
                     const std::vector<Triplet>& predicted) {
  if (gold_entities.empty()) {
    throw Error("entity_recall requires at least one gold entity");
  }
  int found = 0;
  for (const std::string& entity : gold_entities) {
    for (const Triplet& triplet : predicted) {
      if (entity_match(entity, triplet.subject) ||
          entity_match(entity, triplet.object)) {
        ++found;
        break;
      }
    }
  }
  return static_cast<double>(found) /
         static_cast<double>(gold_entities.size());
}

std::optional<std::string> semantic_map(
    const std::string& relation, const std::vector<std::string>& vocabulary,
    SimilarityBackend& backend, double threshold) {
  if (vocabulary.empty()) {
    throw UsageError("semantic_map requires a nonempty vocabulary");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw UsageError("semantic_map threshold must lie in [0, 1]");
  }
  const std::vector<double> query = backend.embed(relation);
  double best = -1.0;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    const double similarity = cosine(query, backend.embed(vocabulary[i]));
    if (similarity > best) {  // strict: ties keep the earlier label
      best = similarity;
      best_index = i;
    }
  }
  if (best >= threshold) return vocabulary[best_index];
  return std::nullopt;
}

namespace {

bool scope_allows(const GoldRecord& record, const Triplet& prediction) {
  if (record.source_id.empty()) return true;
  for (const Provenance& provenance : prediction.provenance) {
    if (provenance.source_id == record.source_id) return true;
  }
  return false;
}

struct FlatGold {
  GoldTriplet triplet;
  const GoldRecord* record;
};

std::vector<FlatGold> flatten_gold(const std::vector<GoldRecord>& gold) {
  std::vector<FlatGold> flat;
  for (const GoldRecord& record : gold) {
    for (const GoldTriplet& triplet : record.gold_triplets) {
      flat.push_back({triplet, &record});
    }
  }
  return flat;
}

std::vector<std::string> gold_vocabulary(const std::vector<FlatGold>& flat) {
  std::set<std::string> relations;
  for (const FlatGold& g : flat) relations.insert(g.triplet.relation);
  return {relations.begin(), relations.end()};
}

// Memoizing wrapper around semantic_map for repeated predicted relations.
class MappedRelation {
 public:
  MappedRelation(const std::vector<std::string>& vocabulary,
                 SimilarityBackend& backend, double threshold)
      : vocabulary_(vocabulary), backend_(backend), threshold_(threshold) {}

  const std::optional<std::string>& of(const std::string& relation) {
    const auto it = cache_.find(relation);
    if (it != cache_.end()) return it->second;
    return cache_
        .emplace(relation,
                 semantic_map(relation, vocabulary_, backend_, threshold_))
        .first->second;
  }

 private:
  const std::vector<std::string>& vocabulary_;
  SimilarityBackend& backend_;
  double threshold_;
  std::map<std::string, std::optional<std::string>> cache_;
};

// Maximum bipartite matching (augmenting paths) over a fixed adjacency,
// restricted to the given prediction indices.
int max_matching(const std::vector<std::vector<int>>& adjacency,
                 std::size_t gold_count,
                 const std::vector<int>& prediction_subset) {
  std::vector<int> owner(gold_count, -1);
  std::vector<char> visited;
  const std::function<bool(int)> augment = [&](int pred) -> bool {
    for (const int g : adjacency[pred]) {
      if (visited[g]) continue;
      visited[g] = 1;
      if (owner[g] == -1 || augment(owner[g])) {
        owner[g] = pred;
        return true;
      }
    }
    return false;
  };
  int matched = 0;
  for (const int pred : prediction_subset) {
    visited.assign(gold_count, 0);
    if (augment(pred)) ++matched;
  }
  return matched;
}

EvalReport prf1_core(
    const std::vector<Triplet>& predicted, std::size_t gold_count,
    const std::function<bool(std::size_t, std::size_t)>& allowed) {
  if (gold_count == 0) {
    throw Error("scoring requires at least one gold triplet");
  }
  EvalReport report;
  report.counts.gold = static_cast<int>(gold_count);
  report.counts.predicted = static_cast<int>(predicted.size());
  if (predicted.empty()) return report;  // P, R, F1, AUC all zero

  std::vector<std::vector<int>> adjacency(predicted.size());
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    for (std::size_t g = 0; g < gold_count; ++g) {
      if (allowed(p, g)) adjacency[p].push_back(static_cast<int>(g));
    }
  }

  std::vector<int> all(predicted.size());
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    all[p] = static_cast<int>(p);
  }
  const int matched = max_matching(adjacency, gold_count, all);
  report.counts.matched = matched;
  report.precision =
      static_cast<double>(matched) / static_cast<double>(predicted.size());
  report.recall =
      static_cast<double>(matched) / static_cast<double>(gold_count);
  report.f1 = (report.precision + report.recall > 0.0)
                  ? 2.0 * report.precision * report.recall /
                        (report.precision + report.recall)
                  : 0.0;

  // Precision-recall sweep over distinct confidence levels, largest first.
  std::set<double, std::greater<double>> levels;
  for (const Triplet& triplet : predicted) levels.insert(triplet.confidence);
  std::vector<std::pair<double, double>> points;  // (recall, precision)
  for (const double level : levels) {
    std::vector<int> subset;
    for (std::size_t p = 0; p < predicted.size(); ++p) {
      if (predicted[p].confidence >= level) {
        subset.push_back(static_cast<int>(p));
      }
    }
    const int m = max_matching(adjacency, gold_count, subset);
    points.emplace_back(
        static_cast<double>(m) / static_cast<double>(gold_count),
        static_cast<double>(m) / static_cast<double>(subset.size()));
  }

  // Recall never decreases along the sweep; equal-recall points collapse
  // to the best precision seen at that recall.
  std::vector<std::pair<double, double>> curve;
  for (const auto& [recall, precision] : points) {
    if (!curve.empty() && curve.back().first == recall) {
      curve.back().second = std::max(curve.back().second, precision);
      continue;
    }
    curve.emplace_back(recall, precision);
  }
  // Anchor the curve at zero recall with the earliest precision.
  curve.insert(curve.begin(), {0.0, curve.front().second});

  double auc = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    auc += (curve[i + 1].first - curve[i].first) *
           (curve[i].second + curve[i + 1].second) / 2.0;
  }
  report.auc = auc;
  return report;
}

}  // namespace

std::vector<int> per_gold_hits(const std::vector<GoldRecord>& gold,
                               const std::vector<Triplet>& predicted,
                               SimilarityBackend& backend, double threshold) {
  const std::vector<FlatGold> flat = flatten_gold(gold);
  if (flat.empty()) {
    throw Error("relation recall requires at least one gold triplet");
  }
  const std::vector<std::string> vocabulary = gold_vocabulary(flat);
  MappedRelation mapped(vocabulary, backend, threshold);

  std::vector<int> hits;
  hits.reserve(flat.size());
  for (const FlatGold& g : flat) {
    int hit = 0;
    for (const Triplet& prediction : predicted) {
      if (!scope_allows(*g.record, prediction)) continue;
      if (!entity_match(g.triplet.subject, prediction.subject)) continue;
      if (!entity_match(g.triplet.object, prediction.object)) continue;
      const std::optional<std::string>& label =
          mapped.of(prediction.relation);
      if (label && *label == g.triplet.relation) {
        hit = 1;
        break;
      }
    }
    hits.push_back(hit);
  }
  return hits;
}

double relation_recall(const std::vector<GoldRecord>& gold,
                       const std::vector<Triplet>& predicted,
                       SimilarityBackend& backend, double threshold) {
  const std::vector<int> hits =
      per_gold_hits(gold, predicted, backend, threshold);
  int sum = 0;
  for (const int hit : hits) sum += hit;
  return static_cast<double>(sum) / static_cast<double>(hits.size());
}

EvalReport prf1_auc(const std::vector<Triplet>& predicted,
                    const std::vector<GoldTriplet>& gold,
                    const TripletMatcher& matcher) {
  return prf1_core(predicted, gold.size(),
                   [&](std::size_t p, std::size_t g) {
                     return matcher(predicted[p], gold[g]);
                   });
}

EvalReport evaluate(const std::vector<GoldRecord>& gold,
                    const std::vector<Triplet>& predicted,
                    SimilarityBackend& backend, double threshold) {
  const std::vector<FlatGold> flat = flatten_gold(gold);
  if (flat.empty()) {
    throw Error("evaluate requires at least one gold triplet");
  }
  const std::vector<std::string> vocabulary = gold_vocabulary(flat);
  MappedRelation mapped(vocabulary, backend, threshold);

  EvalReport report = prf1_core(
      predicted, flat.size(), [&](std::size_t p, std::size_t g) {
        const Triplet& prediction = predicted[p];
        const FlatGold& item = flat[g];
        if (!scope_allows(*item.record, prediction)) return false;
        if (!entity_match(item.triplet.subject, prediction.subject)) {
          return false;
        }
        if (!entity_match(item.triplet.object, prediction.object)) {
          return false;
        }
        const std::optional<std::string>& label =
            mapped.of(prediction.relation);
        return label && *label == item.triplet.relation;
      });

  // Strict accuracy: same entity rule, relation equal up to ASCII case.
  int strict = 0;
  for (const FlatGold& item : flat) {
    for (const Triplet& prediction : predicted) {
      if (!scope_allows(*item.record, prediction)) continue;
      if (!entity_match(item.triplet.subject, prediction.subject)) continue;
      if (!entity_match(item.triplet.object, prediction.object)) continue;
      if (fold_case(prediction.relation) ==
          fold_case(item.triplet.relation)) {
        ++strict;
        break;
      }
    }
  }
  report.accuracy =
      static_cast<double>(strict) / static_cast<double>(flat.size());

  const std::vector<int> hits =
      per_gold_hits(gold, predicted, backend, threshold);
  int semantic = 0;
  for (const int hit : hits) semantic += hit;
  report.relation_recall =
      static_cast<double>(semantic) / static_cast<double>(hits.size());

  std::set<std::string> entities;
  for (const FlatGold& item : flat) {
    entities.insert(item.triplet.subject);
    entities.insert(item.triplet.object);
  }
  report.entity_recall = entity_recall(
      std::vector<std::string>(entities.begin(), entities.end()), predicted);

  return report;
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void validate_bootstrap(const std::vector<int>& a, const std::vector<int>& b,
                        int iterations) {
  if (a.size() != b.size()) {
    throw UsageError("bootstrap requires paired score vectors of equal "
                     "length");
  }
  if (a.empty()) throw UsageError("bootstrap requires nonempty scores");
  if (iterations < 1000) {
    throw UsageError("bootstrap requires at least 1000 iterations");
  }
}

// One paired resample: true when system A failed to beat system B.
// The RNG stream is derived from (seed, iteration) alone, so the verdict
// of each iteration is independent of threading and execution order.
bool resample_violates(const std::vector<int>& a, const std::vector<int>& b,
                       std::uint64_t seed, std::uint64_t iteration) {
  const std::size_t n = a.size();
  std::uint64_t mask = 1;
  while (mask < n) mask <<= 1;
  --mask;

  std::mt19937_64 rng(
      splitmix64(seed + 0x9E3779B97F4A7C15ull * (iteration + 1)));
  long long delta = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t index;
    do {
      index = rng() & mask;  // rejection keeps the draw unbiased
    } while (index >= n);
    delta += a[index] - b[index];
  }
  return delta <= 0;
}

}  // namespace

double bootstrap_significance_serial(const std::vector<int>& scores_a,
                                     const std::vector<int>& scores_b,
                                     int iterations, std::uint64_t seed) {
  validate_bootstrap(scores_a, scores_b, iterations);
  long long violations = 0;
  for (int iteration = 0; iteration < iterations; ++iteration) {
    if (resample_violates(scores_a, scores_b, seed,
                          static_cast<std::uint64_t>(iteration))) {
      ++violations;
    }
  }
  return static_cast<double>(violations) / static_cast<double>(iterations);
}

double bootstrap_significance_parallel(const std::vector<int>& scores_a,
                                       const std::vector<int>& scores_b,
                                       int iterations, std::uint64_t seed) {
  validate_bootstrap(scores_a, scores_b, iterations);
  long long violations = 0;
#ifdef _OPENMP
#pragma omp parallel for reduction(+ : violations) schedule(static)
#endif
  for (int iteration = 0; iteration < iterations; ++iteration) {
    if (resample_violates(scores_a, scores_b, seed,
                          static_cast<std::uint64_t>(iteration))) {
      ++violations;
    }
  }
  return static_cast<double>(violations) / static_cast<double>(iterations);
}

double bootstrap_significance(const std::vector<int>& scores_a,
                              const std::vector<int>& scores_b,
                              int iterations, std::uint64_t seed) {
#ifdef _OPENMP
  if (iterations >= 2048 && omp_get_max_threads() > 1) {
    return bootstrap_significance_parallel(scores_a, scores_b, iterations,
                                           seed);
  }
#endif
  return bootstrap_significance_serial(scores_a, scores_b, iterations, seed);
}

}  // namespace atomkg
