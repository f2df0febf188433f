#include "atomkg/extract.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <exception>
#include <set>
#include <thread>
#include <utility>

#include <json.hpp>

#include "atomkg/jsonl.hpp"
#include "atomkg/text.hpp"

namespace atomkg {

std::string origin_name(Origin origin) {
  return origin == Origin::Direct ? "Direct" : "Prop";
}

Origin parse_origin(const std::string& name) {
  if (name == "Direct") return Origin::Direct;
  if (name == "Prop") return Origin::Prop;
  throw UsageError("unknown provenance origin \"" + name + "\"");
}

std::string mode_name(ExtractionMode mode) {
  return mode == ExtractionMode::OpenIE ? "open" : "closed";
}

ExtractionMode parse_mode(const std::string& name) {
  if (name == "open") return ExtractionMode::OpenIE;
  if (name == "closed") return ExtractionMode::ClosedIE;
  throw UsageError("unknown extraction mode \"" + name +
                   "\" (expected open or closed)");
}

std::string config_name(ExtractionConfig config) {
  switch (config) {
    case ExtractionConfig::Direct: return "direct";
    case ExtractionConfig::Prop: return "prop";
    case ExtractionConfig::Comb: return "comb";
    case ExtractionConfig::Union: return "union";
  }
  throw Error("unreachable extraction config");
}

ExtractionConfig parse_config(const std::string& name) {
  if (name == "direct") return ExtractionConfig::Direct;
  if (name == "prop") return ExtractionConfig::Prop;
  if (name == "comb") return ExtractionConfig::Comb;
  if (name == "union") return ExtractionConfig::Union;
  throw UsageError("unknown extraction config \"" + name +
                   "\" (expected direct, prop, comb, or union)");
}

namespace {

std::string ascii_lower(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace

std::string match_label(const std::string& reply,
                        const std::vector<std::string>& labels) {
  std::string candidate;
  for (const std::string& line : split_lines(reply)) {
    candidate = normalize_text(line);
    if (!candidate.empty()) break;
  }
  if (candidate.empty()) return kNoRelation;
  for (const std::string& label : labels) {
    if (label == candidate) return label;
  }
  const std::string folded = ascii_lower(candidate);
  for (const std::string& label : labels) {
    if (ascii_lower(label) == folded) return label;
  }
  return kNoRelation;
}

OpenExtraction parse_triplet_lines(const std::string& reply) {
  OpenExtraction out;
  std::set<std::array<std::string, 3>> seen;
  for (const std::string& line : split_lines(reply)) {
    if (normalize_text(line).empty()) continue;
    if (std::count(line.begin(), line.end(), '|') != 2) {
      ++out.dropped_lines;
      continue;
    }
    const std::size_t first = line.find('|');
    const std::size_t second = line.find('|', first + 1);
    std::array<std::string, 3> fields = {
        normalize_text(line.substr(0, first)),
        normalize_text(line.substr(first + 1, second - first - 1)),
        normalize_text(line.substr(second + 1)),
    };
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      ++out.dropped_lines;
      continue;
    }
    if (!seen.insert(fields).second) continue;  // duplicate, not malformed
    Triplet triplet;
    triplet.subject = std::move(fields[0]);
    triplet.relation = std::move(fields[1]);
    triplet.object = std::move(fields[2]);
    out.triplets.push_back(std::move(triplet));
  }
  return out;
}

std::string classify_relation(const std::string& text, const std::string& e1,
                              const std::string& e2,
                              const std::vector<std::string>& labels,
                              ExtractorBackend& backend) {
  if (labels.empty()) {
    throw UsageError("relation classification requires a nonempty label "
                     "vocabulary");
  }
  return backend.classify(text, e1, e2, labels);
}

std::vector<Triplet> merge_triplets(std::vector<Triplet> triplets) {
  const auto key_less = [](const Triplet& a, const Triplet& b) {
    return std::tie(a.subject, a.relation, a.object) <
           std::tie(b.subject, b.relation, b.object);
  };
  // Stable: duplicates keep their input order, so merged provenance lists
  // read in first-occurrence order.
  std::stable_sort(triplets.begin(), triplets.end(), key_less);

  std::vector<Triplet> merged;
  for (Triplet& triplet : triplets) {
    if (!merged.empty() && !key_less(merged.back(), triplet) &&
        !key_less(triplet, merged.back())) {
      Triplet& kept = merged.back();
      kept.confidence = std::max(kept.confidence, triplet.confidence);
      for (Provenance& record : triplet.provenance) {
        if (std::find(kept.provenance.begin(), kept.provenance.end(),
                      record) == kept.provenance.end()) {
          kept.provenance.push_back(std::move(record));
        }
      }
      continue;
    }
    merged.push_back(std::move(triplet));
  }
  return merged;
}

namespace {

// Extracts from one text under the task's mode, without provenance.
OpenExtraction extract_one(const ExtractionTask& task,
                           const std::string& text,
                           ExtractorBackend& backend) {
  if (task.mode == ExtractionMode::OpenIE) {
    return backend.extract_open(normalize_text(text));
  }
  const std::string label = classify_relation(
      normalize_text(text), task.entity1, task.entity2, task.labels, backend);
  if (label == kNoRelation) return {};
  Triplet triplet;
  triplet.subject = normalize_text(task.entity1);
  triplet.relation = label;
  triplet.object = normalize_text(task.entity2);
  OpenExtraction out;
  out.triplets.push_back(std::move(triplet));
  return out;
}

ExtractionRun stamped(OpenExtraction raw, const std::string& source_id,
                      Origin origin, const std::string& proposition) {
  ExtractionRun run;
  run.dropped_lines = raw.dropped_lines;
  for (Triplet& triplet : raw.triplets) {
    Provenance record;
    record.source_id = source_id;
    record.origin = origin;
    if (origin == Origin::Prop) record.proposition = proposition;
    triplet.provenance = {std::move(record)};
  }
  run.triplets = merge_triplets(std::move(raw.triplets));
  return run;
}

ExtractionRun run_direct(const ExtractionTask& task,
                         ExtractorBackend& backend) {
  return stamped(extract_one(task, task.text, backend), task.source_id,
                 Origin::Direct, {});
}

// Extracts from every proved atom, at most `concurrency` calls in flight;
// results are merged in atom order so scheduling cannot change the output.
ExtractionRun run_prop(const ExtractionTask& task,
                       const AtomizationResult& atoms,
                       ExtractorBackend& backend, int concurrency) {
  const std::vector<Proposition>& list = atoms.atoms;
  std::vector<OpenExtraction> raw(list.size());
  std::vector<std::exception_ptr> failures(list.size());

  const auto run_one = [&](std::size_t index) {
    try {
      raw[index] = extract_one(task, list[index].text, backend);
    } catch (...) {
      failures[index] = std::current_exception();
    }
  };

  const int workers =
      std::min<int>(concurrency, static_cast<int>(list.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < list.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t index = cursor.fetch_add(1);
          if (index >= list.size()) return;
          run_one(index);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  ExtractionRun run;
  std::vector<Triplet> combined;
  for (std::size_t i = 0; i < list.size(); ++i) {
    ExtractionRun piece = stamped(std::move(raw[i]), task.source_id,
                                  Origin::Prop, list[i].text);
    run.dropped_lines += piece.dropped_lines;
    combined.insert(combined.end(),
                    std::make_move_iterator(piece.triplets.begin()),
                    std::make_move_iterator(piece.triplets.end()));
  }
  run.triplets = merge_triplets(std::move(combined));
  return run;
}

// True when the entity occurs (case-sensitive substring) in the subject or
// object field of any extracted triplet.
bool entity_in_output(const std::string& entity,
                      const std::vector<Triplet>& triplets) {
  for (const Triplet& triplet : triplets) {
    if (triplet.subject.find(entity) != std::string::npos ||
        triplet.object.find(entity) != std::string::npos) {
      return true;
    }
  }
  return false;
}

}  // namespace

ExtractionRun run_config(const ExtractionTask& task,
                         const AtomizationResult* atoms,
                         ExtractorBackend& backend, int concurrency) {
  if (concurrency < 1) throw UsageError("concurrency must be >= 1");
  if (task.config != ExtractionConfig::Direct && atoms == nullptr) {
    throw UsageError("configuration \"" + config_name(task.config) +
                     "\" requires atomization results");
  }
  if (task.mode == ExtractionMode::ClosedIE && task.labels.empty()) {
    throw UsageError("closed IE requires a nonempty label vocabulary");
  }

  switch (task.config) {
    case ExtractionConfig::Direct:
      return run_direct(task, backend);
    case ExtractionConfig::Prop:
      return run_prop(task, *atoms, backend, concurrency);
    case ExtractionConfig::Comb: {
      if (task.mode != ExtractionMode::ClosedIE) {
        throw UsageError("the comb configuration applies only to closed IE");
      }
      ExtractionRun direct = run_direct(task, backend);
      const bool found =
          entity_in_output(normalize_text(task.entity1), direct.triplets) &&
          entity_in_output(normalize_text(task.entity2), direct.triplets);
      if (found) return direct;
      ExtractionRun prop = run_prop(task, *atoms, backend, concurrency);
      prop.dropped_lines += direct.dropped_lines;
      return prop;
    }
    case ExtractionConfig::Union: {
      ExtractionRun direct = run_direct(task, backend);
      ExtractionRun prop = run_prop(task, *atoms, backend, concurrency);
      ExtractionRun merged;
      merged.dropped_lines = direct.dropped_lines + prop.dropped_lines;
      std::vector<Triplet> combined = std::move(direct.triplets);
      combined.insert(combined.end(),
                      std::make_move_iterator(prop.triplets.begin()),
                      std::make_move_iterator(prop.triplets.end()));
      merged.triplets = merge_triplets(std::move(combined));
      return merged;
    }
  }
  throw Error("unreachable extraction config");
}

namespace {

// Open-IE prompt, hard line breaks included.
constexpr const char* kOpenTemplate =
    "Extract all factual \n"
    "(subject, predicate, object)\n"
    "triples from the sentence.\n"
    "One triple per line in the format:\n"
    "subject | predicate | object\n"
    "No explanations. If no triple can be \n"
    "extracted, write nothing.\n"
    "\n"
    "Sentence: {text}";

// Relation-classification prompt, hard line breaks included.
constexpr const char* kClosedTemplate =
    "Given the text, identify the relation \n"
    "between the two entities.\n"
    "\n"
    "Text: {text}\n"
    "Entity 1: {e1}\n"
    "Entity 2: {e2}\n"
    "\n"
    "Choose exactly one relation from \n"
    "this list: {labels}\n"
    "\n"
    "Answer with just the relation name, \n"
    "nothing else.";

std::string join_labels(const std::vector<std::string>& labels) {
  std::string joined;
  for (const std::string& label : labels) {
    if (!joined.empty()) joined += ", ";
    joined += label;
  }
  return joined;
}

}  // namespace

RemoteExtractor::RemoteExtractor(RemoteConfig config)
    : config_(std::move(config)) {}

OpenExtraction RemoteExtractor::extract_open(const std::string& text) {
  const std::string prompt =
      substitute_placeholder(kOpenTemplate, "{text}", normalize_text(text));
  const ChatClient client(config_);
  return parse_triplet_lines(client.complete(prompt));
}

std::string RemoteExtractor::classify(const std::string& text,
                                      const std::string& e1,
                                      const std::string& e2,
                                      const std::vector<std::string>& labels) {
  std::string prompt = kClosedTemplate;
  prompt = substitute_placeholder(prompt, "{text}", normalize_text(text));
  prompt = substitute_placeholder(prompt, "{e1}", normalize_text(e1));
  prompt = substitute_placeholder(prompt, "{e2}", normalize_text(e2));
  prompt = substitute_placeholder(prompt, "{labels}", join_labels(labels));
  const ChatClient client(config_);
  return match_label(client.complete(prompt), labels);
}

ScriptedExtractor::ScriptedExtractor(
    std::map<std::string, std::vector<Triplet>> open,
    std::vector<ClosedAnswer> closed) {
  for (auto& [text, triplets] : open) {
    for (Triplet& triplet : triplets) {
      triplet.subject = normalize_text(triplet.subject);
      triplet.relation = normalize_text(triplet.relation);
      triplet.object = normalize_text(triplet.object);
    }
    open_.emplace(normalize_text(text), std::move(triplets));
  }
  for (ClosedAnswer& answer : closed) {
    answer.text = normalize_text(answer.text);
    answer.e1 = normalize_text(answer.e1);
    answer.e2 = normalize_text(answer.e2);
    closed_.push_back(std::move(answer));
  }
}

ScriptedExtractor ScriptedExtractor::from_file(const std::string& path) {
  const nlohmann::json doc = parse_json_file(path);
  if (!doc.is_object()) {
    throw Error(path + ": scripted extractor transcript must be a JSON "
                       "object");
  }
  std::map<std::string, std::vector<Triplet>> open;
  if (doc.contains("open")) {
    for (const auto& [text, rows] : doc.at("open").items()) {
      std::vector<Triplet> triplets;
      for (const nlohmann::json& row : rows) {
        Triplet triplet;
        triplet.subject = row.at("s").get<std::string>();
        triplet.relation = row.at("r").get<std::string>();
        triplet.object = row.at("o").get<std::string>();
        triplet.confidence = row.value("confidence", 1.0);
        triplets.push_back(std::move(triplet));
      }
      open.emplace(text, std::move(triplets));
    }
  }
  std::vector<ClosedAnswer> closed;
  if (doc.contains("closed")) {
    for (const nlohmann::json& row : doc.at("closed")) {
      ClosedAnswer answer;
      answer.text = row.at("text").get<std::string>();
      answer.e1 = row.at("e1").get<std::string>();
      answer.e2 = row.at("e2").get<std::string>();
      answer.label = row.at("label").get<std::string>();
      closed.push_back(std::move(answer));
    }
  }
  return ScriptedExtractor(std::move(open), std::move(closed));
}

OpenExtraction ScriptedExtractor::extract_open(const std::string& text) {
  const auto it = open_.find(normalize_text(text));
  if (it == open_.end()) return {};
  OpenExtraction out;
  out.triplets = it->second;
  return out;
}

std::string ScriptedExtractor::classify(
    const std::string& text, const std::string& e1, const std::string& e2,
    const std::vector<std::string>& labels) {
  const std::string key_text = normalize_text(text);
  const std::string key_e1 = normalize_text(e1);
  const std::string key_e2 = normalize_text(e2);
  for (const ClosedAnswer& answer : closed_) {
    if (answer.text == key_text && answer.e1 == key_e1 &&
        answer.e2 == key_e2) {
      return match_label(answer.label, labels);
    }
  }
  return kNoRelation;
}

void write_triplets_jsonl(const std::string& path,
                          const std::vector<Triplet>& triplets) {
  std::vector<nlohmann::json> rows;
  rows.reserve(triplets.size());
  for (const Triplet& triplet : triplets) {
    nlohmann::ordered_json row;
    row["s"] = triplet.subject;
    row["r"] = triplet.relation;
    row["o"] = triplet.object;
    row["confidence"] = triplet.confidence;
    const Provenance first = triplet.provenance.empty()
                                 ? Provenance{}
                                 : triplet.provenance.front();
    row["origin"] = origin_name(first.origin);
    row["source_id"] = first.source_id;
    row["proposition"] = first.proposition;
    if (triplet.provenance.size() > 1) {
      nlohmann::ordered_json origins = nlohmann::ordered_json::array();
      for (const Provenance& record : triplet.provenance) {
        origins.push_back(origin_name(record.origin));
      }
      row["merged_origins"] = std::move(origins);
    }
    rows.push_back(std::move(row));
  }
  write_jsonl(path, rows);
}

std::vector<Triplet> read_triplets_jsonl(const std::string& path) {
  std::vector<Triplet> triplets;
  for (const nlohmann::json& row : read_jsonl(path)) {
    Triplet triplet;
    triplet.subject = row.at("s").get<std::string>();
    triplet.relation = row.at("r").get<std::string>();
    triplet.object = row.at("o").get<std::string>();
    triplet.confidence = row.value("confidence", 1.0);
    Provenance record;
    record.source_id = row.value("source_id", std::string{});
    record.origin = parse_origin(row.value("origin", std::string{"Direct"}));
    record.proposition = row.value("proposition", std::string{});
    triplet.provenance = {std::move(record)};
    triplets.push_back(std::move(triplet));
  }
  return triplets;
}

}  // namespace atomkg
