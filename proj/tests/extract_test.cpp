#include <doctest.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "atomkg/errors.hpp"
#include "atomkg/extract.hpp"

using namespace atomkg;

namespace {

AtomizationResult atoms_of(const std::vector<std::string>& texts) {
  AtomizationResult result;
  for (const std::string& text : texts) {
    result.atoms.push_back({text, "", 0, true});
  }
  return result;
}

std::set<std::array<std::string, 3>> keys_of(
    const std::vector<Triplet>& triplets) {
  std::set<std::array<std::string, 3>> keys;
  for (const Triplet& t : triplets) {
    keys.insert({t.subject, t.relation, t.object});
  }
  return keys;
}

Triplet make_triplet(std::string s, std::string r, std::string o,
                     double confidence = 1.0) {
  Triplet t;
  t.subject = std::move(s);
  t.relation = std::move(r);
  t.object = std::move(o);
  t.confidence = confidence;
  return t;
}

}  // namespace

TEST_CASE("match_label resolves replies to vocabulary members") {
  const std::vector<std::string> labels = {"hasLocation", "bornIn"};
  CHECK(match_label("hasLocation", labels) == "hasLocation");
  CHECK(match_label("  hasLocation \n", labels) == "hasLocation");
  // Case-insensitive fallback returns the label's canonical casing.
  CHECK(match_label("HASLOCATION", labels) == "hasLocation");
  CHECK(match_label("friendOf", labels) == kNoRelation);
  CHECK(match_label("", labels) == kNoRelation);
  CHECK(match_label("\n \n", labels) == kNoRelation);
  // Multi-line replies use the first nonempty line.
  CHECK(match_label("\n bornIn \nhasLocation", labels) == "bornIn");
}

TEST_CASE("parse_triplet_lines keeps conforming lines and counts the rest") {
  const OpenExtraction parsed =
      parse_triplet_lines("a | b | c\ngarbage line\na | b | c");
  REQUIRE(parsed.triplets.size() == 1);
  CHECK(parsed.triplets[0].subject == "a");
  CHECK(parsed.triplets[0].relation == "b");
  CHECK(parsed.triplets[0].object == "c");
  CHECK(parsed.triplets[0].confidence == 1.0);
  CHECK(parsed.dropped_lines == 1);  // the duplicate is dedup, not a drop

  CHECK(parse_triplet_lines("").triplets.empty());
  CHECK(parse_triplet_lines("").dropped_lines == 0);
  CHECK(parse_triplet_lines("\n  \n").dropped_lines == 0);

  const OpenExtraction spaced = parse_triplet_lines(
      "  \xC5\xA0"
      "afov   |  is located in |   Znojmo District  ");
  REQUIRE(spaced.triplets.size() == 1);
  CHECK(spaced.triplets[0].subject == "\xC5\xA0"
                                      "afov");
  CHECK(spaced.triplets[0].relation == "is located in");
  CHECK(spaced.triplets[0].object == "Znojmo District");

  // Wrong pipe count or empty fields are dropped.
  CHECK(parse_triplet_lines("a | b | c | d").dropped_lines == 1);
  CHECK(parse_triplet_lines("a | b").dropped_lines == 1);
  CHECK(parse_triplet_lines("a |  | c").dropped_lines == 1);
}

TEST_CASE("classify_relation validates the vocabulary and matches labels") {
  ScriptedExtractor backend(
      {}, {{"The Eiffel Tower is in Paris", "Eiffel Tower", "Paris",
            "hasLocation"},
           {"Shouty text", "a", "b", "HASLOCATION"}});
  const std::vector<std::string> labels = {"hasLocation", "bornIn"};

  CHECK(classify_relation("The Eiffel Tower is in Paris", "Eiffel Tower",
                          "Paris", labels, backend) == "hasLocation");
  // Scripted labels pass through the same matching as model replies.
  CHECK(classify_relation("Shouty text", "a", "b", labels, backend) ==
        "hasLocation");
  CHECK(classify_relation("unknown text", "x", "y", labels, backend) ==
        kNoRelation);
  CHECK_THROWS_AS(
      classify_relation("text", "a", "b", {}, backend), UsageError);
}

TEST_CASE("merge_triplets sorts, dedups, and merges provenance") {
  Triplet first = make_triplet("b", "r", "c", 0.5);
  first.provenance = {{"doc", Origin::Direct, ""}};
  Triplet second = make_triplet("a", "r", "c", 1.0);
  Triplet third = make_triplet("b", "r", "c", 0.9);
  third.provenance = {{"doc", Origin::Prop, "some atom"}};

  const std::vector<Triplet> merged =
      merge_triplets({first, second, third});
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].subject == "a");
  CHECK(merged[1].subject == "b");
  CHECK(merged[1].confidence == 0.9);  // max of 0.5 and 0.9
  REQUIRE(merged[1].provenance.size() == 2);
  CHECK(merged[1].provenance[0].origin == Origin::Direct);
  CHECK(merged[1].provenance[1].origin == Origin::Prop);
  CHECK(merged[1].provenance[1].proposition == "some atom");

  // Idempotent.
  const std::vector<Triplet> again = merge_triplets(merged);
  REQUIRE(again.size() == merged.size());
  CHECK(keys_of(again) == keys_of(merged));
  CHECK(again[1].provenance.size() == 2);
}

TEST_CASE("direct open extraction stamps Direct provenance") {
  ScriptedExtractor backend(
      {{"Alpha owns Beta", {make_triplet("Alpha", "owns", "Beta")}}}, {});
  ExtractionTask task;
  task.text = "  Alpha  owns Beta ";
  task.source_id = "doc7";

  const ExtractionRun run = run_config(task, nullptr, backend);
  REQUIRE(run.triplets.size() == 1);
  CHECK(run.triplets[0].subject == "Alpha");
  REQUIRE(run.triplets[0].provenance.size() == 1);
  CHECK(run.triplets[0].provenance[0].source_id == "doc7");
  CHECK(run.triplets[0].provenance[0].origin == Origin::Direct);
  CHECK(run.triplets[0].provenance[0].proposition == "");
}

TEST_CASE("prop extraction unions per-atom output with Prop provenance") {
  ScriptedExtractor backend(
      {{"Alpha owns Beta", {make_triplet("Alpha", "owns", "Beta")}},
       {"Alpha owns Gamma",
        {make_triplet("Alpha", "owns", "Gamma"),
         make_triplet("Alpha", "owns", "Beta")}}},
      {});
  ExtractionTask task;
  task.config = ExtractionConfig::Prop;
  task.text = "Alpha owns Beta and Gamma";
  task.source_id = "doc1";
  const AtomizationResult atoms =
      atoms_of({"Alpha owns Beta", "Alpha owns Gamma"});

  for (const int concurrency : {1, 8}) {
    const ExtractionRun run = run_config(task, &atoms, backend, concurrency);
    REQUIRE(run.triplets.size() == 2);
    CHECK(run.triplets[0].object == "Beta");
    CHECK(run.triplets[1].object == "Gamma");
    // The shared triplet carries provenance from both atoms.
    REQUIRE(run.triplets[0].provenance.size() == 2);
    CHECK(run.triplets[0].provenance[0].proposition == "Alpha owns Beta");
    CHECK(run.triplets[0].provenance[1].proposition == "Alpha owns Gamma");
    for (const Triplet& t : run.triplets) {
      for (const Provenance& p : t.provenance) {
        CHECK(p.origin == Origin::Prop);
        CHECK(p.source_id == "doc1");
      }
    }
  }
}

TEST_CASE("union equals the deduplicated union of direct and prop") {
  ScriptedExtractor backend(
      {{"raw text", {make_triplet("t", "r", "one", 0.6)}},
       {"atom one",
        {make_triplet("t", "r", "one", 0.8), make_triplet("t", "r", "two")}}},
      {});
  const AtomizationResult atoms = atoms_of({"atom one"});

  ExtractionTask task;
  task.text = "raw text";

  task.config = ExtractionConfig::Direct;
  const ExtractionRun direct = run_config(task, &atoms, backend);
  task.config = ExtractionConfig::Prop;
  const ExtractionRun prop = run_config(task, &atoms, backend);
  task.config = ExtractionConfig::Union;
  const ExtractionRun merged = run_config(task, &atoms, backend);

  std::set<std::array<std::string, 3>> expected = keys_of(direct.triplets);
  const std::set<std::array<std::string, 3>> prop_keys =
      keys_of(prop.triplets);
  expected.insert(prop_keys.begin(), prop_keys.end());
  CHECK(keys_of(merged.triplets) == expected);
  REQUIRE(merged.triplets.size() == 2);

  // The duplicate keeps max confidence and both provenance records,
  // Direct first.
  CHECK(merged.triplets[0].object == "one");
  CHECK(merged.triplets[0].confidence == 0.8);
  REQUIRE(merged.triplets[0].provenance.size() == 2);
  CHECK(merged.triplets[0].provenance[0].origin == Origin::Direct);
  CHECK(merged.triplets[0].provenance[1].origin == Origin::Prop);
}

TEST_CASE("comb keeps direct output when both entities are found") {
  ScriptedExtractor backend(
      {}, {{"The Eiffel Tower is in Paris", "Eiffel Tower", "Paris",
            "hasLocation"}});
  ExtractionTask task;
  task.mode = ExtractionMode::ClosedIE;
  task.config = ExtractionConfig::Comb;
  task.text = "The Eiffel Tower is in Paris";
  task.entity1 = "Eiffel Tower";
  task.entity2 = "Paris";
  task.labels = {"hasLocation", "bornIn"};
  const AtomizationResult atoms = atoms_of({"unused atom"});

  const ExtractionRun run = run_config(task, &atoms, backend);
  REQUIRE(run.triplets.size() == 1);
  CHECK(run.triplets[0].relation == "hasLocation");
  REQUIRE(run.triplets[0].provenance.size() == 1);
  CHECK(run.triplets[0].provenance[0].origin == Origin::Direct);
}

TEST_CASE("comb falls back to prop when direct misses an entity") {
  // No scripted answer for the raw text; the atom answers instead.
  ScriptedExtractor backend(
      {}, {{"Marie Curie was born in Warsaw", "Marie Curie", "Warsaw",
            "bornIn"}});
  ExtractionTask task;
  task.mode = ExtractionMode::ClosedIE;
  task.config = ExtractionConfig::Comb;
  task.text = "She was born in Warsaw, a fact everyone knows";
  task.entity1 = "Marie Curie";
  task.entity2 = "Warsaw";
  task.labels = {"bornIn"};
  const AtomizationResult atoms =
      atoms_of({"Marie Curie was born in Warsaw"});

  const ExtractionRun run = run_config(task, &atoms, backend);
  REQUIRE(run.triplets.size() == 1);
  CHECK(run.triplets[0].relation == "bornIn");
  REQUIRE(run.triplets[0].provenance.size() == 1);
  CHECK(run.triplets[0].provenance[0].origin == Origin::Prop);
  CHECK(run.triplets[0].provenance[0].proposition ==
        "Marie Curie was born in Warsaw");
}

TEST_CASE("comb output is exactly one of the direct or prop outputs") {
  ScriptedExtractor backend(
      {}, {{"found text", "e one", "e two", "relA"},
           {"atom text", "e one", "e two", "relB"}});
  const AtomizationResult atoms = atoms_of({"atom text"});

  ExtractionTask task;
  task.mode = ExtractionMode::ClosedIE;
  task.entity1 = "e one";
  task.entity2 = "e two";
  task.labels = {"relA", "relB"};

  for (const std::string& text : {std::string("found text"),
                                  std::string("missing text")}) {
    task.text = text;
    task.config = ExtractionConfig::Comb;
    const ExtractionRun comb = run_config(task, &atoms, backend);
    task.config = ExtractionConfig::Direct;
    const ExtractionRun direct = run_config(task, &atoms, backend);
    task.config = ExtractionConfig::Prop;
    const ExtractionRun prop = run_config(task, &atoms, backend);
    const bool is_direct = keys_of(comb.triplets) == keys_of(direct.triplets)
                           && !direct.triplets.empty();
    const bool is_prop = keys_of(comb.triplets) == keys_of(prop.triplets);
    CHECK((is_direct || is_prop));
  }
}

TEST_CASE("run_config validates its inputs") {
  ScriptedExtractor backend({}, {});
  ExtractionTask task;
  task.text = "x";

  task.config = ExtractionConfig::Prop;
  CHECK_THROWS_AS(run_config(task, nullptr, backend), UsageError);
  task.config = ExtractionConfig::Union;
  CHECK_THROWS_AS(run_config(task, nullptr, backend), UsageError);

  const AtomizationResult atoms = atoms_of({"x"});
  task.config = ExtractionConfig::Comb;
  task.mode = ExtractionMode::OpenIE;
  CHECK_THROWS_AS(run_config(task, &atoms, backend), UsageError);

  task.mode = ExtractionMode::ClosedIE;
  task.config = ExtractionConfig::Direct;
  task.labels = {};
  CHECK_THROWS_AS(run_config(task, &atoms, backend), UsageError);

  task.labels = {"rel"};
  CHECK_THROWS_AS(run_config(task, &atoms, backend, 0), UsageError);
}

TEST_CASE("closed direct extraction yields one triplet or none") {
  ScriptedExtractor backend(
      {}, {{"known", "a", "b", "rel"}});
  ExtractionTask task;
  task.mode = ExtractionMode::ClosedIE;
  task.entity1 = "a";
  task.entity2 = "b";
  task.labels = {"rel"};

  task.text = "known";
  const ExtractionRun hit = run_config(task, nullptr, backend);
  REQUIRE(hit.triplets.size() == 1);
  CHECK(hit.triplets[0].subject == "a");
  CHECK(hit.triplets[0].relation == "rel");
  CHECK(hit.triplets[0].object == "b");

  task.text = "unknown";
  CHECK(run_config(task, nullptr, backend).triplets.empty());
}

TEST_CASE("mode and config names round trip") {
  for (const ExtractionConfig config :
       {ExtractionConfig::Direct, ExtractionConfig::Prop,
        ExtractionConfig::Comb, ExtractionConfig::Union}) {
    CHECK(parse_config(config_name(config)) == config);
  }
  for (const ExtractionMode mode :
       {ExtractionMode::OpenIE, ExtractionMode::ClosedIE}) {
    CHECK(parse_mode(mode_name(mode)) == mode);
  }
  CHECK_THROWS_AS(parse_config("bogus"), UsageError);
  CHECK_THROWS_AS(parse_mode("bogus"), UsageError);
  CHECK(parse_origin("Direct") == Origin::Direct);
  CHECK(parse_origin("Prop") == Origin::Prop);
  CHECK_THROWS_AS(parse_origin("bogus"), UsageError);
}

TEST_CASE("scripted extractor transcripts load from JSON files") {
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "atomkg_extractor.json";
  {
    std::ofstream out(path);
    out << R"({
      "open": {"Alpha owns Beta": [
        {"s": "Alpha", "r": "owns", "o": "Beta", "confidence": 0.7}]},
      "closed": [{"text": "known", "e1": "a", "e2": "b", "label": "rel"}]
    })";
  }
  ScriptedExtractor backend = ScriptedExtractor::from_file(path.string());
  const OpenExtraction open = backend.extract_open("Alpha owns Beta");
  REQUIRE(open.triplets.size() == 1);
  CHECK(open.triplets[0].confidence == 0.7);
  CHECK(backend.classify("known", "a", "b", {"rel"}) == "rel");
  CHECK(backend.classify("known", "a", "b", {"other"}) == kNoRelation);
  std::filesystem::remove(path);
}

TEST_CASE("triplets survive a JSONL round trip") {
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "atomkg_triplets.jsonl";
  Triplet plain = make_triplet("a", "r", "b", 0.25);
  plain.provenance = {{"doc1", Origin::Prop, "an atom"}};
  Triplet merged = make_triplet("c", "r", "d");
  merged.provenance = {{"doc1", Origin::Direct, ""},
                       {"doc1", Origin::Prop, "other atom"}};

  write_triplets_jsonl(path.string(), {plain, merged});
  const std::vector<Triplet> loaded = read_triplets_jsonl(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].subject == "a");
  CHECK(loaded[0].confidence == 0.25);
  REQUIRE(loaded[0].provenance.size() == 1);
  CHECK(loaded[0].provenance[0].source_id == "doc1");
  CHECK(loaded[0].provenance[0].origin == Origin::Prop);
  CHECK(loaded[0].provenance[0].proposition == "an atom");
  // Merged rows flatten to their first provenance record on read.
  REQUIRE(loaded[1].provenance.size() == 1);
  CHECK(loaded[1].provenance[0].origin == Origin::Direct);

  // The merged row carries a merged_origins marker on disk.
  std::ifstream in(path);
  std::string line1, line2;
  std::getline(in, line1);
  std::getline(in, line2);
  CHECK(line1.find("merged_origins") == std::string::npos);
  CHECK(line2.find("merged_origins") != std::string::npos);
  std::filesystem::remove(path);
}
