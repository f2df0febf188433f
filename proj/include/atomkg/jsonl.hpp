#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace atomkg {

// One input document (or sentence) of a corpus file.  `entity1`/`entity2`
// are only meaningful for closed-relation extraction tasks and stay empty
// otherwise.
struct CorpusRecord {
  std::string source_id;
  std::string text;
  std::string title;
  std::string entity1;
  std::string entity2;
};

// Reads a JSONL file: one JSON value per line, blank lines skipped.  A
// malformed line raises Error naming the 1-based line number.
std::vector<nlohmann::json> read_jsonl(const std::string& path);

// Writes one compact JSON document per line.  Key order is preserved as
// given, so emitting ordered_json upstream keeps files byte-deterministic.
void write_jsonl(const std::string& path,
                 const std::vector<nlohmann::json>& rows);

// Whole-file JSON document (configs, scripted transcripts).
nlohmann::json parse_json_file(const std::string& path);

// Corpus schema: {"source_id": ..., "text": ..., "title": ...} with optional
// "e1"/"e2" fields for closed-relation tasks.  `text` is required.
std::vector<CorpusRecord> read_corpus(const std::string& path);

// One relation name per line; surrounding whitespace trimmed, blank lines
// and lines starting with '#' skipped.  Used for transitive-relation sets
// and closed-task label vocabularies.
std::vector<std::string> read_relation_list(const std::string& path);

// Small file helpers shared by the exporters and the CLI.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace atomkg
