#include "atomkg/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "atomkg/errors.hpp"
#include "atomkg/text.hpp"

namespace atomkg {

namespace {

bool blank(const std::string& line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file for reading: " + path);
  return in;
}

}  // namespace

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) +
                  ": malformed JSON line: " + e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::string& path,
                 const std::vector<nlohmann::json>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open file for writing: " + path);
  for (const nlohmann::json& row : rows) {
    out << row.dump() << '\n';
  }
  if (!out) throw Error("failed while writing: " + path);
}

nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in = open_for_read(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": malformed JSON: " + e.what());
  }
}

std::vector<CorpusRecord> read_corpus(const std::string& path) {
  std::vector<CorpusRecord> records;
  std::size_t row_no = 0;
  for (const nlohmann::json& row : read_jsonl(path)) {
    ++row_no;
    if (!row.is_object() || !row.contains("text")) {
      throw Error(path + ": corpus record " + std::to_string(row_no) +
                  " lacks a \"text\" field");
    }
    CorpusRecord record;
    record.text = row.at("text").get<std::string>();
    record.source_id = row.value("source_id", std::string{});
    record.title = row.value("title", std::string{});
    record.entity1 = row.value("e1", std::string{});
    record.entity2 = row.value("e2", std::string{});
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<std::string> read_relation_list(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::vector<std::string> relations;
  std::string line;
  while (std::getline(in, line)) {
    const std::string trimmed = normalize_text(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    relations.push_back(trimmed);
  }
  return relations;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path);
  out << content;
  if (!out) throw Error("failed while writing: " + path);
}

}  // namespace atomkg
