#include "atomkg/atomizer.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <set>
#include <thread>
#include <utility>

#include <json.hpp>

#include "atomkg/jsonl.hpp"
#include "atomkg/text.hpp"

namespace atomkg {

AtomizationResult atomize(const std::string& text,
                          PropositionerBackend& backend,
                          const AtomizationOptions& options) {
  if (options.cap < 1) throw UsageError("atomize cap must be >= 1");
  if (options.concurrency < 1) {
    throw UsageError("atomize concurrency must be >= 1");
  }
  const std::string root = normalize_text(text);
  if (root.empty()) {
    throw UsageError("atomize requires text that is nonempty after "
                     "normalization");
  }

  AtomizationResult result;
  std::map<std::string, std::vector<std::string>> memo;
  std::map<std::string, int> first_seen;
  std::vector<std::string> current;  // the candidate set of this round
  int iteration = 0;

  // A string is proved atomic once an actual expansion of it returned
  // exactly itself.
  const auto is_proved = [&](const std::string& s) {
    const auto it = memo.find(s);
    return it != memo.end() && it->second.size() == 1 &&
           it->second.front() == s;
  };

  const auto stamp = [&](const std::string& s) {
    const auto it = first_seen.find(s);
    return Proposition{s, options.source_id,
                       it == first_seen.end() ? 0 : it->second, true};
  };

  const auto snapshot = [&]() {
    AtomizationResult partial = result;
    partial.iterations_used = iteration;
    for (const std::string& s : current) {
      if (is_proved(s)) partial.atoms.push_back(stamp(s));
    }
    partial.unproved_discarded =
        static_cast<int>(current.size() - partial.atoms.size());
    return partial;
  };

  // Issues real backend calls for every input not yet memoized, with at
  // most options.concurrency in flight.  Outputs are normalized and
  // empties dropped before entering the memo; the merge happens on one
  // thread in input order, so the table never sees concurrent writes and
  // results do not depend on scheduling.
  const auto expand_missing = [&](const std::vector<std::string>& inputs) {
    std::vector<std::string> missing;
    for (const std::string& s : inputs) {
      if (!memo.contains(s)) missing.push_back(s);
    }
    if (missing.empty()) return;

    std::vector<std::vector<std::string>> outputs(missing.size());
    std::vector<std::string> errors(missing.size());
    std::vector<char> failed(missing.size(), 0);

    const auto run_one = [&](std::size_t index) {
      try {
        outputs[index] = backend.propose(missing[index]);
      } catch (const std::exception& e) {
        failed[index] = 1;
        errors[index] = e.what();
      } catch (...) {
        failed[index] = 1;
        errors[index] = "unknown backend failure";
      }
    };

    const int workers =
        std::min<int>(options.concurrency, static_cast<int>(missing.size()));
    if (workers <= 1) {
      for (std::size_t i = 0; i < missing.size(); ++i) run_one(i);
    } else {
      std::atomic<std::size_t> cursor{0};
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          while (true) {
            const std::size_t index = cursor.fetch_add(1);
            if (index >= missing.size()) return;
            run_one(index);
          }
        });
      }
      for (std::thread& t : pool) t.join();
    }

    // Every issued call was a real one, including any that failed.
    result.physical_backend_calls += static_cast<int>(missing.size());

    // Merge the successes first so the error's partial state reflects all
    // work that actually completed; then report the lowest-index failure.
    std::size_t first_failed = missing.size();
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (failed[i]) {
        if (first_failed == missing.size()) first_failed = i;
        continue;
      }
      std::vector<std::string> cleaned;
      cleaned.reserve(outputs[i].size());
      for (const std::string& raw : outputs[i]) {
        std::string normalized = normalize_text(raw);
        if (normalized.empty()) {
          ++result.dropped_empty;
          continue;
        }
        cleaned.push_back(std::move(normalized));
      }
      memo.emplace(missing[i], std::move(cleaned));
    }
    if (first_failed != missing.size()) {
      throw AtomizationError("propositioner backend failed for \"" +
                                 missing[first_failed] +
                                 "\": " + errors[first_failed],
                             snapshot());
    }
  };

  // Fixed-point checks consult the memo through the same accounting as any
  // other propose call; strings never expanded are simply not yet proved.
  const auto count_proved = [&](const std::vector<std::string>& members) {
    int proved = 0;
    for (const std::string& s : members) {
      ++result.backend_calls;
      if (is_proved(s)) ++proved;
    }
    return proved;
  };

  const auto sorted_unique = [](std::vector<std::string> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
  };

  // Round 0: expand the root text into the initial candidate set.
  expand_missing({root});
  ++result.backend_calls;
  current = sorted_unique(memo.at(root));
  for (const std::string& s : current) first_seen.try_emplace(s, 0);
  if (current.empty()) {
    result.empty_root_warning = true;
    return result;
  }

  int proved = count_proved(current);
  while (proved != static_cast<int>(current.size()) &&
         iteration < options.cap) {
    expand_missing(current);
    std::vector<std::string> next;
    for (const std::string& member : current) {
      ++result.backend_calls;  // propose(member) feeding the union
      const std::vector<std::string>& expansion = memo.at(member);
      next.insert(next.end(), expansion.begin(), expansion.end());
    }
    next = sorted_unique(std::move(next));
    ++iteration;
    for (const std::string& s : next) first_seen.try_emplace(s, iteration);
    current = std::move(next);
    proved = count_proved(current);
  }

  result.iterations_used = iteration;
  for (const std::string& s : current) {
    if (is_proved(s)) result.atoms.push_back(stamp(s));
  }
  result.unproved_discarded =
      static_cast<int>(current.size() - result.atoms.size());
  return result;
}

namespace {

// Predicate heads the coordination rule recognizes.  Deliberately small:
// the rule must only fire where it is obviously right.
const std::set<std::string>& verb_tokens() {
  static const std::set<std::string> verbs{
      "am",    "is",     "are",    "was",    "were",  "be",    "been",
      "being", "has",    "have",   "had",    "does",  "do",    "did",
      "can",   "could",  "will",   "would",  "shall", "should", "may",
      "might", "must",   "go",     "goes",   "went",  "gone",  "going",
      "live",  "lives",  "lived",  "like",   "likes", "liked", "sit",
      "sits",  "sat",    "run",    "runs",   "ran",   "stand", "stands",
      "stood", "come",   "comes",  "came",   "play",  "plays", "played",
      "work",  "works",  "worked", "eat",    "eats",  "ate"};
  return verbs;
}

std::string fold_token(const std::string& token) {
  std::string folded;
  for (char c : token) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      folded.push_back(static_cast<char>(std::tolower(u)));
    }
  }
  return folded;
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t space = text.find(' ', start);
    if (space == std::string::npos) {
      tokens.push_back(text.substr(start));
      break;
    }
    if (space > start) tokens.push_back(text.substr(start, space - start));
    start = space + 1;
  }
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens,
                        std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// Splits sentences on ". ", "! ", "? ", keeping the terminator with the
// sentence it closes.
std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && text[i + 1] == ' ') {
      sentences.push_back(text.substr(start, i + 1 - start));
      start = i + 2;
      ++i;
    }
  }
  if (start < text.size()) sentences.push_back(text.substr(start));
  return sentences;
}

// One conservative coordination split: "X and Y <predicate>" → two copies,
// only when exactly one "and" (and no "or") precedes the first recognized
// verb and both sides of it are nonempty.
std::vector<std::string> split_coordination(const std::string& sentence) {
  const std::vector<std::string> tokens = split_tokens(sentence);
  std::size_t verb = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (verb_tokens().contains(fold_token(tokens[i]))) {
      verb = i;
      break;
    }
  }
  if (verb == tokens.size()) return {sentence};

  std::size_t and_index = tokens.size();
  int and_count = 0;
  for (std::size_t i = 0; i < verb; ++i) {
    const std::string folded = fold_token(tokens[i]);
    if (folded == "or") return {sentence};  // disjunctions stay whole
    if (folded == "and") {
      and_index = i;
      ++and_count;
    }
  }
  if (and_count != 1 || and_index == 0 || and_index + 1 >= verb) {
    return {sentence};
  }

  const std::string predicate = join_tokens(tokens, verb, tokens.size());
  const auto make = [&](std::string subject) {
    std::string out = std::move(subject) + " " + predicate;
    out.front() = static_cast<char>(
        std::toupper(static_cast<unsigned char>(out.front())));
    return out;
  };
  return {make(join_tokens(tokens, 0, and_index)),
          make(join_tokens(tokens, and_index + 1, verb))};
}

}  // namespace

std::vector<std::string> rule_based_split(const std::string& text) {
  const std::string normalized = normalize_text(text);
  if (normalized.empty()) return {};
  std::vector<std::string> out;
  for (const std::string& sentence : split_sentences(normalized)) {
    const std::string clean = normalize_text(sentence);
    if (clean.empty()) continue;
    for (std::string& piece : split_coordination(clean)) {
      if (!piece.empty()) out.push_back(std::move(piece));
    }
  }
  if (out.empty()) return {normalized};
  return out;
}

std::vector<std::string> RuleBasedPropositioner::propose(
    const std::string& text) {
  return rule_based_split(text);
}

ScriptedPropositioner::ScriptedPropositioner(
    std::map<std::string, std::vector<std::string>> transcript) {
  for (auto& [input, outputs] : transcript) {
    std::vector<std::string> cleaned;
    for (const std::string& raw : outputs) {
      std::string normalized = normalize_text(raw);
      if (!normalized.empty()) cleaned.push_back(std::move(normalized));
    }
    transcript_.emplace(normalize_text(input), std::move(cleaned));
  }
}

ScriptedPropositioner ScriptedPropositioner::from_file(
    const std::string& path) {
  const nlohmann::json doc = parse_json_file(path);
  if (!doc.is_object()) {
    throw Error(path + ": scripted transcript must be a JSON object");
  }
  std::map<std::string, std::vector<std::string>> transcript;
  for (const auto& [input, outputs] : doc.items()) {
    if (!outputs.is_array()) {
      throw Error(path + ": transcript value for \"" + input +
                  "\" must be an array of strings");
    }
    transcript.emplace(input, outputs.get<std::vector<std::string>>());
  }
  return ScriptedPropositioner(std::move(transcript));
}

std::vector<std::string> ScriptedPropositioner::propose(
    const std::string& text) {
  const std::string key = normalize_text(text);
  const auto it = transcript_.find(key);
  if (it == transcript_.end()) return {key};  // unknown strings stay whole
  return it->second;
}

namespace {

// Decomposition prompt, hard line breaks included.
constexpr const char* kProposeTemplate =
    "You are an expert in disambiguation \n"
    "and information extraction.\n"
    "You must decompose the text into \n"
    "atomic propositions (single facts) \n"
    "that are FULLY AUTONOMOUS.\n"
    "\n"
    "ABSOLUTE RULES:\n"
    "1. ZERO PRONOUNS: \"He\", \"She\", \"They\", \n"
    "   \"His\", \"Her\", \"Its\", \"This one\" \n"
    "   ARE FORBIDDEN.\n"
    "   ALWAYS replace them with the \n"
    "   full name of the entity.\n"
    "2. CONTEXT: Each sentence must be \n"
    "   readable alone without knowing \n"
    "   its source.\n"
    "3. REPETITION: Repeat the subject \n"
    "   in EACH sentence.\n"
    "\n"
    "OUTPUT FORMAT: Only a JSON array of \n"
    "strings.\n"
    "\n"
    "Title: {title}\n"
    "Content: {content}\n"
    "Output:";

// Parses a model reply as a JSON array of strings; tolerates prose around
// the array by retrying on the outermost bracketed slice.
std::optional<std::vector<std::string>> parse_string_array(
    const std::string& reply) {
  const auto try_parse =
      [](const std::string& s) -> std::optional<std::vector<std::string>> {
    nlohmann::json doc = nlohmann::json::parse(s, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) return std::nullopt;
    std::vector<std::string> out;
    for (const nlohmann::json& item : doc) {
      if (!item.is_string()) return std::nullopt;
      out.push_back(item.get<std::string>());
    }
    return out;
  };
  if (auto direct = try_parse(reply)) return direct;
  const std::size_t open = reply.find('[');
  const std::size_t close = reply.rfind(']');
  if (open == std::string::npos || close == std::string::npos ||
      close <= open) {
    return std::nullopt;
  }
  return try_parse(reply.substr(open, close - open + 1));
}

}  // namespace

std::vector<std::string> remote_propose(const std::string& text,
                                        const RemoteConfig& endpoint,
                                        const std::string& title) {
  const std::string content = normalize_text(text);
  if (content.empty()) {
    throw UsageError("remote_propose requires nonempty text");
  }
  const std::string prompt = substitute_placeholder(
      substitute_placeholder(kProposeTemplate, "{title}",
                             normalize_text(title)),
      "{content}", content);

  const ChatClient client(endpoint);
  std::string reply = client.complete(prompt);
  std::optional<std::vector<std::string>> parsed = parse_string_array(reply);
  if (!parsed) {
    // One corrective re-prompt, then give up with the raw output attached.
    reply = client.complete(prompt + "\nOutput ONLY the JSON array.");
    parsed = parse_string_array(reply);
    if (!parsed) {
      throw TransportError(
          "propositioner reply is not a JSON array of strings", 200, reply);
    }
  }

  std::vector<std::string> cleaned;
  for (const std::string& raw : *parsed) {
    std::string normalized = normalize_text(raw);
    if (!normalized.empty()) cleaned.push_back(std::move(normalized));
  }
  return cleaned;
}

RemotePropositioner::RemotePropositioner(RemoteConfig config,
                                         std::string title)
    : config_(std::move(config)), title_(std::move(title)) {}

std::vector<std::string> RemotePropositioner::propose(
    const std::string& text) {
  return remote_propose(text, config_, title_);
}

void write_atoms_jsonl(const std::string& path,
                       const std::vector<Proposition>& atoms) {
  std::vector<nlohmann::json> rows;
  rows.reserve(atoms.size());
  for (const Proposition& atom : atoms) {
    nlohmann::ordered_json row;
    row["text"] = atom.text;
    row["source_id"] = atom.source_id;
    row["depth"] = atom.depth;
    row["proved_atomic"] = atom.proved_atomic;
    rows.push_back(std::move(row));
  }
  write_jsonl(path, rows);
}

std::vector<Proposition> read_atoms_jsonl(const std::string& path) {
  std::vector<Proposition> atoms;
  for (const nlohmann::json& row : read_jsonl(path)) {
    Proposition atom;
    atom.text = row.at("text").get<std::string>();
    atom.source_id = row.value("source_id", std::string{});
    atom.depth = row.value("depth", 0);
    atom.proved_atomic = row.value("proved_atomic", true);
    atoms.push_back(std::move(atom));
  }
  return atoms;
}

}  // namespace atomkg
