#pragma once

#include <map>
#include <string>
#include <vector>

#include "atomkg/chat.hpp"
#include "atomkg/errors.hpp"

namespace atomkg {

// One candidate statement produced during atomization.
struct Proposition {
  std::string text;       // normalized
  std::string source_id;  // originating document/sentence identifier
  int depth = 0;          // iteration at which the text first appeared
  bool proved_atomic = false;
};

// A decomposition backend: maps text to an ordered list of candidate
// propositions.  Implementations must not return strings that are empty
// after normalization.
class PropositionerBackend {
 public:
  virtual ~PropositionerBackend() = default;
  virtual std::vector<std::string> propose(const std::string& text) = 0;
  virtual std::string kind() const = 0;
};

struct AtomizationOptions {
  int cap = 5;            // maximum refinement iterations
  int concurrency = 4;    // in-flight backend calls while expanding one round
  std::string source_id;  // stamped on every returned proposition
};

struct AtomizationResult {
  // Proved atoms, sorted by text; every member has proved_atomic = true.
  std::vector<Proposition> atoms;
  int iterations_used = 0;
  // Candidates still unproved when the iteration cap cut the loop.
  int unproved_discarded = 0;
  // Logical backend consultations: the root expansion, each per-round
  // expansion, and each fixed-point check all count, whether the memo table
  // answered them or a real call did.
  long backend_calls = 0;
  // Calls that actually reached the backend (memo misses during expansion).
  // Bounded by the number of distinct normalized strings encountered.
  long physical_backend_calls = 0;
  // Backend outputs dropped for being empty after normalization.
  int dropped_empty = 0;
  // The root text itself expanded to nothing.
  bool empty_root_warning = false;
};

// Backend failure mid-run; `partial` holds whatever was proved before the
// failure so callers can salvage or report it.
struct AtomizationError : Error {
  AtomizationError(const std::string& message, AtomizationResult partial_state)
      : Error(message), partial(std::move(partial_state)) {}
  AtomizationResult partial;
};

// Refines `text` to its stable decomposition: propositions the backend maps
// to themselves.  Round 0 expands the text into candidate set P0 and marks
// as proved the candidates whose own expansion is already known to return
// exactly themselves; while unproved candidates remain and the cap allows,
// every member of the current set is expanded and the proved subset is
// recomputed.  Backend calls are memoized per normalized string, every
// string's fixed-point status is established by at most one real call, and
// each round's missing expansions are issued concurrently (at most
// `options.concurrency` in flight) then merged in sorted order, so results
// are deterministic for deterministic backends.
AtomizationResult atomize(const std::string& text,
                          PropositionerBackend& backend,
                          const AtomizationOptions& options = {});

// Deterministic offline splitter: sentence boundaries first (". ", "! ",
// "? "), then one conservative coordination split per sentence — a single
// "and" between two phrases before the first recognized verb token becomes
// two copies sharing the predicate.  Never splits on "or": a disjunction is
// one fact, and slicing it would assert more than the text does.  Grammatical
// agreement is not repaired ("The cat are ..."), which is a documented
// limitation of the rule backend.
std::vector<std::string> rule_based_split(const std::string& text);

class RuleBasedPropositioner : public PropositionerBackend {
 public:
  std::vector<std::string> propose(const std::string& text) override;
  std::string kind() const override { return "rules"; }
};

// Replays a fixed transcript: normalized input string → list of outputs.
// Strings absent from the transcript are treated as fixed points (the
// transcript only needs to list what actually decomposes).
class ScriptedPropositioner : public PropositionerBackend {
 public:
  explicit ScriptedPropositioner(
      std::map<std::string, std::vector<std::string>> transcript);
  // File format: one JSON object, {"input text": ["output", ...], ...}.
  static ScriptedPropositioner from_file(const std::string& path);

  std::vector<std::string> propose(const std::string& text) override;
  std::string kind() const override { return "scripted"; }

 private:
  std::map<std::string, std::vector<std::string>> transcript_;
};

// Sends the decomposition prompt for `text` (with `title` giving document
// context, empty allowed) and parses the reply as a JSON array of strings.
// A malformed reply triggers exactly one re-prompt with "Output ONLY the
// JSON array." appended; a second malformed reply raises TransportError
// carrying the raw output.  `text` must be nonempty after normalization.
std::vector<std::string> remote_propose(const std::string& text,
                                        const RemoteConfig& endpoint,
                                        const std::string& title = "");

class RemotePropositioner : public PropositionerBackend {
 public:
  explicit RemotePropositioner(RemoteConfig config, std::string title = "");
  // Title used for subsequent propose calls (per-document context).
  void set_title(std::string title) { title_ = std::move(title); }

  std::vector<std::string> propose(const std::string& text) override;
  std::string kind() const override { return "remote"; }

 private:
  RemoteConfig config_;
  std::string title_;
};

// atoms.jsonl rows: {"text","source_id","depth","proved_atomic"}.
void write_atoms_jsonl(const std::string& path,
                       const std::vector<Proposition>& atoms);
std::vector<Proposition> read_atoms_jsonl(const std::string& path);

}  // namespace atomkg
