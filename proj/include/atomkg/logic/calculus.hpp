#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "atomkg/logic/formula.hpp"
#include "atomkg/logic/worlds.hpp"

namespace atomkg::logic {

// Quantity of semantic information carried by a formula, in bits.
// Contradictions rule out every world and come out as +infinity — the
// calculus reproduces that effect on purpose rather than patching it.
struct InfoValue {
  double bits = 0.0;
  bool is_infinite() const { return std::isinf(bits); }
  friend bool operator==(const InfoValue&, const InfoValue&) = default;
};

// The set of worlds a formula rules in (its satisfying assignments).
// ScopeError if the formula mentions a variable outside the space.
TruthTable content(const Formula& f, const WorldSpace& space);

// information(f) = -log2(|content(f)| / |worlds|).  Zero for tautologies,
// +infinity for contradictions, exact on power-of-two counts.
InfoValue information(const Formula& f, const WorldSpace& space);

// Two formulas are independent when all four sign combinations
// (a&b, a&!b, !a&b, !a&!b) are satisfiable in the space.
bool is_independent(const Formula& a, const Formula& b,
                    const WorldSpace& space);

enum class CutClass { Safe, Bad, NotSubformula };

// Classifies replacing `whole` by its structural subformula `part`:
// Safe when information(whole) > information(part) (the move discards
// information but keeps a weaker truth), Bad when it does not, and
// NotSubformula when `part` does not occur inside `whole` at all.
CutClass classify_cut(const Formula& whole, const Formula& part,
                      const WorldSpace& space);

// True when the formula is structurally a disjunction of literals (an atom
// or a negated atom, or any `|`-tree over those).
bool is_clause(const Formula& f);

inline constexpr std::size_t kMaxClauseVariables = 10;

// A formula is atomic when it is logically equivalent to some single clause
// over its own variables.  Candidates assign each variable one of
// {absent, positive, negative} — 3^k - 1 non-empty clauses; CapError when
// the formula has more than kMaxClauseVariables variables.
bool is_atomic(const Formula& f);

// Same verdict, after checking the formula fits `space` (ScopeError
// otherwise).  The verdict itself does not depend on the ambient space:
// candidates range over the formula's own variables.
bool is_atomic(const Formula& f, const WorldSpace& space);

// The witness behind is_atomic: the lowest-index equivalent clause, if any.
std::optional<Formula> equivalent_clause(const Formula& f);

// Internal clause-scan kernels, exposed for tests and benchmarks.  `target`
// is the formula's table over the space of its k (sorted) variables; the
// result is the lowest index in [1, 3^k) whose clause has that exact table.
// Candidate index encoding: digit (index / 3^v) % 3 of variable v is
// 0 = absent, 1 = positive literal, 2 = negative literal.
std::optional<std::uint64_t> find_clause_serial(const TruthTable& target,
                                                std::size_t k);
std::optional<std::uint64_t> find_clause_parallel(const TruthTable& target,
                                                  std::size_t k);

// Materializes a candidate index as a formula over `variables`.
Formula clause_from_index(std::uint64_t index,
                          const std::vector<std::string>& variables);

// Conjunctive normal form with every conjunct a prime implicate, built by
// merging the falsifying worlds of `f` into maximal subcubes; conjuncts are
// sorted, so the result is canonical up to logical equivalence.  Degenerate
// cases keep the output well-formed over the first variable V of `f`:
// tautologies return `V | !V`, contradictions return `V & !V`.
Formula to_cnf(const Formula& f);

// Logical equivalence over the spanning space of both formulas' variables.
bool equivalent(const Formula& a, const Formula& b);

}  // namespace atomkg::logic
