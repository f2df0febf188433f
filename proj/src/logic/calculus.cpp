#include "atomkg/logic/calculus.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace atomkg::logic {

TruthTable content(const Formula& f, const WorldSpace& space) {
  return evaluate(f, space);
}

InfoValue information(const Formula& f, const WorldSpace& space) {
  const std::uint64_t satisfied = content(f, space).count();
  if (satisfied == 0) {
    return {std::numeric_limits<double>::infinity()};
  }
  // log2 is exact on powers of two, which keeps tautologies at exactly 0.0.
  const double bits = std::log2(static_cast<double>(space.world_count())) -
                      std::log2(static_cast<double>(satisfied));
  return {bits == 0.0 ? 0.0 : bits};
}

bool is_independent(const Formula& a, const Formula& b,
                    const WorldSpace& space) {
  const TruthTable ta = evaluate(a, space);
  const TruthTable tb = evaluate(b, space);
  const TruthTable na = ta.complement();
  const TruthTable nb = tb.complement();
  return (ta & tb).count() > 0 && (ta & nb).count() > 0 &&
         (na & tb).count() > 0 && (na & nb).count() > 0;
}

CutClass classify_cut(const Formula& whole, const Formula& part,
                      const WorldSpace& space) {
  if (!whole.contains_subformula(part)) return CutClass::NotSubformula;
  const InfoValue before = information(whole, space);
  const InfoValue after = information(part, space);
  // +infinity compares greater than every finite value, so cutting inside a
  // contradiction always counts as Safe — the paradox is part of the model.
  return before.bits > after.bits ? CutClass::Safe : CutClass::Bad;
}

namespace {

bool is_literal(const Formula& f) {
  if (f.kind() == NodeKind::Atom) return true;
  return f.kind() == NodeKind::Not && f.operand().kind() == NodeKind::Atom;
}

}  // namespace

bool is_clause(const Formula& f) {
  if (is_literal(f)) return true;
  if (f.kind() != NodeKind::Or) return false;
  return is_clause(f.lhs()) && is_clause(f.rhs());
}

namespace {

std::uint64_t pow3(std::size_t k) {
  std::uint64_t p = 1;
  while (k--) p *= 3;
  return p;
}

// Literal columns over the k-variable space: tables of v and !v for each
// variable, shared by every candidate test.
struct LiteralColumns {
  std::vector<std::vector<std::uint64_t>> positive;
  std::vector<std::vector<std::uint64_t>> negative;
  std::size_t block_count = 0;
};

LiteralColumns literal_columns(std::size_t k) {
  LiteralColumns cols;
  const std::uint64_t worlds = std::uint64_t{1} << k;
  cols.block_count = static_cast<std::size_t>((worlds + 63) / 64);
  for (std::size_t v = 0; v < k; ++v) {
    TruthTable t(worlds);
    for (std::uint64_t w = 0; w < worlds; ++w) {
      if ((w >> v) & 1u) t.set(w, true);
    }
    cols.positive.emplace_back(t.blocks().begin(), t.blocks().end());
    TruthTable n = t.complement();
    cols.negative.emplace_back(n.blocks().begin(), n.blocks().end());
  }
  return cols;
}

// Whether candidate `index` (base-3 digits over the variables) denotes a
// clause whose table equals `target`.
bool candidate_matches(std::uint64_t index, const LiteralColumns& cols,
                       std::size_t k, std::span<const std::uint64_t> target) {
  std::vector<std::uint64_t> acc(cols.block_count, 0);
  std::uint64_t rest = index;
  for (std::size_t v = 0; v < k; ++v) {
    const std::uint64_t digit = rest % 3;
    rest /= 3;
    if (digit == 0) continue;
    const std::vector<std::uint64_t>& col =
        digit == 1 ? cols.positive[v] : cols.negative[v];
    for (std::size_t j = 0; j < cols.block_count; ++j) acc[j] |= col[j];
  }
  for (std::size_t j = 0; j < cols.block_count; ++j) {
    if (acc[j] != target[j]) return false;
  }
  return true;
}

void require_clause_width(std::size_t k) {
  if (k > kMaxClauseVariables) {
    throw CapError("clause enumeration over " + std::to_string(k) +
                   " variables exceeds the cap of " +
                   std::to_string(kMaxClauseVariables));
  }
}

}  // namespace

std::optional<std::uint64_t> find_clause_serial(const TruthTable& target,
                                                std::size_t k) {
  require_clause_width(k);
  const LiteralColumns cols = literal_columns(k);
  const std::uint64_t total = pow3(k);
  for (std::uint64_t index = 1; index < total; ++index) {
    if (candidate_matches(index, cols, k, target.blocks())) return index;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> find_clause_parallel(const TruthTable& target,
                                                  std::size_t k) {
  require_clause_width(k);
  const LiteralColumns cols = literal_columns(k);
  const std::uint64_t total = pow3(k);
  std::uint64_t best = total;  // sentinel: no witness found
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(min : best)
#endif
  for (std::uint64_t index = 1; index < total; ++index) {
    if (index < best && candidate_matches(index, cols, k, target.blocks())) {
      best = std::min(best, index);
    }
  }
  if (best == total) return std::nullopt;
  return best;
}

Formula clause_from_index(std::uint64_t index,
                          const std::vector<std::string>& variables) {
  std::optional<Formula> clause;
  std::uint64_t rest = index;
  for (const std::string& name : variables) {
    const std::uint64_t digit = rest % 3;
    rest /= 3;
    if (digit == 0) continue;
    Formula literal = digit == 1 ? Formula::atom(name)
                                 : Formula::negate(Formula::atom(name));
    clause = clause ? Formula::disjoin(std::move(*clause), std::move(literal))
                    : std::move(literal);
  }
  if (!clause) throw Error("candidate index 0 denotes the empty clause");
  return *clause;
}

namespace {

std::optional<std::uint64_t> find_clause(const TruthTable& target,
                                         std::size_t k) {
  // The scan is embarrassingly parallel; below ~3^7 candidates the serial
  // loop wins on thread overhead alone.  Both paths return the same index.
#ifdef _OPENMP
  if (pow3(k) >= 2187 && omp_get_max_threads() > 1) {
    return find_clause_parallel(target, k);
  }
#endif
  return find_clause_serial(target, k);
}

}  // namespace

bool is_atomic(const Formula& f) { return equivalent_clause(f).has_value(); }

bool is_atomic(const Formula& f, const WorldSpace& space) {
  if (!space.covers(f)) {
    throw ScopeError("formula mentions variables outside the world space");
  }
  return is_atomic(f);
}

std::optional<Formula> equivalent_clause(const Formula& f) {
  const std::vector<std::string> vars = f.variables();
  require_clause_width(vars.size());
  const WorldSpace space{std::vector<std::string>(vars)};
  const TruthTable target = evaluate(f, space);
  const std::optional<std::uint64_t> witness =
      find_clause(target, vars.size());
  if (!witness) return std::nullopt;
  return clause_from_index(*witness, vars);
}

namespace {

// A subcube of worlds: the variables in `mask` are pinned to the values in
// `bits` (bits outside the mask are zero), everything else ranges free.
struct Cube {
  std::uint32_t mask;
  std::uint32_t bits;
};

std::uint64_t cube_key(const Cube& c) {
  return (std::uint64_t{c.mask} << 32) | c.bits;
}

// Merges the falsifying minterms into all maximal subcubes (the prime
// implicates of the formula): two cubes pinned the same way and differing
// in exactly one pinned bit fuse into the cube with that bit freed.
std::vector<Cube> prime_cubes(const std::vector<std::uint64_t>& falsifying,
                              std::size_t k) {
  const std::uint32_t full_mask =
      k == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << k) - 1;
  std::vector<Cube> current;
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t w : falsifying) {
    Cube c{full_mask, static_cast<std::uint32_t>(w)};
    if (seen.insert(cube_key(c)).second) current.push_back(c);
  }

  std::vector<Cube> primes;
  while (!current.empty()) {
    std::unordered_set<std::uint64_t> members;
    for (const Cube& c : current) members.insert(cube_key(c));

    std::vector<Cube> next;
    std::unordered_set<std::uint64_t> next_seen;
    for (const Cube& c : current) {
      bool merged = false;
      for (std::size_t v = 0; v < k; ++v) {
        const std::uint32_t bit = std::uint32_t{1} << v;
        if (!(c.mask & bit)) continue;
        if (members.contains(cube_key(Cube{c.mask, c.bits ^ bit}))) {
          merged = true;
          // Record the fused cube once, from the side where the bit is 0.
          if (!(c.bits & bit)) {
            Cube fused{c.mask & ~bit, c.bits};
            if (next_seen.insert(cube_key(fused)).second) {
              next.push_back(fused);
            }
          }
        }
      }
      if (!merged) primes.push_back(c);
    }
    current = std::move(next);
  }
  return primes;
}

using ClauseLiterals = std::vector<std::pair<std::size_t, bool>>;

// The clause that is false exactly on the cube: each pinned variable
// contributes the literal its pinned value falsifies.
ClauseLiterals cube_clause(const Cube& cube, std::size_t k) {
  ClauseLiterals literals;
  for (std::size_t v = 0; v < k; ++v) {
    if (!(cube.mask & (std::uint32_t{1} << v))) continue;
    const bool pinned_true = cube.bits & (std::uint32_t{1} << v);
    literals.emplace_back(v, /*negated=*/pinned_true);
  }
  return literals;
}

Formula clause_formula(const ClauseLiterals& literals,
                       const std::vector<std::string>& vars) {
  std::optional<Formula> clause;
  for (const auto& [v, negated] : literals) {
    Formula literal = negated ? Formula::negate(Formula::atom(vars[v]))
                              : Formula::atom(vars[v]);
    clause = clause ? Formula::disjoin(std::move(*clause), std::move(literal))
                    : std::move(literal);
  }
  return *clause;
}

}  // namespace

Formula to_cnf(const Formula& f) {
  const std::vector<std::string> vars = f.variables();
  const WorldSpace space{std::vector<std::string>(vars)};
  const TruthTable table = evaluate(f, space);

  const std::string& first = vars.front();
  if (table.all()) {
    return Formula::disjoin(Formula::atom(first),
                            Formula::negate(Formula::atom(first)));
  }
  if (table.none()) {
    return Formula::conjoin(Formula::atom(first),
                            Formula::negate(Formula::atom(first)));
  }

  const std::vector<Cube> primes =
      prime_cubes(table.complement().ones(), vars.size());
  std::vector<ClauseLiterals> clauses;
  clauses.reserve(primes.size());
  for (const Cube& cube : primes) clauses.push_back(cube_clause(cube, vars.size()));
  std::sort(clauses.begin(), clauses.end());

  std::optional<Formula> result;
  for (const ClauseLiterals& literals : clauses) {
    Formula clause = clause_formula(literals, vars);
    result = result ? Formula::conjoin(std::move(*result), std::move(clause))
                    : std::move(clause);
  }
  return *result;
}

bool equivalent(const Formula& a, const Formula& b) {
  const std::array<Formula, 2> both{a, b};
  const WorldSpace space = WorldSpace::spanning(both);
  return evaluate(a, space) == evaluate(b, space);
}

}  // namespace atomkg::logic
