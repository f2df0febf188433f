#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "atomkg/errors.hpp"
#include "atomkg/logic/formula.hpp"

namespace atomkg::logic {

// A finite set of possible worlds: every truth assignment over a fixed,
// ordered variable list.  With k variables there are exactly 2^k worlds; a
// world is addressed by its index, whose bit i holds the value of
// variables()[i].  The measure over worlds is uniform counting.
class WorldSpace {
 public:
  static constexpr std::size_t kMaxVariables = 16;

  // Variables must be distinct and non-empty; at most kMaxVariables of them
  // (CapError otherwise — the calculus enumerates all 2^k worlds).
  explicit WorldSpace(std::vector<std::string> variables);

  // The space over the sorted union of the formulas' variables.
  static WorldSpace spanning(std::span<const Formula> formulas);

  std::size_t variable_count() const { return variables_.size(); }
  std::uint64_t world_count() const {
    return std::uint64_t{1} << variables_.size();
  }
  const std::vector<std::string>& variables() const { return variables_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  // True when every variable of `f` belongs to this space.
  bool covers(const Formula& f) const;

 private:
  std::vector<std::string> variables_;
  std::unordered_map<std::string, std::size_t> index_;
};

// A set of worlds, stored as one bit per world in 64-bit blocks.  Bits past
// bit_count() in the last block are kept zero, so popcounts and equality
// work block-wise.
class TruthTable {
 public:
  explicit TruthTable(std::uint64_t bit_count);

  std::uint64_t bit_count() const { return bit_count_; }
  bool test(std::uint64_t index) const {
    return (blocks_[index >> 6] >> (index & 63)) & 1u;
  }
  void set(std::uint64_t index, bool value);

  std::uint64_t count() const;
  bool none() const { return count() == 0; }
  bool all() const { return count() == bit_count_; }
  std::vector<std::uint64_t> ones() const;

  TruthTable operator&(const TruthTable& other) const;
  TruthTable operator|(const TruthTable& other) const;
  TruthTable complement() const;

  std::span<std::uint64_t> blocks() { return blocks_; }
  std::span<const std::uint64_t> blocks() const { return blocks_; }

  friend bool operator==(const TruthTable& a, const TruthTable& b) {
    return a.bit_count_ == b.bit_count_ && a.blocks_ == b.blocks_;
  }

 private:
  std::uint64_t bit_count_;
  std::vector<std::uint64_t> blocks_;
};

// Evaluates `f` in a single world of `space`.  ScopeError if `f` mentions a
// variable outside the space.
bool eval_world(const Formula& f, const WorldSpace& space, std::uint64_t world);

// Reference evaluator: loops over every world with eval_world.  Kept serial
// and obvious; the tests hold `evaluate` to byte-identical output.
TruthTable evaluate_reference(const Formula& f, const WorldSpace& space);

// Production evaluator: computes 64 worlds at a time with block-wise bitwise
// operations, splitting the block range across OpenMP threads when the table
// is large enough to be worth it.
TruthTable evaluate(const Formula& f, const WorldSpace& space);

}  // namespace atomkg::logic
