#include "atomkg/logic/worlds.hpp"

#include <algorithm>
#include <bit>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace atomkg::logic {

WorldSpace::WorldSpace(std::vector<std::string> variables)
    : variables_(std::move(variables)) {
  if (variables_.size() > kMaxVariables) {
    throw CapError("world space of " + std::to_string(variables_.size()) +
                   " variables exceeds the cap of " +
                   std::to_string(kMaxVariables));
  }
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].empty()) {
      throw Error("world-space variable names must be non-empty");
    }
    if (!index_.emplace(variables_[i], i).second) {
      throw Error("duplicate world-space variable: " + variables_[i]);
    }
  }
}

WorldSpace WorldSpace::spanning(std::span<const Formula> formulas) {
  std::set<std::string> names;
  for (const Formula& f : formulas) {
    for (std::string& v : f.variables()) names.insert(std::move(v));
  }
  return WorldSpace(std::vector<std::string>(names.begin(), names.end()));
}

std::optional<std::size_t> WorldSpace::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool WorldSpace::covers(const Formula& f) const {
  for (const std::string& v : f.variables()) {
    if (!index_.contains(v)) return false;
  }
  return true;
}

TruthTable::TruthTable(std::uint64_t bit_count)
    : bit_count_(bit_count), blocks_((bit_count + 63) / 64, 0) {}

void TruthTable::set(std::uint64_t index, bool value) {
  if (value) {
    blocks_[index >> 6] |= std::uint64_t{1} << (index & 63);
  } else {
    blocks_[index >> 6] &= ~(std::uint64_t{1} << (index & 63));
  }
}

std::uint64_t TruthTable::count() const {
  std::uint64_t total = 0;
  for (std::uint64_t b : blocks_) total += std::popcount(b);
  return total;
}

std::vector<std::uint64_t> TruthTable::ones() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < bit_count_; ++i) {
    if (test(i)) out.push_back(i);
  }
  return out;
}

namespace {

// Zeroes the bits past `bit_count` in the final block so counting and
// equality stay block-wise.
void mask_tail(std::vector<std::uint64_t>& blocks, std::uint64_t bit_count) {
  if (blocks.empty()) return;
  const std::uint64_t used = bit_count & 63;
  if (used != 0) blocks.back() &= (std::uint64_t{1} << used) - 1;
}

}  // namespace

TruthTable TruthTable::operator&(const TruthTable& other) const {
  TruthTable out(bit_count_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    out.blocks_[i] = blocks_[i] & other.blocks_[i];
  }
  return out;
}

TruthTable TruthTable::operator|(const TruthTable& other) const {
  TruthTable out(bit_count_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    out.blocks_[i] = blocks_[i] | other.blocks_[i];
  }
  return out;
}

TruthTable TruthTable::complement() const {
  TruthTable out(bit_count_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    out.blocks_[i] = ~blocks_[i];
  }
  mask_tail(out.blocks_, bit_count_);
  return out;
}

namespace {

void require_covered(const Formula& f, const WorldSpace& space) {
  for (const std::string& v : f.variables()) {
    if (!space.index_of(v)) {
      throw ScopeError("formula variable '" + v +
                       "' is not part of the world space");
    }
  }
}

bool eval_world_at(const Formula& f, const WorldSpace& space,
                   std::uint64_t world) {
  switch (f.kind()) {
    case NodeKind::Atom:
      return (world >> *space.index_of(f.atom_name())) & 1u;
    case NodeKind::Not:
      return !eval_world_at(f.operand(), space, world);
    case NodeKind::And:
      return eval_world_at(f.lhs(), space, world) &&
             eval_world_at(f.rhs(), space, world);
    case NodeKind::Or:
      return eval_world_at(f.lhs(), space, world) ||
             eval_world_at(f.rhs(), space, world);
    case NodeKind::Implies:
      return !eval_world_at(f.lhs(), space, world) ||
             eval_world_at(f.rhs(), space, world);
  }
  return false;
}

// Flattened post-order program for the block evaluator: children always
// precede their parent, the last instruction is the root.
struct Instruction {
  NodeKind kind;
  int a = -1;         // operand slot (Not) or lhs slot (binary)
  int b = -1;         // rhs slot
  std::size_t var = 0;  // variable index (Atom)
};

int linearize(const Formula& f, const WorldSpace& space,
              std::vector<Instruction>& program) {
  Instruction ins;
  ins.kind = f.kind();
  switch (f.kind()) {
    case NodeKind::Atom:
      ins.var = *space.index_of(f.atom_name());
      break;
    case NodeKind::Not:
      ins.a = linearize(f.operand(), space, program);
      break;
    default:
      ins.a = linearize(f.lhs(), space, program);
      ins.b = linearize(f.rhs(), space, program);
  }
  program.push_back(ins);
  return static_cast<int>(program.size()) - 1;
}

// Repeating 64-bit pattern of variable `var` when it flips within a block
// (var < 6): bit j of any block is ((j >> var) & 1).
constexpr std::uint64_t kIntraBlockPattern[6] = {
    0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
    0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};

// Evaluates the whole program for blocks [begin, end); each slot owns a
// buffer and the ranges written by different calls never overlap, so chunks
// can run on separate threads.
void run_blocks(const std::vector<Instruction>& program,
                std::vector<std::vector<std::uint64_t>>& slots,
                std::size_t begin, std::size_t end) {
  for (std::size_t s = 0; s < program.size(); ++s) {
    const Instruction& ins = program[s];
    std::uint64_t* out = slots[s].data();
    switch (ins.kind) {
      case NodeKind::Atom:
        if (ins.var < 6) {
          const std::uint64_t pattern = kIntraBlockPattern[ins.var];
          for (std::size_t j = begin; j < end; ++j) out[j] = pattern;
        } else {
          const std::size_t shift = ins.var - 6;
          for (std::size_t j = begin; j < end; ++j) {
            out[j] = ((j >> shift) & 1u) ? ~std::uint64_t{0} : 0;
          }
        }
        break;
      case NodeKind::Not: {
        const std::uint64_t* a = slots[ins.a].data();
        for (std::size_t j = begin; j < end; ++j) out[j] = ~a[j];
        break;
      }
      case NodeKind::And: {
        const std::uint64_t* a = slots[ins.a].data();
        const std::uint64_t* b = slots[ins.b].data();
        for (std::size_t j = begin; j < end; ++j) out[j] = a[j] & b[j];
        break;
      }
      case NodeKind::Or: {
        const std::uint64_t* a = slots[ins.a].data();
        const std::uint64_t* b = slots[ins.b].data();
        for (std::size_t j = begin; j < end; ++j) out[j] = a[j] | b[j];
        break;
      }
      case NodeKind::Implies: {
        const std::uint64_t* a = slots[ins.a].data();
        const std::uint64_t* b = slots[ins.b].data();
        for (std::size_t j = begin; j < end; ++j) out[j] = ~a[j] | b[j];
        break;
      }
    }
  }
}

}  // namespace

bool eval_world(const Formula& f, const WorldSpace& space,
                std::uint64_t world) {
  require_covered(f, space);
  return eval_world_at(f, space, world);
}

TruthTable evaluate_reference(const Formula& f, const WorldSpace& space) {
  require_covered(f, space);
  TruthTable table(space.world_count());
  for (std::uint64_t w = 0; w < space.world_count(); ++w) {
    if (eval_world_at(f, space, w)) table.set(w, true);
  }
  return table;
}

TruthTable evaluate(const Formula& f, const WorldSpace& space) {
  require_covered(f, space);
  std::vector<Instruction> program;
  linearize(f, space, program);

  const std::uint64_t worlds = space.world_count();
  const std::size_t block_count = (worlds + 63) / 64;
  std::vector<std::vector<std::uint64_t>> slots(
      program.size(), std::vector<std::uint64_t>(block_count, 0));

#ifdef _OPENMP
  // Chunking pays for itself only once the table spans many blocks; the
  // result is a pure function of the program either way.
  constexpr std::size_t kParallelThreshold = 64;
  if (block_count >= kParallelThreshold && omp_get_max_threads() > 1) {
#pragma omp parallel
    {
      const std::size_t threads = omp_get_num_threads();
      const std::size_t id = omp_get_thread_num();
      const std::size_t chunk = (block_count + threads - 1) / threads;
      const std::size_t begin = std::min(id * chunk, block_count);
      const std::size_t end = std::min(begin + chunk, block_count);
      if (begin < end) run_blocks(program, slots, begin, end);
    }
  } else {
    run_blocks(program, slots, 0, block_count);
  }
#else
  run_blocks(program, slots, 0, block_count);
#endif

  TruthTable table(worlds);
  std::vector<std::uint64_t>& root = slots.back();
  mask_tail(root, worlds);
  std::copy(root.begin(), root.end(), table.blocks().begin());
  return table;
}

}  // namespace atomkg::logic
