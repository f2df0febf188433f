#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "atomkg/errors.hpp"

namespace atomkg::logic {

enum class NodeKind { Atom, Not, And, Or, Implies };

// An immutable propositional formula over named atoms.  Nodes are shared
// structurally, so copies are cheap and subtrees can be passed around by
// value.  The concrete syntax uses `!`, `&`, `|`, `->` with precedence
// `!` > `&` > `|` > `->`; the binary connectives associate left except for
// `->`, which associates right.
class Formula {
 public:
  static Formula atom(std::string name);
  static Formula negate(Formula operand);
  static Formula conjoin(Formula lhs, Formula rhs);
  static Formula disjoin(Formula lhs, Formula rhs);
  static Formula implies(Formula lhs, Formula rhs);

  NodeKind kind() const;

  // Atom nodes only.
  const std::string& atom_name() const;
  // Not nodes only.
  Formula operand() const;
  // Binary nodes only.
  Formula lhs() const;
  Formula rhs() const;

  // Longest root-to-leaf path, counting nodes: an atom has depth 1.
  std::size_t depth() const;
  std::size_t node_count() const;

  // Distinct atom names, sorted.
  std::vector<std::string> variables() const;

  // Structural identity (same tree shape and atom names).  Semantic
  // equivalence lives in calculus.hpp as `equivalent`.
  bool identical_to(const Formula& other) const;

  // True when `needle` occurs as a subtree of this formula (reflexive).
  bool contains_subformula(const Formula& needle) const;

  // Minimal-parentheses rendering; `parse_formula` round-trips it exactly.
  std::string to_string() const;

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.identical_to(b);
  }
  friend bool operator!=(const Formula& a, const Formula& b) {
    return !a.identical_to(b);
  }

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Parses the concrete syntax described on Formula.  Atom names match
// [A-Za-z][A-Za-z0-9_]*.  Whitespace between tokens is ignored.  Empty or
// trailing-garbage input raises ParseError with the offending byte offset.
Formula parse_formula(std::string_view text);

}  // namespace atomkg::logic
