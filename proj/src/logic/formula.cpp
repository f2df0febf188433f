#include "atomkg/logic/formula.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

namespace atomkg::logic {

struct Formula::Node {
  NodeKind kind;
  std::string name;                  // Atom nodes
  std::shared_ptr<const Node> lhs;   // Not operand / binary lhs
  std::shared_ptr<const Node> rhs;   // binary rhs
};

Formula Formula::atom(std::string name) {
  return Formula(std::make_shared<Node>(
      Node{NodeKind::Atom, std::move(name), nullptr, nullptr}));
}

Formula Formula::negate(Formula operand) {
  return Formula(std::make_shared<Node>(
      Node{NodeKind::Not, {}, std::move(operand.node_), nullptr}));
}

Formula Formula::conjoin(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<Node>(
      Node{NodeKind::And, {}, std::move(lhs.node_), std::move(rhs.node_)}));
}

Formula Formula::disjoin(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<Node>(
      Node{NodeKind::Or, {}, std::move(lhs.node_), std::move(rhs.node_)}));
}

Formula Formula::implies(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<Node>(
      Node{NodeKind::Implies, {}, std::move(lhs.node_), std::move(rhs.node_)}));
}

NodeKind Formula::kind() const { return node_->kind; }

const std::string& Formula::atom_name() const { return node_->name; }

Formula Formula::operand() const { return Formula(node_->lhs); }

Formula Formula::lhs() const { return Formula(node_->lhs); }

Formula Formula::rhs() const { return Formula(node_->rhs); }

namespace {

std::size_t node_depth(const Formula& f) {
  switch (f.kind()) {
    case NodeKind::Atom:
      return 1;
    case NodeKind::Not:
      return 1 + node_depth(f.operand());
    default:
      return 1 + std::max(node_depth(f.lhs()), node_depth(f.rhs()));
  }
}

std::size_t count_nodes(const Formula& f) {
  switch (f.kind()) {
    case NodeKind::Atom:
      return 1;
    case NodeKind::Not:
      return 1 + count_nodes(f.operand());
    default:
      return 1 + count_nodes(f.lhs()) + count_nodes(f.rhs());
  }
}

void collect_variables(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case NodeKind::Atom:
      out.insert(f.atom_name());
      return;
    case NodeKind::Not:
      collect_variables(f.operand(), out);
      return;
    default:
      collect_variables(f.lhs(), out);
      collect_variables(f.rhs(), out);
  }
}

}  // namespace

std::size_t Formula::depth() const { return node_depth(*this); }

std::size_t Formula::node_count() const { return count_nodes(*this); }

std::vector<std::string> Formula::variables() const {
  std::set<std::string> names;
  collect_variables(*this, names);
  return {names.begin(), names.end()};
}

bool Formula::identical_to(const Formula& other) const {
  if (node_ == other.node_) return true;
  if (node_->kind != other.node_->kind) return false;
  switch (node_->kind) {
    case NodeKind::Atom:
      return node_->name == other.node_->name;
    case NodeKind::Not:
      return operand().identical_to(other.operand());
    default:
      return lhs().identical_to(other.lhs()) && rhs().identical_to(other.rhs());
  }
}

bool Formula::contains_subformula(const Formula& needle) const {
  if (identical_to(needle)) return true;
  switch (node_->kind) {
    case NodeKind::Atom:
      return false;
    case NodeKind::Not:
      return operand().contains_subformula(needle);
    default:
      return lhs().contains_subformula(needle) ||
             rhs().contains_subformula(needle);
  }
}

namespace {

// Binding strength; a child is parenthesized when its own strength is below
// what its position requires, which keeps the printed string reparsing to
// the identical tree (including association).
int strength(NodeKind kind) {
  switch (kind) {
    case NodeKind::Implies:
      return 1;
    case NodeKind::Or:
      return 2;
    case NodeKind::And:
      return 3;
    case NodeKind::Not:
      return 4;
    case NodeKind::Atom:
      return 5;
  }
  return 5;
}

void print_into(const Formula& f, int required, std::string& out) {
  const int own = strength(f.kind());
  const bool wrap = own < required;
  if (wrap) out.push_back('(');
  switch (f.kind()) {
    case NodeKind::Atom:
      out += f.atom_name();
      break;
    case NodeKind::Not:
      out.push_back('!');
      print_into(f.operand(), own, out);
      break;
    case NodeKind::And:
      print_into(f.lhs(), own, out);
      out += " & ";
      print_into(f.rhs(), own + 1, out);
      break;
    case NodeKind::Or:
      print_into(f.lhs(), own, out);
      out += " | ";
      print_into(f.rhs(), own + 1, out);
      break;
    case NodeKind::Implies:
      // Right-associative: the left child needs parentheses at equal
      // strength, the right child does not.
      print_into(f.lhs(), own + 1, out);
      out += " -> ";
      print_into(f.rhs(), own, out);
      break;
  }
  if (wrap) out.push_back(')');
}

}  // namespace

std::string Formula::to_string() const {
  std::string out;
  print_into(*this, 0, out);
  return out;
}

namespace {

// Recursive-descent parser for the formula grammar.  Tracks byte offsets so
// errors point at the offending character.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula run() {
    skip_spaces();
    if (pos_ >= text_.size()) throw ParseError("empty formula", 0);
    Formula result = parse_implication();
    skip_spaces();
    if (pos_ < text_.size()) {
      throw ParseError("unexpected trailing input", pos_);
    }
    return result;
  }

 private:
  Formula parse_implication() {
    Formula left = parse_disjunction();
    skip_spaces();
    if (pos_ + 1 < text_.size() && text_[pos_] == '-' &&
        text_[pos_ + 1] == '>') {
      pos_ += 2;
      return Formula::implies(std::move(left), parse_implication());
    }
    return left;
  }

  Formula parse_disjunction() {
    Formula left = parse_conjunction();
    while (true) {
      skip_spaces();
      if (pos_ < text_.size() && text_[pos_] == '|') {
        ++pos_;
        left = Formula::disjoin(std::move(left), parse_conjunction());
      } else {
        return left;
      }
    }
  }

  Formula parse_conjunction() {
    Formula left = parse_negation();
    while (true) {
      skip_spaces();
      if (pos_ < text_.size() && text_[pos_] == '&') {
        ++pos_;
        left = Formula::conjoin(std::move(left), parse_negation());
      } else {
        return left;
      }
    }
  }

  Formula parse_negation() {
    skip_spaces();
    if (pos_ < text_.size() && text_[pos_] == '!') {
      ++pos_;
      return Formula::negate(parse_negation());
    }
    return parse_primary();
  }

  Formula parse_primary() {
    skip_spaces();
    if (pos_ >= text_.size()) {
      throw ParseError("expected an atom or '('", pos_);
    }
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Formula inner = parse_implication();
      skip_spaces();
      if (pos_ >= text_.size() || text_[pos_] != ')') {
        throw ParseError("expected ')'", pos_);
      }
      ++pos_;
      return inner;
    }
    if (is_name_start(c)) {
      const std::size_t start = pos_;
      ++pos_;
      while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
      return Formula::atom(std::string(text_.substr(start, pos_ - start)));
    }
    throw ParseError("expected an atom or '('", pos_);
  }

  static bool is_name_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }
  static bool is_name_char(char c) {
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '_';
  }

  void skip_spaces() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(text).run(); }

}  // namespace atomkg::logic
