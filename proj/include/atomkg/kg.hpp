#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "atomkg/extract.hpp"

namespace atomkg {

struct GraphEdge {
  std::string subject;
  std::string relation;
  std::string object;
  bool derived = false;
  // Asserted edges: merged provenance of the triplets that asserted them.
  std::vector<Provenance> provenance;
  // Derived edges: the asserted path that supports them, in order, as
  // (subject, relation, object) rows.
  std::vector<std::array<std::string, 3>> trail;
};

// Nodes sorted and unique; edges sorted by (subject, relation, object)
// with no duplicate keys. Every edge endpoint is a member of nodes.
struct KnowledgeGraph {
  std::vector<std::string> nodes;
  std::vector<GraphEdge> edges;
};

// Aggregates triplets into a graph: node identity is the normalized
// (case-sensitive) entity surface form; duplicate (s, r, o) triplets merge
// into one edge with canonically sorted provenance. Permutation-invariant
// over the input list.
KnowledgeGraph build_graph(const std::vector<Triplet>& triplets);

// Square boolean matrix in 64-bit row blocks, for reachability kernels.
class BitMatrix {
 public:
  explicit BitMatrix(std::size_t size)
      : size_(size),
        stride_(size == 0 ? 0 : (size + 63) / 64),
        bits_(size_ * stride_, 0) {}

  std::size_t size() const { return size_; }
  std::size_t stride() const { return stride_; }

  bool test(std::size_t i, std::size_t j) const {
    return (bits_[i * stride_ + j / 64] >> (j % 64)) & 1u;
  }
  void set(std::size_t i, std::size_t j) {
    bits_[i * stride_ + j / 64] |= std::uint64_t{1} << (j % 64);
  }

  std::uint64_t* row(std::size_t i) { return bits_.data() + i * stride_; }
  const std::uint64_t* row(std::size_t i) const {
    return bits_.data() + i * stride_;
  }

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t size_;
  std::size_t stride_;
  std::vector<std::uint64_t> bits_;
};

// Transitive closure (paths of length >= 1) of an adjacency matrix.
// The serial form is the reference; the parallel form splits the row
// updates of each elimination step across threads and must return
// bit-identical results.
BitMatrix reach_serial(const BitMatrix& adjacency);
BitMatrix reach_parallel(const BitMatrix& adjacency);

// Node count at which infer_transitive switches to the parallel kernel.
inline constexpr std::size_t kParallelNodeThreshold = 128;

// Adds derived = true edges for every pair connected through a chain of
// asserted edges sharing one relation from the given set. Derived edges
// never duplicate asserted ones; self-loops are never derived (asserted
// self-loops are kept). Existing derived edges are recomputed from the
// asserted subgraph, making the operation idempotent.
KnowledgeGraph infer_transitive(
    const KnowledgeGraph& graph,
    const std::set<std::string>& transitive_relations);

enum class GraphFormat { Dot, Json };

// Renders the graph deterministically: sorted node lines, then sorted edge
// lines; derived edges are dashed in Dot output. An empty graph renders as
// the "digraph G { }" skeleton.
std::string to_dot(const KnowledgeGraph& graph);
std::string to_json_text(const KnowledgeGraph& graph);
std::string export_graph(const KnowledgeGraph& graph, GraphFormat format);

void write_graph_json(const std::string& path, const KnowledgeGraph& graph);
void write_graph_dot(const std::string& path, const KnowledgeGraph& graph);

}  // namespace atomkg
