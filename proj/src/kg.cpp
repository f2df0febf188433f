#include "atomkg/kg.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "atomkg/jsonl.hpp"
#include "atomkg/text.hpp"

namespace atomkg {

namespace {

bool edge_key_less(const GraphEdge& a, const GraphEdge& b) {
  return std::tie(a.subject, a.relation, a.object) <
         std::tie(b.subject, b.relation, b.object);
}

bool provenance_less(const Provenance& a, const Provenance& b) {
  return std::tie(a.source_id, a.origin, a.proposition) <
         std::tie(b.source_id, b.origin, b.proposition);
}

}  // namespace

KnowledgeGraph build_graph(const std::vector<Triplet>& triplets) {
  KnowledgeGraph graph;

  std::set<std::string> nodes;
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<Provenance>>
      edges;
  for (const Triplet& triplet : triplets) {
    const std::string subject = normalize_text(triplet.subject);
    const std::string relation = normalize_text(triplet.relation);
    const std::string object = normalize_text(triplet.object);
    nodes.insert(subject);
    nodes.insert(object);
    std::vector<Provenance>& merged =
        edges[std::make_tuple(subject, relation, object)];
    for (const Provenance& record : triplet.provenance) {
      if (std::find(merged.begin(), merged.end(), record) == merged.end()) {
        merged.push_back(record);
      }
    }
  }

  graph.nodes.assign(nodes.begin(), nodes.end());
  for (auto& [key, provenance] : edges) {
    GraphEdge edge;
    edge.subject = std::get<0>(key);
    edge.relation = std::get<1>(key);
    edge.object = std::get<2>(key);
    // Canonical provenance order makes the graph independent of the order
    // the triplets arrived in.
    std::sort(provenance.begin(), provenance.end(), provenance_less);
    edge.provenance = std::move(provenance);
    graph.edges.push_back(std::move(edge));
  }
  return graph;  // map iteration already yields sorted edge keys
}

BitMatrix reach_serial(const BitMatrix& adjacency) {
  BitMatrix closure = adjacency;
  const std::size_t n = closure.size();
  const std::size_t stride = closure.stride();
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t* pivot = closure.row(k);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || !closure.test(i, k)) continue;  // OR with itself: no-op
      std::uint64_t* row = closure.row(i);
      for (std::size_t b = 0; b < stride; ++b) row[b] |= pivot[b];
    }
  }
  return closure;
}

BitMatrix reach_parallel(const BitMatrix& adjacency) {
  BitMatrix closure = adjacency;
  const std::size_t n = closure.size();
  const std::size_t stride = closure.stride();
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t* pivot = closure.row(k);
    // Each row is updated by exactly one iteration and the pivot row is
    // skipped, so rows never race; the elimination order (and therefore
    // the result) is identical to the serial kernel.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || !closure.test(i, k)) continue;
      std::uint64_t* row = closure.row(i);
      for (std::size_t b = 0; b < stride; ++b) row[b] |= pivot[b];
    }
  }
  return closure;
}

namespace {

// Shortest asserted path from source to target over the relation subgraph,
// as (subject, relation, object) rows. BFS in ascending node order makes
// the choice deterministic.
std::vector<std::array<std::string, 3>> bfs_trail(
    const std::vector<std::vector<std::size_t>>& next,
    const std::vector<std::string>& nodes, const std::string& relation,
    std::size_t source, std::size_t target) {
  std::vector<std::size_t> parent(nodes.size(), nodes.size());
  std::deque<std::size_t> queue{source};
  std::vector<char> seen(nodes.size(), 0);
  seen[source] = 1;
  while (!queue.empty()) {
    const std::size_t at = queue.front();
    queue.pop_front();
    for (const std::size_t to : next[at]) {
      if (seen[to]) continue;
      seen[to] = 1;
      parent[to] = at;
      if (to == target) {
        queue.clear();
        break;
      }
      queue.push_back(to);
    }
  }

  std::vector<std::size_t> path{target};
  while (path.back() != source) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());

  std::vector<std::array<std::string, 3>> trail;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    trail.push_back({nodes[path[i]], relation, nodes[path[i + 1]]});
  }
  return trail;
}

}  // namespace

KnowledgeGraph infer_transitive(
    const KnowledgeGraph& graph,
    const std::set<std::string>& transitive_relations) {
  KnowledgeGraph out;
  out.nodes = graph.nodes;
  // Derivations are recomputed from scratch over the asserted subgraph, so
  // running the inference twice changes nothing.
  for (const GraphEdge& edge : graph.edges) {
    if (!edge.derived) out.edges.push_back(edge);
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    index.emplace(out.nodes[i], i);
  }
  const std::size_t n = out.nodes.size();

  std::vector<GraphEdge> derived;
  for (const std::string& relation : transitive_relations) {
    BitMatrix adjacency(n);
    std::vector<std::vector<std::size_t>> next(n);
    bool any = false;
    for (const GraphEdge& edge : out.edges) {
      if (edge.relation != relation) continue;
      const std::size_t s = index.at(edge.subject);
      const std::size_t o = index.at(edge.object);
      adjacency.set(s, o);
      next[s].push_back(o);
      any = true;
    }
    if (!any) continue;
    for (std::vector<std::size_t>& row : next) {
      std::sort(row.begin(), row.end());
    }

#ifdef _OPENMP
    const bool parallel =
        n >= kParallelNodeThreshold && omp_get_max_threads() > 1;
#else
    const bool parallel = false;
#endif
    const BitMatrix closure =
        parallel ? reach_parallel(adjacency) : reach_serial(adjacency);

    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = 0; t < n; ++t) {
        if (s == t || !closure.test(s, t) || adjacency.test(s, t)) continue;
        GraphEdge edge;
        edge.subject = out.nodes[s];
        edge.relation = relation;
        edge.object = out.nodes[t];
        edge.derived = true;
        edge.trail = bfs_trail(next, out.nodes, relation, s, t);
        derived.push_back(std::move(edge));
      }
    }
  }

  out.edges.insert(out.edges.end(),
                   std::make_move_iterator(derived.begin()),
                   std::make_move_iterator(derived.end()));
  std::sort(out.edges.begin(), out.edges.end(), edge_key_less);
  return out;
}

namespace {

std::string quote_dot(const std::string& text) {
  std::string quoted = "\"";
  for (const char c : text) {
    if (c == '\\' || c == '"') quoted.push_back('\\');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

}  // namespace

std::string to_dot(const KnowledgeGraph& graph) {
  if (graph.nodes.empty() && graph.edges.empty()) {
    return "digraph G { }\n";
  }
  std::string out = "digraph G {\n";
  for (const std::string& node : graph.nodes) {
    out += "  " + quote_dot(node) + ";\n";
  }
  for (const GraphEdge& edge : graph.edges) {
    out += "  " + quote_dot(edge.subject) + " -> " + quote_dot(edge.object) +
           " [label=" + quote_dot(edge.relation);
    if (edge.derived) out += ", style=dashed";
    out += "];\n";
  }
  out += "}\n";
  return out;
}

std::string to_json_text(const KnowledgeGraph& graph) {
  nlohmann::ordered_json doc;
  doc["nodes"] = graph.nodes;
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const GraphEdge& edge : graph.edges) {
    nlohmann::ordered_json row;
    row["s"] = edge.subject;
    row["r"] = edge.relation;
    row["o"] = edge.object;
    row["derived"] = edge.derived;
    nlohmann::ordered_json provenance = nlohmann::ordered_json::array();
    for (const Provenance& record : edge.provenance) {
      nlohmann::ordered_json entry;
      entry["source_id"] = record.source_id;
      entry["origin"] = origin_name(record.origin);
      entry["proposition"] = record.proposition;
      provenance.push_back(std::move(entry));
    }
    row["provenance"] = std::move(provenance);
    if (edge.derived) row["trail"] = edge.trail;
    edges.push_back(std::move(row));
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

std::string export_graph(const KnowledgeGraph& graph, GraphFormat format) {
  return format == GraphFormat::Dot ? to_dot(graph) : to_json_text(graph);
}

void write_graph_json(const std::string& path, const KnowledgeGraph& graph) {
  write_text_file(path, to_json_text(graph));
}

void write_graph_dot(const std::string& path, const KnowledgeGraph& graph) {
  write_text_file(path, to_dot(graph));
}

}  // namespace atomkg
