#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "flowgran/errors.hpp"

namespace flowgran {

// Flow directions of the DSL header. TB is normalized to TD at parse time.
enum class Direction { TD, BT, LR, RL };

enum class NodeShape { Rectangle, Rounded, Diamond };

std::string to_string(Direction d);
std::string to_string(NodeShape s);

struct FlowNode {
  std::string id;     // nonempty, no whitespace, unique within the graph
  std::string label;  // nonempty after trimming
  NodeShape shape = NodeShape::Rectangle;

  bool operator==(const FlowNode&) const = default;
};

struct FlowEdge {
  std::string src;
  std::string dst;
  std::string label;  // empty = unlabeled

  bool operator==(const FlowEdge&) const = default;
};

// Directed labeled graph IR for one flowchart. Node and edge order are
// stable: serialization order equals parse order.
struct FlowGraph {
  Direction direction = Direction::TD;
  std::vector<FlowNode> nodes;
  std::vector<FlowEdge> edges;

  bool operator==(const FlowGraph&) const = default;

  const FlowNode* find_node(std::string_view id) const;
  int node_index(std::string_view id) const;  // -1 when absent

  // Checks every type invariant; throws on the first violation.
  void validate() const;
};

// Parses the supported Mermaid flowchart subset:
//   header:  graph|flowchart TD|TB|BT|LR|RL
//   nodes:   ID[Label]  ID(Label)  ID{Label}
//   edges:   A --> B    A -->|label| B   (endpoints may declare inline)
//   %% line comments
// Bare ids on edges implicitly declare a node whose label is the id.
// Unknown statements raise SyntaxError with the offending line number.
FlowGraph parse_mermaid(std::string_view text);

// Canonical form: header line, one node declaration per line in node order,
// one edge per line in edge order. parse_mermaid(serialize_mermaid(g)) == g.
std::string serialize_mermaid(const FlowGraph& g);

}  // namespace flowgran
