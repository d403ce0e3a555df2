#include "flowgran/flowgraph.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

namespace flowgran {

std::string to_string(Direction d) {
  switch (d) {
    case Direction::TD: return "TD";
    case Direction::BT: return "BT";
    case Direction::LR: return "LR";
    case Direction::RL: return "RL";
  }
  return "TD";
}

std::string to_string(NodeShape s) {
  switch (s) {
    case NodeShape::Rectangle: return "rectangle";
    case NodeShape::Rounded: return "rounded";
    case NodeShape::Diamond: return "diamond";
  }
  return "rectangle";
}

const FlowNode* FlowGraph::find_node(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

int FlowGraph::node_index(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

bool valid_label(std::string_view label) {
  if (trim(label).empty()) return false;
  return label.find_first_of("[](){}|\n") == std::string_view::npos;
}

struct NodeRef {
  std::string id;
  bool declared = false;  // true when the reference carries [..] (..) {..}
  std::string label;
  NodeShape shape = NodeShape::Rectangle;
};

char closer_for(char open) {
  switch (open) {
    case '[': return ']';
    case '(': return ')';
    case '{': return '}';
  }
  return '\0';
}

NodeShape shape_for(char open) {
  switch (open) {
    case '(': return NodeShape::Rounded;
    case '{': return NodeShape::Diamond;
  }
  return NodeShape::Rectangle;
}

// Parses "ID", "ID[Label]", "ID(Label)" or "ID{Label}"; the whole string
// must be consumed.
NodeRef parse_node_ref(std::string_view text, int line) {
  text = trim(text);
  if (text.empty()) throw SyntaxError(line, "missing node reference");
  std::size_t i = 0;
  while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
  NodeRef ref;
  ref.id = std::string(text.substr(0, i));
  if (!valid_id(ref.id)) throw SyntaxError(line, "invalid node id in '" + std::string(text) + "'");
  if (i == text.size()) return ref;

  const char open = text[i];
  const char close = closer_for(open);
  if (close == '\0') throw SyntaxError(line, std::string("unexpected character '") + text[i] + "'");
  if (text.back() != close) throw SyntaxError(line, "unterminated node label");
  std::string_view label = text.substr(i + 1, text.size() - i - 2);
  if (!valid_label(label)) throw SyntaxError(line, "invalid node label");
  ref.declared = true;
  ref.label = std::string(trim(label));
  ref.shape = shape_for(open);
  return ref;
}

Direction parse_direction(std::string_view word, int line) {
  if (word == "TD" || word == "TB") return Direction::TD;
  if (word == "BT") return Direction::BT;
  if (word == "LR") return Direction::LR;
  if (word == "RL") return Direction::RL;
  throw SyntaxError(line, "unknown flow direction '" + std::string(word) + "'");
}

class GraphBuilder {
 public:
  void ensure_node(const std::string& id) {
    if (g_.find_node(id) != nullptr) return;
    g_.nodes.push_back(FlowNode{id, id, NodeShape::Rectangle});
    implicit_.insert(id);
  }

  void declare_node(const NodeRef& ref, int line) {
    (void)line;
    const int idx = g_.node_index(ref.id);
    if (idx < 0) {
      g_.nodes.push_back(FlowNode{ref.id, ref.label, ref.shape});
      return;
    }
    // A single explicit declaration may upgrade an implicit node created by
    // an earlier bare reference; a second explicit declaration is an error.
    if (implicit_.erase(ref.id) == 0) throw DuplicateNodeId(ref.id);
    g_.nodes[static_cast<std::size_t>(idx)].label = ref.label;
    g_.nodes[static_cast<std::size_t>(idx)].shape = ref.shape;
  }

  void add_node_ref(const NodeRef& ref, int line) {
    if (ref.declared) {
      declare_node(ref, line);
    } else {
      ensure_node(ref.id);
    }
  }

  void add_edge(const std::string& src, const std::string& dst, const std::string& label, int line) {
    if (src == dst) throw SyntaxError(line, "self-loop on node '" + src + "'");
    if (!edge_keys_.insert(std::tie(src, dst, label)).second) {
      throw SyntaxError(line, "duplicate edge " + src + " --> " + dst);
    }
    g_.edges.push_back(FlowEdge{src, dst, label});
  }

  FlowGraph take() { return std::move(g_); }

 private:
  FlowGraph g_;
  std::set<std::string> implicit_;
  std::set<std::tuple<std::string, std::string, std::string>> edge_keys_;
};

}  // namespace

FlowGraph parse_mermaid(std::string_view text) {
  GraphBuilder builder;
  bool header_seen = false;
  Direction direction = Direction::TD;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string_view line = trim(raw);
    if (line.empty() || line.substr(0, 2) == "%%") continue;

    if (!header_seen) {
      std::size_t sp = line.find_first_of(" \t");
      std::string_view directive = sp == std::string_view::npos ? line : line.substr(0, sp);
      if (directive != "graph" && directive != "flowchart") {
        throw UnsupportedDirective(std::string(directive));
      }
      if (sp == std::string_view::npos) throw SyntaxError(line_no, "missing flow direction");
      direction = parse_direction(trim(line.substr(sp)), line_no);
      header_seen = true;
      continue;
    }

    const std::size_t arrow = line.find("-->");
    if (arrow == std::string_view::npos) {
      // Standalone node declaration.
      NodeRef ref = parse_node_ref(line, line_no);
      if (!ref.declared) throw SyntaxError(line_no, "bare node id outside an edge");
      builder.declare_node(ref, line_no);
      continue;
    }

    std::string_view lhs = line.substr(0, arrow);
    std::string_view rest = trim(line.substr(arrow + 3));
    std::string edge_label;
    if (!rest.empty() && rest.front() == '|') {
      const std::size_t close = rest.find('|', 1);
      if (close == std::string_view::npos) throw SyntaxError(line_no, "unterminated edge label");
      std::string_view label = rest.substr(1, close - 1);
      if (!valid_label(label)) throw SyntaxError(line_no, "invalid edge label");
      edge_label = std::string(trim(label));
      rest = rest.substr(close + 1);
    }

    NodeRef src = parse_node_ref(lhs, line_no);
    NodeRef dst = parse_node_ref(rest, line_no);
    builder.add_node_ref(src, line_no);
    builder.add_node_ref(dst, line_no);
    builder.add_edge(src.id, dst.id, edge_label, line_no);
  }

  if (!header_seen) throw SyntaxError(1, "missing graph header");

  FlowGraph g = builder.take();
  g.direction = direction;
  g.validate();
  return g;
}

void FlowGraph::validate() const {
  std::set<std::string_view> ids;
  for (const auto& n : nodes) {
    if (!valid_id(n.id)) throw SyntaxError(0, "invalid node id '" + n.id + "'");
    if (trim(n.label).empty()) throw SyntaxError(0, "empty label on node '" + n.id + "'");
    if (!ids.insert(n.id).second) throw DuplicateNodeId(n.id);
  }
  std::set<std::tuple<std::string_view, std::string_view, std::string_view>> edge_keys;
  for (const auto& e : edges) {
    if (!ids.contains(e.src)) throw DanglingEdgeRef(e.src);
    if (!ids.contains(e.dst)) throw DanglingEdgeRef(e.dst);
    if (e.src == e.dst) throw SyntaxError(0, "self-loop on node '" + e.src + "'");
    if (!edge_keys.insert(std::tie(e.src, e.dst, e.label)).second) {
      throw SyntaxError(0, "duplicate edge " + e.src + " --> " + e.dst);
    }
  }
}

std::string serialize_mermaid(const FlowGraph& g) {
  std::ostringstream out;
  out << "graph " << to_string(g.direction);
  for (const auto& n : g.nodes) {
    out << '\n' << n.id;
    switch (n.shape) {
      case NodeShape::Rectangle: out << '[' << n.label << ']'; break;
      case NodeShape::Rounded: out << '(' << n.label << ')'; break;
      case NodeShape::Diamond: out << '{' << n.label << '}'; break;
    }
  }
  for (const auto& e : g.edges) {
    out << '\n' << e.src << " -->";
    if (!e.label.empty()) out << '|' << e.label << '|';
    out << ' ' << e.dst;
  }
  return out.str();
}

}  // namespace flowgran
