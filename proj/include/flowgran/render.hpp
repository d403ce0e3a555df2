#pragma once

#include <string>
#include <vector>

#include "flowgran/flowgraph.hpp"

namespace flowgran {

// All dimensions are integer pixels; every emitted coordinate is an integer
// so output is byte-identical across platforms.
struct LayoutConfig {
  int node_width = 160;
  int node_height = 48;
  int v_spacing = 64;
  int font_size = 14;
  int margin = 24;
  int arrowhead_size = 8;
};

struct PlacedNode {
  FlowNode node;
  int x = 0, y = 0;  // top-left corner
  int w = 0, h = 0;
};

struct EdgePath {
  std::vector<std::pair<int, int>> points;  // last point is the dst attach side
  std::string label;
};

struct Scene {
  std::vector<PlacedNode> nodes;  // graph node order
  std::vector<EdgePath> edges;    // graph edge order
  int width = 0, height = 0;
};

struct SvgDocument {
  std::string text;
  int width = 0, height = 0;

  bool operator==(const SvgDocument&) const = default;
};

// Vertical-stack layout for granule-sized graphs (<= 3 nodes). TD stacks
// nodes top to bottom in declaration order, BT bottom to top; LR/RL and
// larger graphs are rejected with UnsupportedGraph.
Scene layout(const FlowGraph& g, const LayoutConfig& cfg);

// Stable element order: node shapes and labels in graph order, then edges.
// The arrowhead marker always sits at the dst end of the path.
SvgDocument emit_svg(const Scene& scene, const LayoutConfig& cfg);

SvgDocument render_svg(const FlowGraph& g, const LayoutConfig& cfg);

}  // namespace flowgran
