#include <doctest.h>

#include <fstream>
#include <sstream>

#include "flowgran/render.hpp"
#include "testsupport.hpp"

using namespace flowgran;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

int node_y(const Scene& scene, const std::string& id) {
  for (const auto& p : scene.nodes) {
    if (p.node.id == id) return p.y;
  }
  FAIL("node not placed: " << id);
  return -1;
}

}  // namespace

TEST_CASE("TD chain stacks top to bottom, BT bottom to top") {
  const Granule granule = test::chain_granule();
  const LayoutConfig cfg;

  Scene td = layout(granule.graph, cfg);
  CHECK(node_y(td, "A") < node_y(td, "B"));
  CHECK(node_y(td, "B") < node_y(td, "C"));

  FlowGraph flipped = granule.graph;
  flipped.direction = Direction::BT;
  Scene bt = layout(flipped, cfg);
  CHECK(node_y(bt, "A") > node_y(bt, "B"));
  CHECK(node_y(bt, "B") > node_y(bt, "C"));
}

TEST_CASE("layout is deterministic") {
  const Granule granule = test::chain_granule();
  const LayoutConfig cfg;
  CHECK(render_svg(granule.graph, cfg) == render_svg(granule.graph, cfg));
}

TEST_CASE("element counts for a 3-node granule") {
  const SvgDocument doc = render_svg(test::chain_granule().graph, {});
  CHECK(count_of(doc.text, "<rect ") == 3);
  CHECK(count_of(doc.text, "<polyline ") == 2);
  CHECK(count_of(doc.text, "marker-end") == 2);
}

TEST_CASE("diamond node renders as polygon") {
  FlowGraph g = parse_mermaid("graph TD\nX{Check?} --> Y[End]");
  const SvgDocument doc = render_svg(g, {});
  CHECK(count_of(doc.text, "<polygon ") == 1);
  CHECK(count_of(doc.text, "<rect ") == 1);
  CHECK(doc.text.find("Check?") != std::string::npos);
}

TEST_CASE("reversed edge moves the arrowhead to the other node") {
  const Granule granule = test::chain_granule();
  const LayoutConfig cfg;
  const Scene fwd = layout(granule.graph, cfg);

  FlowGraph rev = granule.graph;
  std::swap(rev.edges[0].src, rev.edges[0].dst);
  const Scene back = layout(rev, cfg);

  // The path endpoint (arrowhead side) swaps ends.
  CHECK(fwd.edges[0].points.back() == back.edges[0].points.front());
  CHECK(fwd.edges[0].points.front() == back.edges[0].points.back());
}

TEST_CASE("oversized graphs and horizontal directions are rejected") {
  const FlowGraph big = parse_mermaid("graph TD\nA --> B\nB --> C\nC --> D");
  CHECK_THROWS_AS(layout(big, {}), UnsupportedGraph);
  const FlowGraph lr = parse_mermaid("graph LR\nA --> B");
  CHECK_THROWS_AS(layout(lr, {}), UnsupportedGraph);
}

TEST_CASE("long labels truncate with an ellipsis") {
  FlowGraph g;
  g.nodes = {{"A", "ThisLabelIsDefinitelyTooLongForTheBox", NodeShape::Rectangle}};
  const SvgDocument doc = render_svg(g, {});
  CHECK(doc.text.find("\xE2\x80\xA6") != std::string::npos);
  CHECK(doc.text.find("TooLongForTheBox") == std::string::npos);
}

TEST_CASE("golden file for a fixed granule and config") {
  const SvgDocument doc = render_svg(test::chain_granule().graph, {});
  std::ifstream in(std::string(FLOWGRAN_GOLDEN_DIR) + "/granule_basic.svg", std::ios::binary);
  REQUIRE(in.good());
  std::stringstream golden;
  golden << in.rdbuf();
  CHECK(doc.text == golden.str());
}
