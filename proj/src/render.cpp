#include "flowgran/render.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace flowgran {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Single-line truncation with ellipsis; the width model is a fixed 3/5
// advance per character, which is conservative for sans-serif.
std::string fit_label(const std::string& label, const LayoutConfig& cfg) {
  const int char_w = cfg.font_size * 3 / 5;
  const std::size_t max_chars =
      static_cast<std::size_t>(std::max(1, (cfg.node_width - 12) / std::max(1, char_w)));
  if (label.size() <= max_chars) return label;
  return label.substr(0, max_chars - 1) + "\xE2\x80\xA6";
}

}  // namespace

Scene layout(const FlowGraph& g, const LayoutConfig& cfg) {
  g.validate();
  if (cfg.node_width <= 0 || cfg.node_height <= 0 || cfg.v_spacing <= 0 || cfg.font_size <= 0 ||
      cfg.margin <= 0 || cfg.arrowhead_size <= 0) {
    throw Error("layout config dimensions must be strictly positive");
  }
  if (g.nodes.size() > 3) {
    throw UnsupportedGraph("more than 3 nodes (" + std::to_string(g.nodes.size()) + ")");
  }
  if (g.direction == Direction::LR || g.direction == Direction::RL) {
    throw UnsupportedGraph("horizontal flow direction " + to_string(g.direction));
  }

  const int n = static_cast<int>(g.nodes.size());
  // Visual row per node: declaration order for TD, reversed for BT.
  std::vector<int> row(g.nodes.size());
  for (int i = 0; i < n; ++i) {
    row[static_cast<std::size_t>(i)] = g.direction == Direction::TD ? i : n - 1 - i;
  }

  Scene scene;
  const int x = cfg.margin;
  for (int i = 0; i < n; ++i) {
    PlacedNode p;
    p.node = g.nodes[static_cast<std::size_t>(i)];
    p.node.label = fit_label(p.node.label, cfg);
    p.x = x;
    p.y = cfg.margin + row[static_cast<std::size_t>(i)] * (cfg.node_height + cfg.v_spacing);
    p.w = cfg.node_width;
    p.h = cfg.node_height;
    scene.nodes.push_back(p);
  }

  const int cx = x + cfg.node_width / 2;
  bool side_route = false;
  for (const auto& e : g.edges) {
    const auto& src = scene.nodes[static_cast<std::size_t>(g.node_index(e.src))];
    const auto& dst = scene.nodes[static_cast<std::size_t>(g.node_index(e.dst))];
    const int src_row = (src.y - cfg.margin) / (cfg.node_height + cfg.v_spacing);
    const int dst_row = (dst.y - cfg.margin) / (cfg.node_height + cfg.v_spacing);
    EdgePath path;
    path.label = e.label;
    if (std::abs(src_row - dst_row) == 1) {
      if (src_row < dst_row) {
        path.points = {{cx, src.y + src.h}, {cx, dst.y}};
      } else {
        path.points = {{cx, src.y}, {cx, dst.y + dst.h}};
      }
    } else {
      // Rows two apart: route around the middle node on the right side.
      side_route = true;
      const int side_x = x + cfg.node_width + cfg.v_spacing;
      const int sy = src.y + src.h / 2;
      const int dy = dst.y + dst.h / 2;
      path.points = {{src.x + src.w, sy}, {side_x, sy}, {side_x, dy}, {dst.x + dst.w, dy}};
    }
    scene.edges.push_back(path);
  }

  scene.width = 2 * cfg.margin + cfg.node_width + (side_route ? cfg.v_spacing + cfg.margin : 0);
  scene.height = n == 0 ? 2 * cfg.margin
                        : 2 * cfg.margin + n * cfg.node_height + (n - 1) * cfg.v_spacing;
  return scene;
}

SvgDocument emit_svg(const Scene& scene, const LayoutConfig& cfg) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << scene.width << "\" height=\""
      << scene.height << "\" viewBox=\"0 0 " << scene.width << " " << scene.height
      << "\" font-family=\"sans-serif\">\n";
  out << "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\""
      << cfg.arrowhead_size << "\" markerHeight=\"" << cfg.arrowhead_size
      << "\" orient=\"auto\"><path d=\"M 0 0 L 10 5 L 0 10 z\"/></marker></defs>\n";

  for (const auto& p : scene.nodes) {
    const int cx = p.x + p.w / 2;
    const int cy = p.y + p.h / 2;
    switch (p.node.shape) {
      case NodeShape::Rectangle:
        out << "<rect x=\"" << p.x << "\" y=\"" << p.y << "\" width=\"" << p.w << "\" height=\""
            << p.h << "\" fill=\"white\" stroke=\"black\"/>\n";
        break;
      case NodeShape::Rounded:
        out << "<rect x=\"" << p.x << "\" y=\"" << p.y << "\" width=\"" << p.w << "\" height=\""
            << p.h << "\" rx=\"" << p.h / 4 << "\" fill=\"white\" stroke=\"black\"/>\n";
        break;
      case NodeShape::Diamond:
        out << "<polygon points=\"" << cx << "," << p.y << " " << p.x + p.w << "," << cy << " "
            << cx << "," << p.y + p.h << " " << p.x << "," << cy
            << "\" fill=\"white\" stroke=\"black\"/>\n";
        break;
    }
    out << "<text x=\"" << cx << "\" y=\"" << cy + cfg.font_size * 2 / 5
        << "\" text-anchor=\"middle\" font-size=\"" << cfg.font_size << "\">"
        << xml_escape(p.node.label) << "</text>\n";
  }

  for (const auto& e : scene.edges) {
    out << "<polyline points=\"";
    for (std::size_t i = 0; i < e.points.size(); ++i) {
      if (i) out << ' ';
      out << e.points[i].first << ',' << e.points[i].second;
    }
    out << "\" fill=\"none\" stroke=\"black\" marker-end=\"url(#arrow)\"/>\n";
    if (!e.label.empty()) {
      const auto& a = e.points.front();
      const auto& b = e.points.back();
      out << "<text x=\"" << (a.first + b.first) / 2 + 4 << "\" y=\"" << (a.second + b.second) / 2
          << "\" font-size=\"" << cfg.font_size << "\">" << xml_escape(e.label) << "</text>\n";
    }
  }
  out << "</svg>\n";

  SvgDocument doc;
  doc.text = out.str();
  doc.width = scene.width;
  doc.height = scene.height;
  return doc;
}

SvgDocument render_svg(const FlowGraph& g, const LayoutConfig& cfg) {
  return emit_svg(layout(g, cfg), cfg);
}

}  // namespace flowgran
