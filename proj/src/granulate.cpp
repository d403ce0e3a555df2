#include "flowgran/granulate.hpp"

#include <set>
#include <tuple>

namespace flowgran {

std::vector<Triple> extract_triplets(const FlowGraph& g) {
  g.validate();
  std::vector<Triple> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& e1 : g.edges) {
    for (const auto& e2 : g.edges) {
      if (e1.dst != e2.src) continue;
      if (e1.src == e2.dst) continue;  // (a,b,a) is not a triplet
      if (seen.insert(std::make_tuple(e1.src, e1.dst, e2.dst)).second) {
        out.push_back(Triple{e1.src, e1.dst, e2.dst});
      }
    }
  }
  return out;
}

std::string caption_sentence(const std::string& src_label, const std::string& dst_label) {
  return "An arrow points from node " + src_label + " to node " + dst_label + ".";
}

std::string caption_for(const FlowGraph& g) {
  std::string caption;
  for (const auto& e : g.edges) {
    if (!caption.empty()) caption += ' ';
    caption += caption_sentence(g.find_node(e.src)->label, g.find_node(e.dst)->label);
  }
  return caption;
}

namespace {

Granule make_granule(const FlowGraph& parent, const std::vector<std::string>& ids,
                     const std::string& parent_id) {
  Granule granule;
  granule.parent_id = parent_id;
  granule.node_ids = ids;
  granule.graph.direction = Direction::TD;
  for (const auto& id : ids) {
    granule.graph.nodes.push_back(*parent.find_node(id));
  }
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    granule.graph.edges.push_back(FlowEdge{ids[i], ids[i + 1], ""});
  }
  granule.graph.validate();
  granule.code = serialize_mermaid(granule.graph);
  granule.caption = caption_for(granule.graph);
  granule.id = parent_id;
  for (const auto& id : ids) granule.id += "_" + id;
  return granule;
}

}  // namespace

Granule build_granule(const FlowGraph& g, const Triple& triple, const std::string& parent_id) {
  return make_granule(g, {triple.a, triple.b, triple.c}, parent_id);
}

std::vector<Granule> granulate(const FlowGraph& g, const std::string& parent_id, bool fallback) {
  std::vector<Granule> out;
  for (const auto& triple : extract_triplets(g)) {
    out.push_back(build_granule(g, triple, parent_id));
  }
  if (out.empty()) {
    if (!fallback || g.edges.empty()) {
      throw EmptyResult("no length-2 directed path in diagram '" + parent_id + "'");
    }
    for (const auto& e : g.edges) {
      out.push_back(make_granule(g, {e.src, e.dst}, parent_id));
    }
  }
  // Index-based ids keep filenames unique even when node-id tuples repeat.
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].id = parent_id + "_g" + std::to_string(i);
  }
  return out;
}

}  // namespace flowgran
