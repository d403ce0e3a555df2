#pragma once

#include <string>
#include <vector>

#include "flowgran/flowgraph.hpp"

namespace flowgran {

// Ordered node triple (a, b, c) backed by edges a->b and b->c.
struct Triple {
  std::string a, b, c;
  bool operator==(const Triple&) const = default;
};

// One adjacent-triplet sub-diagram rebuilt as a standalone top-down chain,
// together with its canonical code and templated caption. The degenerate
// fallback for diagrams without a length-2 path holds 2 nodes and 1 edge.
struct Granule {
  std::string id;
  std::string parent_id;
  std::vector<std::string> node_ids;  // (a, b, c) or (a, b)
  FlowGraph graph;                    // direction TD
  std::string code;                   // == serialize_mermaid(graph)
  std::string caption;                // one sentence per edge, edge order
};

// Every ordered triple (a,b,c) with edges a->b and b->c and a != c,
// deduplicated, in edge-order lexicographic order (index of a->b, then of
// b->c).
std::vector<Triple> extract_triplets(const FlowGraph& g);

// Rebuilds one triple as a TD chain regardless of the parent's direction.
Granule build_granule(const FlowGraph& g, const Triple& triple, const std::string& parent_id);

// Full decomposition of one diagram. When no length-2 directed path exists
// and `fallback` is set, emits one 2-node granule per edge instead; with
// fallback disabled (or an edgeless graph) throws EmptyResult.
std::vector<Granule> granulate(const FlowGraph& g, const std::string& parent_id, bool fallback = true);

// The caption template applied to one edge.
std::string caption_sentence(const std::string& src_label, const std::string& dst_label);

// Caption for a whole granule graph: one sentence per edge, edge order.
std::string caption_for(const FlowGraph& g);

}  // namespace flowgran
