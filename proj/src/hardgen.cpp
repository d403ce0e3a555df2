#include "flowgran/hardgen.hpp"

#include <algorithm>

#include "flowgran/rng.hpp"

namespace flowgran {

std::string describe(const EditOp& op) {
  switch (op.kind) {
    case EditOp::Kind::FlipFlow: return "flip_flow";
    case EditOp::Kind::SwapNodeLabels:
      return "swap_node_labels(" + std::to_string(op.i) + "," + std::to_string(op.j) + ")";
    case EditOp::Kind::ReverseEdge: return "reverse_edge(" + std::to_string(op.i) + ")";
    case EditOp::Kind::RemoveEdge: return "remove_edge(" + std::to_string(op.i) + ")";
    case EditOp::Kind::CaptionSwapLabels:
      return "caption_swap_labels(" + std::to_string(op.i) + "," + std::to_string(op.j) + ")";
    case EditOp::Kind::CodeSwapLabels:
      return "code_swap_labels(" + std::to_string(op.i) + "," + std::to_string(op.j) + ")";
  }
  return "?";
}

bool semantically_equal(const FlowGraph& a, const FlowGraph& b) {
  auto node_labels = [](const FlowGraph& g) {
    std::vector<std::string> v;
    for (const auto& n : g.nodes) v.push_back(n.label);
    std::sort(v.begin(), v.end());
    return v;
  };
  auto edge_triples = [](const FlowGraph& g) {
    std::vector<std::tuple<std::string, std::string, std::string>> v;
    for (const auto& e : g.edges) {
      v.emplace_back(g.find_node(e.src)->label, g.find_node(e.dst)->label, e.label);
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  return node_labels(a) == node_labels(b) && edge_triples(a) == edge_triples(b);
}

namespace {

FlowGraph apply_ops(const FlowGraph& g, const std::vector<EditOp>& ops) {
  FlowGraph out = g;
  std::vector<int> removals;
  for (const auto& op : ops) {
    switch (op.kind) {
      case EditOp::Kind::FlipFlow:
        out.direction = out.direction == Direction::TD ? Direction::BT : Direction::TD;
        break;
      case EditOp::Kind::SwapNodeLabels:
        std::swap(out.nodes[static_cast<std::size_t>(op.i)].label,
                  out.nodes[static_cast<std::size_t>(op.j)].label);
        break;
      case EditOp::Kind::ReverseEdge:
        std::swap(out.edges[static_cast<std::size_t>(op.i)].src,
                  out.edges[static_cast<std::size_t>(op.i)].dst);
        break;
      case EditOp::Kind::RemoveEdge:
        removals.push_back(op.i);  // indices refer to the original edge list
        break;
      case EditOp::Kind::CaptionSwapLabels:
      case EditOp::Kind::CodeSwapLabels:
        std::swap(out.nodes[static_cast<std::size_t>(op.i)].label,
                  out.nodes[static_cast<std::size_t>(op.j)].label);
        break;
    }
  }
  std::sort(removals.rbegin(), removals.rend());
  for (int idx : removals) out.edges.erase(out.edges.begin() + idx);
  return out;
}

// Deterministic candidate enumeration for hard negative images: label swaps,
// single-arrow reversals and arrow-removal subsets, each with and without a
// preceding flow flip.
std::vector<std::vector<EditOp>> negative_image_candidates(const Granule& granule) {
  const int n_nodes = static_cast<int>(granule.graph.nodes.size());
  const int n_edges = static_cast<int>(granule.graph.edges.size());
  std::vector<std::vector<EditOp>> base;
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = i + 1; j < n_nodes; ++j) {
      base.push_back({EditOp{EditOp::Kind::SwapNodeLabels, i, j}});
    }
  }
  for (int e = 0; e < n_edges; ++e) {
    base.push_back({EditOp{EditOp::Kind::ReverseEdge, e}});
  }
  for (int mask = 1; mask < (1 << n_edges); ++mask) {
    std::vector<EditOp> ops;
    for (int e = 0; e < n_edges; ++e) {
      if (mask & (1 << e)) ops.push_back(EditOp{EditOp::Kind::RemoveEdge, e});
    }
    base.push_back(std::move(ops));
  }

  std::vector<std::vector<EditOp>> out;
  for (bool flip : {false, true}) {
    for (const auto& ops : base) {
      std::vector<EditOp> full;
      if (flip) full.push_back(EditOp{EditOp::Kind::FlipFlow});
      full.insert(full.end(), ops.begin(), ops.end());
      out.push_back(std::move(full));
    }
  }
  return out;
}

}  // namespace

std::vector<ImageVariant> gen_hard_positive_images(const Granule& granule, int n,
                                                   std::uint64_t seed, const LayoutConfig& cfg,
                                                   bool render) {
  (void)seed;  // the rule space is a singleton; kept for interface symmetry
  if (granule.graph.direction != Direction::TD) {
    throw Error("hard positive generation expects a TD granule");
  }
  if (n > 1) throw RuleSpaceExhausted(n, 1);
  std::vector<ImageVariant> out;
  if (n <= 0) return out;
  ImageVariant v;
  v.ops = {EditOp{EditOp::Kind::FlipFlow}};
  v.graph = apply_ops(granule.graph, v.ops);
  if (render) v.svg = render_svg(v.graph, cfg);
  out.push_back(std::move(v));
  return out;
}

std::vector<ImageVariant> gen_hard_negative_images(const Granule& granule, int n,
                                                   std::uint64_t seed, const LayoutConfig& cfg,
                                                   bool render) {
  if (granule.graph.edges.empty()) throw Error("granule has no edges to perturb");

  std::vector<ImageVariant> distinct;
  for (const auto& ops : negative_image_candidates(granule)) {
    FlowGraph variant = apply_ops(granule.graph, ops);
    if (semantically_equal(variant, granule.graph)) continue;
    const bool dup = std::any_of(distinct.begin(), distinct.end(), [&](const ImageVariant& v) {
      return semantically_equal(v.graph, variant);
    });
    if (dup) continue;
    ImageVariant v;
    v.graph = std::move(variant);
    v.ops = ops;
    distinct.push_back(std::move(v));
  }

  if (n > static_cast<int>(distinct.size())) {
    throw RuleSpaceExhausted(n, static_cast<int>(distinct.size()));
  }

  std::vector<std::size_t> order(distinct.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  CounterRng rng(combine_key({seed, hash_str(granule.id), 0x4e56ULL}));  // "NV"
  rng.shuffle(order);

  std::vector<ImageVariant> out;
  for (int k = 0; k < n; ++k) {
    ImageVariant v = std::move(distinct[order[static_cast<std::size_t>(k)]]);
    if (render) v.svg = render_svg(v.graph, cfg);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::string> gen_hard_positive_captions(const Granule& granule, int n) {
  if (granule.code.empty()) throw Error("granule has no code");
  if (n > 1) throw RuleSpaceExhausted(n, 1);
  if (n <= 0) return {};
  return {granule.code};
}

std::vector<CaptionVariant> gen_hard_negative_captions(const Granule& granule, int n,
                                                       std::uint64_t seed) {
  const auto& nodes = granule.graph.nodes;
  bool has_distinct = false;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].label != nodes[0].label) has_distinct = true;
  }
  if (!has_distinct) throw DegenerateLabels();

  std::vector<CaptionVariant> distinct;
  auto consider = [&](EditOp op, const std::string& text) {
    if (text == granule.caption || text == granule.code) return;
    for (const auto& v : distinct) {
      if (v.text == text) return;
    }
    distinct.push_back(CaptionVariant{text, {op}});
  };
  const int n_nodes = static_cast<int>(nodes.size());
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = i + 1; j < n_nodes; ++j) {
      const EditOp op{EditOp::Kind::CaptionSwapLabels, i, j};
      consider(op, caption_for(apply_ops(granule.graph, {op})));
    }
  }
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = i + 1; j < n_nodes; ++j) {
      const EditOp op{EditOp::Kind::CodeSwapLabels, i, j};
      consider(op, serialize_mermaid(apply_ops(granule.graph, {op})));
    }
  }

  if (n > static_cast<int>(distinct.size())) {
    throw RuleSpaceExhausted(n, static_cast<int>(distinct.size()));
  }

  std::vector<std::size_t> order(distinct.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  CounterRng rng(combine_key({seed, hash_str(granule.id), 0x544eULL}));  // "TN"
  rng.shuffle(order);

  std::vector<CaptionVariant> out;
  for (int k = 0; k < n; ++k) out.push_back(distinct[order[static_cast<std::size_t>(k)]]);
  return out;
}

HardSampleBundle make_bundle(const Granule& granule, const HardCounts& counts, std::uint64_t seed,
                             const LayoutConfig& cfg, bool render) {
  HardSampleBundle bundle;
  bundle.granule_id = granule.id;
  bundle.seed = seed;
  bundle.hard_pos_images = gen_hard_positive_images(granule, counts.n_vp, seed, cfg, render);
  bundle.hard_neg_images = gen_hard_negative_images(granule, counts.n_vn, seed, cfg, render);
  bundle.hard_pos_captions = gen_hard_positive_captions(granule, counts.n_tp);
  bundle.hard_neg_captions = gen_hard_negative_captions(granule, counts.n_tn, seed);
  return bundle;
}

}  // namespace flowgran
