#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowgran/granulate.hpp"
#include "flowgran/render.hpp"

namespace flowgran {

// One primitive edit applied to a granule. Node-pair ops carry node indices
// (i, j); edge ops carry the edge index in i.
struct EditOp {
  enum class Kind {
    FlipFlow,
    SwapNodeLabels,
    ReverseEdge,
    RemoveEdge,
    CaptionSwapLabels,
    CodeSwapLabels,
  };
  Kind kind;
  int i = -1;
  int j = -1;

  bool operator==(const EditOp&) const = default;
};

std::string describe(const EditOp& op);

// Label-level, direction-insensitive structural equality: two graphs are
// semantically equal when their node label multisets and their
// (src label, dst label, edge label) multisets coincide. This is the oracle
// behind hard-positive/negative soundness.
bool semantically_equal(const FlowGraph& a, const FlowGraph& b);

struct ImageVariant {
  FlowGraph graph;
  SvgDocument svg;  // empty text when rendering was skipped
  std::vector<EditOp> ops;
};

struct CaptionVariant {
  std::string text;
  std::vector<EditOp> ops;
};

struct HardCounts {
  int n_vp = 1;  // hard positive images
  int n_vn = 4;  // hard negative images
  int n_tp = 1;  // hard positive captions
  int n_tn = 3;  // hard negative captions
};

// Per-granule hard variants with full edit provenance. Byte-deterministic
// in (granule, counts, seed).
struct HardSampleBundle {
  std::string granule_id;
  std::uint64_t seed = 0;
  std::vector<ImageVariant> hard_pos_images;
  std::vector<ImageVariant> hard_neg_images;
  std::vector<std::string> hard_pos_captions;
  std::vector<CaptionVariant> hard_neg_captions;
};

// Flow flip TD -> BT; the rule space holds exactly one variant, so n > 1
// raises RuleSpaceExhausted.
std::vector<ImageVariant> gen_hard_positive_images(const Granule& granule, int n,
                                                   std::uint64_t seed,
                                                   const LayoutConfig& cfg = {},
                                                   bool render = true);

// Seeded sample (without replacement) from the deterministic enumeration of
// {label swaps, single-arrow reversals, arrow-removal subsets}, each also
// composed with the flow flip; candidates semantically equal to the
// original or to an earlier candidate are dropped before sampling.
std::vector<ImageVariant> gen_hard_negative_images(const Granule& granule, int n,
                                                   std::uint64_t seed,
                                                   const LayoutConfig& cfg = {},
                                                   bool render = true);

// The diagram code is the single hard positive caption.
std::vector<std::string> gen_hard_positive_captions(const Granule& granule, int n);

// Label swaps applied to the natural-language caption and to the code text;
// every variant differs from both the true caption and the true code.
std::vector<CaptionVariant> gen_hard_negative_captions(const Granule& granule, int n,
                                                       std::uint64_t seed);

HardSampleBundle make_bundle(const Granule& granule, const HardCounts& counts,
                             std::uint64_t seed, const LayoutConfig& cfg = {},
                             bool render = true);

}  // namespace flowgran
