#pragma once

#include <string_view>

#include "flowgran/flowgraph.hpp"
#include "flowgran/losses.hpp"

namespace flowgran {

inline constexpr int kDefaultFeatureDim = 512;

// Hashed bag of structural atoms: one atom per edge (src label, dst label,
// edge label), one per node label, one for the flow direction. Signed
// hashing, deterministic across runs and platforms.
Vector featurize_graph(const FlowGraph& g, int d_feat = kDefaultFeatureDim);

// Hashed bag of whitespace-token unigrams and bigrams.
Vector featurize_text(std::string_view text, int d_feat = kDefaultFeatureDim);

}  // namespace flowgran
