#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "flowgran/features.hpp"
#include "flowgran/granulate.hpp"
#include "flowgran/hardgen.hpp"
#include "flowgran/losses.hpp"

namespace flowgran {

// Linear projection from hashed features to the embedding space; stands in
// for a full encoder tower at desk scale.
struct ToyEncoder {
  Matrix W;  // d_feat x d

  Vector encode(const Vector& features) const { return W.transpose() * features; }

  static ToyEncoder random(int d_feat, int d, std::uint64_t seed);
};

struct TrainConfig {
  double lr = 0.0004;
  int epochs = 3;
  int batch_size = 32;
  int warmup_steps = 8;
  std::uint64_t seed = 0;
  LossWeights weights;
  HardCounts hard_counts;
  int d_feat = kDefaultFeatureDim;
  int d = 64;
  // Recorded reference-recipe metadata; the toy trainer does not use LoRA.
  int lora_alpha = 256;
  int lora_rank = 64;
};

struct TraceRow {
  int step = 0;
  double l_cl = 0.0, l_sc = 0.0, l_do = 0.0, total = 0.0;
};

struct TrainResult {
  ToyEncoder image_encoder;
  ToyEncoder text_encoder;
  std::vector<TraceRow> trace;
};

// Shuffled minibatch gradient descent with linear warmup. Hard bundles are
// regenerated per (epoch, batch, sample) through counter-based seeding, so
// (corpus, cfg) fully determines the weight trajectory.
TrainResult train(const std::vector<Granule>& corpus, const TrainConfig& cfg);

std::string trace_csv(const std::vector<TraceRow>& trace);

void save_encoders(const ToyEncoder& image_enc, const ToyEncoder& text_enc,
                   const std::filesystem::path& path);
std::pair<ToyEncoder, ToyEncoder> load_encoders(const std::filesystem::path& path);

}  // namespace flowgran
