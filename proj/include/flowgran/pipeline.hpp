#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowgran/corpus.hpp"
#include "flowgran/evalkit.hpp"
#include "flowgran/hardgen.hpp"
#include "flowgran/trainer.hpp"

namespace flowgran {

// Dataset directory layout: <root>/manifest.jsonl plus <root>/svg/*.svg.
std::filesystem::path manifest_path(const std::filesystem::path& dataset_dir);

// Parses every .mmd file under in_dir (sorted by name), granulates, renders
// each granule SVG and writes a fresh manifest. The train/test split hashes
// the parent diagram id so sibling granules never straddle the split.
// Returns the number of granules written.
int run_granulate(const std::filesystem::path& in_dir, const std::filesystem::path& dataset_dir,
                  std::uint64_t seed, const LayoutConfig& layout = {}, int test_percent = 20);

// Adds hard bundles to every manifest record: train-split records get
// train_counts, test-split records get eval_counts (the fixed evaluation
// sets). Variant SVGs land next to the granule SVG as .hp<k>/.hn<k> files.
void run_synth(const std::filesystem::path& dataset_dir, const HardCounts& train_counts,
               const HardCounts& eval_counts, std::uint64_t seed,
               const LayoutConfig& layout = {});

// Trains the toy encoder pair on the train split; writes the encoder
// artifact and the per-step loss trace CSV.
TrainResult run_train(const std::filesystem::path& dataset_dir, const TrainConfig& cfg,
                      const std::filesystem::path& model_path,
                      const std::filesystem::path& trace_path);

struct EvalOutput {
  RetrievalReport full_image_to_caption;
  RetrievalReport full_caption_to_image;
  RetrievalReport hard_image_to_caption;
  RetrievalReport hard_caption_to_image;
};

// Full and hard-candidate retrieval over the test split.
EvalOutput run_eval(const std::filesystem::path& dataset_dir,
                    const std::filesystem::path& model_path,
                    const std::filesystem::path& report_csv_path);

// FlowVQA-style import: one .mmd file per valid record under out_dir.
ImportResult run_import(const std::filesystem::path& flowvqa_dir,
                        const std::filesystem::path& out_dir, const std::string& code_field);

// Rebuilds the Granule value a manifest record describes.
Granule granule_from_record(const ManifestRecord& record);

}  // namespace flowgran
