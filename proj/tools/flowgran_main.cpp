#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "flowgran/pipeline.hpp"

namespace {

using namespace flowgran;

struct CommonOpts {
  std::uint64_t seed = 0;
};

void add_layout_flags(CLI::App* cmd, LayoutConfig& layout) {
  cmd->add_option("--node-width", layout.node_width, "Node box width in px")
      ->capture_default_str();
  cmd->add_option("--node-height", layout.node_height, "Node box height in px")
      ->capture_default_str();
  cmd->add_option("--v-spacing", layout.v_spacing, "Vertical gap between nodes in px")
      ->capture_default_str();
  cmd->add_option("--font-size", layout.font_size, "Label font size in px")
      ->capture_default_str();
  cmd->add_option("--margin", layout.margin, "Outer margin in px")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flowchart granulation, hard-sample synthesis and toy contrastive training"};
  app.require_subcommand(1);

  std::string in_path, out_path, model_path, trace_path, report_path;
  std::string code_field = "mermaid_code";
  std::uint64_t seed = 0;
  int test_percent = 20;
  LayoutConfig layout;
  HardCounts train_counts;
  HardCounts eval_counts{1, kFixedNegImages, 1, kFixedNegCaptions};
  TrainConfig train_cfg;

  auto* cmd_import = app.add_subcommand("import", "Extract Mermaid codes from FlowVQA-style JSON records");
  cmd_import->add_option("--in", in_path, "Directory of JSON record files")->required();
  cmd_import->add_option("--out", out_path, "Output directory for .mmd files")->required();
  cmd_import->add_option("--code-field", code_field, "JSON field holding the Mermaid code")
      ->capture_default_str();

  auto* cmd_gran = app.add_subcommand("granulate", "Granulate .mmd diagrams into a dataset");
  cmd_gran->add_option("--in", in_path, "Directory of .mmd files")->required();
  cmd_gran->add_option("--out", out_path, "Dataset output directory")->required();
  cmd_gran->add_option("--seed", seed, "Master seed")->capture_default_str();
  cmd_gran->add_option("--test-percent", test_percent, "Held-out split percentage (by parent id)")
      ->capture_default_str();
  add_layout_flags(cmd_gran, layout);

  auto* cmd_synth = app.add_subcommand("synth", "Generate hard positive/negative bundles");
  cmd_synth->add_option("--dataset", out_path, "Dataset directory")->required();
  cmd_synth->add_option("--seed", seed, "Master seed")->capture_default_str();
  cmd_synth->add_option("--pos-images", train_counts.n_vp, "Hard positive images per train granule")
      ->capture_default_str();
  cmd_synth->add_option("--neg-images-train", train_counts.n_vn,
                        "Hard negative images per train granule")
      ->capture_default_str();
  cmd_synth->add_option("--pos-captions", train_counts.n_tp,
                        "Hard positive captions per train granule")
      ->capture_default_str();
  cmd_synth->add_option("--neg-captions-train", train_counts.n_tn,
                        "Hard negative captions per train granule")
      ->capture_default_str();
  cmd_synth->add_option("--neg-images", eval_counts.n_vn, "Fixed eval hard negative images")
      ->capture_default_str();
  cmd_synth->add_option("--neg-captions", eval_counts.n_tn, "Fixed eval hard negative captions")
      ->capture_default_str();
  add_layout_flags(cmd_synth, layout);

  auto* cmd_render = app.add_subcommand("render", "Render one .mmd file to SVG");
  cmd_render->add_option("--in", in_path, "Input .mmd file")->required();
  cmd_render->add_option("--out", out_path, "Output .svg file")->required();
  add_layout_flags(cmd_render, layout);

  auto* cmd_train = app.add_subcommand("train-toy", "Train the toy encoder pair");
  cmd_train->add_option("--dataset", in_path, "Dataset directory")->required();
  cmd_train->add_option("--model", model_path, "Encoder artifact output path")->required();
  cmd_train->add_option("--trace", trace_path, "Loss trace CSV output path")->required();
  cmd_train->add_option("--seed", train_cfg.seed, "Training seed")->capture_default_str();
  cmd_train->add_option("--lr", train_cfg.lr, "Learning rate")->capture_default_str();
  cmd_train->add_option("--epochs", train_cfg.epochs, "Epochs")->capture_default_str();
  cmd_train->add_option("--batch-size", train_cfg.batch_size, "Batch size")
      ->capture_default_str();
  cmd_train->add_option("--warmup", train_cfg.warmup_steps, "Linear warmup steps")
      ->capture_default_str();
  cmd_train->add_option("--lambda-sc", train_cfg.weights.lambda_sc, "SC loss weight")
      ->capture_default_str();
  cmd_train->add_option("--lambda-do", train_cfg.weights.lambda_do, "DO loss weight")
      ->capture_default_str();
  cmd_train->add_option("--temperature", train_cfg.weights.temperature, "Contrastive temperature")
      ->capture_default_str();
  cmd_train->add_option("--embed-dim", train_cfg.d, "Embedding dimension")->capture_default_str();
  cmd_train->add_option("--feature-dim", train_cfg.d_feat, "Hashed feature dimension")
      ->capture_default_str();
  cmd_train->add_option("--pos-images", train_cfg.hard_counts.n_vp, "Hard positive images per sample")
      ->capture_default_str();
  cmd_train->add_option("--neg-images", train_cfg.hard_counts.n_vn, "Hard negative images per sample")
      ->capture_default_str();
  cmd_train->add_option("--pos-captions", train_cfg.hard_counts.n_tp,
                        "Hard positive captions per sample")
      ->capture_default_str();
  cmd_train->add_option("--neg-captions", train_cfg.hard_counts.n_tn,
                        "Hard negative captions per sample")
      ->capture_default_str();

  auto* cmd_eval = app.add_subcommand("eval", "Retrieval evaluation on the test split");
  cmd_eval->add_option("--dataset", in_path, "Dataset directory")->required();
  cmd_eval->add_option("--model", model_path, "Encoder artifact path")->required();
  cmd_eval->add_option("--report", report_path, "Report CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (cmd_import->parsed()) {
      const ImportResult result = run_import(in_path, out_path, code_field);
      std::cout << "imported " << result.records.size() << " diagrams, skipped "
                << result.skipped.size() << "\n";
      for (const auto& s : result.skipped) std::cerr << "skip: " << s << "\n";
    } else if (cmd_gran->parsed()) {
      const int n = run_granulate(in_path, out_path, seed, layout, test_percent);
      std::cout << "wrote " << n << " granules to " << out_path << "\n";
    } else if (cmd_synth->parsed()) {
      run_synth(out_path, train_counts, eval_counts, seed, layout);
      std::cout << "hard bundles written to " << out_path << "\n";
    } else if (cmd_render->parsed()) {
      const SvgDocument doc = render_svg(parse_mermaid([&] {
                                           std::ifstream in(in_path, std::ios::binary);
                                           if (!in) throw Error("cannot read file: " + in_path);
                                           return std::string(std::istreambuf_iterator<char>(in),
                                                              std::istreambuf_iterator<char>());
                                         }()),
                                         layout);
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw Error("cannot write file: " + out_path);
      out << doc.text;
      std::cout << "rendered " << in_path << " -> " << out_path << "\n";
    } else if (cmd_train->parsed()) {
      const TrainResult result = run_train(in_path, train_cfg, model_path, trace_path);
      std::cout << "trained " << result.trace.size() << " steps; final loss "
                << (result.trace.empty() ? 0.0 : result.trace.back().total) << "\n";
    } else if (cmd_eval->parsed()) {
      const EvalOutput out = run_eval(in_path, model_path, report_path);
      std::cout << report_table({out.full_image_to_caption, out.full_caption_to_image,
                                 out.hard_image_to_caption, out.hard_caption_to_image});
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
