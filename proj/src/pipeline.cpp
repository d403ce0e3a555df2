#include "flowgran/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "flowgran/rng.hpp"

namespace flowgran {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string split_for(const std::string& parent_id, std::uint64_t seed, int test_percent) {
  const std::uint64_t h = splitmix64(hash_str(parent_id) ^ splitmix64(seed));
  return h % 100 < static_cast<std::uint64_t>(test_percent) ? "test" : "train";
}

nlohmann::ordered_json ops_json(const std::vector<EditOp>& ops) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& op : ops) arr.push_back(describe(op));
  return arr;
}

}  // namespace

std::filesystem::path manifest_path(const fs::path& dataset_dir) {
  return dataset_dir / "manifest.jsonl";
}

Granule granule_from_record(const ManifestRecord& record) {
  Granule granule;
  granule.id = record.id;
  granule.parent_id = record.parent_id;
  granule.graph = parse_mermaid(record.code);
  for (const auto& n : granule.graph.nodes) granule.node_ids.push_back(n.id);
  granule.code = record.code;
  granule.caption = record.caption;
  return granule;
}

int run_granulate(const fs::path& in_dir, const fs::path& dataset_dir, std::uint64_t seed,
                  const LayoutConfig& layout, int test_percent) {
  if (!fs::is_directory(in_dir)) throw NoRecordsFound(in_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".mmd") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw NoRecordsFound(in_dir.string());

  fs::create_directories(dataset_dir / "svg");

  std::vector<ManifestRecord> records;
  for (const auto& file : files) {
    const std::string parent_id = file.stem().string();
    const FlowGraph graph = parse_mermaid(read_file(file));
    for (const auto& granule : granulate(graph, parent_id)) {
      const std::string svg_rel = "svg/" + granule.id + ".svg";
      write_file(dataset_dir / svg_rel, render_svg(granule.graph, layout).text);
      ManifestRecord r;
      r.id = granule.id;
      r.parent_id = parent_id;
      r.code = granule.code;
      r.caption = granule.caption;
      r.svg_path = svg_rel;
      r.split = split_for(parent_id, seed, test_percent);
      r.seed = seed;
      records.push_back(std::move(r));
    }
  }
  write_manifest(records, manifest_path(dataset_dir));
  return static_cast<int>(records.size());
}

void run_synth(const fs::path& dataset_dir, const HardCounts& train_counts,
               const HardCounts& eval_counts, std::uint64_t seed, const LayoutConfig& layout) {
  std::vector<ManifestRecord> records = read_manifest(manifest_path(dataset_dir));
  for (auto& r : records) {
    const Granule granule = granule_from_record(r);
    const HardCounts& counts = r.split == "test" ? eval_counts : train_counts;
    const HardSampleBundle bundle = make_bundle(granule, counts, seed, layout);

    r.seed = seed;
    r.hard_pos_image_paths.clear();
    r.hard_pos_image_codes.clear();
    r.hard_neg_image_paths.clear();
    r.hard_neg_image_codes.clear();
    r.hard_pos_captions = bundle.hard_pos_captions;
    r.hard_neg_captions.clear();

    nlohmann::ordered_json prov = nlohmann::ordered_json::object();
    prov["hard_pos_images"] = nlohmann::ordered_json::array();
    prov["hard_neg_images"] = nlohmann::ordered_json::array();
    prov["hard_neg_captions"] = nlohmann::ordered_json::array();

    for (std::size_t k = 0; k < bundle.hard_pos_images.size(); ++k) {
      const auto& v = bundle.hard_pos_images[k];
      const std::string rel = "svg/" + granule.id + ".hp" + std::to_string(k) + ".svg";
      write_file(dataset_dir / rel, v.svg.text);
      r.hard_pos_image_paths.push_back(rel);
      r.hard_pos_image_codes.push_back(serialize_mermaid(v.graph));
      prov["hard_pos_images"].push_back(ops_json(v.ops));
    }
    for (std::size_t k = 0; k < bundle.hard_neg_images.size(); ++k) {
      const auto& v = bundle.hard_neg_images[k];
      const std::string rel = "svg/" + granule.id + ".hn" + std::to_string(k) + ".svg";
      write_file(dataset_dir / rel, v.svg.text);
      r.hard_neg_image_paths.push_back(rel);
      r.hard_neg_image_codes.push_back(serialize_mermaid(v.graph));
      prov["hard_neg_images"].push_back(ops_json(v.ops));
    }
    for (const auto& v : bundle.hard_neg_captions) {
      r.hard_neg_captions.push_back(v.text);
      prov["hard_neg_captions"].push_back(ops_json(v.ops));
    }
    r.provenance = prov;
  }
  write_manifest(records, manifest_path(dataset_dir));
}

TrainResult run_train(const fs::path& dataset_dir, const TrainConfig& cfg,
                      const fs::path& model_path, const fs::path& trace_path) {
  std::vector<Granule> corpus;
  for (const auto& r : read_manifest(manifest_path(dataset_dir))) {
    if (r.split != "test") corpus.push_back(granule_from_record(r));
  }
  TrainResult result = train(corpus, cfg);
  save_encoders(result.image_encoder, result.text_encoder, model_path);
  write_file(trace_path, trace_csv(result.trace));
  return result;
}

EvalOutput run_eval(const fs::path& dataset_dir, const fs::path& model_path,
                    const fs::path& report_csv_path) {
  std::vector<ManifestRecord> test_records;
  for (const auto& r : read_manifest(manifest_path(dataset_dir))) {
    if (r.split == "test") test_records.push_back(r);
  }
  if (test_records.empty()) throw EmptyQuerySet();

  auto [image_enc, text_enc] = load_encoders(model_path);
  const int d_feat = static_cast<int>(image_enc.W.rows());
  const int d = static_cast<int>(image_enc.W.cols());

  const Eigen::Index n = static_cast<Eigen::Index>(test_records.size());
  Matrix Zv(n, d), Zt(n, d);
  FixedNegativeEmbeddings fixed;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = test_records[static_cast<std::size_t>(i)];
    Zv.row(i) = image_enc.encode(featurize_graph(parse_mermaid(r.code), d_feat));
    Zt.row(i) = text_enc.encode(featurize_text(r.caption, d_feat));
    if (static_cast<int>(r.hard_neg_captions.size()) != kFixedNegCaptions ||
        static_cast<int>(r.hard_neg_image_codes.size()) != kFixedNegImages) {
      throw MissingFixedSet(r.id);
    }
    Matrix caps(kFixedNegCaptions, d);
    for (int k = 0; k < kFixedNegCaptions; ++k) {
      caps.row(k) = text_enc.encode(
          featurize_text(r.hard_neg_captions[static_cast<std::size_t>(k)], d_feat));
    }
    Matrix imgs(kFixedNegImages, d);
    for (int k = 0; k < kFixedNegImages; ++k) {
      imgs.row(k) = image_enc.encode(featurize_graph(
          parse_mermaid(r.hard_neg_image_codes[static_cast<std::size_t>(k)]), d_feat));
    }
    fixed.neg_captions.push_back(std::move(caps));
    fixed.neg_images.push_back(std::move(imgs));
  }

  EvalOutput out;
  auto [full_ic, full_ci] = full_retrieval_eval(Zv, Zt);
  auto [hard_ic, hard_ci] = hard_negative_eval(Zv, Zt, fixed);
  out.full_image_to_caption = full_ic;
  out.full_caption_to_image = full_ci;
  out.hard_image_to_caption = hard_ic;
  out.hard_caption_to_image = hard_ci;
  out.hard_image_to_caption.direction = "hard:image->caption";
  out.hard_caption_to_image.direction = "hard:caption->image";
  write_file(report_csv_path,
             report_csv({out.full_image_to_caption, out.full_caption_to_image,
                         out.hard_image_to_caption, out.hard_caption_to_image}));
  return out;
}

ImportResult run_import(const fs::path& flowvqa_dir, const fs::path& out_dir,
                        const std::string& code_field) {
  ImportResult result = import_flowvqa(flowvqa_dir, code_field);
  fs::create_directories(out_dir);
  for (const auto& [id, code] : result.records) {
    write_file(out_dir / (id + ".mmd"), code);
  }
  return result;
}

}  // namespace flowgran
