#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flowgran/errors.hpp"

namespace flowgran {

// One manifest line: a granule with its code, caption, rendered file and
// hard-variant material. Unknown fields read from disk are preserved in
// `extra` and re-emitted after the known keys.
struct ManifestRecord {
  std::string id;
  std::string parent_id;
  std::string code;
  std::string caption;
  std::string svg_path;
  std::string split;  // "train" or "test"
  std::vector<std::string> hard_pos_image_paths;
  std::vector<std::string> hard_pos_image_codes;
  std::vector<std::string> hard_pos_captions;
  std::vector<std::string> hard_neg_image_paths;
  std::vector<std::string> hard_neg_image_codes;
  std::vector<std::string> hard_neg_captions;
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  bool operator==(const ManifestRecord&) const = default;
};

// Line-delimited records, one JSON object per line, stable key order.
// read_manifest(write_manifest(r)) == r.
void write_manifest(const std::vector<ManifestRecord>& records,
                    const std::filesystem::path& path);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

// Fails iff a referenced SVG path (relative to base_dir) is missing.
void validate_references(const std::vector<ManifestRecord>& records,
                         const std::filesystem::path& base_dir);

struct ImportResult {
  std::vector<std::pair<std::string, std::string>> records;  // (diagram id, code)
  std::vector<std::string> skipped;                          // "<file>: <reason>"
};

// Reads every .json file in `dir`, pulling the Mermaid code out of
// `code_field`; unparseable records are skipped with a logged reason.
ImportResult import_flowvqa(const std::filesystem::path& dir,
                            const std::string& code_field = "mermaid_code");

}  // namespace flowgran
