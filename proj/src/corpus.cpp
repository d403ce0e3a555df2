#include "flowgran/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "flowgran/flowgraph.hpp"

namespace flowgran {

namespace {

using json = nlohmann::ordered_json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "id",   "parent_id",      "code",       "caption", "svg_path",
      "split", "hard_positives", "hard_negatives", "provenance", "seed"};
  return keys;
}

json to_json(const ManifestRecord& r) {
  json j = json::object();
  j["id"] = r.id;
  j["parent_id"] = r.parent_id;
  j["code"] = r.code;
  j["caption"] = r.caption;
  j["svg_path"] = r.svg_path;
  j["split"] = r.split;
  j["hard_positives"] = {{"images", r.hard_pos_image_paths},
                         {"image_codes", r.hard_pos_image_codes},
                         {"captions", r.hard_pos_captions}};
  j["hard_negatives"] = {{"images", r.hard_neg_image_paths},
                         {"image_codes", r.hard_neg_image_codes},
                         {"captions", r.hard_neg_captions}};
  j["provenance"] = r.provenance;
  j["seed"] = r.seed;
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

ManifestRecord from_json(const json& j, int line) {
  if (!j.is_object()) throw SchemaViolation(line, "record is not an object");
  for (const char* key : {"id", "parent_id", "code", "caption"}) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw SchemaViolation(line, std::string("missing or non-string field '") + key + "'");
    }
  }
  ManifestRecord r;
  r.id = j["id"];
  r.parent_id = j["parent_id"];
  r.code = j["code"];
  r.caption = j["caption"];
  r.svg_path = j.value("svg_path", "");
  r.split = j.value("split", "");
  auto strings = [line](const json& node, const char* key) {
    std::vector<std::string> out;
    if (!node.contains(key)) return out;
    if (!node[key].is_array()) throw SchemaViolation(line, std::string(key) + " is not an array");
    for (const auto& s : node[key]) out.push_back(s.get<std::string>());
    return out;
  };
  if (j.contains("hard_positives")) {
    r.hard_pos_image_paths = strings(j["hard_positives"], "images");
    r.hard_pos_image_codes = strings(j["hard_positives"], "image_codes");
    r.hard_pos_captions = strings(j["hard_positives"], "captions");
  }
  if (j.contains("hard_negatives")) {
    r.hard_neg_image_paths = strings(j["hard_negatives"], "images");
    r.hard_neg_image_codes = strings(j["hard_negatives"], "image_codes");
    r.hard_neg_captions = strings(j["hard_negatives"], "captions");
  }
  if (j.contains("provenance")) r.provenance = j["provenance"];
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw SchemaViolation(line, "seed is not unsigned");
    r.seed = j["seed"].get<std::uint64_t>();
  }
  for (const auto& [k, v] : j.items()) {
    if (!known_keys().contains(k)) r.extra[k] = v;
  }
  return r;
}

}  // namespace

void write_manifest(const std::vector<ManifestRecord>& records,
                    const std::filesystem::path& path) {
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) throw Error("duplicate manifest record id: " + r.id);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open manifest for writing: " + path.string());
  for (const auto& r : records) {
    out << to_json(r).dump() << '\n';
  }
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest: " + path.string());
  std::vector<ManifestRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaViolation(line_no, e.what());
    }
    records.push_back(from_json(j, line_no));
  }
  return records;
}

void validate_references(const std::vector<ManifestRecord>& records,
                         const std::filesystem::path& base_dir) {
  auto check = [&base_dir](const std::string& rel) {
    if (rel.empty()) return;
    if (!std::filesystem::exists(base_dir / rel)) {
      throw Error("missing referenced file: " + (base_dir / rel).string());
    }
  };
  for (const auto& r : records) {
    check(r.svg_path);
    for (const auto& p : r.hard_pos_image_paths) check(p);
    for (const auto& p : r.hard_neg_image_paths) check(p);
  }
}

ImportResult import_flowvqa(const std::filesystem::path& dir, const std::string& code_field) {
  if (!std::filesystem::is_directory(dir)) throw NoRecordsFound(dir.string());

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw NoRecordsFound(dir.string());

  ImportResult result;
  for (const auto& file : files) {
    const std::string name = file.filename().string();
    std::ifstream in(file, std::ios::binary);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      result.skipped.push_back(name + ": invalid JSON (" + e.what() + ")");
      continue;
    }
    if (!j.is_object() || !j.contains(code_field) || !j[code_field].is_string()) {
      result.skipped.push_back(name + ": missing code field '" + code_field + "'");
      continue;
    }
    const std::string code = j[code_field];
    try {
      parse_mermaid(code);
    } catch (const Error& e) {
      result.skipped.push_back(name + ": " + e.what());
      continue;
    }
    const std::string id = j.contains("id") && j["id"].is_string()
                               ? j["id"].get<std::string>()
                               : file.stem().string();
    result.records.emplace_back(id, code);
  }
  if (result.records.empty()) throw NoRecordsFound(dir.string());
  return result;
}

}  // namespace flowgran
