#include "flowgran/features.hpp"

#include <string>
#include <vector>

#include "flowgran/rng.hpp"

namespace flowgran {

namespace {

// Hashing trick: bucket from the low hash bits, sign from bit 32.
void add_atom(Vector& v, std::string_view atom) {
  const std::uint64_t h = splitmix64(hash_str(atom));
  const auto idx = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(v.size()));
  v(idx) += (h >> 32) & 1 ? 1.0 : -1.0;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

}  // namespace

Vector featurize_graph(const FlowGraph& g, int d_feat) {
  if (d_feat < 2) throw Error("feature dimension too small");
  Vector v = Vector::Zero(d_feat);
  for (const auto& e : g.edges) {
    add_atom(v, "E|" + g.find_node(e.src)->label + "|" + g.find_node(e.dst)->label + "|" + e.label);
  }
  for (const auto& n : g.nodes) add_atom(v, "N|" + n.label);
  add_atom(v, "D|" + to_string(g.direction));
  return v;
}

Vector featurize_text(std::string_view text, int d_feat) {
  if (text.empty()) throw Error("cannot featurize empty text");
  if (d_feat < 2) throw Error("feature dimension too small");
  Vector v = Vector::Zero(d_feat);
  const auto tokens = tokenize(text);
  for (const auto& t : tokens) add_atom(v, "U|" + t);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    add_atom(v, "B|" + tokens[i] + " " + tokens[i + 1]);
  }
  return v;
}

}  // namespace flowgran
