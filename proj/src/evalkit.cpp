#include "flowgran/evalkit.hpp"

#include <algorithm>
#include <cstdio>

namespace flowgran {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  return buf;
}

Matrix normalize_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n == 0.0) throw ZeroVector();
    out.row(i) = m.row(i) / n;
  }
  return out;
}

}  // namespace

RetrievalReport compute_metrics(const std::vector<int>& ranks, const std::vector<int>& ks,
                                const std::string& direction) {
  if (ranks.empty()) throw EmptyQuerySet();
  for (int r : ranks) {
    if (r < 1) throw Error("ranks are 1-based");
  }
  RetrievalReport report;
  report.direction = direction;
  for (int k : ks) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](int r) { return r <= k; });
    report.r_at[k] = static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  double sum = 0.0;
  for (int r : ranks) sum += 1.0 / r;
  report.mrr = sum / static_cast<double>(ranks.size());
  return report;
}

std::pair<RetrievalReport, RetrievalReport> full_retrieval_eval(const Matrix& Zv, const Matrix& Zt,
                                                                const std::vector<int>& ks) {
  const Eigen::Index n = Zv.rows();
  if (Zt.rows() != n) throw Error("Zv/Zt row mismatch");
  const int max_k = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());
  if (n <= max_k) {
    throw InsufficientItems(static_cast<std::size_t>(n), static_cast<std::size_t>(max_k) + 1);
  }

  const Matrix C = normalize_rows(Zv) * normalize_rows(Zt).transpose();

  // Rank with stable index tie-break: an equal-scoring candidate with a
  // smaller index ranks ahead of the true item.
  std::vector<int> image_ranks, caption_ranks;
  for (Eigen::Index i = 0; i < n; ++i) {
    int rank = 1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (C(i, j) > C(i, i) || (C(i, j) == C(i, i) && j < i)) ++rank;
    }
    image_ranks.push_back(rank);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    int rank = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      if (C(i, j) > C(j, j) || (C(i, j) == C(j, j) && i < j)) ++rank;
    }
    caption_ranks.push_back(rank);
  }
  return {compute_metrics(image_ranks, ks, "image->caption"),
          compute_metrics(caption_ranks, ks, "caption->image")};
}

std::pair<RetrievalReport, RetrievalReport> hard_negative_eval(
    const Matrix& Zv, const Matrix& Zt, const FixedNegativeEmbeddings& fixed) {
  const Eigen::Index n = Zv.rows();
  if (Zt.rows() != n) throw Error("Zv/Zt row mismatch");
  if (n == 0) throw EmptyQuerySet();
  if (fixed.neg_captions.size() != static_cast<std::size_t>(n) ||
      fixed.neg_images.size() != static_cast<std::size_t>(n)) {
    throw MissingFixedSet("fixed sets cover " + std::to_string(fixed.neg_captions.size()) + "/" +
                          std::to_string(fixed.neg_images.size()) + " of " + std::to_string(n) +
                          " samples");
  }

  // Candidate 0 is the true item; ties resolve in favor of the earlier
  // candidate, so the true item wins ties against every negative.
  auto rank_against = [](const Vector& query, const Vector& truth, const Matrix& negatives) {
    const double true_score = cosine_sim(query, truth);
    int rank = 1;
    for (Eigen::Index j = 0; j < negatives.rows(); ++j) {
      if (cosine_sim(query, negatives.row(j)) > true_score) ++rank;
    }
    return rank;
  };

  std::vector<int> image_ranks, caption_ranks;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    if (fixed.neg_captions[ui].rows() != kFixedNegCaptions ||
        fixed.neg_images[ui].rows() != kFixedNegImages) {
      throw MissingFixedSet("sample " + std::to_string(i) + " holds " +
                            std::to_string(fixed.neg_captions[ui].rows()) + "/" +
                            std::to_string(fixed.neg_images[ui].rows()) +
                            " negatives, need exactly " + std::to_string(kFixedNegCaptions) +
                            "/" + std::to_string(kFixedNegImages));
    }
    image_ranks.push_back(rank_against(Zv.row(i), Zt.row(i), fixed.neg_captions[ui]));
    caption_ranks.push_back(rank_against(Zt.row(i), Zv.row(i), fixed.neg_images[ui]));
  }
  return {compute_metrics(image_ranks, {1, 3}, "image->caption"),
          compute_metrics(caption_ranks, {1, 3}, "caption->image")};
}

std::string report_csv(const std::vector<RetrievalReport>& reports) {
  std::string out = "direction,metric,value\n";
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.r_at) {
      out += r.direction + ",R@" + std::to_string(k) + "," + fmt(v) + "\n";
    }
    out += r.direction + ",MRR," + fmt(r.mrr) + "\n";
  }
  return out;
}

std::string report_table(const std::vector<RetrievalReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += r.direction + ":";
    for (const auto& [k, v] : r.r_at) {
      out += "  R@" + std::to_string(k) + "=" + fmt(v);
    }
    out += "  MRR=" + fmt(r.mrr) + "\n";
  }
  return out;
}

}  // namespace flowgran
