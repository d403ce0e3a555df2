#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flowgran/losses.hpp"

namespace flowgran {

// Candidate counts of the fixed evaluation protocol.
inline constexpr int kFixedNegCaptions = 6;
inline constexpr int kFixedNegImages = 8;

struct RetrievalReport {
  std::string direction;  // "image->caption" or "caption->image"
  std::map<int, double> r_at;
  double mrr = 0.0;
};

// R@K = fraction of queries with rank <= K; MRR = mean of 1/rank.
// `ranks` holds the 1-based rank of the true item per query.
RetrievalReport compute_metrics(const std::vector<int>& ranks, const std::vector<int>& ks,
                                const std::string& direction = "");

// Cosine-similarity ranking of every item against the whole test set, both
// directions. Ties break by stable item index (earlier index ranks ahead).
std::pair<RetrievalReport, RetrievalReport> full_retrieval_eval(
    const Matrix& Zv, const Matrix& Zt, const std::vector<int>& ks = {1, 5, 10});

// Precomputed per-sample negative embeddings, held constant across runs.
struct FixedNegativeEmbeddings {
  std::vector<Matrix> neg_captions;  // per sample: kFixedNegCaptions x d
  std::vector<Matrix> neg_images;    // per sample: kFixedNegImages x d
};

// For each image, ranks the true caption among {true + 6 negatives}; for
// each caption, the true image among {true + 8 negatives}. Reports R@1,
// R@3 and MRR for both directions.
std::pair<RetrievalReport, RetrievalReport> hard_negative_eval(
    const Matrix& Zv, const Matrix& Zt, const FixedNegativeEmbeddings& fixed);

std::string report_csv(const std::vector<RetrievalReport>& reports);
std::string report_table(const std::vector<RetrievalReport>& reports);

}  // namespace flowgran
