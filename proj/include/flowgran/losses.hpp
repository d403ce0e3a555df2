#pragma once

#include <Eigen/Dense>
#include <vector>

#include "flowgran/errors.hpp"

namespace flowgran {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Row i of Zv / Zt is the embedding of image / caption i.
struct EmbeddingBatch {
  Matrix Zv;
  Matrix Zt;

  int n() const { return static_cast<int>(Zv.rows()); }
  int dim() const { return static_cast<int>(Zv.cols()); }
};

// Per-sample hard-variant embeddings; element i is a (count x d) matrix.
struct HardEmbeddings {
  std::vector<Matrix> Vp;
  std::vector<Matrix> Vn;
  std::vector<Matrix> Tp;
  std::vector<Matrix> Tn;
};

// Which sign convention the right-hand side of the shared-factor linear
// system uses. Derived follows the expansion of the circle constraint;
// Printed reproduces the published form with both radius terms
// positive-leading.
enum class ThalesSign { Derived, Printed };

struct LossWeights {
  double lambda_sc = 0.1;
  double lambda_do = 0.0;
  double temperature = 0.07;
  ThalesSign thales_sign = ThalesSign::Derived;
};

// Scalar loss plus analytic gradients w.r.t. every embedding that entered
// it. Gradient containers are empty when the corresponding input was unused.
struct LossResult {
  double value = 0.0;
  Matrix dZv;
  Matrix dZt;
  std::vector<Matrix> dVp, dVn, dTp, dTn;
};

double cosine_sim(const Vector& a, const Vector& b);

// Symmetric two-direction InfoNCE over the N x N cosine similarity matrix.
LossResult info_nce(const EmbeddingBatch& batch, const LossWeights& w);

// Mean over hard positives of the four exp-cosine terms (intra- and
// inter-modal), temperature applied inside each exp.
double positive_similarity(int i, const EmbeddingBatch& batch, const HardEmbeddings& hard,
                           const LossWeights& w);
double negative_similarity(int i, const EmbeddingBatch& batch, const HardEmbeddings& hard,
                           const LossWeights& w);

// Structure-aware contrastive loss: mean_i -log(Sp / (Sp + Sn)).
LossResult sc_loss(const EmbeddingBatch& batch, const HardEmbeddings& hard, const LossWeights& w);

// Linear system locating the shared factor between an anchor and its hard
// negatives. Row j of Z is the difference of consecutive negatives; the
// right-hand side comes from subtracting consecutive circle constraints.
struct SharedFactorSystem {
  Matrix Z;        // (m-1) x d
  Vector zc;       // m-1
  Vector radii;    // m entries: |(anchor - neg_j)| / 2
  Vector centers;  // m entries: |(anchor + neg_j)| / 2
  Vector zs_hat;   // filled by estimate_shared
  double residual = 0.0;
};

SharedFactorSystem build_thales_system(const Vector& anchor, const Matrix& negatives,
                                       ThalesSign sign = ThalesSign::Derived);

// Minimum-norm least-squares solution via SVD with a relative singular
// value cutoff of 1e-10; fills zs_hat and residual, and returns zs_hat.
Vector estimate_shared(SharedFactorSystem& system);

// Distinct-factor orthogonal loss: mean_i of half the residual norm per
// modality. zs_hat is treated as a constant for gradients.
LossResult do_loss(const EmbeddingBatch& batch, const HardEmbeddings& hard, const LossWeights& w);

// L_CL + lambda_sc * L_SC + lambda_do * L_DO with summed gradients.
LossResult total_loss(const EmbeddingBatch& batch, const HardEmbeddings& hard,
                      const LossWeights& w);

}  // namespace flowgran
