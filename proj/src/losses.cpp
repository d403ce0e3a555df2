#include "flowgran/losses.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace flowgran {

namespace {

constexpr double kSvdCutoff = 1e-10;       // relative singular value threshold
constexpr double kResidualFloor = 1e-12;   // below this the residual direction is noise

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(std::string("non-finite entries in ") + what);
}

double sign_of(ThalesSign s) { return s == ThalesSign::Derived ? 1.0 : -1.0; }

// Adds coeff * d exp(cos(a,b)/tau) / d{a,b} into ga / gb and returns the
// exp term itself.
// Rows of column-major matrices are strided, hence the InnerStride ref.
using RowRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

double accum_exp_cos(const Vector& a, const Vector& b, double tau, double coeff, RowRef ga,
                     RowRef gb) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ZeroVector();
  const Vector ua = a / na;
  const Vector ub = b / nb;
  const double c = ua.dot(ub);
  const double e = std::exp(c / tau);
  const double k = coeff * e / tau;
  ga += (k / na) * (ub - c * ua).transpose();
  gb += (k / nb) * (ua - c * ub).transpose();
  return e;
}

double exp_cos(const Vector& a, const Vector& b, double tau) {
  return std::exp(cosine_sim(a, b) / tau);
}

void require_counts(int i, const HardEmbeddings& hard) {
  if (i >= static_cast<int>(hard.Vp.size()) || i >= static_cast<int>(hard.Tp.size()) ||
      hard.Vp[static_cast<std::size_t>(i)].rows() == 0 ||
      hard.Tp[static_cast<std::size_t>(i)].rows() == 0) {
    throw MissingHardPositives();
  }
  if (i >= static_cast<int>(hard.Vn.size()) || i >= static_cast<int>(hard.Tn.size()) ||
      hard.Vn[static_cast<std::size_t>(i)].rows() == 0 ||
      hard.Tn[static_cast<std::size_t>(i)].rows() == 0) {
    throw TooFewNegatives(0, 1);
  }
}

std::vector<Matrix> zeros_like(const std::vector<Matrix>& src) {
  std::vector<Matrix> out;
  out.reserve(src.size());
  for (const auto& m : src) out.push_back(Matrix::Zero(m.rows(), m.cols()));
  return out;
}

// acc += scale * part, treating empty gradient slots in part as zero.
void add_scaled(LossResult& acc, const LossResult& part, double scale) {
  acc.value += scale * part.value;
  if (part.dZv.size() > 0) acc.dZv += scale * part.dZv;
  if (part.dZt.size() > 0) acc.dZt += scale * part.dZt;
  auto merge = [scale](std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i].size() == 0) continue;
      if (a[i].size() == 0) {
        a[i] = scale * b[i];
      } else {
        a[i] += scale * b[i];
      }
    }
  };
  merge(acc.dVp, part.dVp);
  merge(acc.dVn, part.dVn);
  merge(acc.dTp, part.dTp);
  merge(acc.dTn, part.dTn);
}

}  // namespace

double cosine_sim(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ZeroVector();
  return a.dot(b) / (na * nb);
}

LossResult info_nce(const EmbeddingBatch& batch, const LossWeights& w) {
  const int n = batch.n();
  const int d = batch.dim();
  if (n < 2) throw Error("info_nce needs a batch of at least 2");
  if (batch.Zt.rows() != n || batch.Zt.cols() != d) throw Error("Zv/Zt shape mismatch");
  check_finite(batch.Zv, "Zv");
  check_finite(batch.Zt, "Zt");

  Matrix U(n, d), W(n, d);
  Vector nv(n), nt(n);
  for (int i = 0; i < n; ++i) {
    nv(i) = batch.Zv.row(i).norm();
    nt(i) = batch.Zt.row(i).norm();
    if (nv(i) == 0.0 || nt(i) == 0.0) throw ZeroVector();
    U.row(i) = batch.Zv.row(i) / nv(i);
    W.row(i) = batch.Zt.row(i) / nt(i);
  }
  const Matrix C = U * W.transpose();         // cosine matrix
  const Matrix S = C / w.temperature;

  // Row/column softmax with max-shift for stability.
  Matrix Prow(n, n), Pcol(n, n);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mx = S.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (S.row(i).array() - mx).exp();
    const double z = e.sum();
    Prow.row(i) = e / z;
    loss += -(S(i, i) - mx) + std::log(z);
  }
  for (int j = 0; j < n; ++j) {
    const double mx = S.col(j).maxCoeff();
    const Vector e = (S.col(j).array() - mx).exp();
    const double z = e.sum();
    Pcol.col(j) = e / z;
    loss += -(S(j, j) - mx) + std::log(z);
  }
  loss /= 2.0 * n;

  const Matrix G =
      ((Prow - Matrix::Identity(n, n)) + (Pcol - Matrix::Identity(n, n))) / (2.0 * n);

  LossResult res;
  res.value = loss;
  res.dZv = Matrix::Zero(n, d);
  res.dZt = Matrix::Zero(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double g = G(i, j) / w.temperature;
      if (g == 0.0) continue;
      res.dZv.row(i) += g / nv(i) * (W.row(j) - C(i, j) * U.row(i));
      res.dZt.row(j) += g / nt(j) * (U.row(i) - C(i, j) * W.row(j));
    }
  }
  return res;
}

double positive_similarity(int i, const EmbeddingBatch& batch, const HardEmbeddings& hard,
                           const LossWeights& w) {
  const std::size_t ui = static_cast<std::size_t>(i);
  if (ui >= hard.Vp.size() || ui >= hard.Tp.size() || hard.Vp[ui].rows() == 0 ||
      hard.Tp[ui].rows() == 0) {
    throw MissingHardPositives();
  }
  const Vector v = batch.Zv.row(i);
  const Vector t = batch.Zt.row(i);
  const Matrix& Vp = hard.Vp[ui];
  const Matrix& Tp = hard.Tp[ui];
  double s = 0.0;
  for (int j = 0; j < Vp.rows(); ++j) {
    s += (exp_cos(v, Vp.row(j), w.temperature) + exp_cos(t, Vp.row(j), w.temperature)) / Vp.rows();
  }
  for (int k = 0; k < Tp.rows(); ++k) {
    s += (exp_cos(t, Tp.row(k), w.temperature) + exp_cos(v, Tp.row(k), w.temperature)) / Tp.rows();
  }
  return s / 4.0;  // mean over the four anchor/variant axes
}

double negative_similarity(int i, const EmbeddingBatch& batch, const HardEmbeddings& hard,
                           const LossWeights& w) {
  const std::size_t ui = static_cast<std::size_t>(i);
  if (ui >= hard.Vn.size() || ui >= hard.Tn.size() || hard.Vn[ui].rows() == 0 ||
      hard.Tn[ui].rows() == 0) {
    throw TooFewNegatives(0, 1);
  }
  const Vector v = batch.Zv.row(i);
  const Vector t = batch.Zt.row(i);
  const Matrix& Vn = hard.Vn[ui];
  const Matrix& Tn = hard.Tn[ui];
  double s = 0.0;
  for (int j = 0; j < Vn.rows(); ++j) {
    s += (exp_cos(v, Vn.row(j), w.temperature) + exp_cos(t, Vn.row(j), w.temperature)) / Vn.rows();
  }
  for (int k = 0; k < Tn.rows(); ++k) {
    s += (exp_cos(t, Tn.row(k), w.temperature) + exp_cos(v, Tn.row(k), w.temperature)) / Tn.rows();
  }
  return s / 4.0;  // mean over the four anchor/variant axes
}

LossResult sc_loss(const EmbeddingBatch& batch, const HardEmbeddings& hard, const LossWeights& w) {
  const int n = batch.n();
  const int d = batch.dim();
  if (n < 1) throw Error("sc_loss needs a nonempty batch");

  LossResult res;
  res.dZv = Matrix::Zero(n, d);
  res.dZt = Matrix::Zero(n, d);
  res.dVp = zeros_like(hard.Vp);
  res.dVn = zeros_like(hard.Vn);
  res.dTp = zeros_like(hard.Tp);
  res.dTn = zeros_like(hard.Tn);

  for (int i = 0; i < n; ++i) {
    require_counts(i, hard);
    const double sp = positive_similarity(i, batch, hard, w);
    const double sn = negative_similarity(i, batch, hard, w);
    res.value += (std::log(sp + sn) - std::log(sp)) / n;

    const double dl_dsp = (1.0 / (sp + sn) - 1.0 / sp) / n;
    const double dl_dsn = (1.0 / (sp + sn)) / n;

    const std::size_t ui = static_cast<std::size_t>(i);
    const Vector v = batch.Zv.row(i);
    const Vector t = batch.Zt.row(i);

    auto both = [&](const Matrix& variants, Matrix& dvariants, double dl_ds) {
      const double coeff = dl_ds / (4.0 * variants.rows());
      for (int j = 0; j < variants.rows(); ++j) {
        accum_exp_cos(v, variants.row(j), w.temperature, coeff, res.dZv.row(i), dvariants.row(j));
        accum_exp_cos(t, variants.row(j), w.temperature, coeff, res.dZt.row(i), dvariants.row(j));
      }
    };
    both(hard.Vp[ui], res.dVp[ui], dl_dsp);
    both(hard.Tp[ui], res.dTp[ui], dl_dsp);
    both(hard.Vn[ui], res.dVn[ui], dl_dsn);
    both(hard.Tn[ui], res.dTn[ui], dl_dsn);
  }
  return res;
}

SharedFactorSystem build_thales_system(const Vector& anchor, const Matrix& negatives,
                                       ThalesSign sign) {
  const int m = static_cast<int>(negatives.rows());
  if (m < 2) throw TooFewNegatives(m, 2);
  if (negatives.cols() != anchor.size()) throw Error("anchor/negative dimension mismatch");

  SharedFactorSystem sys;
  sys.radii = Vector(m);
  sys.centers = Vector(m);
  for (int j = 0; j < m; ++j) {
    sys.radii(j) = 0.5 * (anchor - negatives.row(j).transpose()).norm();
    sys.centers(j) = 0.5 * (anchor + negatives.row(j).transpose()).norm();
  }
  const double s = sign_of(sign);
  sys.Z = Matrix(m - 1, anchor.size());
  sys.zc = Vector(m - 1);
  for (int j = 0; j + 1 < m; ++j) {
    sys.Z.row(j) = negatives.row(j + 1) - negatives.row(j);
    const double c2 = sys.centers(j + 1) * sys.centers(j + 1) - sys.centers(j) * sys.centers(j);
    const double r2 = sys.radii(j) * sys.radii(j) - sys.radii(j + 1) * sys.radii(j + 1);
    sys.zc(j) = c2 + s * r2;
  }
  return sys;
}

Vector estimate_shared(SharedFactorSystem& system) {
  Eigen::JacobiSVD<Matrix> svd(system.Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kSvdCutoff);
  system.zs_hat = svd.solve(system.zc);
  system.residual = (system.Z * system.zs_hat - system.zc).norm();
  return system.zs_hat;
}

LossResult do_loss(const EmbeddingBatch& batch, const HardEmbeddings& hard, const LossWeights& w) {
  const int n = batch.n();
  const int d = batch.dim();
  if (n < 1) throw Error("do_loss needs a nonempty batch");

  LossResult res;
  res.dZv = Matrix::Zero(n, d);
  res.dZt = Matrix::Zero(n, d);
  res.dVn = zeros_like(hard.Vn);
  res.dTn = zeros_like(hard.Tn);

  const double s = sign_of(w.thales_sign);

  // Per-modality residual term; zs_hat is stop-gradient by construction.
  auto modality = [&](const Vector& anchor, const Matrix& negatives, RowRef danchor,
                      Matrix& dnegatives) {
    SharedFactorSystem sys = build_thales_system(anchor, negatives, w.thales_sign);
    estimate_shared(sys);
    const Vector rho = sys.Z * sys.zs_hat - sys.zc;
    const double norm = rho.norm();
    if (norm > kResidualFloor) {
      const Vector u = rho / norm;
      const double coeff = 0.5 / n;
      for (int j = 0; j + 1 < negatives.rows(); ++j) {
        const Vector nj = negatives.row(j);
        const Vector nj1 = negatives.row(j + 1);
        // rho_j = (n_{j+1}-n_j).zs - zc_j with
        // zc_j = (c_{j+1}^2 - c_j^2) + s (r_j^2 - r_{j+1}^2)
        const Vector d_nj1 = sys.zs_hat - 0.5 * ((anchor + nj1) + s * (anchor - nj1));
        const Vector d_nj = -sys.zs_hat + 0.5 * ((anchor + nj) + s * (anchor - nj));
        const Vector d_a = -0.5 * (1.0 + s) * (nj1 - nj);
        dnegatives.row(j + 1) += coeff * u(j) * d_nj1.transpose();
        dnegatives.row(j) += coeff * u(j) * d_nj.transpose();
        danchor += coeff * u(j) * d_a.transpose();
      }
    }
    return 0.5 * norm / n;
  };

  for (int i = 0; i < n; ++i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    if (ui >= hard.Vn.size() || ui >= hard.Tn.size()) throw TooFewNegatives(0, 2);
    res.value += modality(batch.Zv.row(i), hard.Vn[ui], res.dZv.row(i), res.dVn[ui]);
    res.value += modality(batch.Zt.row(i), hard.Tn[ui], res.dZt.row(i), res.dTn[ui]);
  }
  return res;
}

LossResult total_loss(const EmbeddingBatch& batch, const HardEmbeddings& hard,
                      const LossWeights& w) {
  LossResult res = info_nce(batch, w);
  res.dVp = zeros_like(hard.Vp);
  res.dVn = zeros_like(hard.Vn);
  res.dTp = zeros_like(hard.Tp);
  res.dTn = zeros_like(hard.Tn);
  if (w.lambda_sc != 0.0) add_scaled(res, sc_loss(batch, hard, w), w.lambda_sc);
  if (w.lambda_do != 0.0) add_scaled(res, do_loss(batch, hard, w), w.lambda_do);
  return res;
}

}  // namespace flowgran
