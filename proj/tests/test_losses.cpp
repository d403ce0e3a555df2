#include <doctest.h>

#include <cmath>

#include "flowgran/losses.hpp"
#include "testsupport.hpp"

using namespace flowgran;

namespace {

// Orthonormal rows => all off-diagonal cosines are 0 and diagonals are 1.
EmbeddingBatch identity_batch(int n) {
  EmbeddingBatch b;
  b.Zv = Matrix::Identity(n, n);
  b.Zt = Matrix::Identity(n, n);
  return b;
}

HardEmbeddings hard_from_rows(const EmbeddingBatch& batch, int n_pos, int n_neg,
                              std::uint64_t seed) {
  HardEmbeddings h;
  const int d = batch.dim();
  for (int i = 0; i < batch.n(); ++i) {
    h.Vp.push_back(test::random_matrix(n_pos, d, seed + 11 * static_cast<std::uint64_t>(i)));
    h.Vn.push_back(test::random_matrix(n_neg, d, seed + 13 * static_cast<std::uint64_t>(i) + 1));
    h.Tp.push_back(test::random_matrix(n_pos, d, seed + 17 * static_cast<std::uint64_t>(i) + 2));
    h.Tn.push_back(test::random_matrix(n_neg, d, seed + 19 * static_cast<std::uint64_t>(i) + 3));
  }
  return h;
}

}  // namespace

TEST_CASE("cosine similarity basics") {
  Vector a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  CHECK(cosine_sim(a, a) == doctest::Approx(1.0));
  CHECK(cosine_sim(a, b) == doctest::Approx(0.0));
  CHECK(cosine_sim(a, -a) == doctest::Approx(-1.0));
  Vector z = Vector::Zero(2);
  CHECK_THROWS_AS(cosine_sim(a, z), ZeroVector);
}

TEST_CASE("InfoNCE on matched orthonormal batch: uniform over non-matches") {
  // Oracle: With all off-diagonal cosines 0 and matches 1, each direction's
  // cross-entropy is log(e^{1/t} + (N-1)) - 1/t.
  LossWeights w;
  w.temperature = 1.0;
  for (int n : {2, 3, 8}) {
    const auto r = info_nce(identity_batch(n), w);
    const double expect = std::log(std::exp(1.0) + (n - 1)) - 1.0;
    CHECK(r.value == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("InfoNCE all-identical rows gives ln N") {
  // Oracle: Every cosine is 1, so the softmax is uniform and L = ln N.
  LossWeights w;
  w.temperature = 0.07;
  for (int n : {2, 5, 16}) {
    EmbeddingBatch b;
    b.Zv = Matrix::Ones(n, 3);
    b.Zt = Matrix::Ones(n, 3);
    const auto r = info_nce(b, w);
    CHECK(r.value == doctest::Approx(std::log(static_cast<double>(n))).epsilon(1e-12));
  }
}

TEST_CASE("InfoNCE N=2 antipodal pair") {
  // Oracle: Cosine matrix [[1,-1],[-1,1]], t=2: every row/col CE is
  // ln(1 + e^{-1}) = 0.3132616875182228...
  EmbeddingBatch b;
  b.Zv = Matrix(2, 2);
  b.Zv << 1, 0, -1, 0;
  b.Zt = b.Zv;
  LossWeights w;
  w.temperature = 2.0;
  const auto r = info_nce(b, w);
  CHECK(r.value == doctest::Approx(0.3132616875182228).epsilon(1e-12));
}

TEST_CASE("InfoNCE is invariant to row scaling") {
  EmbeddingBatch b;
  b.Zv = test::random_matrix(5, 4, 90);
  b.Zt = test::random_matrix(5, 4, 91);
  LossWeights w;
  const double base = info_nce(b, w).value;
  b.Zv.row(2) *= 7.5;
  b.Zt.row(4) *= 0.01;
  CHECK(info_nce(b, w).value == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("InfoNCE gradient matches finite differences") {
  LossWeights w;
  w.temperature = 0.3;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    EmbeddingBatch b;
    b.Zv = test::random_matrix(4, 3, seed * 100);
    b.Zt = test::random_matrix(4, 3, seed * 100 + 1);
    const auto r = info_nce(b, w);
    auto eval = [&](const std::vector<Matrix>& p) {
      EmbeddingBatch q{p[0], p[1]};
      return info_nce(q, w).value;
    };
    CHECK(test::max_grad_rel_err(eval, {b.Zv, b.Zt}, {r.dZv, r.dZt}) < 1e-5);
  }
}

TEST_CASE("positive similarity closed forms") {
  LossWeights w;
  w.temperature = 1.0;
  EmbeddingBatch b;
  b.Zv = Matrix(1, 2);
  b.Zv << 1, 0;
  b.Zt = b.Zv;
  HardEmbeddings h;
  SUBCASE("aligned positives give e") {
    // Oracle: All four cosines are 1, so S^p = (4 e)/4 = e.
    h.Vp = {b.Zv};
    h.Tp = {b.Zv};
    CHECK(positive_similarity(0, b, h, w) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  }
  SUBCASE("orthogonal positives give 1") {
    Matrix o(1, 2);
    o << 0, 1;
    h.Vp = {o};
    h.Tp = {o};
    // Oracle: cross terms: cos(v,tp)=0, cos(t,vp)=0, cos(v,vp)=0,
    // cos(t,tp)=0 => S^p = 4 e^0 / 4 = 1.
    CHECK(positive_similarity(0, b, h, w) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("antipodal positives give 1/e") {
    h.Vp = {Matrix(-b.Zv)};
    h.Tp = {Matrix(-b.Zv)};
    CHECK(positive_similarity(0, b, h, w) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }
}

TEST_CASE("sc loss balanced case gives ln 2") {
  // Oracle: When S^p == S^n the per-sample loss is -log(1/2) = ln 2.
  LossWeights w;
  w.temperature = 1.0;
  EmbeddingBatch b;
  b.Zv = Matrix(1, 2);
  b.Zv << 1, 0;
  b.Zt = b.Zv;
  HardEmbeddings h;
  h.Vp = {b.Zv};
  h.Tp = {b.Zv};
  h.Vn = {b.Zv};
  h.Tn = {b.Zv};
  const auto r = sc_loss(b, h, w);
  CHECK(r.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("sc loss aligned positives vs antipodal negatives") {
  // Oracle: S^p = e, S^n = e^{-1}; loss = ln(1 + e^{-2}) = 0.1269280110429726.
  LossWeights w;
  w.temperature = 1.0;
  EmbeddingBatch b;
  b.Zv = Matrix(1, 2);
  b.Zv << 1, 0;
  b.Zt = b.Zv;
  HardEmbeddings h;
  h.Vp = {b.Zv};
  h.Tp = {b.Zv};
  h.Vn = {Matrix(-b.Zv)};
  h.Tn = {Matrix(-b.Zv)};
  const auto r = sc_loss(b, h, w);
  CHECK(r.value == doctest::Approx(0.1269280110429726).epsilon(1e-12));
}

TEST_CASE("duplicate negatives change nothing (mean over negatives)") {
  LossWeights w;
  EmbeddingBatch b;
  b.Zv = test::random_matrix(2, 3, 55);
  b.Zt = test::random_matrix(2, 3, 56);
  HardEmbeddings h = hard_from_rows(b, 1, 2, 600);
  const double base = sc_loss(b, h, w).value;
  // Duplicate each negative row; the mean of exp-cos terms is unchanged.
  for (auto* m : {&h.Vn, &h.Tn}) {
    for (auto& mat : *m) {
      Matrix doubled(mat.rows() * 2, mat.cols());
      doubled << mat, mat;
      mat = doubled;
    }
  }
  CHECK(sc_loss(b, h, w).value == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("sc gradients match finite differences") {
  LossWeights w;
  w.temperature = 0.5;
  for (std::uint64_t seed : {7ULL, 8ULL}) {
    EmbeddingBatch b;
    b.Zv = test::random_matrix(3, 4, seed * 31);
    b.Zt = test::random_matrix(3, 4, seed * 31 + 1);
    HardEmbeddings h = hard_from_rows(b, 2, 3, seed * 31 + 2);
    const auto r = sc_loss(b, h, w);

    std::vector<Matrix> params = {b.Zv, b.Zt};
    std::vector<Matrix> grads = {r.dZv, r.dZt};
    for (int i = 0; i < b.n(); ++i) {
      params.push_back(h.Vp[static_cast<std::size_t>(i)]);
      grads.push_back(r.dVp[static_cast<std::size_t>(i)]);
      params.push_back(h.Vn[static_cast<std::size_t>(i)]);
      grads.push_back(r.dVn[static_cast<std::size_t>(i)]);
      params.push_back(h.Tp[static_cast<std::size_t>(i)]);
      grads.push_back(r.dTp[static_cast<std::size_t>(i)]);
      params.push_back(h.Tn[static_cast<std::size_t>(i)]);
      grads.push_back(r.dTn[static_cast<std::size_t>(i)]);
    }
    auto eval = [&](const std::vector<Matrix>& p) {
      EmbeddingBatch q{p[0], p[1]};
      HardEmbeddings g;
      std::size_t k = 2;
      for (int i = 0; i < q.n(); ++i) {
        g.Vp.push_back(p[k++]);
        g.Vn.push_back(p[k++]);
        g.Tp.push_back(p[k++]);
        g.Tn.push_back(p[k++]);
      }
      return sc_loss(q, g, w).value;
    };
    CHECK(test::max_grad_rel_err(eval, params, grads) < 1e-5);
  }
}

TEST_CASE("thales system shapes and radii") {
  Vector a(3);
  a << 1, 0, 0;
  Matrix negs = test::random_matrix(4, 3, 71);
  const auto sys = build_thales_system(a, negs);
  CHECK(sys.Z.rows() == 3);
  CHECK(sys.Z.cols() == 3);
  CHECK(sys.zc.size() == 3);
  for (int j = 0; j < 4; ++j) {
    const Vector nj = negs.row(j).transpose();
    CHECK(sys.radii(j) == doctest::Approx((a - nj).norm() / 2.0).epsilon(1e-12));
    CHECK(sys.centers(j) == doctest::Approx((a + nj).norm() / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("derived sign convention is always consistent: zc equals Z times anchor") {
  // Oracle: Expanding (c_{j+1}^2 - c_j^2) + (r_j^2 - r_{j+1}^2) gives
  // exactly anchor . (n_{j+1} - n_j), so the anchor solves the system with
  // zero residual for any negatives.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Vector a = test::random_matrix(4, 1, seed * 7 + 3).col(0);
    Matrix negs = test::random_matrix(3, 4, seed * 7 + 4);
    auto sys = build_thales_system(a, negs, ThalesSign::Derived);
    CHECK((sys.zc - sys.Z * a).norm() < 1e-10);
    estimate_shared(sys);
    CHECK(sys.residual < 1e-9);
  }
}

TEST_CASE("printed sign convention matches half squared-norm differences") {
  // Oracle: (r_{j+1}^2 - r_j^2) + (c_{j+1}^2 - c_j^2) = (|n_{j+1}|^2 - |n_j|^2)/2.
  Vector a = test::random_matrix(5, 1, 301).col(0);
  Matrix negs = test::random_matrix(4, 5, 302);
  const auto sys = build_thales_system(a, negs, ThalesSign::Printed);
  for (int j = 0; j < 3; ++j) {
    const double want =
        (negs.row(j + 1).squaredNorm() - negs.row(j).squaredNorm()) / 2.0;
    CHECK(sys.zc(j) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("estimate_shared recovers a planted solution") {
  // Consistent overdetermined system: plant zs, set zc = Z zs.
  Matrix Z = test::random_matrix(6, 3, 404);
  Vector zs = test::random_matrix(3, 1, 405).col(0);
  SharedFactorSystem sys;
  sys.Z = Z;
  sys.zc = Z * zs;
  const Vector got = estimate_shared(sys);
  CHECK((got - zs).norm() < 1e-9);
  CHECK(sys.residual < 1e-9);
}

TEST_CASE("estimate_shared returns the min-norm solution when underdetermined") {
  Matrix Z = test::random_matrix(2, 5, 500);
  Vector zs = test::random_matrix(5, 1, 501).col(0);
  SharedFactorSystem sys;
  sys.Z = Z;
  sys.zc = Z * zs;
  const Vector got = estimate_shared(sys);
  CHECK((Z * got - sys.zc).norm() < 1e-8);
  // Min-norm solutions lie in the row space: got = Z^T y for some y.
  Eigen::JacobiSVD<Matrix> svd(Z.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector proj = svd.matrixU() * (svd.matrixU().transpose() * got);
  CHECK((proj - got).norm() < 1e-8);
}

TEST_CASE("do loss zeroes out under the derived convention") {
  LossWeights w;
  w.lambda_do = 1.0;
  w.thales_sign = ThalesSign::Derived;
  EmbeddingBatch b;
  b.Zv = test::random_matrix(2, 4, 611);
  b.Zt = test::random_matrix(2, 4, 612);
  HardEmbeddings h = hard_from_rows(b, 1, 3, 613);
  const auto r = do_loss(b, h, w);
  CHECK(r.value < 1e-9);
}

TEST_CASE("do loss gradient matches finite differences under printed sign") {
  LossWeights w;
  w.thales_sign = ThalesSign::Printed;
  for (std::uint64_t seed : {21ULL, 22ULL, 23ULL}) {
    EmbeddingBatch b;
    b.Zv = test::random_matrix(2, 3, seed * 41);
    b.Zt = test::random_matrix(2, 3, seed * 41 + 1);
    // Six negatives in d=3 leave five equations over three unknowns, so the
    // printed-sign system is generically inconsistent and the residual binds.
    HardEmbeddings h = hard_from_rows(b, 1, 6, seed * 41 + 2);
    const auto r = do_loss(b, h, w);
    CHECK(r.value > 0.0);

    std::vector<Matrix> params = {b.Zv, b.Zt};
    std::vector<Matrix> grads = {r.dZv, r.dZt};
    for (int i = 0; i < b.n(); ++i) {
      params.push_back(h.Vn[static_cast<std::size_t>(i)]);
      grads.push_back(r.dVn[static_cast<std::size_t>(i)]);
      params.push_back(h.Tn[static_cast<std::size_t>(i)]);
      grads.push_back(r.dTn[static_cast<std::size_t>(i)]);
    }
    auto eval = [&](const std::vector<Matrix>& p) {
      EmbeddingBatch q{p[0], p[1]};
      HardEmbeddings g = h;
      std::size_t k = 2;
      for (int i = 0; i < q.n(); ++i) {
        g.Vn[static_cast<std::size_t>(i)] = p[k++];
        g.Tn[static_cast<std::size_t>(i)] = p[k++];
      }
      return do_loss(q, g, w).value;
    };
    // zs_hat is held fixed analytically but moves under finite differences;
    // the solve is smooth here so agreement stays loose but bounded.
    CHECK(test::max_grad_rel_err(eval, params, grads) < 1e-4);
  }
}

TEST_CASE("total loss is the weighted sum of parts") {
  LossWeights w;
  w.lambda_sc = 0.3;
  w.lambda_do = 0.2;
  w.thales_sign = ThalesSign::Printed;
  EmbeddingBatch b;
  b.Zv = test::random_matrix(3, 4, 801);
  b.Zt = test::random_matrix(3, 4, 802);
  HardEmbeddings h = hard_from_rows(b, 1, 3, 803);
  const auto total = total_loss(b, h, w);
  const double parts = info_nce(b, w).value + 0.3 * sc_loss(b, h, w).value +
                       0.2 * do_loss(b, h, w).value;
  CHECK(total.value == doctest::Approx(parts).epsilon(1e-12));
}

TEST_CASE("too few negatives for the thales system") {
  Vector a(3);
  a << 1, 2, 3;
  Matrix one = test::random_matrix(1, 3, 900);
  CHECK_THROWS_AS(build_thales_system(a, one), TooFewNegatives);
}
