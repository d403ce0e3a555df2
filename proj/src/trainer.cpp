#include "flowgran/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flowgran/rng.hpp"

namespace flowgran {

ToyEncoder ToyEncoder::random(int d_feat, int d, std::uint64_t seed) {
  CounterRng rng(combine_key({seed, 0x656e63ULL}));  // "enc"
  ToyEncoder enc;
  enc.W = Matrix(d_feat, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_feat));
  for (int i = 0; i < d_feat; ++i) {
    for (int j = 0; j < d; ++j) enc.W(i, j) = scale * rng.next_normal();
  }
  return enc;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TrainResult train(const std::vector<Granule>& corpus, const TrainConfig& cfg) {
  if (corpus.size() < static_cast<std::size_t>(cfg.batch_size)) {
    throw InsufficientCorpus(corpus.size(), static_cast<std::size_t>(cfg.batch_size));
  }
  if (cfg.batch_size < 2) throw Error("batch size must be at least 2");
  if (cfg.lr <= 0.0 || cfg.epochs < 1 || cfg.warmup_steps < 0) throw Error("bad train config");

  const bool need_hard = cfg.weights.lambda_sc != 0.0 || cfg.weights.lambda_do != 0.0;

  // Anchor features are fixed across the run; hard-variant features are not.
  std::vector<Vector> fv(corpus.size()), ft(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    fv[i] = featurize_graph(corpus[i].graph, cfg.d_feat);
    ft[i] = featurize_text(corpus[i].caption, cfg.d_feat);
  }

  TrainResult result;
  result.image_encoder = ToyEncoder::random(cfg.d_feat, cfg.d, combine_key({cfg.seed, 0x76ULL}));
  result.text_encoder = ToyEncoder::random(cfg.d_feat, cfg.d, combine_key({cfg.seed, 0x74ULL}));

  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    CounterRng shuffle_rng(combine_key({cfg.seed, 0x73687566ULL, static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(order);

    const int batches = static_cast<int>(order.size()) / cfg.batch_size;
    for (int b = 0; b < batches; ++b) {
      std::vector<std::size_t> batch_ids(order.begin() + b * cfg.batch_size,
                                         order.begin() + (b + 1) * cfg.batch_size);
      const int n = static_cast<int>(batch_ids.size());

      EmbeddingBatch batch;
      batch.Zv = Matrix(n, cfg.d);
      batch.Zt = Matrix(n, cfg.d);
      for (int i = 0; i < n; ++i) {
        batch.Zv.row(i) = result.image_encoder.encode(fv[batch_ids[static_cast<std::size_t>(i)]]);
        batch.Zt.row(i) = result.text_encoder.encode(ft[batch_ids[static_cast<std::size_t>(i)]]);
      }

      HardEmbeddings hard;
      std::vector<std::vector<Vector>> vp_feats(static_cast<std::size_t>(n)),
          vn_feats(static_cast<std::size_t>(n)), tp_feats(static_cast<std::size_t>(n)),
          tn_feats(static_cast<std::size_t>(n));
      if (need_hard) {
        hard.Vp.resize(static_cast<std::size_t>(n));
        hard.Vn.resize(static_cast<std::size_t>(n));
        hard.Tp.resize(static_cast<std::size_t>(n));
        hard.Tn.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
          const auto& granule = corpus[batch_ids[static_cast<std::size_t>(i)]];
          const std::uint64_t bundle_seed =
              combine_key({cfg.seed, 0x68617264ULL, static_cast<std::uint64_t>(epoch),
                           static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(i)});
          const HardSampleBundle bundle =
              make_bundle(granule, cfg.hard_counts, bundle_seed, {}, /*render=*/false);
          const std::size_t ui = static_cast<std::size_t>(i);
          auto embed_graphs = [&](const std::vector<ImageVariant>& variants, Matrix& out,
                                  std::vector<Vector>& feats) {
            out = Matrix(static_cast<Eigen::Index>(variants.size()), cfg.d);
            for (std::size_t j = 0; j < variants.size(); ++j) {
              feats.push_back(featurize_graph(variants[j].graph, cfg.d_feat));
              out.row(static_cast<Eigen::Index>(j)) = result.image_encoder.encode(feats.back());
            }
          };
          embed_graphs(bundle.hard_pos_images, hard.Vp[ui], vp_feats[ui]);
          embed_graphs(bundle.hard_neg_images, hard.Vn[ui], vn_feats[ui]);
          hard.Tp[ui] = Matrix(static_cast<Eigen::Index>(bundle.hard_pos_captions.size()), cfg.d);
          for (std::size_t j = 0; j < bundle.hard_pos_captions.size(); ++j) {
            tp_feats[ui].push_back(featurize_text(bundle.hard_pos_captions[j], cfg.d_feat));
            hard.Tp[ui].row(static_cast<Eigen::Index>(j)) =
                result.text_encoder.encode(tp_feats[ui].back());
          }
          hard.Tn[ui] = Matrix(static_cast<Eigen::Index>(bundle.hard_neg_captions.size()), cfg.d);
          for (std::size_t j = 0; j < bundle.hard_neg_captions.size(); ++j) {
            tn_feats[ui].push_back(featurize_text(bundle.hard_neg_captions[j].text, cfg.d_feat));
            hard.Tn[ui].row(static_cast<Eigen::Index>(j)) =
                result.text_encoder.encode(tn_feats[ui].back());
          }
        }
      }

      const LossResult nce = info_nce(batch, cfg.weights);
      LossResult combined = nce;
      if (need_hard) {
        auto zeros = [](const std::vector<Matrix>& src) {
          std::vector<Matrix> out;
          for (const auto& m : src) out.push_back(Matrix::Zero(m.rows(), m.cols()));
          return out;
        };
        combined.dVp = zeros(hard.Vp);
        combined.dVn = zeros(hard.Vn);
        combined.dTp = zeros(hard.Tp);
        combined.dTn = zeros(hard.Tn);
      }
      double l_sc = 0.0, l_do = 0.0;
      auto fold = [&combined](const LossResult& part, double lambda) {
        combined.value += lambda * part.value;
        combined.dZv += lambda * part.dZv;
        combined.dZt += lambda * part.dZt;
        auto merge = [lambda](std::vector<Matrix>& acc, const std::vector<Matrix>& src) {
          for (std::size_t i = 0; i < src.size(); ++i) {
            if (src[i].size() > 0) acc[i] += lambda * src[i];
          }
        };
        merge(combined.dVp, part.dVp);
        merge(combined.dVn, part.dVn);
        merge(combined.dTp, part.dTp);
        merge(combined.dTn, part.dTn);
      };
      if (cfg.weights.lambda_sc != 0.0) {
        const LossResult sc = sc_loss(batch, hard, cfg.weights);
        l_sc = sc.value;
        fold(sc, cfg.weights.lambda_sc);
      }
      if (cfg.weights.lambda_do != 0.0) {
        const LossResult dl = do_loss(batch, hard, cfg.weights);
        l_do = dl.value;
        fold(dl, cfg.weights.lambda_do);
      }

      // Chain rule through z = W^T f: dL/dW accumulates f * (dL/dz)^T.
      Matrix dWv = Matrix::Zero(cfg.d_feat, cfg.d);
      Matrix dWt = Matrix::Zero(cfg.d_feat, cfg.d);
      for (int i = 0; i < n; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        dWv += fv[batch_ids[ui]] * combined.dZv.row(i);
        dWt += ft[batch_ids[ui]] * combined.dZt.row(i);
        if (!need_hard) continue;
        for (std::size_t j = 0; j < vp_feats[ui].size(); ++j) {
          dWv += vp_feats[ui][j] * combined.dVp[ui].row(static_cast<Eigen::Index>(j));
        }
        for (std::size_t j = 0; j < vn_feats[ui].size(); ++j) {
          dWv += vn_feats[ui][j] * combined.dVn[ui].row(static_cast<Eigen::Index>(j));
        }
        for (std::size_t j = 0; j < tp_feats[ui].size(); ++j) {
          dWt += tp_feats[ui][j] * combined.dTp[ui].row(static_cast<Eigen::Index>(j));
        }
        for (std::size_t j = 0; j < tn_feats[ui].size(); ++j) {
          dWt += tn_feats[ui][j] * combined.dTn[ui].row(static_cast<Eigen::Index>(j));
        }
      }

      const double warm =
          cfg.warmup_steps > 0
              ? std::min(1.0, static_cast<double>(step + 1) / cfg.warmup_steps)
              : 1.0;
      const double lr_t = cfg.lr * warm;
      result.image_encoder.W -= lr_t * dWv;
      result.text_encoder.W -= lr_t * dWt;

      result.trace.push_back(TraceRow{step, nce.value, l_sc, l_do, combined.value});
      ++step;
    }
  }
  return result;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "step,l_cl,l_sc,l_do,total\n";
  for (const auto& row : trace) {
    out += std::to_string(row.step) + "," + fmt(row.l_cl) + "," + fmt(row.l_sc) + "," +
           fmt(row.l_do) + "," + fmt(row.total) + "\n";
  }
  return out;
}

void save_encoders(const ToyEncoder& image_enc, const ToyEncoder& text_enc,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open encoder file for writing: " + path.string());
  out << "flowgran-encoders v1\n";
  out << image_enc.W.rows() << " " << image_enc.W.cols() << "\n";
  auto dump = [&out](const Matrix& W) {
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) {
        if (j) out << ' ';
        out << fmt(W(i, j));
      }
      out << '\n';
    }
  };
  dump(image_enc.W);
  dump(text_enc.W);
}

std::pair<ToyEncoder, ToyEncoder> load_encoders(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open encoder file: " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != "flowgran-encoders v1") throw Error("bad encoder file header");
  Eigen::Index rows = 0, cols = 0;
  in >> rows >> cols;
  if (rows <= 0 || cols <= 0) throw Error("bad encoder dimensions");
  auto read = [&in, rows, cols, &path]() {
    Matrix W(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!(in >> W(i, j))) throw Error("truncated encoder file: " + path.string());
      }
    }
    return W;
  };
  ToyEncoder img{read()};
  ToyEncoder txt{read()};
  return {img, txt};
}

}  // namespace flowgran
