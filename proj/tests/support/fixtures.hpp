#pragma once

#include <cmath>

#include "dpsom/data/batch.hpp"
#include "dpsom/data/synth_icu.hpp"
#include "dpsom/trainer/config.hpp"
#include "generators.hpp"

namespace fixture {

using dpsom::Matrix;
using dpsom::data::Batch;
using dpsom::data::SeriesBatch;
using dpsom::train::DataKind;
using dpsom::train::TrainConfig;

/// Tiny static model: 6-d inputs, 3-d latent, 2x3 grid.
inline TrainConfig tiny_static_config() {
  TrainConfig c = TrainConfig::defaults(DataKind::images);
  c.grid = dpsom::som::GridSpec(2, 3);
  c.latent_dim = 3;
  c.hidden = {5};
  c.activation = dpsom::gen::Activation::tanh;
  c.likelihood = dpsom::gen::Likelihood::gaussian;
  c.dropout = 0.0;
  c.beta = 0.7;
  c.gamma = 1.3;
  return c;
}

inline TrainConfig tiny_series_config() {
  TrainConfig c = tiny_static_config();
  c.smooth_weight = 0.9;
  c.pred_weight = 1.1;
  return c;
}

inline Batch random_batch(gen_fixture::Gen& g, int n, int dim) {
  Batch b;
  b.x = g.matrix(n, dim);
  return b;
}

inline SeriesBatch random_series(gen_fixture::Gen& g, int n_series, int steps, int dim) {
  SeriesBatch s;
  s.n_series = n_series;
  s.steps = steps;
  s.x = g.matrix(n_series * steps, dim);
  return s;
}

/// Two Gaussian blobs with labels 0 and 1.
inline Batch two_gaussians(int n, int dim, double separation, std::uint64_t seed) {
  gen_fixture::Gen g(seed);
  Batch b;
  b.x = g.matrix(n, dim);
  b.num_classes = 2;
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    b.x.row(i).array() += label ? separation / 2 : -separation / 2;
    b.labels.push_back(label);
  }
  return b;
}

}  // namespace fixture
