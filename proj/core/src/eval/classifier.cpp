// SPDX-License-Identifier: Apache-2.0
#include "nre/eval/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "nre/core/adam.hpp"
#include "nre/core/error.hpp"
#include "nre/core/rng.hpp"

namespace nre::eval {

namespace {

std::vector<int> argmax_rows(const Tensor<float>& scores) {
  std::vector<int> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    const auto row = scores.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double fraction_equal(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ShapeError("prediction/label count mismatch");
  if (a.empty()) throw DataError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hits += a[i] == b[i];
  return static_cast<double>(hits) / static_cast<double>(a.size());
}

/// Mean softmax cross-entropy gradient wrt the logits.
Tensor<float> cross_entropy_grad(const Tensor<float>& logits, std::span<const int> labels, double* loss) {
  const auto n = logits.rows();
  const auto c = logits.cols();
  Tensor<float> grad({n, c});
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = logits.row(r);
    const float mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (auto v : row) z += std::exp(static_cast<double>(v - mx));
    const auto y = static_cast<std::size_t>(labels[r]);
    if (y >= c) throw DataError("label " + std::to_string(labels[r]) + " outside classifier range");
    for (std::size_t k = 0; k < c; ++k) {
      const double p = std::exp(static_cast<double>(row[k] - mx)) / z;
      grad.at(r, k) = static_cast<float>((p - (k == y ? 1.0 : 0.0)) / static_cast<double>(n));
    }
    total += std::log(z) - static_cast<double>(row[y] - mx);
  }
  if (loss) *loss = total / static_cast<double>(n);
  return grad;
}

}  // namespace

LinearProbe::LinearProbe(Network<float> scorer, std::vector<float> mean, std::vector<float> inv_std,
                         std::vector<int> classes)
    : scorer_(std::move(scorer)), mean_(std::move(mean)), inv_std_(std::move(inv_std)), classes_(std::move(classes)) {}

Tensor<float> LinearProbe::standardize(const Tensor<float>& latents) const {
  if (latents.cols() != mean_.size()) throw ShapeError("probe latent width mismatch");
  Tensor<float> out({latents.rows(), latents.cols()}, std::vector<float>(latents.values().begin(), latents.values().end()));
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean_[j]) * inv_std_[j];
  }
  return out;
}

std::vector<int> LinearProbe::predict(const Tensor<float>& latents) const {
  auto idx = argmax_rows(scorer_.infer(standardize(latents)));
  for (auto& i : idx) i = classes_[static_cast<std::size_t>(i)];
  return idx;
}

double LinearProbe::accuracy(const Tensor<float>& latents, std::span<const int> labels) const {
  return fraction_equal(predict(latents), labels);
}

LinearProbe train_probe(const Tensor<float>& latents, std::span<const int> labels, const ProbeConfig& cfg) {
  const auto n = latents.rows();
  const auto d = latents.cols();
  if (labels.size() != n) throw ShapeError("probe: latent rows and label count differ");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw DataError("probe needs at least two classes");
  std::vector<int> classes(distinct.begin(), distinct.end());
  std::vector<std::size_t> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    target[i] = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), labels[i]) - classes.begin());
  }

  std::vector<double> mean(d, 0.0);
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += latents.at(r, j);
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = latents.at(r, j) - mean[j];
      var[j] += dv * dv;
    }
  }
  std::vector<float> mean_f(d);
  std::vector<float> inv_std(d);
  for (std::size_t j = 0; j < d; ++j) {
    mean_f[j] = static_cast<float>(mean[j]);
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    inv_std[j] = sd > 1e-12 ? static_cast<float>(1.0 / sd) : 0.0f;
  }

  const auto k = classes.size();
  std::vector<Layer<float>> layers;
  layers.push_back(Layer<float>::affine(d, k));
  Network<float> scorer(std::move(layers));
  scorer.init_glorot(mix_seed(cfg.seed, 11));
  Tensor<float> xs({n, d});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) xs.at(r, j) = (latents.at(r, j) - mean_f[j]) * inv_std[j];
  }

  AdamState<float> adam(AdamConfig{cfg.learning_rate});
  const data::Batcher batcher(n, cfg.batch_size, mix_seed(cfg.seed, 12));
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& idx : batcher.epoch(epoch)) {
      const auto xb = xs.gather_rows(idx);
      const auto scores = scorer.forward(xb);
      Tensor<float> g({idx.size(), k});
      const float inv_b = 1.0f / static_cast<float>(idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t c = 0; c < k; ++c) {
          const float y = target[idx[r]] == c ? 1.0f : -1.0f;
          if (y * scores.at(r, c) < 1.0f) g.at(r, c) = -y * inv_b;
        }
      }
      auto grads = scorer.backward(g);
      auto params = scorer.mutable_parameters();
      const auto& w = *params[0];
      for (std::size_t i = 0; i < w.size(); ++i) grads.params[0][i] += static_cast<float>(cfg.l2) * w[i];
      adam_step<float>(params, grads.params, adam);
    }
  }
  return LinearProbe(std::move(scorer), std::move(mean_f), std::move(inv_std), std::move(classes));
}

std::vector<int> Classifier::predict(const Tensor<float>& x) const { return argmax_rows(net.infer(x)); }

double Classifier::accuracy(const Tensor<float>& x, std::span<const int> labels) const {
  return fraction_equal(predict(x), labels);
}

Tensor<float> Classifier::input_gradient(const Tensor<float>& x, std::span<const int> labels) const {
  if (labels.size() != x.rows()) throw ShapeError("input_gradient: label count mismatch");
  auto work = net;
  const auto logits = work.forward(x);
  const auto g = cross_entropy_grad(logits, labels, nullptr);
  auto dx = work.backward_input(g);
  dx.require_finite("classifier input gradient");
  return dx;
}

Classifier train_classifier(const data::Dataset& ds, const ClassifierConfig& cfg, std::size_t n_classes) {
  ds.validate();
  if (!ds.labels) throw DataError("classifier training needs labels");
  int max_label = 0;
  for (int l : *ds.labels) {
    if (l < 0) throw DataError("labels must be nonnegative");
    max_label = std::max(max_label, l);
  }
  Classifier clf;
  clf.n_classes = std::max(n_classes, static_cast<std::size_t>(max_label) + 1);
  std::vector<std::size_t> dims{ds.pixels()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(clf.n_classes);
  clf.net = Network<float>::mlp(dims, LayerKind::relu, std::nullopt);
  clf.net.init_glorot(mix_seed(cfg.seed, 21));

  AdamState<float> adam(AdamConfig{cfg.learning_rate});
  const data::Batcher batcher(ds.size(), cfg.batch_size, mix_seed(cfg.seed, 22));
  std::vector<int> yb;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& idx : batcher.epoch(epoch)) {
      yb.clear();
      for (auto i : idx) yb.push_back((*ds.labels)[i]);
      const auto logits = clf.net.forward(ds.batch(idx));
      double loss = 0.0;
      const auto g = cross_entropy_grad(logits, yb, &loss);
      if (!std::isfinite(loss)) throw NumericError("classifier training diverged");
      auto grads = clf.net.backward(g);
      adam_step<float>(clf.net.mutable_parameters(), grads.params, adam);
    }
  }
  return clf;
}

Classifier train_substitute(const data::Dataset& ds, const ClassifierConfig& cfg, std::size_t n_classes) {
  if (!ds.labels) throw DataError("substitute training needs labels");
  if (ds.size() < n_classes) {
    throw DataError("substitute needs at least " + std::to_string(n_classes) + " samples, got " +
                    std::to_string(ds.size()));
  }
  if (ds.class_count() < 2) throw DataError("substitute training set holds a single class");
  return train_classifier(ds, cfg, n_classes);
}

}  // namespace nre::eval
