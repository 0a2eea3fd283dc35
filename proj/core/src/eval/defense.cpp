// SPDX-License-Identifier: Apache-2.0
#include "nre/eval/defense.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>

#include "nre/core/error.hpp"
#include "nre/core/rng.hpp"

namespace nre::eval {

std::string to_string(AttackMode mode) {
  return mode == AttackMode::white_box ? "white-box" : "black-box-substitute";
}

AttackMode parse_attack_mode(const std::string& text) {
  if (text == "white-box") return AttackMode::white_box;
  if (text == "black-box-substitute" || text == "black-box") return AttackMode::black_box_substitute;
  throw ConfigError("unknown attack mode '" + text + "'");
}

Tensor<float> fgsm_attack(const Classifier& gradient_source, const Tensor<float>& x, std::span<const int> labels,
                          double epsilon) {
  if (!(epsilon >= 0.0)) throw ConfigError("FGSM epsilon must be >= 0");
  auto adv = x.reshaped({x.rows(), x.cols()});
  if (epsilon == 0.0) return adv;
  const auto grad = gradient_source.input_gradient(adv, labels);
  const auto eps = static_cast<float>(epsilon);
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const float g = grad[i];
    const float step = g > 0.0f ? eps : (g < 0.0f ? -eps : 0.0f);
    adv[i] = std::clamp(adv[i] + step, 0.0f, 1.0f);
  }
  return adv;
}

Tensor<float> defend_refine(const train::Autoencoder<float>& ae, const Tensor<float>& x) {
  if (x.cols() != ae.encoder.input_dim()) throw ShapeError("refiner input width mismatch");
  return ae.reconstruct(x);
}

Tensor<float> add_noise(const Tensor<float>& x, const NoiseConfig& cfg) {
  if (!(cfg.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  auto out = x;
  auto rng = make_rng(cfg.seed, 31);
  std::normal_distribution<double> normal(0.0, cfg.noise_sigma);
  for (auto& v : out.values()) v = static_cast<float>(std::clamp(static_cast<double>(v) + normal(rng), 0.0, 1.0));
  return out;
}

std::vector<DefenseRow> defense_table(const Classifier& target, const Classifier& gradient_source,
                                      const train::Autoencoder<float>& plain, const train::Autoencoder<float>& nre,
                                      const data::Dataset& test, std::span<const double> epsilons) {
  if (!test.labels) throw DataError("defense evaluation needs labels");
  const auto x = test.flat();
  const auto& y = *test.labels;
  std::vector<DefenseRow> rows;
  for (double eps : epsilons) {
    const auto adv = fgsm_attack(gradient_source, x, y, eps);
    DefenseRow row;
    row.epsilon = eps;
    row.no_defense = target.accuracy(adv, y);
    row.plain_ae_refine = target.accuracy(defend_refine(plain, adv), y);
    row.nre_refine = target.accuracy(defend_refine(nre, adv), y);
    rows.push_back(row);
  }
  return rows;
}

void write_defense_csv(const std::filesystem::path& path, std::span<const DefenseRow> rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  // Shortest text that parses back to the same double.
  auto cell = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  out << "epsilon,no_defense,plain_ae_refine,nre_refine\n";
  for (const auto& r : rows) {
    out << cell(r.epsilon) << "," << cell(r.no_defense) << "," << cell(r.plain_ae_refine) << "," << cell(r.nre_refine)
        << "\n";
  }
}

std::vector<double> anomaly_scores(const train::Autoencoder<float>& ae, const Tensor<float>& x) {
  const auto flat = x.reshaped({x.rows(), x.cols()});
  const auto recon = ae.reconstruct(flat);
  std::vector<double> scores(flat.rows(), 0.0);
  for (std::size_t r = 0; r < flat.rows(); ++r) {
    const auto a = flat.row(r);
    const auto b = recon.row(r);
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = static_cast<double>(a[j]) - static_cast<double>(b[j]);
      scores[r] += d * d;
    }
  }
  return scores;
}

}  // namespace nre::eval
