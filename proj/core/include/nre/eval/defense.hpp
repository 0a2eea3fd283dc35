// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nre/eval/classifier.hpp"
#include "nre/train/model.hpp"

namespace nre::eval {

enum class AttackMode { white_box, black_box_substitute };

std::string to_string(AttackMode mode);
AttackMode parse_attack_mode(const std::string& text);

/// clip(X + eps * sign(dL/dX), 0, 1) with the gradient taken from
/// `gradient_source` (the target itself in white-box mode, the substitute in
/// black-box mode).
Tensor<float> fgsm_attack(const Classifier& gradient_source, const Tensor<float>& x, std::span<const int> labels,
                          double epsilon);

/// decoder(encoder(x)); the MagNet-style baseline when given the plain
/// autoencoder.
Tensor<float> defend_refine(const train::Autoencoder<float>& ae, const Tensor<float>& x);

struct NoiseConfig {
  double noise_sigma = 0.2;
  std::uint64_t seed = 0;
};

/// Additive Gaussian pixel noise, clipped back to [0,1].
Tensor<float> add_noise(const Tensor<float>& x, const NoiseConfig& cfg);

struct DefenseRow {
  double epsilon = 0.0;
  double no_defense = 0.0;
  double plain_ae_refine = 0.0;
  double nre_refine = 0.0;
};

/// Target-classifier accuracy on FGSM inputs per epsilon, raw and after each
/// refiner.
std::vector<DefenseRow> defense_table(const Classifier& target, const Classifier& gradient_source,
                                      const train::Autoencoder<float>& plain, const train::Autoencoder<float>& nre,
                                      const data::Dataset& test, std::span<const double> epsilons);

/// Columns: epsilon,no_defense,plain_ae_refine,nre_refine.
void write_defense_csv(const std::filesystem::path& path, std::span<const DefenseRow> rows);

/// ||X - X~||^2 per row.
std::vector<double> anomaly_scores(const train::Autoencoder<float>& ae, const Tensor<float>& x);

}  // namespace nre::eval
