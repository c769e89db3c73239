/* Copyright 2026 The Layoutkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LAYOUTKIT_SEGMENTER_H_
#define LAYOUTKIT_SEGMENTER_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "layoutkit/coco.h"
#include "layoutkit/errors.h"
#include "layoutkit/image.h"
#include "layoutkit/mask.h"
#include "layoutkit/schedule.h"

namespace layoutkit {

// Per-pixel softmax classifier over the four layout classes plus background.

// Feature columns: bias, column position, row position, intensity and the
// 3x3 mean intensity (edge-replicated). Positions use pixel centers,
// (c + 0.5) / width and (r + 0.5) / height, so every feature is in [0, 1].
inline constexpr int kNumFeatures = 5;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// One row per pixel in row-major pixel order.
template <typename Scalar = double>
Matrix<Scalar> featurize(const GrayImage& image) {
  const int height = image.height();
  const int width = image.width();
  Matrix<Scalar> features(static_cast<Eigen::Index>(height) * width,
                          kNumFeatures);
  auto at = [&](int r, int c) {
    r = std::clamp(r, 0, height - 1);
    c = std::clamp(c, 0, width - 1);
    return static_cast<Scalar>(image.pixels(r, c));
  };
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      Scalar neighborhood = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) neighborhood += at(r + dr, c + dc);
      }
      const Eigen::Index row = static_cast<Eigen::Index>(r) * width + c;
      features(row, 0) = Scalar(1);
      features(row, 1) = (Scalar(c) + Scalar(0.5)) / Scalar(width);
      features(row, 2) = (Scalar(r) + Scalar(0.5)) / Scalar(height);
      features(row, 3) = at(r, c) / Scalar(255);
      features(row, 4) = neighborhood / Scalar(9 * 255);
    }
  }
  return features;
}

template <typename Scalar>
struct SoftmaxWeights {
  // (num_classes + 1) x num_features; the last row scores background.
  Matrix<Scalar> coefficients;
  // The model sees (feature - offset) * transform.
  RowVector<Scalar> feature_offset;
  Matrix<Scalar> feature_transform;

  static SoftmaxWeights zeros(int num_classes, int num_features) {
    SoftmaxWeights w;
    w.coefficients = Matrix<Scalar>::Zero(num_classes + 1, num_features);
    w.feature_offset = RowVector<Scalar>::Zero(num_features);
    w.feature_transform = Matrix<Scalar>::Identity(num_features, num_features);
    return w;
  }

  int num_classes() const { return static_cast<int>(coefficients.rows()) - 1; }
  int num_features() const { return static_cast<int>(coefficients.cols()); }
  int background() const { return num_classes(); }

  bool all_finite() const {
    return coefficients.allFinite() && feature_offset.allFinite() &&
           feature_transform.allFinite();
  }

  template <typename Derived>
  Matrix<Scalar> normalize(const Eigen::MatrixBase<Derived>& features) const {
    return (features.rowwise() - feature_offset) * feature_transform;
  }

  friend bool operator==(const SoftmaxWeights& a, const SoftmaxWeights& b) {
    return a.coefficients.rows() == b.coefficients.rows() &&
           a.coefficients.cols() == b.coefficients.cols() &&
           a.coefficients == b.coefficients &&
           a.feature_offset == b.feature_offset &&
           a.feature_transform == b.feature_transform;
  }
};

using Weights = SoftmaxWeights<double>;

// Row-wise softmax of logit_scale * features * coefficients^T.
template <typename Scalar, typename Derived>
Matrix<Scalar> class_probabilities(const Matrix<Scalar>& coefficients,
                                   const Eigen::MatrixBase<Derived>& features,
                                   Scalar logit_scale = Scalar(1)) {
  Matrix<Scalar> logits = logit_scale * (features * coefficients.transpose());
  logits.colwise() -= logits.rowwise().maxCoeff();
  logits = logits.array().exp();
  logits.array().colwise() /= logits.rowwise().sum().array();
  return logits;
}

template <typename Scalar>
struct LossAndGrad {
  Scalar loss;
  Matrix<Scalar> grad;
};

// Mean softmax cross-entropy over the batch rows and its exact gradient with
// respect to `coefficients`. Labels index coefficient rows.
template <typename Scalar, typename Derived>
LossAndGrad<Scalar> loss_and_grad(const Matrix<Scalar>& coefficients,
                                  const Eigen::MatrixBase<Derived>& features,
                                  std::span<const int> labels,
                                  Scalar logit_scale = Scalar(1)) {
  const Eigen::Index n = features.rows();
  if (n == 0 || static_cast<std::size_t>(n) != labels.size()) {
    throw ValidationError("batch needs one label per feature row");
  }
  if (features.cols() != coefficients.cols()) {
    throw ValidationError("feature width does not match the weights");
  }
  if (!features.allFinite() || !coefficients.allFinite()) {
    throw ValidationError("non-finite input to loss_and_grad");
  }
  const Eigen::Index classes = coefficients.rows();

  Matrix<Scalar> logits = logit_scale * (features * coefficients.transpose());
  const auto row_max = logits.rowwise().maxCoeff().eval();
  logits.colwise() -= row_max;
  Matrix<Scalar> probs = logits.array().exp();
  const auto row_sum = probs.rowwise().sum().eval();
  probs.array().colwise() /= row_sum.array();

  Scalar loss(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= classes) {
      throw ValidationError("label " + std::to_string(label) +
                            " outside [0, " + std::to_string(classes) + ")");
    }
    loss += std::log(row_sum(i)) - logits(i, label);
    probs(i, label) -= Scalar(1);
  }
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
  return {loss * inv_n,
          (logit_scale * inv_n) * (probs.transpose() * features)};
}

// Canonical weight-file bytes: "TSEG1", num_classes and num_features as int32
// LE, the coefficient matrix row-major as float64 LE, then the feature offset
// vector and the feature transform matrix (row-major), also float64 LE.
std::string serialize_weights(const Weights& weights);
Weights parse_weights(std::string_view bytes);
void save_weights(const std::filesystem::path& path, const Weights& weights);
Weights load_weights(const std::filesystem::path& path);

struct LabeledImage {
  Eigen::MatrixXd features;
  // Class index per pixel, kNumLayoutClasses for background.
  std::vector<int> labels;
  // Pixel rows grouped by label, one group per label present.
  std::vector<std::vector<Eigen::Index>> class_pixels;

  static LabeledImage make(Eigen::MatrixXd features, std::vector<int> labels);
};

// Rasters align with dataset.images. Later annotations win where two overlap.
std::vector<LabeledImage> build_training_set(
    const Dataset& dataset, std::span<const GrayImage> rasters);

// Zero coefficients; the offset and transform whiten the non-bias features
// under a class-balanced pixel distribution (every label present in the
// training set weighted equally). The bias column passes through.
Weights initial_weights(std::span<const LabeledImage> training_set);

struct TrainerConfig {
  // A step samples pixels_per_image pixels from each of images_per_batch
  // seeded-chosen images. Within an image each draw first picks one of the
  // labels present, then a pixel carrying it.
  int images_per_batch = 8;
  int pixels_per_image = 64;
  // Threads assembling upcoming batches ahead of the update loop.
  int workers = 2;
  std::uint64_t seed = 0;
  // Multiplies the logits; sets the curvature the learning rates act on.
  double logit_scale = 64.0;

  int batch_size() const { return images_per_batch * pixels_per_image; }
};

void validate_trainer_config(const TrainerConfig& config);

struct HistoryRow {
  std::int64_t iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  Weights weights;
  std::vector<HistoryRow> history;
};

// Raised when the loss or weights become non-finite. Carries the last
// finite state.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& message, TrainResult last_finite)
      : Error(message), last_finite_(std::move(last_finite)) {}
  const TrainResult& last_finite() const { return last_finite_; }

 private:
  TrainResult last_finite_;
};

// Plain SGD: w <- w - lr_at(schedule, t) * grad for t in [0, max_iter).
// A schedule with max_iter == 0 returns `initial` untouched.
TrainResult train(const Weights& initial,
                  std::span<const LabeledImage> training_set,
                  const ScheduleConfig& schedule, const TrainerConfig& config);

// Batch used at iteration t; depends only on (seed, t).
void sample_batch(std::span<const LabeledImage> training_set,
                  const TrainerConfig& config, std::int64_t iteration,
                  Eigen::MatrixXd& features, std::vector<int>& labels);

// Argmax class per pixel; one mask per layout class, background pixels in
// none of them.
std::map<std::string, BitMask> predict_masks(const Weights& weights,
                                             const GrayImage& image);

std::string history_to_csv(std::span<const HistoryRow> history);

}  // namespace layoutkit

#endif  // LAYOUTKIT_SEGMENTER_H_
