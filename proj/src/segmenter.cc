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

#include "layoutkit/segmenter.h"

#include <bit>
#include <cstring>
#include <future>
#include <sstream>

#include <Eigen/Cholesky>

#include "layoutkit/digest.h"
#include "layoutkit/random.h"

namespace layoutkit {
namespace {

constexpr std::string_view kWeightsMagic = "TSEG1";

void put_u32(std::string& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(value >> (8 * i)));
}

void put_f64(std::string& out, double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(bits >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t take(int width) {
    if (bytes_.size() - pos_ < static_cast<std::size_t>(width)) {
      throw ParseError("truncated weight file", pos_);
    }
    std::uint64_t value = 0;
    for (int i = 0; i < width; ++i) {
      value |= std::uint64_t{static_cast<unsigned char>(bytes_[pos_++])}
               << (8 * i);
    }
    return value;
  }
  double take_f64() { return std::bit_cast<double>(take(8)); }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_weights(const Weights& weights) {
  std::string out(kWeightsMagic);
  put_u32(out, static_cast<std::uint32_t>(weights.num_classes()));
  put_u32(out, static_cast<std::uint32_t>(weights.num_features()));
  for (Eigen::Index r = 0; r < weights.coefficients.rows(); ++r) {
    for (Eigen::Index c = 0; c < weights.coefficients.cols(); ++c) {
      put_f64(out, weights.coefficients(r, c));
    }
  }
  for (Eigen::Index c = 0; c < weights.feature_offset.size(); ++c) {
    put_f64(out, weights.feature_offset(c));
  }
  for (Eigen::Index r = 0; r < weights.feature_transform.rows(); ++r) {
    for (Eigen::Index c = 0; c < weights.feature_transform.cols(); ++c) {
      put_f64(out, weights.feature_transform(r, c));
    }
  }
  return out;
}

Weights parse_weights(std::string_view bytes) {
  if (bytes.substr(0, kWeightsMagic.size()) != kWeightsMagic) {
    throw ParseError("weight file does not start with TSEG1", 0);
  }
  ByteReader reader(bytes.substr(kWeightsMagic.size()));
  const auto num_classes = static_cast<std::int32_t>(reader.take(4));
  const auto num_features = static_cast<std::int32_t>(reader.take(4));
  if (num_classes < 1 || num_features < 1 || num_classes > 4096 ||
      num_features > 4096) {
    throw ParseError("implausible weight shape", kWeightsMagic.size());
  }
  Weights weights = Weights::zeros(num_classes, num_features);
  for (Eigen::Index r = 0; r < weights.coefficients.rows(); ++r) {
    for (Eigen::Index c = 0; c < weights.coefficients.cols(); ++c) {
      weights.coefficients(r, c) = reader.take_f64();
    }
  }
  for (int c = 0; c < num_features; ++c) weights.feature_offset(c) = reader.take_f64();
  for (int r = 0; r < num_features; ++r) {
    for (int c = 0; c < num_features; ++c) {
      weights.feature_transform(r, c) = reader.take_f64();
    }
  }
  if (!reader.done()) {
    throw ParseError("trailing bytes in weight file",
                     kWeightsMagic.size() + reader.position());
  }
  if (!weights.all_finite()) {
    throw ValidationError("weight file holds non-finite values");
  }
  return weights;
}

void save_weights(const std::filesystem::path& path, const Weights& weights) {
  write_file_atomic(path, serialize_weights(weights));
}

Weights load_weights(const std::filesystem::path& path) {
  try {
    return parse_weights(read_binary_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.byte_offset());
  }
}

LabeledImage LabeledImage::make(Eigen::MatrixXd features,
                                std::vector<int> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ValidationError("need one label per feature row");
  }
  LabeledImage image{std::move(features), std::move(labels), {}};
  std::map<int, std::vector<Eigen::Index>> groups;
  for (std::size_t p = 0; p < image.labels.size(); ++p) {
    groups[image.labels[p]].push_back(static_cast<Eigen::Index>(p));
  }
  for (auto& [label, pixels] : groups) {
    image.class_pixels.push_back(std::move(pixels));
  }
  return image;
}

std::vector<LabeledImage> build_training_set(
    const Dataset& dataset, std::span<const GrayImage> rasters) {
  if (rasters.size() != dataset.images.size()) {
    throw ValidationError("need exactly one raster per dataset image");
  }
  std::vector<LabeledImage> set;
  set.reserve(rasters.size());
  for (std::size_t i = 0; i < rasters.size(); ++i) {
    const ImageRecord& record = dataset.images[i];
    const GrayImage& raster = rasters[i];
    if (raster.height() != record.height || raster.width() != record.width) {
      throw ValidationError("raster for image " + std::to_string(record.id) +
                            " does not match its record dimensions");
    }
    Eigen::MatrixXd features = featurize(raster);
    std::vector<int> labels(static_cast<std::size_t>(features.rows()),
                            kNumLayoutClasses);
    for (const auto& annotation : dataset.annotations) {
      if (annotation.image_id != record.id) continue;
      const CategoryRecord* category =
          dataset.find_category(annotation.category_id);
      const auto index =
          category ? layout_class_index(category->name) : std::nullopt;
      if (!index) {
        throw ValidationError("annotation " + std::to_string(annotation.id) +
                              " is not one of the layout classes");
      }
      const BitMask mask =
          rasterize(annotation.segmentation, record.height, record.width);
      for (int r = 0; r < record.height; ++r) {
        for (int c = 0; c < record.width; ++c) {
          if (mask(r, c)) {
            labels[static_cast<std::size_t>(r) * record.width + c] = *index;
          }
        }
      }
    }
    set.push_back(LabeledImage::make(std::move(features), std::move(labels)));
  }
  return set;
}

Weights initial_weights(std::span<const LabeledImage> training_set) {
  Weights weights = Weights::zeros(kNumLayoutClasses, kNumFeatures);
  constexpr int kInputs = kNumFeatures - 1;
  using Vector = Eigen::Matrix<double, kInputs, 1>;
  using Square = Eigen::Matrix<double, kInputs, kInputs>;
  std::map<int, Vector> sum;
  std::map<int, Square> sum_outer;
  std::map<int, double> count;
  for (const auto& image : training_set) {
    for (Eigen::Index p = 0; p < image.features.rows(); ++p) {
      const int label = image.labels[static_cast<std::size_t>(p)];
      const Vector x = image.features.row(p).tail<kInputs>().transpose();
      auto [it, fresh] = sum.try_emplace(label, Vector::Zero());
      if (fresh) sum_outer[label] = Square::Zero();
      it->second += x;
      sum_outer[label] += x * x.transpose();
      count[label] += 1.0;
    }
  }
  if (sum.empty()) return weights;

  Vector mean = Vector::Zero();
  Square second = Square::Zero();
  for (const auto& [label, n] : count) {
    mean += sum[label] / n;
    second += sum_outer[label] / n;
  }
  const double classes = static_cast<double>(count.size());
  mean /= classes;
  second /= classes;
  Square covariance = second - mean * mean.transpose();
  covariance.diagonal().array() += 1e-9;

  Eigen::LLT<Square> cholesky(covariance);
  Square inverse_factor;
  if (cholesky.info() == Eigen::Success) {
    inverse_factor = cholesky.matrixL().solve(Square::Identity());
  } else {
    inverse_factor = covariance.diagonal().cwiseMax(1e-12).cwiseSqrt()
                         .cwiseInverse().asDiagonal();
  }
  weights.feature_offset.tail<kInputs>() = mean.transpose();
  weights.feature_transform.bottomRightCorner<kInputs, kInputs>() =
      inverse_factor.transpose();
  return weights;
}

void validate_trainer_config(const TrainerConfig& config) {
  if (config.images_per_batch < 1 || config.pixels_per_image < 1) {
    throw ValidationError("batch size must be at least 1");
  }
  if (config.workers < 1) throw ValidationError("workers must be at least 1");
  if (!(config.logit_scale > 0.0) || !std::isfinite(config.logit_scale)) {
    throw ValidationError("logit_scale must be positive and finite");
  }
}

void sample_batch(std::span<const LabeledImage> training_set,
                  const TrainerConfig& config, std::int64_t iteration,
                  Eigen::MatrixXd& features, std::vector<int>& labels) {
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(iteration)));
  const auto batch = static_cast<Eigen::Index>(config.batch_size());
  features.resize(batch, training_set.front().features.cols());
  labels.resize(static_cast<std::size_t>(batch));
  Eigen::Index row = 0;
  for (int i = 0; i < config.images_per_batch; ++i) {
    const LabeledImage& image =
        training_set[uniform_index(rng, training_set.size())];
    for (int p = 0; p < config.pixels_per_image; ++p, ++row) {
      const auto& group =
          image.class_pixels[uniform_index(rng, image.class_pixels.size())];
      const Eigen::Index pixel = group[uniform_index(rng, group.size())];
      features.row(row) = image.features.row(pixel);
      labels[static_cast<std::size_t>(row)] =
          image.labels[static_cast<std::size_t>(pixel)];
    }
  }
}

TrainResult train(const Weights& initial,
                  std::span<const LabeledImage> training_set,
                  const ScheduleConfig& schedule, const TrainerConfig& config) {
  TrainResult result{initial, {}};
  if (schedule.max_iter == 0) return result;
  validate_schedule(schedule);
  validate_trainer_config(config);
  if (training_set.empty()) {
    throw ValidationError("training set is empty");
  }
  if (!initial.all_finite()) {
    throw ValidationError("initial weights are not finite");
  }

  // Normalization is fixed for the whole run, so apply it once up front.
  std::vector<LabeledImage> normalized;
  normalized.reserve(training_set.size());
  for (const auto& image : training_set) {
    normalized.push_back({initial.normalize(image.features), image.labels,
                          image.class_pixels});
  }

  struct Batch {
    Eigen::MatrixXd features;
    std::vector<int> labels;
  };
  auto make_batch = [&](std::int64_t t) {
    Batch batch;
    sample_batch(normalized, config, t, batch.features, batch.labels);
    return batch;
  };

  result.history.reserve(static_cast<std::size_t>(schedule.max_iter));
  Weights& weights = result.weights;
  for (std::int64_t chunk = 0; chunk < schedule.max_iter;
       chunk += config.workers) {
    const std::int64_t end =
        std::min<std::int64_t>(chunk + config.workers, schedule.max_iter);
    std::vector<std::future<Batch>> pending;
    for (std::int64_t t = chunk; t < end; ++t) {
      pending.push_back(std::async(config.workers > 1 ? std::launch::async
                                                      : std::launch::deferred,
                                   make_batch, t));
    }
    for (std::int64_t t = chunk; t < end; ++t) {
      const Batch batch = pending[static_cast<std::size_t>(t - chunk)].get();
      const double lr = lr_at(schedule, t);
      auto [loss, grad] = loss_and_grad<double>(
          weights.coefficients, batch.features, batch.labels,
          config.logit_scale);
      Eigen::MatrixXd next = weights.coefficients - lr * grad;
      if (!std::isfinite(loss) || !next.allFinite()) {
        throw TrainingDiverged(
            "training diverged at iteration " + std::to_string(t), result);
      }
      weights.coefficients = std::move(next);
      result.history.push_back({t, loss, lr});
    }
  }
  return result;
}

std::map<std::string, BitMask> predict_masks(const Weights& weights,
                                             const GrayImage& image) {
  const Eigen::MatrixXd scores =
      weights.normalize(featurize(image)) * weights.coefficients.transpose();
  std::map<std::string, BitMask> masks;
  std::vector<BitMask*> by_class;
  for (int k = 0; k < weights.num_classes(); ++k) {
    const std::string name = k < kNumLayoutClasses
                                 ? std::string(kLayoutClassNames[k])
                                 : "class_" + std::to_string(k);
    auto [it, inserted] =
        masks.emplace(name, BitMask(image.height(), image.width()));
    by_class.push_back(&it->second);
  }
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      Eigen::Index best = 0;
      scores.row(static_cast<Eigen::Index>(r) * image.width() + c).maxCoeff(&best);
      if (best < weights.num_classes()) by_class[best]->set(r, c);
    }
  }
  return masks;
}

std::string history_to_csv(std::span<const HistoryRow> history) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,loss,lr\n";
  for (const auto& row : history) {
    out << row.iteration << ',' << row.loss << ',' << row.lr << '\n';
  }
  return out.str();
}

}  // namespace layoutkit
