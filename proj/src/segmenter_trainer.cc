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

#include "layoutkit/segmenter_trainer.h"

#include "layoutkit/digest.h"

namespace layoutkit {

MaskMap predict_dataset(const Weights& weights, const Dataset& subset,
                        const TrainingData& data) {
  MaskMap predictions;
  for (const ImageRecord& image : subset.images) {
    for (auto& [name, mask] : predict_masks(weights, data.raster_for(image.id))) {
      predictions.emplace(CellKey{image.id, name}, std::move(mask));
    }
  }
  return predictions;
}

SegmenterTrainer::SegmenterTrainer(TrainerConfig config) : config_(config) {
  validate_trainer_config(config_);
}

StageOutcome SegmenterTrainer::run_stage(const StageRequest& request,
                                         const TrainingData& data) {
  std::vector<GrayImage> rasters;
  rasters.reserve(request.train.images.size());
  for (const ImageRecord& image : request.train.images) {
    rasters.push_back(data.raster_for(image.id));
  }
  const std::vector<LabeledImage> training_set =
      build_training_set(request.train, rasters);

  const Weights initial = request.init_weights
                              ? load_weights(*request.init_weights)
                              : initial_weights(training_set);
  TrainerConfig config = config_;
  config.seed = request.seed;

  StageOutcome outcome;
  outcome.final_weights = request.stage_dir / "weights.tseg";
  outcome.history_csv = request.stage_dir / "history.csv";
  TrainResult result;
  try {
    result = train(initial, training_set, request.schedule, config);
    outcome.status = StageStatus::kCompleted;
  } catch (const TrainingDiverged& e) {
    result = e.last_finite();
    outcome.status = StageStatus::kDiverged;
    outcome.message = e.what();
  }
  outcome.iterations_run = static_cast<std::int64_t>(result.history.size());
  save_weights(outcome.final_weights, result.weights);
  write_file_atomic(outcome.history_csv, history_to_csv(result.history));

  if (outcome.status == StageStatus::kCompleted) {
    outcome.train_dice =
        evaluate(predict_dataset(result.weights, request.train, data),
                 request.train)
            .macro;
    if (!request.val.images.empty()) {
      outcome.val_dice =
          evaluate(predict_dataset(result.weights, request.val, data),
                   request.val)
              .macro;
    }
  }
  return outcome;
}

}  // namespace layoutkit
