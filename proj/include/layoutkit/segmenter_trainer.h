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

#ifndef LAYOUTKIT_SEGMENTER_TRAINER_H_
#define LAYOUTKIT_SEGMENTER_TRAINER_H_

#include "layoutkit/metrics.h"
#include "layoutkit/orchestrator.h"
#include "layoutkit/segmenter.h"

namespace layoutkit {

// Predicted masks for every image of `subset`, rasters looked up in `data`.
MaskMap predict_dataset(const Weights& weights, const Dataset& subset,
                        const TrainingData& data);

// Trainer slot occupied by the softmax segmenter. Each stage writes
// weights.tseg and history.csv into its stage directory and reports the
// macro Dice of its train and val halves.
class SegmenterTrainer : public Trainer {
 public:
  explicit SegmenterTrainer(TrainerConfig config = {});

  StageOutcome run_stage(const StageRequest& request,
                         const TrainingData& data) override;

 private:
  TrainerConfig config_;
};

}  // namespace layoutkit

#endif  // LAYOUTKIT_SEGMENTER_TRAINER_H_
