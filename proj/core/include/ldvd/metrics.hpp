/* Copyright (c) 2026 The LDVD Lab Authors. All Rights Reserved.
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at
   http://www.apache.org/licenses/LICENSE-2.0
   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ldvd/netspec.hpp"
#include "ldvd/network.hpp"
#include "ldvd/video.hpp"

namespace ldvd {

struct FeatureStats {
  Tensor mean;  // (D)
  Tensor cov;   // (D, D), symmetric
  int64_t count = 0;
};

/// Mean and (unbiased) covariance of row-major feature rows (N, D), with
/// compensated accumulation.
FeatureStats compute_feature_stats(const Tensor& features);

/// exp(E[KL(p(y|x) || p(y))]); 1 for constant conditionals, C for balanced
/// one-hots. Rows must be valid distributions.
double inception_style_score(const Tensor& probs);

/// |mu1 - mu2|^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}); covariances are
/// symmetrized and eigenvalue-floored at zero before the matrix root.
double frechet_distance(const FeatureStats& a, const FeatureStats& b);

double param_reduction_percent(int64_t base_count, int64_t variant_count);

/// Frozen feature network standing in for the C3D evaluator: trained once
/// on the synthetic motion classes, checksummed, then only ever loaded.
class SurrogateExtractor {
 public:
  struct TrainSettings {
    int64_t canvas = 16;
    int64_t frames = 16;
    int64_t channels = 1;
    int64_t batch = 12;
    int64_t steps = 900;
    double lr = 2e-3;
    uint64_t seed = 2024;
  };

  static SurrogateExtractor train(const TrainSettings& settings);
  static SurrogateExtractor load(const std::string& path);
  void save(const std::string& path) const;

  /// features: penultimate activations (N, D); probs: softmax rows (N, C).
  std::pair<Tensor, Tensor> extract(const Tensor& batch);
  double accuracy(const Tensor& batch, const std::vector<int>& labels);
  int64_t feature_dim() const;
  int64_t num_classes() const { return 3; }
  uint64_t checksum() const;

 private:
  SurrogateExtractor(Network trunk, Network head);
  Network trunk_;  // video -> feature vector
  Network head_;   // feature vector -> class logits
};

}  // namespace ldvd
