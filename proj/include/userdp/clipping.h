//
// Copyright 2026 The userdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef USERDP_CLIPPING_H_
#define USERDP_CLIPPING_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "userdp/histogram.h"
#include "userdp/random.h"

namespace userdp {

// L1 clipping pairs with the Laplace release, L2 clipping with the Gaussian
// release.
enum class ClipNorm { kL1, kL2 };

double NormOf(const UserHistogram& histogram, ClipNorm norm);

// Scales `x` by threshold / max(threshold, ||x||_q). Vectors already inside the
// ball are returned unchanged. Fails when threshold <= 0.
absl::StatusOr<std::vector<double>> Clip(const UserHistogram& histogram,
                                         double threshold, ClipNorm norm);
absl::StatusOr<std::vector<double>> ClipVector(std::span<const double> x,
                                               double threshold, ClipNorm norm);

// Sum over users of the clipped histograms.
absl::StatusOr<std::vector<double>> ClippedSum(const Dataset& dataset,
                                               double threshold, ClipNorm norm);

// Standard deviation of the Gaussian release:
//   threshold * sqrt(2 ln(1.32 / delta)) / epsilon.
// With this scale E||noise||_1 = threshold * NoiseCoefficient(d, budget).
double GaussianReleaseSigma(double threshold, const PrivacyParams& budget);

// Pure-DP release: L1-clipped sum plus Laplace(threshold / epsilon) noise on
// every coordinate. Requires budget.delta == 0.
absl::StatusOr<NoisyEstimate> ReleaseLaplace(const Dataset& dataset,
                                             double threshold,
                                             const PrivacyParams& budget,
                                             RandomSource& source);

// Approximate-DP release: L2-clipped sum plus Gaussian noise with standard
// deviation GaussianReleaseSigma() on every coordinate. Requires
// budget.delta > 0. epsilon > 1 is allowed but recorded as a warning, since the
// accuracy guarantee for the threshold rule assumes epsilon <= 1.
absl::StatusOr<NoisyEstimate> ReleaseGaussian(const Dataset& dataset,
                                              double threshold,
                                              const PrivacyParams& budget,
                                              RandomSource& source);

}  // namespace userdp

#endif  // USERDP_CLIPPING_H_
