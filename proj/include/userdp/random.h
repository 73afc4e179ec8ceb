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

#ifndef USERDP_RANDOM_H_
#define USERDP_RANDOM_H_

#include <cstdint>
#include <random>
#include <vector>

#include "absl/status/statusor.h"

namespace userdp {

// Seeded pseudo-random stream. All variate transforms are implemented here on
// top of the raw 64-bit engine output (not std:: distributions, whose
// algorithms vary across standard libraries), so a (seed, stream) pair yields
// the same values on every platform.
//
// A RandomSource is single-owner mutable state. Parallel work derives an
// independent Substream() per task.
class RandomSource {
 public:
  explicit RandomSource(uint64_t seed, uint64_t stream = 0);

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  // Deterministic child stream keyed by (seed, stream, index). Does not advance
  // this source.
  RandomSource Substream(uint64_t index) const;

  uint64_t NextBits() { return engine_(); }

  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double Uniform();

  // Standard normal via the Box-Muller transform.
  double StandardNormal();

  // Laplace(0, scale) via the inverse CDF of one uniform draw.
  double Laplace(double scale);

  // Gamma(shape, 1), Marsaglia-Tsang squeeze method.
  double Gamma(double shape);

  // Poisson(mean): sequential inversion for small means, PTRS
  // transformed-rejection (Hormann 1993) for mean >= 10.
  int64_t Poisson(double mean);

  // Uniform integer in [0, bound).
  uint64_t UniformInt(uint64_t bound);

 private:
  uint64_t seed_;
  uint64_t stream_;
  std::mt19937_64 engine_;
};

// Inverse CDF of Laplace(0, scale) at probability p in (0, 1).
double LaplaceInverseCdf(double p, double scale);

double LaplaceCdf(double x, double scale);
double NormalCdf(double x, double sigma);

// `count` i.i.d. Laplace(0, scale) draws. Fails when scale <= 0.
absl::StatusOr<std::vector<double>> SampleLaplace(RandomSource& source,
                                                  double scale, int64_t count);

// `count` i.i.d. N(0, sigma^2) draws. Fails when sigma <= 0.
absl::StatusOr<std::vector<double>> SampleGaussian(RandomSource& source,
                                                   double sigma, int64_t count);

// SplitMix64 finalizer, used for seed derivation.
uint64_t MixBits(uint64_t x);

}  // namespace userdp

#endif  // USERDP_RANDOM_H_
