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
#include "userdp/random.h"

#include <cmath>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace userdp {
namespace {

std::mt19937_64 MakeEngine(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{
      static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
      static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

int64_t PoissonInversion(RandomSource& source, double mean) {
  const double u = source.Uniform();
  double p = std::exp(-mean);
  double cdf = p;
  int64_t k = 0;
  // The cap guards against u landing above the floating-point total mass.
  while (u > cdf && k < 1000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

int64_t PoissonPtrs(RandomSource& source, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = source.Uniform() - 0.5;
    const double v = source.Uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<int64_t>(k);
    }
  }
}

}  // namespace

uint64_t MixBits(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(uint64_t seed, uint64_t stream)
    : seed_(seed), stream_(stream), engine_(MakeEngine(seed, stream)) {}

RandomSource RandomSource::Substream(uint64_t index) const {
  return RandomSource(seed_, MixBits(stream_ ^ MixBits(index + 1)));
}

double RandomSource::Uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomSource::StandardNormal() {
  const double u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomSource::Laplace(double scale) {
  return LaplaceInverseCdf(Uniform(), scale);
}

double RandomSource::Gamma(double shape) {
  if (shape < 1.0) {
    const double boost = std::pow(Uniform(), 1.0 / shape);
    return Gamma(shape + 1.0) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = StandardNormal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = Uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

int64_t RandomSource::Poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 10.0) return PoissonInversion(*this, mean);
  return PoissonPtrs(*this, mean);
}

uint64_t RandomSource::UniformInt(uint64_t bound) {
  // Lemire's nearly-divisionless rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
  uint64_t low = static_cast<uint64_t>(m);
  if (low < bound) {
    const uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * bound;
      low = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

double LaplaceInverseCdf(double p, double scale) {
  if (p < 0.5) return scale * std::log(2.0 * p);
  return -scale * std::log(2.0 * (1.0 - p));
}

double LaplaceCdf(double x, double scale) {
  if (x < 0.0) return 0.5 * std::exp(x / scale);
  return 1.0 - 0.5 * std::exp(-x / scale);
}

double NormalCdf(double x, double sigma) {
  return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

absl::StatusOr<std::vector<double>> SampleLaplace(RandomSource& source,
                                                  double scale, int64_t count) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Laplace scale must be positive, got %g", scale));
  }
  if (count < 0) {
    return absl::InvalidArgumentError("sample count must be nonnegative");
  }
  std::vector<double> out(static_cast<size_t>(count));
  for (double& x : out) x = source.Laplace(scale);
  return out;
}

absl::StatusOr<std::vector<double>> SampleGaussian(RandomSource& source,
                                                   double sigma,
                                                   int64_t count) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Gaussian sigma must be positive, got %g", sigma));
  }
  if (count < 0) {
    return absl::InvalidArgumentError("sample count must be nonnegative");
  }
  std::vector<double> out(static_cast<size_t>(count));
  for (double& x : out) x = sigma * source.StandardNormal();
  return out;
}

}  // namespace userdp
