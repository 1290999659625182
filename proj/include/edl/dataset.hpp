#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edl/rng.hpp"

namespace edl {

// Row-major feature matrix.
struct DataMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  DataMatrix() = default;
  DataMatrix(std::size_t r, std::size_t d) : rows(r), dim(d), values(r * d, 0.0) {}

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * dim, dim);
  }
  std::span<double> row(std::size_t i) {
    return std::span<double>(values).subspan(i * dim, dim);
  }
};

// Class-balanced Gaussian blobs with centers on a circle.
struct BlobsSpec {
  std::size_t classes = 3;
  double center_radius = 5.0;
  double sigma = 1.0;
  std::size_t n_train = 1500;
  std::size_t n_val = 500;
  std::size_t n_test = 500;
};

// Uniform annulus used as the out-of-distribution set.
struct RingSpec {
  double inner_radius = 15.0;
  double outer_radius = 20.0;
  std::size_t n = 1000;
};

// Two interleaved half circles, the usual toy alternative to blobs.
struct MoonsSpec {
  double noise = 0.15;
  std::size_t n_train = 1500;
  std::size_t n_val = 500;
  std::size_t n_test = 500;
};

struct SyntheticDataset {
  std::size_t classes = 0;
  std::size_t dim = 0;
  DataMatrix train_x, val_x, test_x, ood_x;
  std::vector<int> train_y, val_y, test_y;
};

namespace detail {

inline void fill_blob_split(DataMatrix& x, std::vector<int>& y, std::size_t n,
                            const BlobsSpec& spec, Rng& rng) {
  x = DataMatrix(n, 2);
  y.resize(n);
  std::normal_distribution<double> normal(0.0, spec.sigma);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % spec.classes;  // balanced by construction
    const double theta =
        2.0 * std::numbers::pi * static_cast<double>(cls) / static_cast<double>(spec.classes);
    x.row(i)[0] = spec.center_radius * std::cos(theta) + normal(rng);
    x.row(i)[1] = spec.center_radius * std::sin(theta) + normal(rng);
    y[i] = static_cast<int>(cls);
  }
}

inline void fill_ring(DataMatrix& x, const RingSpec& spec, Rng& rng) {
  x = DataMatrix(spec.n, 2);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  // Area-uniform radius: r = sqrt(u (r2^2 - r1^2) + r1^2).
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r1sq = spec.inner_radius * spec.inner_radius;
  const double r2sq = spec.outer_radius * spec.outer_radius;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double r = std::sqrt(unit(rng) * (r2sq - r1sq) + r1sq);
    const double theta = angle(rng);
    x.row(i)[0] = r * std::cos(theta);
    x.row(i)[1] = r * std::sin(theta);
  }
}

inline void fill_moons_split(DataMatrix& x, std::vector<int>& y, std::size_t n,
                             const MoonsSpec& spec, Rng& rng) {
  x = DataMatrix(n, 2);
  y.resize(n);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> noise(0.0, spec.noise);
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = static_cast<int>(i % 2);
    const double t = angle(rng);
    if (cls == 0) {
      x.row(i)[0] = std::cos(t) + noise(rng);
      x.row(i)[1] = std::sin(t) + noise(rng);
    } else {
      x.row(i)[0] = 1.0 - std::cos(t) + noise(rng);
      x.row(i)[1] = 0.5 - std::sin(t) + noise(rng);
    }
    y[i] = cls;
  }
}

}  // namespace detail

inline SyntheticDataset make_blobs_with_ring(const BlobsSpec& blobs, const RingSpec& ring,
                                             std::uint64_t seed) {
  if (blobs.classes < 2) throw std::invalid_argument("make_blobs_with_ring: need >= 2 classes");
  if (blobs.n_train == 0 || blobs.n_test == 0 || ring.n == 0) {
    throw std::invalid_argument("make_blobs_with_ring: splits must be nonempty");
  }
  if (!(blobs.sigma > 0.0)) {
    throw std::invalid_argument("make_blobs_with_ring: degenerate covariance");
  }
  if (!(ring.inner_radius < ring.outer_radius)) {
    throw std::invalid_argument("make_blobs_with_ring: ring radii out of order");
  }
  SyntheticDataset ds;
  ds.classes = blobs.classes;
  ds.dim = 2;
  Rng rng = make_rng(seed, SeedStream::dataset);
  detail::fill_blob_split(ds.train_x, ds.train_y, blobs.n_train, blobs, rng);
  detail::fill_blob_split(ds.val_x, ds.val_y, blobs.n_val, blobs, rng);
  detail::fill_blob_split(ds.test_x, ds.test_y, blobs.n_test, blobs, rng);
  detail::fill_ring(ds.ood_x, ring, rng);
  return ds;
}

inline SyntheticDataset make_moons_with_ring(const MoonsSpec& moons, const RingSpec& ring,
                                             std::uint64_t seed) {
  if (moons.n_train == 0 || moons.n_test == 0 || ring.n == 0) {
    throw std::invalid_argument("make_moons_with_ring: splits must be nonempty");
  }
  SyntheticDataset ds;
  ds.classes = 2;
  ds.dim = 2;
  Rng rng = make_rng(seed, SeedStream::dataset);
  detail::fill_moons_split(ds.train_x, ds.train_y, moons.n_train, moons, rng);
  detail::fill_moons_split(ds.val_x, ds.val_y, moons.n_val, moons, rng);
  detail::fill_moons_split(ds.test_x, ds.test_y, moons.n_test, moons, rng);
  detail::fill_ring(ds.ood_x, ring, rng);
  return ds;
}

// The frozen benchmark every comparison run uses: three unit-variance blobs
// on a radius-5 circle, OOD ring at 15..20, splits 1500/500/500/1000.
inline SyntheticDataset bench_v1(std::uint64_t seed) {
  return make_blobs_with_ring(BlobsSpec{}, RingSpec{}, seed);
}

// Test copy with iid Gaussian noise of the given scale added to every
// feature; scale 0 returns the input bytes untouched.
inline DataMatrix perturb(const DataMatrix& x, double noise_scale, Rng& rng) {
  if (noise_scale == 0.0) return x;
  if (!(noise_scale > 0.0)) throw std::invalid_argument("perturb: noise scale must be >= 0");
  DataMatrix out = x;
  std::normal_distribution<double> normal(0.0, noise_scale);
  for (double& v : out.values) v += normal(rng);
  return out;
}

}  // namespace edl
