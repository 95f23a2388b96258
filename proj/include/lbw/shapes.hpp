#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lbw/model.hpp"

namespace lbw::bench {

/// Binary image mask; mask[r * width + c] is the pixel at row r, column c.
struct Silhouette {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;

  Silhouette() = default;
  Silhouette(int width, int height, std::vector<std::uint8_t> mask);

  bool at(int r, int c) const {
    return mask[static_cast<size_t>(r) * static_cast<size_t>(width) +
                static_cast<size_t>(c)] != 0;
  }
  std::int64_t foreground_count() const;
};

/// n points uniform over the foreground: a random foreground pixel plus
/// sub-pixel jitter, so point (x, y) lies in [c, c+1) x [r, r+1).
Eigen::MatrixXd sample_silhouette(const Silhouette& s, Eigen::Index n,
                                  std::uint64_t seed);

/// Gaussian splat of the points onto a width x height grid, truncated at
/// 3 * bandwidth and normalized so the peak is 1. Rows index y, columns x.
Eigen::MatrixXd rasterize(const Eigen::MatrixXd& points, int width, int height,
                          double bandwidth = 1.5);

/// Otsu binarization: the threshold maximizes between-class variance over a
/// 256-bin histogram of grid values (ties to the lower threshold); a constant
/// grid comes back all-foreground.
Silhouette otsu_threshold(const Eigen::MatrixXd& grid);

/// Intersection-over-union of the foregrounds.
double support_agreement(const Silhouette& pred, const Silhouette& truth);

/// Fraction of pixels where the masks agree; reported beside IoU.
double pixel_accuracy(const Silhouette& pred, const Silhouette& truth);

struct BenchRecord {
  int k = 0;
  std::vector<double> lambda;
  double agreement = 0.0;       // NaN when no ground truth was available
  double pixel_acc = 0.0;       // NaN likewise
  double train_seconds = 0.0;
  double transport_seconds = 0.0;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  GmmConfig gmm;
  BarycenterConfig bary;
  double bandwidth = 1.5;
  double train_fraction = 0.7;
  // Ground truth for weights interior to the simplex (at one-hot weights the
  // input silhouette itself is used). Empty lookups leave agreement as NaN.
  std::function<std::optional<Silhouette>(const std::vector<double>&)> truth_lookup;
};

/// Full experiment harness: for every (k, lambda, seed) cell, sample points
/// from every silhouette, split train/test, learn the transport model on the
/// training split, build the lambda barycenter, transport the held-out points
/// of every group onto it, rasterize + binarize the union, and score against
/// ground truth. Records come back in (k, lambda, seed) order.
std::vector<BenchRecord> run_simplex_sweep(
    const std::vector<Silhouette>& silhouettes, const std::vector<int>& k_grid,
    const std::vector<SimplexWeights>& lambda_grid, Eigen::Index n_points,
    const std::vector<std::uint64_t>& seeds, const SweepConfig& cfg = {});

}  // namespace lbw::bench
