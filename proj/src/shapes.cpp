#include "lbw/shapes.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace lbw::bench {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

Silhouette::Silhouette(int width, int height, std::vector<std::uint8_t> mask)
    : width(width), height(height), mask(std::move(mask)) {
  if (width <= 0 || height <= 0 ||
      this->mask.size() != static_cast<size_t>(width) * static_cast<size_t>(height)) {
    fail(ErrorCode::kInvalidArgument, "mask size does not match dimensions");
  }
  if (foreground_count() == 0) {
    fail(ErrorCode::kEmptyMask, "silhouette has no foreground pixels");
  }
}

std::int64_t Silhouette::foreground_count() const {
  return std::count_if(mask.begin(), mask.end(),
                       [](std::uint8_t v) { return v != 0; });
}

Eigen::MatrixXd sample_silhouette(const Silhouette& s, Eigen::Index n,
                                  std::uint64_t seed) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "need at least one sample");
  std::vector<std::int64_t> foreground;
  foreground.reserve(static_cast<size_t>(s.foreground_count()));
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(s.mask.size()); ++idx) {
    if (s.mask[static_cast<size_t>(idx)] != 0) foreground.push_back(idx);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, foreground.size() - 1);
  Eigen::MatrixXd points(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int64_t idx = foreground[pick(rng)];
    const double col = static_cast<double>(idx % s.width);
    const double row = static_cast<double>(idx / s.width);
    points(i, 0) = col + unit(rng);
    points(i, 1) = row + unit(rng);
  }
  return points;
}

Eigen::MatrixXd rasterize(const Eigen::MatrixXd& points, int width, int height,
                          double bandwidth) {
  if (points.rows() < 1 || points.cols() != 2) {
    fail(ErrorCode::kInvalidArgument, "rasterize expects an n x 2 point matrix");
  }
  if (!(bandwidth > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "bandwidth must be positive");
  }
  Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(height, width);
  const double radius = 3.0 * bandwidth;
  const double inv_two_bw2 = 1.0 / (2.0 * bandwidth * bandwidth);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double x = points(i, 0);
    const double y = points(i, 1);
    const int c0 = std::max(0, static_cast<int>(std::floor(x - radius)));
    const int c1 = std::min(width - 1, static_cast<int>(std::ceil(x + radius)));
    const int r0 = std::max(0, static_cast<int>(std::floor(y - radius)));
    const int r1 = std::min(height - 1, static_cast<int>(std::ceil(y + radius)));
    for (int r = r0; r <= r1; ++r) {
      const double dy = (static_cast<double>(r) + 0.5) - y;
      for (int c = c0; c <= c1; ++c) {
        const double dx = (static_cast<double>(c) + 0.5) - x;
        const double d2 = dx * dx + dy * dy;
        if (d2 <= radius * radius) {
          grid(r, c) += std::exp(-d2 * inv_two_bw2);
        }
      }
    }
  }
  const double peak = grid.maxCoeff();
  if (peak > 0.0) grid /= peak;
  return grid;
}

Silhouette otsu_threshold(const Eigen::MatrixXd& grid) {
  if (!grid.allFinite()) {
    fail(ErrorCode::kNonFiniteInput, "grid contains non-finite values");
  }
  const int width = static_cast<int>(grid.cols());
  const int height = static_cast<int>(grid.rows());
  const double vmin = grid.minCoeff();
  const double vmax = grid.maxCoeff();
  if (!(vmax > vmin)) {
    // Constant grid: no threshold separates anything; call it all foreground.
    return Silhouette(width, height,
                      std::vector<std::uint8_t>(
                          static_cast<size_t>(width) * static_cast<size_t>(height), 1));
  }

  constexpr int kBins = 256;
  std::array<std::int64_t, kBins> hist{};
  std::array<double, kBins> value_sum{};
  const double scale = static_cast<double>(kBins) / (vmax - vmin);
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      const double v = grid(r, c);
      const int bin = std::min(kBins - 1, static_cast<int>((v - vmin) * scale));
      ++hist[static_cast<size_t>(bin)];
      value_sum[static_cast<size_t>(bin)] += v;
    }
  }

  const double total = static_cast<double>(grid.size());
  const double grand_sum =
      std::accumulate(value_sum.begin(), value_sum.end(), 0.0);
  double best_var = -1.0;
  int best_t = 0;
  double count0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < kBins - 1; ++t) {
    count0 += static_cast<double>(hist[static_cast<size_t>(t)]);
    sum0 += value_sum[static_cast<size_t>(t)];
    const double count1 = total - count0;
    if (count0 == 0.0 || count1 == 0.0) continue;
    const double mu0 = sum0 / count0;
    const double mu1 = (grand_sum - sum0) / count1;
    const double between = count0 * count1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best_var) {  // strict: ties keep the lower threshold
      best_var = between;
      best_t = t;
    }
  }

  const double threshold = vmin + (vmax - vmin) *
                                      static_cast<double>(best_t + 1) /
                                      static_cast<double>(kBins);
  std::vector<std::uint8_t> mask(static_cast<size_t>(width) *
                                 static_cast<size_t>(height));
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      mask[static_cast<size_t>(r) * static_cast<size_t>(width) +
           static_cast<size_t>(c)] = grid(r, c) > threshold ? 1 : 0;
    }
  }
  return Silhouette(width, height, std::move(mask));
}

double support_agreement(const Silhouette& pred, const Silhouette& truth) {
  if (pred.width != truth.width || pred.height != truth.height) {
    fail(ErrorCode::kDimensionMismatch, "masks have different dimensions");
  }
  std::int64_t inter = 0, uni = 0;
  for (size_t i = 0; i < pred.mask.size(); ++i) {
    const bool a = pred.mask[i] != 0;
    const bool b = truth.mask[i] != 0;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  if (uni == 0) {
    fail(ErrorCode::kBothEmpty, "both masks are empty");
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double pixel_accuracy(const Silhouette& pred, const Silhouette& truth) {
  if (pred.width != truth.width || pred.height != truth.height) {
    fail(ErrorCode::kDimensionMismatch, "masks have different dimensions");
  }
  std::int64_t same = 0;
  for (size_t i = 0; i < pred.mask.size(); ++i) {
    same += ((pred.mask[i] != 0) == (truth.mask[i] != 0)) ? 1 : 0;
  }
  return static_cast<double>(same) / static_cast<double>(pred.mask.size());
}

std::vector<BenchRecord> run_simplex_sweep(
    const std::vector<Silhouette>& silhouettes, const std::vector<int>& k_grid,
    const std::vector<SimplexWeights>& lambda_grid, Eigen::Index n_points,
    const std::vector<std::uint64_t>& seeds, const SweepConfig& cfg) {
  if (silhouettes.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "sweep needs at least two silhouettes");
  }
  if (k_grid.empty() || lambda_grid.empty() || seeds.empty()) {
    fail(ErrorCode::kInvalidArgument, "sweep grids must be nonempty");
  }
  const int width = silhouettes.front().width;
  const int height = silhouettes.front().height;
  for (const auto& s : silhouettes) {
    if (s.width != width || s.height != height) {
      fail(ErrorCode::kDimensionMismatch, "silhouettes have different dimensions");
    }
  }
  for (const auto& lambda : lambda_grid) {
    if (lambda.size() != static_cast<Eigen::Index>(silhouettes.size())) {
      fail(ErrorCode::kCountMismatch,
           "lambda length does not match silhouette count");
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<BenchRecord> records;
  records.reserve(k_grid.size() * lambda_grid.size() * seeds.size());

  for (int k : k_grid) {
    for (const auto& lambda : lambda_grid) {
      for (std::uint64_t seed : seeds) {
        // Sample and split each silhouette's cloud for this cell.
        std::vector<GroupData> train;
        std::vector<Eigen::MatrixXd> test;
        for (size_t g = 0; g < silhouettes.size(); ++g) {
          const Eigen::MatrixXd pts =
              sample_silhouette(silhouettes[g], n_points, mix(seed, g));
          std::vector<Eigen::Index> order(static_cast<size_t>(pts.rows()));
          std::iota(order.begin(), order.end(), 0);
          std::mt19937_64 rng(mix(seed, 0x59717ULL + g));
          std::shuffle(order.begin(), order.end(), rng);
          const Eigen::Index n_train = static_cast<Eigen::Index>(
              std::round(cfg.train_fraction * static_cast<double>(pts.rows())));
          Eigen::MatrixXd train_pts(n_train, 2);
          Eigen::MatrixXd test_pts(pts.rows() - n_train, 2);
          for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            if (i < n_train) {
              train_pts.row(i) = pts.row(order[static_cast<size_t>(i)]);
            } else {
              test_pts.row(i - n_train) = pts.row(order[static_cast<size_t>(i)]);
            }
          }
          train.push_back(GroupData{"shape" + std::to_string(g), std::move(train_pts)});
          test.push_back(std::move(test_pts));
        }

        GmmConfig gmm_cfg = cfg.gmm;
        gmm_cfg.seed = mix(seed, 0xf17ULL);

        const auto train_start = std::chrono::steady_clock::now();
        const LbwModel model = LbwModel::learn(train, k, gmm_cfg);
        const BarycenterModel bary = barycenter(model, lambda, cfg.bary);
        const double train_seconds = seconds_since(train_start);

        const auto transport_start = std::chrono::steady_clock::now();
        Eigen::Index total_test = 0;
        for (const auto& t : test) total_test += t.rows();
        Eigen::MatrixXd moved(total_test, 2);
        Eigen::Index row = 0;
        for (size_t g = 0; g < test.size(); ++g) {
          const std::string& label = model.groups()[g];
          for (Eigen::Index i = 0; i < test[g].rows(); ++i) {
            moved.row(row++) = transport_to_barycenter(
                                   model, bary, label, test[g].row(i).transpose())
                                   .transpose();
          }
        }
        const double transport_seconds = seconds_since(transport_start);

        const Silhouette pred =
            otsu_threshold(rasterize(moved, width, height, cfg.bandwidth));

        // One-hot weights score against the input silhouette itself; interior
        // weights need caller-supplied ground truth.
        std::optional<Silhouette> truth;
        if (auto hot = lambda.one_hot_index()) {
          truth = silhouettes[static_cast<size_t>(*hot)];
        } else if (cfg.truth_lookup) {
          std::vector<double> lv(lambda.values().data(),
                                 lambda.values().data() + lambda.size());
          truth = cfg.truth_lookup(lv);
        }

        BenchRecord rec;
        rec.k = k;
        rec.lambda.assign(lambda.values().data(),
                          lambda.values().data() + lambda.size());
        rec.agreement = truth ? support_agreement(pred, *truth) : nan;
        rec.pixel_acc = truth ? pixel_accuracy(pred, *truth) : nan;
        rec.train_seconds = train_seconds;
        rec.transport_seconds = transport_seconds;
        rec.seed = seed;
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

}  // namespace lbw::bench
