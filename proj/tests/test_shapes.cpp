#include <cmath>
#include <random>

#include "doctest.h"
#include "lbw/shapes.hpp"
#include "test_util.hpp"

using namespace lbw;
using namespace lbw::bench;

namespace {

Silhouette rect_mask(int width, int height, int c0, int r0, int c1, int r1) {
  std::vector<std::uint8_t> mask(static_cast<size_t>(width) * height, 0);
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c) {
      mask[static_cast<size_t>(r) * width + c] = 1;
    }
  }
  return Silhouette(width, height, std::move(mask));
}

Silhouette disk_mask(int width, int height, double cx, double cy, double radius) {
  std::vector<std::uint8_t> mask(static_cast<size_t>(width) * height, 0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double dx = c + 0.5 - cx;
      const double dy = r + 0.5 - cy;
      if (dx * dx + dy * dy <= radius * radius) {
        mask[static_cast<size_t>(r) * width + c] = 1;
      }
    }
  }
  return Silhouette(width, height, std::move(mask));
}

}  // namespace

TEST_CASE("silhouette validation") {
  CHECK_THROWS_AS(Silhouette(4, 4, std::vector<std::uint8_t>(16, 0)), Error);
  CHECK_THROWS_AS(Silhouette(4, 4, std::vector<std::uint8_t>(3, 1)), Error);
  const Silhouette s = rect_mask(4, 4, 1, 1, 2, 2);
  CHECK(s.foreground_count() == 1);
}

TEST_CASE("sample_silhouette stays inside the mask") {
  // Single-pixel mask: all samples land inside that pixel's unit square.
  const Silhouette single = rect_mask(8, 8, 3, 5, 4, 6);
  const Eigen::MatrixXd pts = sample_silhouette(single, 200, 1);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    CHECK(pts(i, 0) >= 3.0);
    CHECK(pts(i, 0) < 4.0);
    CHECK(pts(i, 1) >= 5.0);
    CHECK(pts(i, 1) < 6.0);
  }

  // Half-left mask: all x coordinates in the left half.
  const Silhouette left = rect_mask(10, 10, 0, 0, 5, 10);
  const Eigen::MatrixXd lp = sample_silhouette(left, 500, 2);
  CHECK((lp.col(0).array() < 5.0).all());
}

TEST_CASE("sample_silhouette of the full mask is uniform") {
  const Silhouette full = rect_mask(20, 20, 0, 0, 20, 20);
  const Eigen::MatrixXd pts = sample_silhouette(full, 10000, 3);
  const Eigen::Vector2d mean = pts.colwise().mean();
  CHECK(std::abs(mean(0) - 10.0) < 0.2);  // 2% of the grid span
  CHECK(std::abs(mean(1) - 10.0) < 0.2);
  // Determinism under the seed.
  CHECK(sample_silhouette(full, 100, 3) == sample_silhouette(full, 100, 3));
}

TEST_CASE("rasterize places a bump at the point") {
  Eigen::MatrixXd pts(1, 2);
  pts << 10.4, 6.7;  // inside pixel (c=10, r=6)
  const Eigen::MatrixXd grid = rasterize(pts, 20, 12, 1.5);
  Eigen::Index r, c;
  CHECK(grid.maxCoeff(&r, &c) == 1.0);
  CHECK(r == 6);
  CHECK(c == 10);
}

TEST_CASE("rasterize is equivariant to integer shifts") {
  Eigen::MatrixXd pts(3, 2);
  pts << 5.2, 4.8, 6.7, 5.5, 5.9, 6.1;
  const Eigen::MatrixXd base = rasterize(pts, 24, 24, 1.0);
  Eigen::MatrixXd shifted_pts = pts;
  shifted_pts.col(0).array() += 7.0;
  shifted_pts.col(1).array() += 3.0;
  const Eigen::MatrixXd shifted = rasterize(shifted_pts, 24, 24, 1.0);
  CHECK((shifted.block(3 + 3, 7 + 3, 8, 8) - base.block(3 + 3 - 3, 7 + 3 - 7, 8, 8))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("rasterize of two distant points has two peaks") {
  Eigen::MatrixXd pts(2, 2);
  pts << 5.5, 5.5, 25.5, 25.5;
  const Eigen::MatrixXd grid = rasterize(pts, 32, 32, 1.0);
  CHECK(grid(5, 5) > 0.99);
  CHECK(grid(25, 25) > 0.99);
  CHECK(grid(15, 15) < 0.5);
}

TEST_CASE("otsu separates a bimodal grid exactly") {
  Eigen::MatrixXd grid(40, 50);
  grid.setZero();
  grid.topRows(20).setConstant(1.0);  // 1000 ones, 1000 zeros
  const Silhouette mask = otsu_threshold(grid);
  for (int r = 0; r < 40; ++r) {
    for (int c = 0; c < 50; ++c) {
      CHECK(mask.at(r, c) == (r < 20));
    }
  }
}

TEST_CASE("otsu on a constant grid returns all foreground") {
  const Eigen::MatrixXd grid = Eigen::MatrixXd::Constant(5, 5, 0.7);
  const Silhouette mask = otsu_threshold(grid);
  CHECK(mask.foreground_count() == 25);
}

TEST_CASE("otsu threshold lands between the modes") {
  // 50 values at 0.1, 50 at 0.15, 100 at 0.8: the split must isolate 0.8.
  Eigen::MatrixXd grid(1, 200);
  for (int i = 0; i < 50; ++i) grid(0, i) = 0.1;
  for (int i = 50; i < 100; ++i) grid(0, i) = 0.15;
  for (int i = 100; i < 200; ++i) grid(0, i) = 0.8;
  const Silhouette mask = otsu_threshold(grid);
  int fg = 0;
  for (int i = 0; i < 200; ++i) fg += mask.at(0, i) ? 1 : 0;
  CHECK(fg == 100);
  CHECK(mask.at(0, 150));
  CHECK_FALSE(mask.at(0, 10));

  // Exhaustive oracle over the same 256 candidate boundaries, computed from
  // raw values instead of histogram moments.
  const double vmin = 0.1, vmax = 0.8;
  double best_var = -1.0;
  double best_threshold = 0.0;
  for (int t = 0; t < 255; ++t) {
    const double threshold = vmin + (vmax - vmin) * (t + 1) / 256.0;
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int i = 0; i < 200; ++i) {
      const double v = grid(0, i);
      if (v <= threshold) {
        n0 += 1;
        s0 += v;
      } else {
        n1 += 1;
        s1 += v;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double var = n0 * n1 * std::pow(s0 / n0 - s1 / n1, 2.0);
    if (var > best_var) {
      best_var = var;
      best_threshold = threshold;
    }
  }
  CHECK(best_threshold > 0.15);
  CHECK(best_threshold < 0.8);
  for (int i = 0; i < 200; ++i) {
    CHECK(mask.at(0, i) == (grid(0, i) > best_threshold));
  }
}

TEST_CASE("support_agreement is intersection over union") {
  const Silhouette a = rect_mask(6, 6, 0, 0, 3, 3);
  CHECK(support_agreement(a, a) == 1.0);

  const Silhouette b = rect_mask(6, 6, 3, 3, 6, 6);
  CHECK(support_agreement(a, b) == 0.0);

  // Truth covers two pixels, prediction one of them: IoU = 1/2.
  const Silhouette truth = rect_mask(6, 6, 0, 0, 2, 1);
  const Silhouette pred = rect_mask(6, 6, 0, 0, 1, 1);
  CHECK(support_agreement(pred, truth) == 0.5);
  CHECK(pixel_accuracy(pred, truth) == doctest::Approx(35.0 / 36.0));

  CHECK_THROWS_AS(support_agreement(rect_mask(6, 6, 0, 0, 1, 1),
                                    rect_mask(5, 5, 0, 0, 1, 1)),
                  Error);
}

TEST_CASE("run_simplex_sweep emits deterministic records in grid order") {
  const Silhouette left = disk_mask(40, 40, 12, 20, 7);
  const Silhouette right = disk_mask(40, 40, 28, 20, 7);
  std::vector<SimplexWeights> lambdas;
  Eigen::VectorXd w(2);
  w << 1.0, 0.0;
  lambdas.emplace_back(w);
  w << 0.5, 0.5;
  lambdas.emplace_back(w);
  w << 0.0, 1.0;
  lambdas.emplace_back(w);

  SweepConfig cfg;
  cfg.gmm.n_init = 1;
  const auto records =
      run_simplex_sweep({left, right}, {1}, lambdas, 300, {1, 2}, cfg);
  REQUIRE(records.size() == 6);

  // (k, lambda, seed) ordering.
  CHECK(records[0].lambda == std::vector<double>{1.0, 0.0});
  CHECK(records[0].seed == 1);
  CHECK(records[1].seed == 2);
  CHECK(records[2].lambda == std::vector<double>{0.5, 0.5});
  CHECK(records[5].lambda == std::vector<double>{0.0, 1.0});

  for (const auto& r : records) {
    CHECK(r.train_seconds > 0.0);
    CHECK(r.transport_seconds > 0.0);
  }

  // Vertices self-score; the interior cell has no truth and stays NaN.
  CHECK(records[0].agreement >= 0.0);
  CHECK(std::isnan(records[2].agreement));
  CHECK(records[4].agreement >= 0.0);

  // Full determinism under identical seeds.
  const auto again =
      run_simplex_sweep({left, right}, {1}, lambdas, 300, {1, 2}, cfg);
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].train_seconds > 0.0);
    CHECK((std::isnan(records[i].agreement) && std::isnan(again[i].agreement)) ==
          (std::isnan(records[i].agreement)));
    if (!std::isnan(records[i].agreement)) {
      CHECK(records[i].agreement == again[i].agreement);
      CHECK(records[i].pixel_acc == again[i].pixel_acc);
    }
  }
}

TEST_CASE("run_simplex_sweep scores interior weights via the truth lookup") {
  const Silhouette disk = disk_mask(32, 32, 16, 16, 9);
  std::vector<SimplexWeights> lambdas;
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  lambdas.emplace_back(w);

  SweepConfig cfg;
  cfg.gmm.n_init = 1;
  // Identical silhouettes: their midpoint barycenter is the silhouette itself.
  cfg.truth_lookup = [&](const std::vector<double>&) { return disk; };
  const auto records = run_simplex_sweep({disk, disk}, {1}, lambdas, 400, {3}, cfg);
  REQUIRE(records.size() == 1);
  CHECK_FALSE(std::isnan(records[0].agreement));
  CHECK(records[0].agreement > 0.5);
}

TEST_CASE("identical silhouettes keep vertex-level agreement at any weights") {
  const Silhouette disk = disk_mask(40, 40, 20, 20, 11);
  std::vector<SimplexWeights> lambdas;
  Eigen::VectorXd w(2);
  w << 1.0, 0.0;
  lambdas.emplace_back(w);
  w << 0.5, 0.5;
  lambdas.emplace_back(w);

  SweepConfig cfg;
  cfg.gmm.n_init = 1;
  cfg.truth_lookup = [&](const std::vector<double>&) { return disk; };
  const auto records = run_simplex_sweep({disk, disk}, {1}, lambdas, 600, {5}, cfg);
  REQUIRE(records.size() == 2);
  CHECK(records[1].agreement >= records[0].agreement - 0.05);
}

TEST_CASE("training time grows with k") {
  const Silhouette left = disk_mask(48, 48, 14, 24, 9);
  const Silhouette right = disk_mask(48, 48, 34, 24, 9);
  std::vector<SimplexWeights> lambdas;
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  lambdas.emplace_back(w);

  SweepConfig cfg;
  cfg.gmm.n_init = 2;
  cfg.gmm.ll_tol = 0.0;  // fixed iteration count isolates the k scaling
  cfg.gmm.max_iter = 60;
  const std::vector<int> ks{1, 2, 4, 8};
  const auto records = run_simplex_sweep({left, right}, ks, lambdas, 1500, {7}, cfg);
  REQUIRE(records.size() == ks.size());

  // Spearman correlation of train time against k must be positive.
  std::vector<double> times;
  for (const auto& r : records) times.push_back(r.train_seconds);
  double rho = 0.0;
  const double mean_rank = (static_cast<double>(ks.size()) - 1.0) / 2.0;
  double num = 0.0, da = 0.0, db = 0.0;
  for (size_t i = 0; i < ks.size(); ++i) {
    double rank_t = 0.0;
    for (size_t j = 0; j < ks.size(); ++j) {
      if (times[j] < times[i]) rank_t += 1.0;
    }
    const double a = static_cast<double>(i) - mean_rank;
    const double b = rank_t - mean_rank;
    num += a * b;
    da += a * a;
    db += b * b;
  }
  rho = num / std::sqrt(da * db);
  CHECK(rho > 0.0);
}

TEST_CASE("run_simplex_sweep validation") {
  const Silhouette disk = disk_mask(16, 16, 8, 8, 4);
  std::vector<SimplexWeights> lambdas;
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  lambdas.emplace_back(w);
  CHECK_THROWS_AS(run_simplex_sweep({disk}, {1}, lambdas, 100, {1}, {}), Error);
  CHECK_THROWS_AS(run_simplex_sweep({disk, disk}, {}, lambdas, 100, {1}, {}), Error);
  const Silhouette small = disk_mask(8, 8, 4, 4, 2);
  CHECK_THROWS_AS(run_simplex_sweep({disk, small}, {1}, lambdas, 100, {1}, {}),
                  Error);
}
