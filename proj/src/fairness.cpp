#include "lbw/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace lbw::fairness {

namespace {

void check_scores(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorCode::kCountMismatch, "scores and labels have different lengths");
  }
  if (scores.size() == 0) {
    fail(ErrorCode::kInvalidArgument, "scores are empty");
  }
  if (!scores.allFinite()) {
    fail(ErrorCode::kNonFiniteInput, "scores contain non-finite values");
  }
}

}  // namespace

RepairResult repair(const LabeledDataset& data, int k, const GmmConfig& gmm_cfg,
                    const BarycenterConfig& bary_cfg) {
  const Eigen::Index n = data.features.rows();
  if (data.target.size() != n ||
      static_cast<Eigen::Index>(data.group.size()) != n) {
    fail(ErrorCode::kCountMismatch,
         "features, targets, and group labels have different lengths");
  }

  // Group labels in first-appearance order; the first becomes the reference.
  std::vector<std::string> labels;
  std::vector<int> codes(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& g = data.group[static_cast<size_t>(i)];
    auto it = std::find(labels.begin(), labels.end(), g);
    if (it == labels.end()) {
      labels.push_back(g);
      it = labels.end() - 1;
    }
    codes[static_cast<size_t>(i)] = static_cast<int>(it - labels.begin());
  }
  if (labels.size() < 2) {
    fail(ErrorCode::kSingleGroup, "repair needs at least two protected groups");
  }

  std::vector<GroupData> datasets;
  datasets.reserve(labels.size());
  for (size_t g = 0; g < labels.size(); ++g) {
    const Eigen::Index count =
        std::count(codes.begin(), codes.end(), static_cast<int>(g));
    if (count < k) {
      fail(ErrorCode::kInsufficientData,
           "group " + labels[g] + " has fewer than k samples");
    }
    Eigen::MatrixXd points(count, data.features.cols());
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (codes[static_cast<size_t>(i)] == static_cast<int>(g)) {
        points.row(row++) = data.features.row(i);
      }
    }
    datasets.push_back(GroupData{labels[g], std::move(points)});
  }

  LbwModel model = LbwModel::learn(datasets, k, gmm_cfg);
  const SimplexWeights uniform(Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(labels.size()),
      1.0 / static_cast<double>(labels.size())));
  BarycenterModel bary = barycenter(model, uniform, bary_cfg);

  Eigen::MatrixXd repaired(n, data.features.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    repaired.row(i) =
        transport_to_barycenter(model, bary,
                                labels[static_cast<size_t>(codes[static_cast<size_t>(i)])],
                                data.features.row(i).transpose())
            .transpose();
  }
  return RepairResult{std::move(repaired), std::move(model), std::move(bary)};
}

double dp_gamma(const Eigen::VectorXd& scores, const Eigen::VectorXi& group,
                bool diagonal_distance) {
  check_scores(scores, group);
  std::vector<double> s0, s1;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    (group(i) != 0 ? s1 : s0).push_back(scores(i));
  }
  if (s0.empty() || s1.empty()) {
    fail(ErrorCode::kSingleGroup, "both protected groups must be nonempty");
  }
  std::sort(s0.begin(), s0.end());
  std::sort(s1.begin(), s1.end());

  // Two-sample Kolmogorov-Smirnov: walk the merged order, advancing all
  // tied values together before comparing the empirical CDFs.
  const double n0 = static_cast<double>(s0.size());
  const double n1 = static_cast<double>(s1.size());
  size_t i = 0, j = 0;
  double best = 0.0;
  while (i < s0.size() || j < s1.size()) {
    double v;
    if (j >= s1.size()) {
      v = s0[i];
    } else if (i >= s0.size()) {
      v = s1[j];
    } else {
      v = std::min(s0[i], s1[j]);
    }
    while (i < s0.size() && s0[i] == v) ++i;
    while (j < s1.size() && s1[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / n0 -
                                   static_cast<double>(j) / n1));
  }
  return diagonal_distance ? best / std::numbers::sqrt2 : best;
}

double auc(const Eigen::VectorXd& scores, const Eigen::VectorXi& target) {
  check_scores(scores, target);
  const Eigen::Index n = scores.size();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores(a) < scores(b); });

  // Midranks handle ties: equal scores share the average of their positions.
  std::vector<double> rank(static_cast<size_t>(n));
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start;
    while (stop + 1 < n && scores(order[static_cast<size_t>(stop + 1)]) ==
                               scores(order[static_cast<size_t>(start)])) {
      ++stop;
    }
    const double mid = 0.5 * static_cast<double>(start + stop) + 1.0;
    for (Eigen::Index t = start; t <= stop; ++t) {
      rank[static_cast<size_t>(order[static_cast<size_t>(t)])] = mid;
    }
    start = stop + 1;
  }

  double pos_rank_sum = 0.0;
  Eigen::Index n_pos = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (target(i) != 0) {
      pos_rank_sum += rank[static_cast<size_t>(i)];
      ++n_pos;
    }
  }
  const Eigen::Index n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    fail(ErrorCode::kSingleClass, "both classes must be present");
  }
  return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) *
                             static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

LinearScorer LinearScorer::fit(const Eigen::MatrixXd& features,
                               const Eigen::VectorXi& target, double l2,
                               const LinearScorerConfig& cfg) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  if (target.size() != n) {
    fail(ErrorCode::kCountMismatch, "features and targets have different lengths");
  }
  const int n_pos = (target.array() != 0).count();
  if (n_pos == 0 || n_pos == n) {
    fail(ErrorCode::kSingleClass, "both classes must be present");
  }

  LinearScorer scorer;
  scorer.feature_mean_ = features.colwise().mean();
  scorer.feature_scale_.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double var =
        (features.col(j).array() - scorer.feature_mean_(j)).square().mean();
    scorer.feature_scale_(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Eigen::MatrixXd x =
      (features.rowwise() - scorer.feature_mean_.transpose()).array().rowwise() /
      scorer.feature_scale_.transpose().array();
  const Eigen::VectorXd y = target.cast<double>();

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  Eigen::VectorXd w(p);
  for (Eigen::Index j = 0; j < p; ++j) w(j) = init(rng);
  double b = 0.0;

  for (int it = 0; it < cfg.iterations; ++it) {
    const Eigen::VectorXd margin = (x * w).array() + b;
    const Eigen::VectorXd prob =
        margin.array().unaryExpr([](double m) { return 1.0 / (1.0 + std::exp(-m)); });
    const Eigen::VectorXd delta = prob - y;
    const Eigen::VectorXd grad_w =
        x.transpose() * delta / static_cast<double>(n) + l2 * w;
    const double grad_b = delta.mean();
    w -= cfg.learning_rate * grad_w;
    b -= cfg.learning_rate * grad_b;
  }
  scorer.weights_ = std::move(w);
  scorer.bias_ = b;
  return scorer;
}

Eigen::VectorXd LinearScorer::score(const Eigen::MatrixXd& features) const {
  if (features.cols() != weights_.size()) {
    fail(ErrorCode::kDimensionMismatch, "feature dimension does not match scorer");
  }
  const Eigen::MatrixXd x =
      (features.rowwise() - feature_mean_.transpose()).array().rowwise() /
      feature_scale_.transpose().array();
  const Eigen::VectorXd margin = (x * weights_).array() + bias_;
  return margin.array().unaryExpr(
      [](double m) { return 1.0 / (1.0 + std::exp(-m)); });
}

}  // namespace lbw::fairness
