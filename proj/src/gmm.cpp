#include "lbw/gmm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace lbw {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
constexpr double kStarvationFraction = 1e-10;   // mass_j < frac * n => starving
constexpr int kMaxReseeds = 3;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 step; decorrelates restart streams from consecutive seeds.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Working state of one EM run; plain matrices, wrapped into SpdMatrix only at
// the end.
struct EmState {
  Eigen::VectorXd weights;               // k
  std::vector<Eigen::VectorXd> means;    // k x p
  std::vector<Eigen::MatrixXd> covs;     // k x (p x p)
  std::vector<Eigen::MatrixXd> chol;     // Cholesky L per component
  std::vector<double> log_det;
};

void refresh_factorizations(EmState& state) {
  const int k = static_cast<int>(state.means.size());
  state.chol.resize(static_cast<size_t>(k));
  state.log_det.resize(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    Eigen::LLT<Eigen::MatrixXd> llt(state.covs[static_cast<size_t>(j)]);
    if (llt.info() != Eigen::Success) {
      fail(ErrorCode::kNonConvergence,
           "covariance factorization failed for component " + std::to_string(j));
    }
    state.chol[static_cast<size_t>(j)] = llt.matrixL();
    state.log_det[static_cast<size_t>(j)] =
        2.0 * state.chol[static_cast<size_t>(j)].diagonal().array().log().sum();
  }
}

// Per-sample, per-component joint log densities log(pi_j) + log phi_j(x_i),
// vectorized over samples. Rows follow `data`; columns follow components.
Eigen::MatrixXd joint_log_terms(const Eigen::MatrixXd& data, const EmState& state) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  const int k = static_cast<int>(state.means.size());
  Eigen::MatrixXd terms(n, k);
  for (int j = 0; j < k; ++j) {
    const auto& mean = state.means[static_cast<size_t>(j)];
    const auto& l = state.chol[static_cast<size_t>(j)];
    Eigen::MatrixXd centered = (data.rowwise() - mean.transpose()).transpose();
    l.triangularView<Eigen::Lower>().solveInPlace(centered);
    const double base = std::log(state.weights(j)) -
                        0.5 * (static_cast<double>(p) * kLog2Pi +
                               state.log_det[static_cast<size_t>(j)]);
    terms.col(j) =
        (-0.5 * centered.colwise().squaredNorm().transpose().array() + base).matrix();
  }
  return terms;
}

// Row-wise log-sum-exp plus normalized responsibilities.
double log_sum_exp_rows(const Eigen::MatrixXd& terms, Eigen::MatrixXd& resp) {
  const Eigen::Index n = terms.rows();
  resp.resize(n, terms.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = terms.row(i).maxCoeff();
    const Eigen::ArrayXd shifted = (terms.row(i).array() - m).exp();
    const double s = shifted.sum();
    resp.row(i) = (shifted / s).matrix();
    total += m + std::log(s);
  }
  return total;
}

Eigen::MatrixXd global_covariance(const Eigen::MatrixXd& data, double reg) {
  const Eigen::Index n = data.rows();
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n);
  cov = 0.5 * (cov + cov.transpose());
  cov.diagonal().array() += reg;
  return cov;
}

// k-means++ style seeding: first mean uniform over rows, later means with
// probability proportional to the squared distance from the closest chosen one.
std::vector<Eigen::VectorXd> seed_means(const Eigen::MatrixXd& data, int k,
                                        std::mt19937_64& rng) {
  const Eigen::Index n = data.rows();
  std::vector<Eigen::VectorXd> means;
  means.reserve(static_cast<size_t>(k));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto pick_uniform = [&]() {
    return static_cast<Eigen::Index>(
        std::min<double>(unit(rng) * static_cast<double>(n),
                         static_cast<double>(n - 1)));
  };

  means.push_back(data.row(pick_uniform()).transpose());
  Eigen::VectorXd dist2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist2(i) = (data.row(i).transpose() - means[0]).squaredNorm();
  }
  while (static_cast<int>(means.size()) < k) {
    const double total = dist2.sum();
    Eigen::Index chosen;
    if (total <= 0.0) {
      chosen = pick_uniform();  // all remaining points coincide with a mean
    } else {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist2(i);
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    }
    means.push_back(data.row(chosen).transpose());
    for (Eigen::Index i = 0; i < n; ++i) {
      dist2(i) = std::min(dist2(i),
                          (data.row(i).transpose() - means.back()).squaredNorm());
    }
  }
  return means;
}

struct EmRun {
  EmState state;
  double final_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> ll_history;
};

EmRun run_em_once(const Eigen::MatrixXd& data, int k, const GmmConfig& cfg,
                  std::uint64_t run_seed) {
  const Eigen::Index n = data.rows();
  std::mt19937_64 rng(run_seed);

  EmRun run;
  EmState& state = run.state;
  state.weights = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  state.means = seed_means(data, k, rng);
  const Eigen::MatrixXd init_cov = global_covariance(data, cfg.reg);
  state.covs.assign(static_cast<size_t>(k), init_cov);
  refresh_factorizations(state);

  Eigen::MatrixXd resp;
  double prev_ll = -std::numeric_limits<double>::infinity();
  int reseeds = 0;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const Eigen::MatrixXd terms = joint_log_terms(data, state);
    const double ll = log_sum_exp_rows(terms, resp);

    // Starving component: re-seed it at the lowest-density sample. The k of
    // the mixture must stay fixed, so this is preferred over dropping it.
    const Eigen::VectorXd mass = resp.colwise().sum();
    int starving = -1;
    for (int j = 0; j < k; ++j) {
      if (mass(j) < kStarvationFraction * static_cast<double>(n)) {
        starving = j;
        break;
      }
    }
    if (starving >= 0) {
      if (reseeds >= kMaxReseeds) {
        fail(ErrorCode::kEmptyComponent,
             "component " + std::to_string(starving) +
                 " kept starving after " + std::to_string(kMaxReseeds) +
                 " re-seeds");
      }
      ++reseeds;
      Eigen::VectorXd density(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double m = terms.row(i).maxCoeff();
        density(i) = m + std::log((terms.row(i).array() - m).exp().sum());
      }
      Eigen::Index worst;
      density.minCoeff(&worst);
      state.means[static_cast<size_t>(starving)] = data.row(worst).transpose();
      state.covs[static_cast<size_t>(starving)] = init_cov;
      state.weights(starving) = 1.0 / static_cast<double>(k);
      state.weights /= state.weights.sum();
      refresh_factorizations(state);
      prev_ll = -std::numeric_limits<double>::infinity();
      continue;
    }

    run.ll_history.push_back(ll);
    run.final_ll = ll;
    if (std::abs(ll - prev_ll) <= cfg.ll_tol * (1.0 + std::abs(ll))) break;
    prev_ll = ll;

    // M-step with covariance regularization.
    for (int j = 0; j < k; ++j) {
      const double nk = mass(j);
      state.weights(j) = nk / static_cast<double>(n);
      const Eigen::VectorXd mean =
          (resp.col(j).transpose() * data).transpose() / nk;
      const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
      Eigen::MatrixXd cov =
          (centered.transpose() * (centered.array().colwise() *
                                   resp.col(j).array()).matrix()) / nk;
      cov = 0.5 * (cov + cov.transpose());
      cov.diagonal().array() += cfg.reg;
      state.means[static_cast<size_t>(j)] = mean;
      state.covs[static_cast<size_t>(j)] = cov;
    }
    refresh_factorizations(state);
  }
  return run;
}

}  // namespace

GmmModel::GmmModel(std::vector<GaussianComponent> components, double reg,
                   std::uint64_t seed, double final_log_likelihood,
                   std::vector<double> log_likelihood_history)
    : components_(std::move(components)),
      reg_(reg),
      seed_(seed),
      final_log_likelihood_(final_log_likelihood),
      ll_history_(std::move(log_likelihood_history)) {
  if (components_.empty()) {
    fail(ErrorCode::kInvalidArgument, "mixture needs at least one component");
  }
  const Eigen::Index p = components_.front().params.mean.size();
  double weight_sum = 0.0;
  for (const auto& c : components_) {
    if (c.params.mean.size() != p || c.params.cov.dim() != p) {
      fail(ErrorCode::kDimensionMismatch, "components have mixed dimensions");
    }
    if (c.weight < 0.0 || c.weight > 1.0) {
      fail(ErrorCode::kInvalidArgument, "component weights must lie in [0, 1]");
    }
    weight_sum += c.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidArgument,
         "component weights must sum to 1 (got " + std::to_string(weight_sum) + ")");
  }

  log_weights_.reserve(components_.size());
  chol_.reserve(components_.size());
  log_det_.reserve(components_.size());
  for (const auto& c : components_) {
    Eigen::LLT<Eigen::MatrixXd> llt(c.params.cov.matrix());
    if (llt.info() != Eigen::Success) {
      fail(ErrorCode::kDegenerateMatrix,
           "component covariance is not positive definite");
    }
    log_weights_.push_back(std::log(c.weight));
    chol_.push_back(llt.matrixL());
    log_det_.push_back(2.0 * chol_.back().diagonal().array().log().sum());
  }
}

Eigen::VectorXd GmmModel::component_log_terms(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) {
    fail(ErrorCode::kDimensionMismatch, "query point dimension does not match model");
  }
  const int kk = k();
  const double p = static_cast<double>(dim());
  Eigen::VectorXd terms(kk);
  for (int j = 0; j < kk; ++j) {
    const Eigen::VectorXd solved =
        chol_[static_cast<size_t>(j)].triangularView<Eigen::Lower>().solve(
            x - components_[static_cast<size_t>(j)].params.mean);
    terms(j) = log_weights_[static_cast<size_t>(j)] -
               0.5 * (p * kLog2Pi + log_det_[static_cast<size_t>(j)] +
                      solved.squaredNorm());
  }
  return terms;
}

Eigen::VectorXd GmmModel::responsibilities(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd terms = component_log_terms(x);
  const double m = terms.maxCoeff();
  Eigen::ArrayXd shifted = (terms.array() - m).exp();
  return (shifted / shifted.sum()).matrix();
}

int GmmModel::hard_assign(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd terms = component_log_terms(x);
  int best = 0;
  for (int j = 1; j < k(); ++j) {
    if (terms(j) > terms(best)) best = j;  // strict: ties keep the lowest index
  }
  return best;
}

double GmmModel::log_density(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd terms = component_log_terms(x);
  const double m = terms.maxCoeff();
  return m + std::log((terms.array() - m).exp().sum());
}

double GmmModel::log_likelihood(const Eigen::MatrixXd& data) const {
  if (data.cols() != dim()) {
    fail(ErrorCode::kDimensionMismatch, "data dimension does not match model");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    total += log_density(data.row(i).transpose());
  }
  return total;
}

GmmModel fit_em(const Eigen::MatrixXd& data, int k, const GmmConfig& cfg) {
  if (k < 1) fail(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (data.rows() < k) {
    fail(ErrorCode::kInsufficientData,
         "need at least k=" + std::to_string(k) + " samples, got " +
             std::to_string(data.rows()));
  }
  if (!data.allFinite()) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      for (Eigen::Index j = 0; j < data.cols(); ++j) {
        if (!std::isfinite(data(i, j))) {
          fail(ErrorCode::kNonFiniteInput,
               "non-finite value at row " + std::to_string(i) + ", column " +
                   std::to_string(j));
        }
      }
    }
  }
  if (cfg.n_init < 1 || cfg.max_iter < 1 || !(cfg.reg >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "invalid EM configuration");
  }

  EmRun best;
  bool have_best = false;
  for (int restart = 0; restart < cfg.n_init; ++restart) {
    EmRun run = run_em_once(data, k, cfg,
                            mix_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
    if (!have_best || run.final_ll > best.final_ll) {
      best = std::move(run);
      have_best = true;
    }
  }

  std::vector<GaussianComponent> components;
  components.reserve(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    components.push_back(GaussianComponent{
        best.state.weights(j),
        GaussianParams{best.state.means[static_cast<size_t>(j)],
                       SpdMatrix(best.state.covs[static_cast<size_t>(j)])}});
  }
  return GmmModel(std::move(components), cfg.reg, cfg.seed, best.final_ll,
                  std::move(best.ll_history));
}

double aic(const GmmModel& model, const Eigen::MatrixXd& data) {
  const double p = static_cast<double>(model.dim());
  const double k = static_cast<double>(model.k());
  const double n_params = k * (p + p * (p + 1.0) / 2.0) + (k - 1.0);
  return 2.0 * n_params - 2.0 * model.log_likelihood(data);
}

std::pair<int, std::vector<std::pair<int, double>>> select_k(
    const Eigen::MatrixXd& data, const std::vector<int>& k_grid,
    const GmmConfig& cfg) {
  if (k_grid.empty()) {
    fail(ErrorCode::kInvalidArgument, "k grid is empty");
  }
  std::vector<std::pair<int, double>> sweep;
  sweep.reserve(k_grid.size());
  int best_k = k_grid.front();
  double best_aic = std::numeric_limits<double>::infinity();
  for (int k : k_grid) {
    const GmmModel model = fit_em(data, k, cfg);
    const double score = aic(model, data);
    sweep.emplace_back(k, score);
    if (score < best_aic) {
      best_aic = score;
      best_k = k;
    }
  }
  return {best_k, std::move(sweep)};
}

}  // namespace lbw
