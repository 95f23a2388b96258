#include "lbw.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lbw/fairness.hpp"
#include "lbw/io.hpp"
#include "lbw/model.hpp"
#include "lbw/shapes.hpp"

struct lbw_model {
  lbw::io::ModelFile file;
};

namespace {

thread_local std::string g_last_error;

int to_c_code(lbw::ErrorCode code) {
  using lbw::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return LBW_ERROR_INVALID_ARGUMENT;
    case ErrorCode::kDimensionMismatch: return LBW_ERROR_DIMENSION_MISMATCH;
    case ErrorCode::kCountMismatch: return LBW_ERROR_COUNT_MISMATCH;
    case ErrorCode::kNonConvergence: return LBW_ERROR_NON_CONVERGENCE;
    case ErrorCode::kDegenerateMatrix: return LBW_ERROR_DEGENERATE_MATRIX;
    case ErrorCode::kNotSpd: return LBW_ERROR_NOT_SPD;
    case ErrorCode::kInsufficientData: return LBW_ERROR_INSUFFICIENT_DATA;
    case ErrorCode::kEmptyComponent: return LBW_ERROR_EMPTY_COMPONENT;
    case ErrorCode::kNonFiniteInput: return LBW_ERROR_NON_FINITE_INPUT;
    case ErrorCode::kNonFiniteCost: return LBW_ERROR_NON_FINITE_COST;
    case ErrorCode::kUnknownGroup: return LBW_ERROR_UNKNOWN_GROUP;
    case ErrorCode::kProvenanceMismatch: return LBW_ERROR_PROVENANCE_MISMATCH;
    case ErrorCode::kSingleGroup: return LBW_ERROR_SINGLE_GROUP;
    case ErrorCode::kSingleClass: return LBW_ERROR_SINGLE_CLASS;
    case ErrorCode::kEmptyMask: return LBW_ERROR_EMPTY_MASK;
    case ErrorCode::kBothEmpty: return LBW_ERROR_BOTH_EMPTY;
    case ErrorCode::kIo: return LBW_ERROR_IO;
  }
  return LBW_ERROR_INTERNAL;
}

template <typename F>
int guarded(F&& f) noexcept {
  try {
    f();
    g_last_error.clear();
    return LBW_OK;
  } catch (const lbw::Error& e) {
    g_last_error = e.what();
    return to_c_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LBW_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LBW_ERROR_INTERNAL;
  }
}

void require(bool ok, const char* message) {
  if (!ok) lbw::fail(lbw::ErrorCode::kInvalidArgument, message);
}

lbw::GmmConfig convert(const lbw_gmm_config* cfg) {
  lbw::GmmConfig out;
  if (cfg != nullptr) {
    out.reg = cfg->reg;
    out.max_iter = cfg->max_iter;
    out.ll_tol = cfg->ll_tol;
    out.seed = cfg->seed;
    out.n_init = cfg->n_init;
  }
  return out;
}

lbw::BarycenterConfig convert(const lbw_barycenter_config* cfg) {
  lbw::BarycenterConfig out;
  if (cfg != nullptr) {
    out.max_iter = cfg->max_iter;
    out.tol = cfg->tol;
    out.init = cfg->init_identity != 0
                   ? lbw::BarycenterConfig::Init::kIdentity
                   : lbw::BarycenterConfig::Init::kWeightedAverage;
    out.floor = cfg->floor;
  }
  return out;
}

std::vector<lbw::GroupData> gather_groups(const double* const* group_data,
                                          const int64_t* group_rows,
                                          const char* const* group_labels,
                                          int32_t n_groups, int32_t dim) {
  require(group_data != nullptr && group_rows != nullptr &&
              group_labels != nullptr,
          "group arrays must not be NULL");
  require(n_groups >= 2, "at least two groups are required");
  require(dim >= 1, "dimension must be at least 1");
  std::vector<lbw::GroupData> datasets;
  datasets.reserve(static_cast<size_t>(n_groups));
  for (int32_t g = 0; g < n_groups; ++g) {
    require(group_data[g] != nullptr && group_labels[g] != nullptr,
            "group pointers must not be NULL");
    require(group_rows[g] >= 1, "every group needs at least one row");
    Eigen::MatrixXd points(group_rows[g], dim);
    for (int64_t i = 0; i < group_rows[g]; ++i) {
      for (int32_t j = 0; j < dim; ++j) {
        points(i, j) = group_data[g][i * dim + j];
      }
    }
    datasets.push_back(lbw::GroupData{group_labels[g], std::move(points)});
  }
  return datasets;
}

Eigen::MatrixXd to_matrix(const double* x, int64_t n, Eigen::Index dim) {
  require(x != nullptr, "input array must not be NULL");
  require(n >= 1, "need at least one row");
  Eigen::MatrixXd m(n, dim);
  for (int64_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = x[i * dim + j];
  }
  return m;
}

}  // namespace

extern "C" {

void lbw_gmm_config_init(lbw_gmm_config* cfg) {
  if (cfg == nullptr) return;
  const lbw::GmmConfig d;
  cfg->reg = d.reg;
  cfg->max_iter = d.max_iter;
  cfg->ll_tol = d.ll_tol;
  cfg->seed = d.seed;
  cfg->n_init = d.n_init;
}

void lbw_barycenter_config_init(lbw_barycenter_config* cfg) {
  if (cfg == nullptr) return;
  const lbw::BarycenterConfig d;
  cfg->max_iter = d.max_iter;
  cfg->tol = d.tol;
  cfg->init_identity = 0;
  cfg->floor = d.floor;
}

const char* lbw_version_string(void) { return "0.1.0"; }

const char* lbw_last_error_message(void) { return g_last_error.c_str(); }

int lbw_fit(const double* const* group_data, const int64_t* group_rows,
            const char* const* group_labels, int32_t n_groups, int32_t dim,
            int32_t k, const lbw_gmm_config* cfg, lbw_model** out) {
  return guarded([&] {
    require(out != nullptr, "output handle must not be NULL");
    auto datasets = gather_groups(group_data, group_rows, group_labels,
                                  n_groups, dim);
    const lbw::GmmConfig gmm_cfg = convert(cfg);
    lbw::io::ModelFile file{lbw::LbwModel::learn(datasets, k, gmm_cfg),
                            std::nullopt, gmm_cfg, {}};
    *out = new lbw_model{std::move(file)};
  });
}

int lbw_fit_select_k(const double* const* group_data, const int64_t* group_rows,
                     const char* const* group_labels, int32_t n_groups,
                     int32_t dim, const int32_t* k_grid, int32_t n_k,
                     const lbw_gmm_config* cfg, lbw_model** out) {
  return guarded([&] {
    require(out != nullptr, "output handle must not be NULL");
    require(k_grid != nullptr && n_k >= 1, "k grid must be nonempty");
    auto datasets = gather_groups(group_data, group_rows, group_labels,
                                  n_groups, dim);
    const lbw::GmmConfig gmm_cfg = convert(cfg);

    // Summed AIC across groups decides k; per-group fits are refit at the
    // winner inside learn (deterministic, so the fits coincide).
    std::vector<std::pair<int, double>> sweep;
    int best_k = k_grid[0];
    double best_sum = std::numeric_limits<double>::infinity();
    for (int32_t i = 0; i < n_k; ++i) {
      const int k = k_grid[i];
      double sum = 0.0;
      for (const auto& d : datasets) {
        const lbw::GmmModel m = lbw::fit_em(d.points, k, gmm_cfg);
        sum += lbw::aic(m, d.points);
      }
      sweep.emplace_back(k, sum);
      if (sum < best_sum) {
        best_sum = sum;
        best_k = k;
      }
    }
    lbw::io::ModelFile file{lbw::LbwModel::learn(datasets, best_k, gmm_cfg),
                            std::nullopt, gmm_cfg, std::move(sweep)};
    *out = new lbw_model{std::move(file)};
  });
}

int lbw_model_save(const lbw_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "model and path must not be NULL");
    lbw::io::save_model(model->file, path);
  });
}

int lbw_model_load(const char* path, lbw_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and handle must not be NULL");
    *out = new lbw_model{lbw::io::load_model(path)};
  });
}

void lbw_model_free(lbw_model* model) { delete model; }

int lbw_model_info(const lbw_model* model, int32_t* k, int32_t* dim,
                   int32_t* n_groups, int32_t* has_barycenter) {
  return guarded([&] {
    require(model != nullptr, "model must not be NULL");
    if (k != nullptr) *k = model->file.model.k();
    if (dim != nullptr) *dim = static_cast<int32_t>(model->file.model.dim());
    if (n_groups != nullptr) *n_groups = model->file.model.num_groups();
    if (has_barycenter != nullptr) {
      *has_barycenter = model->file.bary.has_value() ? 1 : 0;
    }
  });
}

int lbw_model_group_label(const lbw_model* model, int32_t index,
                          const char** label) {
  return guarded([&] {
    require(model != nullptr && label != nullptr,
            "model and label must not be NULL");
    const auto& groups = model->file.model.groups();
    require(index >= 0 && index < static_cast<int32_t>(groups.size()),
            "group index out of range");
    *label = groups[static_cast<size_t>(index)].c_str();
  });
}

int lbw_model_k_sweep(const lbw_model* model, int32_t* ks, double* aics,
                      int32_t* length) {
  return guarded([&] {
    require(model != nullptr && length != nullptr,
            "model and length must not be NULL");
    const auto& sweep = model->file.k_sweep;
    if (ks == nullptr || aics == nullptr) {
      *length = static_cast<int32_t>(sweep.size());
      return;
    }
    require(*length >= static_cast<int32_t>(sweep.size()),
            "sweep buffer too small");
    for (size_t i = 0; i < sweep.size(); ++i) {
      ks[i] = sweep[i].first;
      aics[i] = sweep[i].second;
    }
    *length = static_cast<int32_t>(sweep.size());
  });
}

int lbw_transport(const lbw_model* model, const char* from_group,
                  const char* to_group, const double* x, int64_t n,
                  double* out) {
  return guarded([&] {
    require(model != nullptr && from_group != nullptr && to_group != nullptr &&
                out != nullptr,
            "arguments must not be NULL");
    const Eigen::Index dim = model->file.model.dim();
    const Eigen::MatrixXd points = to_matrix(x, n, dim);
    for (int64_t i = 0; i < n; ++i) {
      const Eigen::VectorXd moved = lbw::transport(
          model->file.model, from_group, to_group, points.row(i).transpose());
      for (Eigen::Index j = 0; j < dim; ++j) out[i * dim + j] = moved(j);
    }
  });
}

int lbw_barycenter(lbw_model* model, const double* lambda, int32_t n_weights,
                   const lbw_barycenter_config* cfg) {
  return guarded([&] {
    require(model != nullptr && lambda != nullptr,
            "model and weights must not be NULL");
    Eigen::VectorXd w(n_weights);
    for (int32_t i = 0; i < n_weights; ++i) w(i) = lambda[i];
    model->file.bary = lbw::barycenter(model->file.model,
                                       lbw::SimplexWeights(std::move(w)),
                                       convert(cfg));
  });
}

int lbw_transport_to_barycenter(const lbw_model* model, const char* group,
                                const double* x, int64_t n, double* out) {
  return guarded([&] {
    require(model != nullptr && group != nullptr && out != nullptr,
            "arguments must not be NULL");
    require(model->file.bary.has_value(),
            "model has no barycenter block; run the barycenter step first");
    const Eigen::Index dim = model->file.model.dim();
    const Eigen::MatrixXd points = to_matrix(x, n, dim);
    for (int64_t i = 0; i < n; ++i) {
      const Eigen::VectorXd moved = lbw::transport_to_barycenter(
          model->file.model, *model->file.bary, group, points.row(i).transpose());
      for (Eigen::Index j = 0; j < dim; ++j) out[i * dim + j] = moved(j);
    }
  });
}

int lbw_count_low_density(const lbw_model* model, const char* group,
                          const double* x, int64_t n, int64_t* count) {
  return guarded([&] {
    require(model != nullptr && group != nullptr && count != nullptr,
            "arguments must not be NULL");
    const int g = model->file.model.find_group(group);
    const Eigen::Index dim = model->file.model.dim();
    const Eigen::MatrixXd points = to_matrix(x, n, dim);
    int64_t c = 0;
    for (int64_t i = 0; i < n; ++i) {
      if (model->file.model.is_low_density(g, points.row(i).transpose())) ++c;
    }
    *count = c;
  });
}

int lbw_pair_distances(const lbw_model* model, const char* group_a,
                       const char* group_b, int32_t* comp_a, int32_t* comp_b,
                       double* dist_sq, double* total) {
  return guarded([&] {
    require(model != nullptr && group_a != nullptr && group_b != nullptr &&
                comp_a != nullptr && comp_b != nullptr && dist_sq != nullptr,
            "arguments must not be NULL");
    const lbw::LbwModel& m = model->file.model;
    const int ga = m.find_group(group_a);
    const int gb = m.find_group(group_b);
    double sum = 0.0;
    for (int h = 0; h < m.k(); ++h) {
      const int ca = m.from_reference_component(ga, h);
      const int cb = m.from_reference_component(gb, h);
      const double d2 = lbw::bw_distance_sq(m.gmm(ga).component(ca).params,
                                            m.gmm(gb).component(cb).params);
      comp_a[h] = ca;
      comp_b[h] = cb;
      dist_sq[h] = d2;
      sum += d2;
    }
    if (total != nullptr) *total = sum;
  });
}

int lbw_repair(const double* features, int64_t n, int32_t dim, const int32_t* z,
               const char* const* group_labels, int32_t n_groups, int32_t k,
               const lbw_gmm_config* cfg, const lbw_barycenter_config* bary_cfg,
               double* repaired, lbw_model** model_out) {
  return guarded([&] {
    require(features != nullptr && z != nullptr && group_labels != nullptr &&
                repaired != nullptr,
            "arguments must not be NULL");
    require(n_groups >= 2, "repair needs at least two groups");
    lbw::fairness::LabeledDataset data;
    data.features = to_matrix(features, n, dim);
    data.target = Eigen::VectorXi::Zero(n);  // repair never reads targets
    data.group.reserve(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
      require(z[i] >= 0 && z[i] < n_groups, "group code out of range");
      data.group.push_back(group_labels[z[i]]);
    }
    auto result = lbw::fairness::repair(data, k, convert(cfg), convert(bary_cfg));
    for (int64_t i = 0; i < n; ++i) {
      for (int32_t j = 0; j < dim; ++j) {
        repaired[i * dim + j] = result.repaired(i, j);
      }
    }
    if (model_out != nullptr) {
      lbw::io::ModelFile file{std::move(result.model), std::move(result.bary),
                              convert(cfg), {}};
      *model_out = new lbw_model{std::move(file)};
    }
  });
}

int lbw_dp_gamma(const double* scores, const int32_t* group, int64_t n,
                 int32_t divide_by_sqrt2, double* out) {
  return guarded([&] {
    require(scores != nullptr && group != nullptr && out != nullptr,
            "arguments must not be NULL");
    Eigen::VectorXd s(n);
    Eigen::VectorXi g(n);
    for (int64_t i = 0; i < n; ++i) {
      s(i) = scores[i];
      g(i) = group[i];
    }
    *out = lbw::fairness::dp_gamma(s, g, divide_by_sqrt2 != 0);
  });
}

int lbw_auc(const double* scores, const int32_t* target, int64_t n,
            double* out) {
  return guarded([&] {
    require(scores != nullptr && target != nullptr && out != nullptr,
            "arguments must not be NULL");
    Eigen::VectorXd s(n);
    Eigen::VectorXi y(n);
    for (int64_t i = 0; i < n; ++i) {
      s(i) = scores[i];
      y(i) = target[i];
    }
    *out = lbw::fairness::auc(s, y);
  });
}

int lbw_linear_scores(const double* features, const int32_t* target, int64_t n,
                      int32_t dim, double l2, uint64_t seed, double* scores) {
  return guarded([&] {
    require(features != nullptr && target != nullptr && scores != nullptr,
            "arguments must not be NULL");
    const Eigen::MatrixXd x = to_matrix(features, n, dim);
    Eigen::VectorXi y(n);
    for (int64_t i = 0; i < n; ++i) y(i) = target[i];
    lbw::fairness::LinearScorerConfig cfg;
    cfg.seed = seed;
    const auto scorer = lbw::fairness::LinearScorer::fit(x, y, l2, cfg);
    const Eigen::VectorXd s = scorer.score(x);
    for (int64_t i = 0; i < n; ++i) scores[i] = s(i);
  });
}

int lbw_bench_shapes(const char* const* silhouette_paths, int32_t n_shapes,
                     const char* truth_dir, const int32_t* k_grid, int32_t n_k,
                     const double* lambdas, int32_t n_lambdas, int64_t n_points,
                     const uint64_t* seeds, int32_t n_seeds,
                     const lbw_gmm_config* cfg, double bandwidth,
                     const char* out_csv) {
  return guarded([&] {
    require(silhouette_paths != nullptr && k_grid != nullptr &&
                lambdas != nullptr && seeds != nullptr && out_csv != nullptr,
            "arguments must not be NULL");
    require(n_shapes >= 2, "need at least two silhouettes");
    std::vector<lbw::bench::Silhouette> silhouettes;
    silhouettes.reserve(static_cast<size_t>(n_shapes));
    for (int32_t i = 0; i < n_shapes; ++i) {
      silhouettes.push_back(lbw::io::load_silhouette(silhouette_paths[i]));
    }
    std::vector<int> ks(k_grid, k_grid + n_k);
    std::vector<lbw::SimplexWeights> lambda_grid;
    lambda_grid.reserve(static_cast<size_t>(n_lambdas));
    for (int32_t i = 0; i < n_lambdas; ++i) {
      Eigen::VectorXd w(n_shapes);
      for (int32_t j = 0; j < n_shapes; ++j) {
        w(j) = lambdas[i * n_shapes + j];
      }
      lambda_grid.emplace_back(std::move(w));
    }
    std::vector<std::uint64_t> seed_list(seeds, seeds + n_seeds);

    lbw::bench::SweepConfig sweep_cfg;
    sweep_cfg.gmm = convert(cfg);
    if (bandwidth > 0.0) sweep_cfg.bandwidth = bandwidth;
    if (truth_dir != nullptr && truth_dir[0] != '\0') {
      const std::string dir = truth_dir;
      sweep_cfg.truth_lookup =
          [dir](const std::vector<double>& lambda)
          -> std::optional<lbw::bench::Silhouette> {
        std::string name = "lambda";
        for (double w : lambda) {
          char buf[16];
          std::snprintf(buf, sizeof(buf), "_%.2f", w);
          name += buf;
        }
        const std::string path = dir + "/" + name + ".pgm";
        if (!std::filesystem::exists(path)) return std::nullopt;
        return lbw::io::load_silhouette(path);
      };
    }

    const auto records = lbw::bench::run_simplex_sweep(
        silhouettes, ks, lambda_grid, n_points, seed_list, sweep_cfg);
    lbw::io::save_records_csv(records, out_csv);
  });
}

}  // extern "C"
