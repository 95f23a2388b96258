#include "lbw/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <limits>

namespace lbw {

namespace {

struct Fnv1a {
  std::uint64_t state = 0xcbf29ce484222325ULL;

  void bytes(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 0x100000001b3ULL;
    }
  }
  void add(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    bytes(&bits, sizeof(bits));
  }
  void add(std::int64_t v) { bytes(&v, sizeof(v)); }
  void add(const std::string& s) {
    add(static_cast<std::int64_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void add(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) add(v(i));
  }
  void add(const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) add(m(i, j));
    }
  }
};

std::vector<Eigen::VectorXd> component_means(const GmmModel& gmm) {
  std::vector<Eigen::VectorXd> means;
  means.reserve(static_cast<size_t>(gmm.k()));
  for (const auto& c : gmm.components()) means.push_back(c.params.mean);
  return means;
}

}  // namespace

SimplexWeights::SimplexWeights(Eigen::VectorXd values)
    : values_(std::move(values)) {
  if (values_.size() == 0) {
    fail(ErrorCode::kInvalidArgument, "simplex weights are empty");
  }
  if ((values_.array() < 0.0).any()) {
    fail(ErrorCode::kInvalidArgument, "simplex weights must be nonnegative");
  }
  if (std::abs(values_.sum() - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidArgument, "simplex weights must sum to 1");
  }
}

std::optional<int> SimplexWeights::one_hot_index() const {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (std::abs(values_(i) - 1.0) <= 1e-9) return static_cast<int>(i);
  }
  return std::nullopt;
}

LbwModel::LbwModel(std::vector<std::string> groups, std::vector<GmmModel> gmms,
                   std::vector<MatchMatrix> matchings, int reference_index,
                   std::vector<double> low_density_thresholds)
    : groups_(std::move(groups)),
      gmms_(std::move(gmms)),
      matchings_(std::move(matchings)),
      reference_index_(reference_index),
      low_density_thresholds_(std::move(low_density_thresholds)) {
  if (groups_.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "a transport model needs at least 2 groups");
  }
  if (gmms_.size() != groups_.size() || matchings_.size() != groups_.size()) {
    fail(ErrorCode::kCountMismatch,
         "groups, mixtures, and matchings must have equal counts");
  }
  if (reference_index_ < 0 || reference_index_ >= num_groups()) {
    fail(ErrorCode::kInvalidArgument, "reference group index out of range");
  }
  const int kk = gmms_.front().k();
  const Eigen::Index p = gmms_.front().dim();
  for (const auto& g : gmms_) {
    if (g.k() != kk || g.dim() != p) {
      fail(ErrorCode::kDimensionMismatch,
           "all group mixtures must share k and dimension");
    }
  }
  for (size_t g = 0; g < matchings_.size(); ++g) {
    const MatchMatrix& m = matchings_[g];
    if (m.k != kk) {
      fail(ErrorCode::kCountMismatch, "matching size does not equal k");
    }
    std::vector<char> row_seen(static_cast<size_t>(kk), 0);
    std::vector<char> col_seen(static_cast<size_t>(kk), 0);
    for (const auto& [i, j] : m.pairs) {
      if (i < 0 || i >= kk || j < 0 || j >= kk || row_seen[static_cast<size_t>(i)] ||
          col_seen[static_cast<size_t>(j)]) {
        fail(ErrorCode::kInvalidArgument, "matching is not a permutation");
      }
      row_seen[static_cast<size_t>(i)] = 1;
      col_seen[static_cast<size_t>(j)] = 1;
      if (static_cast<int>(g) == reference_index_ && i != j) {
        fail(ErrorCode::kInvalidArgument,
             "reference group matching must be the identity");
      }
    }
  }
  if (!low_density_thresholds_.empty() &&
      low_density_thresholds_.size() != groups_.size()) {
    fail(ErrorCode::kCountMismatch,
         "low-density thresholds must cover every group");
  }
  for (size_t a = 0; a < groups_.size(); ++a) {
    for (size_t b = a + 1; b < groups_.size(); ++b) {
      if (groups_[a] == groups_[b]) {
        fail(ErrorCode::kInvalidArgument, "duplicate group label: " + groups_[a]);
      }
    }
  }
}

LbwModel LbwModel::learn(const std::vector<GroupData>& datasets, int k,
                         const GmmConfig& gmm_cfg, const LearnConfig& learn_cfg) {
  if (datasets.size() < 2) {
    fail(ErrorCode::kInvalidArgument,
         "learning a transport model needs at least 2 groups");
  }
  const Eigen::Index p = datasets.front().points.cols();
  for (const auto& d : datasets) {
    if (d.points.cols() != p) {
      fail(ErrorCode::kDimensionMismatch, "group datasets have mixed dimensions");
    }
  }
  const int ref = learn_cfg.reference_index;
  if (ref < 0 || ref >= static_cast<int>(datasets.size())) {
    fail(ErrorCode::kInvalidArgument, "reference group index out of range");
  }

  // Per-group fits are independent; run them concurrently and join in group
  // order so the assembled model is deterministic.
  std::vector<std::future<GmmModel>> futures;
  futures.reserve(datasets.size());
  for (const auto& d : datasets) {
    futures.push_back(std::async(std::launch::async, [&d, k, &gmm_cfg] {
      return fit_em(d.points, k, gmm_cfg);
    }));
  }
  std::vector<GmmModel> gmms;
  std::vector<std::string> labels;
  gmms.reserve(datasets.size());
  labels.reserve(datasets.size());
  for (size_t g = 0; g < datasets.size(); ++g) {
    gmms.push_back(futures[g].get());
    labels.push_back(datasets[g].label);
  }

  const std::vector<Eigen::VectorXd> ref_means = component_means(gmms[static_cast<size_t>(ref)]);
  std::vector<MatchMatrix> matchings;
  matchings.reserve(datasets.size());
  for (size_t g = 0; g < datasets.size(); ++g) {
    if (static_cast<int>(g) == ref) {
      matchings.push_back(identity_matching(k));
    } else {
      matchings.push_back(
          hungarian(mean_cost_matrix(ref_means, component_means(gmms[g]))));
    }
  }

  std::vector<double> thresholds;
  thresholds.reserve(datasets.size());
  for (size_t g = 0; g < datasets.size(); ++g) {
    std::vector<double> densities(static_cast<size_t>(datasets[g].points.rows()));
    for (Eigen::Index i = 0; i < datasets[g].points.rows(); ++i) {
      densities[static_cast<size_t>(i)] =
          gmms[g].log_density(datasets[g].points.row(i).transpose());
    }
    std::sort(densities.begin(), densities.end());
    const double rank = learn_cfg.low_density_percentile / 100.0 *
                        static_cast<double>(densities.size() - 1);
    const size_t idx = static_cast<size_t>(std::floor(rank));
    thresholds.push_back(densities[std::min(idx, densities.size() - 1)]);
  }

  return LbwModel(std::move(labels), std::move(gmms), std::move(matchings), ref,
                  std::move(thresholds));
}

int LbwModel::find_group(const std::string& label) const {
  for (size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g] == label) return static_cast<int>(g);
  }
  fail(ErrorCode::kUnknownGroup, "unknown group: " + label);
}

int LbwModel::to_reference_component(int g, int comp) const {
  if (g == reference_index_) return comp;
  return matchings_[static_cast<size_t>(g)].inverse_partner(comp);
}

int LbwModel::from_reference_component(int g, int ref_comp) const {
  if (g == reference_index_) return ref_comp;
  return matchings_[static_cast<size_t>(g)].partner(ref_comp);
}

bool LbwModel::is_low_density(int g, const Eigen::VectorXd& x) const {
  if (low_density_thresholds_.empty()) return false;
  return gmms_[static_cast<size_t>(g)].log_density(x) <
         low_density_thresholds_[static_cast<size_t>(g)];
}

std::uint64_t LbwModel::fingerprint() const {
  Fnv1a h;
  h.add(std::string("lbw-1"));
  h.add(static_cast<std::int64_t>(num_groups()));
  h.add(static_cast<std::int64_t>(k()));
  h.add(static_cast<std::int64_t>(dim()));
  h.add(static_cast<std::int64_t>(reference_index_));
  for (size_t g = 0; g < groups_.size(); ++g) {
    h.add(groups_[g]);
    for (const auto& c : gmms_[g].components()) {
      h.add(c.weight);
      h.add(c.params.mean);
      h.add(c.params.cov.matrix());
    }
    for (const auto& [i, j] : matchings_[g].pairs) {
      h.add(static_cast<std::int64_t>(i));
      h.add(static_cast<std::int64_t>(j));
    }
  }
  for (double t : low_density_thresholds_) h.add(t);
  return h.state;
}

int BarycenterModel::component_for(int g, int comp) const {
  for (size_t h = 0; h < provenance.size(); ++h) {
    for (const auto& [pg, pc] : provenance[h]) {
      if (pg == g && pc == comp) return static_cast<int>(h);
    }
  }
  fail(ErrorCode::kProvenanceMismatch,
       "no barycenter component originates from the given group component");
}

Eigen::VectorXd transport(const LbwModel& model, const std::string& from_group,
                          const std::string& to_group, const Eigen::VectorXd& x,
                          double floor) {
  const int from = model.find_group(from_group);
  const int to = model.find_group(to_group);
  const int i = model.gmm(from).hard_assign(x);
  const int j = model.from_reference_component(to, model.to_reference_component(from, i));
  const AffineMap map = monge_map(model.gmm(from).component(i).params,
                                  model.gmm(to).component(j).params, floor);
  return map.apply(x);
}

Eigen::VectorXd barycenter_weights(const LbwModel& model,
                                   const SimplexWeights& weights) {
  if (weights.size() != model.num_groups()) {
    fail(ErrorCode::kCountMismatch,
         "weight count does not match the number of groups");
  }
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(model.k());
  for (int h = 0; h < model.k(); ++h) {
    for (int g = 0; g < model.num_groups(); ++g) {
      const int comp = model.from_reference_component(g, h);
      pi(h) += weights(g) * model.gmm(g).component(comp).weight;
    }
  }
  return pi / pi.sum();
}

BarycenterModel barycenter(const LbwModel& model, const SimplexWeights& weights,
                           const BarycenterConfig& cfg) {
  if (weights.size() != model.num_groups()) {
    fail(ErrorCode::kCountMismatch,
         "weight count does not match the number of groups");
  }
  BarycenterModel bary;
  bary.k = model.k();
  bary.lambda = weights.values();
  bary.model_fingerprint = model.fingerprint();
  const Eigen::VectorXd pi = barycenter_weights(model, weights);

  for (int h = 0; h < model.k(); ++h) {
    std::vector<GaussianParams> tuple;
    std::vector<std::pair<int, int>> prov;
    tuple.reserve(static_cast<size_t>(model.num_groups()));
    prov.reserve(static_cast<size_t>(model.num_groups()));
    for (int g = 0; g < model.num_groups(); ++g) {
      const int comp = model.from_reference_component(g, h);
      tuple.push_back(model.gmm(g).component(comp).params);
      prov.emplace_back(g, comp);
    }
    auto [params, report] = bw_barycenter(tuple, weights.values(), cfg);
    bary.components.push_back(
        BarycenterComponent{std::move(params.mean), params.cov, pi(h)});
    bary.provenance.push_back(std::move(prov));
    bary.solve_reports.push_back(std::move(report));
  }
  return bary;
}

Eigen::VectorXd transport_to_barycenter(const LbwModel& model,
                                        const BarycenterModel& bary,
                                        const std::string& group,
                                        const Eigen::VectorXd& x, double floor) {
  if (bary.model_fingerprint != model.fingerprint()) {
    fail(ErrorCode::kProvenanceMismatch,
         "barycenter was not built from this model");
  }
  const int g = model.find_group(group);
  const int comp = model.gmm(g).hard_assign(x);
  const int h = bary.component_for(g, comp);
  const auto& target = bary.components[static_cast<size_t>(h)];
  const AffineMap map =
      monge_map(model.gmm(g).component(comp).params,
                GaussianParams{target.mean, target.cov}, floor);
  return map.apply(x);
}

}  // namespace lbw
