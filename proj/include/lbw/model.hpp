#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lbw/assignment.hpp"
#include "lbw/gmm.hpp"

namespace lbw {

/// Nonnegative weights summing to 1 (within 1e-9).
class SimplexWeights {
 public:
  explicit SimplexWeights(Eigen::VectorXd values);
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator()(Eigen::Index i) const { return values_(i); }

  /// Index of the 1 entry if the weights are one-hot (within 1e-9).
  std::optional<int> one_hot_index() const;

 private:
  Eigen::VectorXd values_;
};

struct GroupData {
  std::string label;
  Eigen::MatrixXd points;  // rows are samples
};

struct LearnConfig {
  int reference_index = 0;            // group the others are matched against
  double low_density_percentile = 1.0;  // of training log densities, in percent
};

/// Per-group mixtures plus the component matchings against a reference group:
/// everything needed to evaluate local transport maps between any two groups.
class LbwModel {
 public:
  LbwModel(std::vector<std::string> groups, std::vector<GmmModel> gmms,
           std::vector<MatchMatrix> matchings, int reference_index,
           std::vector<double> low_density_thresholds = {});

  /// Fit one GMM per group (all with the same k and the caller's seed), then
  /// match each non-reference group's component means against the reference
  /// group's with the Hungarian algorithm on squared Euclidean costs.
  static LbwModel learn(const std::vector<GroupData>& datasets, int k,
                        const GmmConfig& gmm_cfg = {},
                        const LearnConfig& learn_cfg = {});

  int k() const { return gmms_.front().k(); }
  Eigen::Index dim() const { return gmms_.front().dim(); }
  int num_groups() const { return static_cast<int>(groups_.size()); }
  const std::vector<std::string>& groups() const { return groups_; }
  int reference_index() const { return reference_index_; }
  const GmmModel& gmm(int g) const { return gmms_[static_cast<size_t>(g)]; }
  const MatchMatrix& matching(int g) const {
    return matchings_[static_cast<size_t>(g)];
  }

  int find_group(const std::string& label) const;  // throws kUnknownGroup

  /// Reference-group component index of component `comp` of group `g`.
  int to_reference_component(int g, int comp) const;
  /// Component of group `g` matched to reference component `ref_comp`.
  int from_reference_component(int g, int ref_comp) const;

  /// True when x scores below the stored training log-density percentile of
  /// the group; a diagnostic for out-of-sample points far from the fit.
  bool is_low_density(int g, const Eigen::VectorXd& x) const;
  const std::vector<double>& low_density_thresholds() const {
    return low_density_thresholds_;
  }

  /// Content hash over groups, parameters, and matchings; stable across
  /// serialization round trips.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> groups_;
  std::vector<GmmModel> gmms_;
  std::vector<MatchMatrix> matchings_;
  int reference_index_ = 0;
  std::vector<double> low_density_thresholds_;  // per group, or empty
};

struct BarycenterComponent {
  Eigen::VectorXd mean;
  SpdMatrix cov;
  double weight = 0.0;
};

/// Barycenter mixture built from one matched component per group, with the
/// provenance of every output component and the covariance solver reports.
struct BarycenterModel {
  int k = 0;
  std::vector<BarycenterComponent> components;
  // provenance[h] lists (group index, component index), one entry per group.
  std::vector<std::vector<std::pair<int, int>>> provenance;
  Eigen::VectorXd lambda;
  std::vector<BarycenterSolveReport> solve_reports;
  std::uint64_t model_fingerprint = 0;

  /// Barycenter component built from component `comp` of group `g`.
  int component_for(int g, int comp) const;
};

/// Local transport of x from one group to another: hard-assign x to a source
/// component, follow the matching (through the reference group when neither
/// side is the reference), and apply the closed-form Gaussian transport of the
/// matched pair.
Eigen::VectorXd transport(const LbwModel& model, const std::string& from_group,
                          const std::string& to_group, const Eigen::VectorXd& x,
                          double floor = kDefaultEigenFloor);

/// Mixture weights of the barycenter: the lambda-weighted average of the
/// matched components' weights, renormalized to sum to 1.
Eigen::VectorXd barycenter_weights(const LbwModel& model,
                                   const SimplexWeights& weights);

/// Barycenter of all groups: means are lambda-averages of matched component
/// means, covariances solve the Gaussian barycenter fixed point per matched
/// tuple.
BarycenterModel barycenter(const LbwModel& model, const SimplexWeights& weights,
                           const BarycenterConfig& cfg = {});

/// Transport x from its group to the barycenter component its hard assignment
/// maps to. `bary` must have been built from `model` (fingerprint check).
Eigen::VectorXd transport_to_barycenter(const LbwModel& model,
                                        const BarycenterModel& bary,
                                        const std::string& group,
                                        const Eigen::VectorXd& x,
                                        double floor = kDefaultEigenFloor);

}  // namespace lbw
