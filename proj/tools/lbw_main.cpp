// Command-line front end for the local Bures-Wasserstein transport library.
// Talks to the shared library exclusively through the C API in lbw.h.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csv.hpp"
#include "json.hpp"
#include "lbw.h"

namespace {

using cli::csv::Table;

// Bad invocations exit 2; runtime failures exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(int rc) {
  if (rc != LBW_OK) throw std::runtime_error(lbw_last_error_message());
}

struct ModelDeleter {
  void operator()(lbw_model* m) const { lbw_model_free(m); }
};
using ModelHandle = std::unique_ptr<lbw_model, ModelDeleter>;

ModelHandle load_model(const std::string& path) {
  lbw_model* raw = nullptr;
  check(lbw_model_load(path.c_str(), &raw));
  return ModelHandle(raw);
}

std::vector<int32_t> parse_k_grid(const std::string& text) {
  std::vector<int32_t> grid;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (lo < 1 || hi < lo) throw UsageError("bad --k-grid range: " + text);
    for (int k = lo; k <= hi; ++k) grid.push_back(k);
    return grid;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (tok.empty()) throw UsageError("bad --k-grid: " + text);
    grid.push_back(std::stoi(tok));
    if (grid.back() < 1) throw UsageError("k must be positive: " + tok);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return grid;
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> w;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      std::size_t used = 0;
      w.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad weight '" + tok + "' in '" + text + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return w;
}

std::string file_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return name;
}

void log_line(const std::string& message) {
  std::fprintf(stderr, "%s\n", message.c_str());
}

// Grouped numeric data ready for the C API.
struct GroupedData {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> flat;  // row-major per group
  std::vector<int64_t> rows;
  int32_t dim = 0;

  std::vector<const double*> pointers() const {
    std::vector<const double*> p;
    p.reserve(flat.size());
    for (const auto& f : flat) p.push_back(f.data());
    return p;
  }
  std::vector<const char*> label_pointers() const {
    std::vector<const char*> p;
    p.reserve(labels.size());
    for (const auto& l : labels) p.push_back(l.c_str());
    return p;
  }
};

GroupedData groups_from_files(const std::vector<std::string>& paths) {
  if (paths.size() < 2) {
    throw UsageError("--inputs-are-groups needs at least two input files");
  }
  GroupedData out;
  for (const auto& path : paths) {
    const Table table = cli::csv::read_file(path);
    if (out.dim == 0) {
      out.dim = static_cast<int32_t>(table.header.size());
    } else if (static_cast<int32_t>(table.header.size()) != out.dim) {
      throw std::runtime_error(path + ": column count differs between inputs");
    }
    std::vector<double> flat;
    flat.reserve(table.rows.size() * table.header.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        flat.push_back(
            cli::csv::parse_double(table.rows[r][c], r, table.header[c]));
      }
    }
    out.labels.push_back(file_stem(path));
    out.rows.push_back(static_cast<int64_t>(table.rows.size()));
    out.flat.push_back(std::move(flat));
  }
  return out;
}

GroupedData groups_from_column(const std::vector<std::string>& paths,
                               const std::string& group_col) {
  GroupedData out;
  std::vector<int> feature_cols;
  for (const auto& path : paths) {
    const Table table = cli::csv::read_file(path);
    const int gcol = table.column(group_col);
    if (gcol < 0) {
      throw UsageError(path + ": no column named '" + group_col + "'");
    }
    if (out.dim == 0) {
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (static_cast<int>(c) != gcol) feature_cols.push_back(static_cast<int>(c));
      }
      out.dim = static_cast<int32_t>(feature_cols.size());
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string& label = table.rows[r][static_cast<std::size_t>(gcol)];
      std::size_t g = 0;
      for (; g < out.labels.size(); ++g) {
        if (out.labels[g] == label) break;
      }
      if (g == out.labels.size()) {
        out.labels.push_back(label);
        out.flat.emplace_back();
        out.rows.push_back(0);
      }
      for (int c : feature_cols) {
        out.flat[g].push_back(cli::csv::parse_double(
            table.rows[r][static_cast<std::size_t>(c)], r,
            table.header[static_cast<std::size_t>(c)]));
      }
      ++out.rows[g];
    }
  }
  if (out.labels.size() < 2) {
    throw UsageError("input has fewer than two groups in column '" + group_col +
                     "'");
  }
  return out;
}

// --- subcommand: fit -------------------------------------------------------

struct FitOptions {
  std::vector<std::string> inputs;
  std::string group_col;
  bool inputs_are_groups = false;
  int k = 0;
  std::string k_grid;
  double reg = 1e-6;
  std::uint64_t seed = 0;
  int n_init = 4;
  int max_iter = 300;
  double ll_tol = 1e-7;
  std::string out;
};

lbw_gmm_config gmm_config_of(double reg, std::uint64_t seed, int n_init,
                             int max_iter, double ll_tol) {
  lbw_gmm_config cfg;
  lbw_gmm_config_init(&cfg);
  cfg.reg = reg;
  cfg.seed = seed;
  cfg.n_init = n_init;
  cfg.max_iter = max_iter;
  cfg.ll_tol = ll_tol;
  return cfg;
}

int run_fit(const FitOptions& opt) {
  if (opt.inputs_are_groups == !opt.group_col.empty()) {
    throw UsageError("pass exactly one of --group-col or --inputs-are-groups");
  }
  if ((opt.k > 0) == !opt.k_grid.empty()) {
    throw UsageError("pass exactly one of --k or --k-grid");
  }
  const GroupedData data = opt.inputs_are_groups
                               ? groups_from_files(opt.inputs)
                               : groups_from_column(opt.inputs, opt.group_col);
  for (std::size_t g = 0; g < data.labels.size(); ++g) {
    log_line("group " + data.labels[g] + ": " + std::to_string(data.rows[g]) +
             " rows, " + std::to_string(data.dim) + " columns");
  }

  const lbw_gmm_config cfg =
      gmm_config_of(opt.reg, opt.seed, opt.n_init, opt.max_iter, opt.ll_tol);
  const auto ptrs = data.pointers();
  const auto labels = data.label_pointers();

  lbw_model* raw = nullptr;
  if (opt.k > 0) {
    check(lbw_fit(ptrs.data(), data.rows.data(), labels.data(),
                  static_cast<int32_t>(labels.size()), data.dim, opt.k, &cfg,
                  &raw));
  } else {
    const std::vector<int32_t> grid = parse_k_grid(opt.k_grid);
    check(lbw_fit_select_k(ptrs.data(), data.rows.data(), labels.data(),
                           static_cast<int32_t>(labels.size()), data.dim,
                           grid.data(), static_cast<int32_t>(grid.size()), &cfg,
                           &raw));
  }
  ModelHandle model(raw);

  int32_t sweep_len = 0;
  check(lbw_model_k_sweep(model.get(), nullptr, nullptr, &sweep_len));
  if (sweep_len > 0) {
    std::vector<int32_t> ks(static_cast<std::size_t>(sweep_len));
    std::vector<double> aics(static_cast<std::size_t>(sweep_len));
    check(lbw_model_k_sweep(model.get(), ks.data(), aics.data(), &sweep_len));
    std::string line = "aic sweep:";
    for (int32_t i = 0; i < sweep_len; ++i) {
      line += " k=" + std::to_string(ks[static_cast<std::size_t>(i)]) + ":" +
              cli::csv::format_double(aics[static_cast<std::size_t>(i)]);
    }
    log_line(line);
  }
  int32_t chosen_k = 0;
  check(lbw_model_info(model.get(), &chosen_k, nullptr, nullptr, nullptr));
  log_line("fitted model with k=" + std::to_string(chosen_k));

  check(lbw_model_save(model.get(), opt.out.c_str()));
  log_line("wrote " + opt.out);
  return 0;
}

// --- subcommand: barycenter ------------------------------------------------

struct BarycenterOptions {
  std::string model_path;
  std::string lambda;
  std::string out;
  int max_iter = 200;
  double tol = 1e-9;
};

int run_barycenter(const BarycenterOptions& opt) {
  ModelHandle model = load_model(opt.model_path);
  const std::vector<double> lambda = parse_weights(opt.lambda);
  lbw_barycenter_config cfg;
  lbw_barycenter_config_init(&cfg);
  cfg.max_iter = opt.max_iter;
  cfg.tol = opt.tol;
  check(lbw_barycenter(model.get(), lambda.data(),
                       static_cast<int32_t>(lambda.size()), &cfg));
  check(lbw_model_save(model.get(), opt.out.c_str()));
  log_line("wrote " + opt.out);
  return 0;
}

// --- subcommand: transport ---------------------------------------------------

struct TransportOptions {
  std::string model_path;
  std::string from_group;
  std::string to_group;
  bool to_barycenter = false;
  std::string input;
  std::string out;
};

int run_transport(const TransportOptions& opt) {
  if (opt.to_barycenter == !opt.to_group.empty()) {
    throw UsageError("pass exactly one of --to or --to-barycenter");
  }
  ModelHandle model = load_model(opt.model_path);
  int32_t dim = 0;
  check(lbw_model_info(model.get(), nullptr, &dim, nullptr, nullptr));

  const Table table = cli::csv::read_file(opt.input);
  if (static_cast<int32_t>(table.header.size()) != dim) {
    throw std::runtime_error(opt.input + ": has " +
                             std::to_string(table.header.size()) +
                             " columns, model dimension is " +
                             std::to_string(dim));
  }

  std::string out_text = cli::csv::join_row(table.header);
  const std::size_t chunk_rows = 4096;
  std::vector<double> chunk;
  std::vector<double> moved;
  int64_t low_density_total = 0;

  std::size_t row = 0;
  while (row < table.rows.size()) {
    const std::size_t stop = std::min(row + chunk_rows, table.rows.size());
    chunk.clear();
    for (std::size_t r = row; r < stop; ++r) {
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        chunk.push_back(
            cli::csv::parse_double(table.rows[r][c], r, table.header[c]));
      }
    }
    const int64_t n = static_cast<int64_t>(stop - row);
    moved.assign(chunk.size(), 0.0);
    if (opt.to_barycenter) {
      check(lbw_transport_to_barycenter(model.get(), opt.from_group.c_str(),
                                        chunk.data(), n, moved.data()));
    } else {
      check(lbw_transport(model.get(), opt.from_group.c_str(),
                          opt.to_group.c_str(), chunk.data(), n, moved.data()));
    }
    int64_t low = 0;
    check(lbw_count_low_density(model.get(), opt.from_group.c_str(),
                                chunk.data(), n, &low));
    low_density_total += low;

    std::vector<std::string> cells(table.header.size());
    for (int64_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        cells[c] = cli::csv::format_double(
            moved[static_cast<std::size_t>(r) * table.header.size() + c]);
      }
      out_text += cli::csv::join_row(cells);
    }
    row = stop;
  }

  if (low_density_total > 0) {
    log_line(std::to_string(low_density_total) +
             " input rows score below the training log-density percentile of "
             "group " +
             opt.from_group);
  }
  if (opt.out.empty()) {
    std::fwrite(out_text.data(), 1, out_text.size(), stdout);
  } else {
    cli::csv::atomic_write_file(opt.out, out_text);
    log_line("wrote " + opt.out);
  }
  return 0;
}

// --- subcommand: repair ------------------------------------------------------

struct RepairOptions {
  std::string input;
  std::string target_col;
  std::string protected_col;
  int k = 1;
  double reg = 1e-6;
  std::uint64_t seed = 0;
  double l2 = 1e-3;
  std::optional<double> epsilon;
  std::string out;
  std::string report;
  std::string model_out;
};

int run_repair(const RepairOptions& opt) {
  const Table table = cli::csv::read_file(opt.input);
  const int ycol = table.column(opt.target_col);
  const int zcol = table.column(opt.protected_col);
  if (ycol < 0) throw UsageError("no column named '" + opt.target_col + "'");
  if (zcol < 0) throw UsageError("no column named '" + opt.protected_col + "'");

  std::vector<int> feature_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (static_cast<int>(c) != ycol && static_cast<int>(c) != zcol) {
      feature_cols.push_back(static_cast<int>(c));
    }
  }
  if (feature_cols.empty()) throw UsageError("input has no feature columns");

  const int64_t n = static_cast<int64_t>(table.rows.size());
  const int32_t dim = static_cast<int32_t>(feature_cols.size());
  std::vector<double> features;
  features.reserve(static_cast<std::size_t>(n) * feature_cols.size());
  std::vector<int32_t> target(static_cast<std::size_t>(n));
  std::vector<int32_t> z(static_cast<std::size_t>(n));
  std::vector<std::string> group_labels;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (int c : feature_cols) {
      features.push_back(cli::csv::parse_double(
          table.rows[r][static_cast<std::size_t>(c)], r,
          table.header[static_cast<std::size_t>(c)]));
    }
    const double y = cli::csv::parse_double(
        table.rows[r][static_cast<std::size_t>(ycol)], r, opt.target_col);
    if (y != 0.0 && y != 1.0) {
      throw std::runtime_error("row " + std::to_string(r + 1) +
                               ": target must be 0 or 1, got " +
                               table.rows[r][static_cast<std::size_t>(ycol)]);
    }
    target[r] = static_cast<int32_t>(y);
    const std::string& label = table.rows[r][static_cast<std::size_t>(zcol)];
    std::size_t g = 0;
    for (; g < group_labels.size(); ++g) {
      if (group_labels[g] == label) break;
    }
    if (g == group_labels.size()) group_labels.push_back(label);
    z[r] = static_cast<int32_t>(g);
  }
  if (group_labels.size() < 2) {
    throw UsageError("protected column '" + opt.protected_col +
                     "' has fewer than two groups");
  }

  std::vector<const char*> label_ptrs;
  for (const auto& l : group_labels) label_ptrs.push_back(l.c_str());
  const lbw_gmm_config cfg = gmm_config_of(opt.reg, opt.seed, 4, 300, 1e-7);

  std::vector<double> repaired(features.size());
  lbw_model* raw = nullptr;
  check(lbw_repair(features.data(), n, dim, z.data(), label_ptrs.data(),
                   static_cast<int32_t>(group_labels.size()), opt.k, &cfg,
                   nullptr, repaired.data(), &raw));
  ModelHandle model(raw);

  // Repaired CSV keeps the original column order; y and z are untouched.
  std::string out_text = cli::csv::join_row(table.header);
  std::vector<std::string> cells(table.header.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    cells = table.rows[r];
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      cells[static_cast<std::size_t>(feature_cols[f])] = cli::csv::format_double(
          repaired[r * feature_cols.size() + f]);
    }
    out_text += cli::csv::join_row(cells);
  }
  cli::csv::atomic_write_file(opt.out, out_text);
  log_line("wrote " + opt.out);

  if (!opt.report.empty()) {
    const auto metrics = [&](const std::vector<double>& x) {
      std::vector<double> scores(static_cast<std::size_t>(n));
      check(lbw_linear_scores(x.data(), target.data(), n, dim, opt.l2, opt.seed,
                              scores.data()));
      nlohmann::ordered_json m;
      double a = 0.0;
      check(lbw_auc(scores.data(), target.data(), n, &a));
      m["auc"] = a;
      if (group_labels.size() == 2) {
        double gamma = 0.0;
        check(lbw_dp_gamma(scores.data(), z.data(), n, 0, &gamma));
        m["dp_gamma"] = gamma;
      } else {
        log_line("dp_gamma omitted: protected column has more than 2 groups");
        m["dp_gamma"] = nullptr;
      }
      return m;
    };

    nlohmann::ordered_json report;
    report["n"] = n;
    report["dim"] = dim;
    report["k"] = opt.k;
    report["groups"] = group_labels;
    report["lambda"] = std::vector<double>(
        group_labels.size(), 1.0 / static_cast<double>(group_labels.size()));
    report["n_thresholds"] = n + 1;
    if (opt.epsilon) {
      report["target_tolerance"] = *opt.epsilon;
    } else {
      report["target_tolerance"] = nullptr;
    }
    report["before"] = metrics(features);
    report["after"] = metrics(repaired);
    cli::csv::atomic_write_file(opt.report, report.dump(2) + "\n");
    log_line("wrote " + opt.report);
  }

  if (!opt.model_out.empty()) {
    check(lbw_model_save(model.get(), opt.model_out.c_str()));
    log_line("wrote " + opt.model_out);
  }
  return 0;
}

// --- subcommand: bench shapes ------------------------------------------------

struct BenchOptions {
  std::vector<std::string> silhouettes;
  std::string truth_dir;
  std::string k_grid = "1..4";
  std::string lambda_grid;
  int64_t n_points = 10000;
  int seeds = 10;
  std::uint64_t seed_base = 0;
  double bandwidth = 1.5;
  double reg = 1e-6;
  std::string out;
};

int run_bench_shapes(const BenchOptions& opt) {
  if (opt.silhouettes.size() < 2) {
    throw UsageError("pass at least two --silhouette files");
  }
  const std::vector<int32_t> k_grid = parse_k_grid(opt.k_grid);

  // Lambda grid: semicolon-separated weight vectors; default is the vertices.
  std::vector<double> lambdas_flat;
  int32_t n_lambdas = 0;
  if (opt.lambda_grid.empty()) {
    const std::size_t s = opt.silhouettes.size();
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        lambdas_flat.push_back(i == j ? 1.0 : 0.0);
      }
      ++n_lambdas;
    }
  } else {
    std::size_t pos = 0;
    const std::string& text = opt.lambda_grid;
    while (pos <= text.size()) {
      const auto semi = text.find(';', pos);
      const std::string part =
          text.substr(pos, semi == std::string::npos ? semi : semi - pos);
      const std::vector<double> w = parse_weights(part);
      if (w.size() != opt.silhouettes.size()) {
        throw UsageError("lambda '" + part + "' has " +
                         std::to_string(w.size()) + " weights for " +
                         std::to_string(opt.silhouettes.size()) +
                         " silhouettes");
      }
      lambdas_flat.insert(lambdas_flat.end(), w.begin(), w.end());
      ++n_lambdas;
      if (semi == std::string::npos) break;
      pos = semi + 1;
    }
  }

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < opt.seeds; ++i) {
    seeds.push_back(opt.seed_base + static_cast<std::uint64_t>(i));
  }
  if (seeds.empty()) throw UsageError("--seeds must be positive");

  std::vector<const char*> paths;
  for (const auto& p : opt.silhouettes) paths.push_back(p.c_str());

  lbw_gmm_config cfg;
  lbw_gmm_config_init(&cfg);
  cfg.reg = opt.reg;

  check(lbw_bench_shapes(paths.data(), static_cast<int32_t>(paths.size()),
                         opt.truth_dir.empty() ? nullptr : opt.truth_dir.c_str(),
                         k_grid.data(), static_cast<int32_t>(k_grid.size()),
                         lambdas_flat.data(), n_lambdas, opt.n_points,
                         seeds.data(), static_cast<int32_t>(seeds.size()), &cfg,
                         opt.bandwidth, opt.out.c_str()));
  log_line("wrote " + opt.out);
  return 0;
}

// --- subcommand: dist ----------------------------------------------------------

struct DistOptions {
  std::string model_path;
  std::string pair;
};

int run_dist(const DistOptions& opt) {
  const auto comma = opt.pair.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 == opt.pair.size()) {
    throw UsageError("--pair expects 'group1,group2'");
  }
  const std::string g1 = opt.pair.substr(0, comma);
  const std::string g2 = opt.pair.substr(comma + 1);

  ModelHandle model = load_model(opt.model_path);
  int32_t k = 0;
  check(lbw_model_info(model.get(), &k, nullptr, nullptr, nullptr));
  std::vector<int32_t> ca(static_cast<std::size_t>(k)), cb(static_cast<std::size_t>(k));
  std::vector<double> d2(static_cast<std::size_t>(k));
  double total = 0.0;
  check(lbw_pair_distances(model.get(), g1.c_str(), g2.c_str(), ca.data(),
                           cb.data(), d2.data(), &total));

  std::string out = "component_" + g1 + ",component_" + g2 + ",bw_distance_sq\n";
  for (int h = 0; h < k; ++h) {
    out += std::to_string(ca[static_cast<std::size_t>(h)]) + "," +
           std::to_string(cb[static_cast<std::size_t>(h)]) + "," +
           cli::csv::format_double(d2[static_cast<std::size_t>(h)]) + "\n";
  }
  out += "total,," + cli::csv::format_double(total) + "\n";
  std::fwrite(out.data(), 1, out.size(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local Bures-Wasserstein transport maps and barycenters"};
  app.require_subcommand(1);

  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand(
      "fit", "Fit per-group mixtures and match components across groups");
  fit_cmd->add_option("--input", fit.inputs, "Input CSV file(s)")
      ->required()
      ->expected(-1);
  fit_cmd->add_option("--group-col", fit.group_col,
                      "Column holding the group label");
  fit_cmd->add_flag("--inputs-are-groups", fit.inputs_are_groups,
                    "Treat each input file as one group");
  fit_cmd->add_option("--k", fit.k, "Number of mixture components");
  fit_cmd->add_option("--k-grid", fit.k_grid,
                      "Candidate k values ('a..b' or comma list); picks the "
                      "summed-AIC minimizer");
  fit_cmd->add_option("--reg", fit.reg, "Covariance regularization");
  fit_cmd->add_option("--seed", fit.seed, "RNG seed");
  fit_cmd->add_option("--n-init", fit.n_init, "EM restarts");
  fit_cmd->add_option("--max-iter", fit.max_iter, "EM iteration cap");
  fit_cmd->add_option("--ll-tol", fit.ll_tol, "EM convergence tolerance");
  fit_cmd->add_option("--out", fit.out, "Output model file")->required();

  BarycenterOptions bary;
  CLI::App* bary_cmd = app.add_subcommand(
      "barycenter", "Attach the weighted barycenter block to a model");
  bary_cmd->add_option("--model", bary.model_path, "Model file")->required();
  bary_cmd->add_option("--lambda", bary.lambda, "Comma-separated weights")
      ->required();
  bary_cmd->add_option("--out", bary.out, "Output model file")->required();
  bary_cmd->add_option("--max-iter", bary.max_iter, "Fixed-point iteration cap");
  bary_cmd->add_option("--tol", bary.tol, "Fixed-point tolerance");

  TransportOptions transport;
  CLI::App* transport_cmd =
      app.add_subcommand("transport", "Transport points between groups");
  transport_cmd->add_option("--model", transport.model_path, "Model file")
      ->required();
  transport_cmd->add_option("--from", transport.from_group, "Source group")
      ->required();
  transport_cmd->add_option("--to", transport.to_group, "Target group");
  transport_cmd->add_flag("--to-barycenter", transport.to_barycenter,
                          "Transport onto the model's barycenter block");
  transport_cmd->add_option("--input", transport.input, "Points CSV")->required();
  transport_cmd->add_option("--out", transport.out,
                            "Output CSV (standard output when omitted)");

  RepairOptions repair;
  CLI::App* repair_cmd = app.add_subcommand(
      "repair", "Transport every group to the uniform barycenter");
  repair_cmd->add_option("--input", repair.input, "Dataset CSV")->required();
  repair_cmd->add_option("--target-col", repair.target_col, "Binary target column")
      ->required();
  repair_cmd
      ->add_option("--protected-col", repair.protected_col,
                   "Protected group column")
      ->required();
  repair_cmd->add_option("--k", repair.k, "Mixture components per group")
      ->required();
  repair_cmd->add_option("--reg", repair.reg, "Covariance regularization");
  repair_cmd->add_option("--seed", repair.seed, "RNG seed");
  repair_cmd->add_option("--l2", repair.l2, "Scorer ridge penalty");
  double epsilon_value = 0.0;
  CLI::Option* epsilon_opt = repair_cmd->add_option(
      "--epsilon", epsilon_value, "Desired tolerance recorded in the report");
  repair_cmd->add_option("--out", repair.out, "Repaired CSV")->required();
  repair_cmd->add_option("--report", repair.report,
                         "Fairness report JSON (before/after)");
  repair_cmd->add_option("--model-out", repair.model_out,
                         "Optional: save the fitted model");

  BenchOptions bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Benchmarks");
  CLI::App* shapes_cmd = bench_cmd->add_subcommand(
      "shapes", "Silhouette barycenter sweep with support-recovery scoring");
  shapes_cmd
      ->add_option("--silhouette", bench.silhouettes,
                   "Silhouette files (PGM P5 or 0/1 CSV)")
      ->required()
      ->expected(-1);
  shapes_cmd->add_option("--truth-dir", bench.truth_dir,
                         "Directory of lambda_<w>..pgm ground-truth masks");
  shapes_cmd->add_option("--k-grid", bench.k_grid, "Component counts to sweep");
  shapes_cmd->add_option("--lambda-grid", bench.lambda_grid,
                         "Semicolon-separated weight vectors (default: vertices)");
  shapes_cmd->add_option("--n", bench.n_points, "Points sampled per silhouette");
  shapes_cmd->add_option("--seeds", bench.seeds, "Number of random splits");
  shapes_cmd->add_option("--seed-base", bench.seed_base, "First seed value");
  shapes_cmd->add_option("--bandwidth", bench.bandwidth, "Rasterizer bandwidth");
  shapes_cmd->add_option("--reg", bench.reg, "Covariance regularization");
  shapes_cmd->add_option("--out", bench.out, "Records CSV")->required();

  DistOptions dist;
  CLI::App* dist_cmd = app.add_subcommand(
      "dist", "Per-matched-pair squared Bures-Wasserstein distances");
  dist_cmd->add_option("--model", dist.model_path, "Model file")->required();
  dist_cmd->add_option("--pair", dist.pair, "Two group labels, comma separated")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(fit_cmd)) return run_fit(fit);
    if (app.got_subcommand(bary_cmd)) return run_barycenter(bary);
    if (app.got_subcommand(transport_cmd)) return run_transport(transport);
    if (app.got_subcommand(repair_cmd)) {
      if (epsilon_opt->count() > 0) repair.epsilon = epsilon_value;
      return run_repair(repair);
    }
    if (app.got_subcommand(bench_cmd)) {
      if (!bench_cmd->got_subcommand(shapes_cmd)) {
        throw UsageError("bench requires the 'shapes' subcommand");
      }
      return run_bench_shapes(bench);
    }
    if (app.got_subcommand(dist_cmd)) return run_dist(dist);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
