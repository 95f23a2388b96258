#include "lbw/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lbw::io {

namespace {

using Json = nlohmann::ordered_json;

Json vector_to_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  // Row-major flat list.
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  }
  return arr;
}

Eigen::VectorXd vector_from_json(const Json& arr) {
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i];
  return v;
}

Eigen::MatrixXd matrix_from_json(const Json& arr, Eigen::Index rows,
                                 Eigen::Index cols) {
  if (static_cast<Eigen::Index>(arr.size()) != rows * cols) {
    fail(ErrorCode::kIo, "matrix entry count does not match dimensions");
  }
  Eigen::MatrixXd m(rows, cols);
  size_t idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr[idx++];
  }
  return m;
}

Json gmm_to_json(const GmmModel& gmm) {
  Json j;
  Json weights = Json::array();
  Json means = Json::array();
  Json covs = Json::array();
  for (const auto& c : gmm.components()) {
    weights.push_back(c.weight);
    means.push_back(vector_to_json(c.params.mean));
    covs.push_back(matrix_to_json(c.params.cov.matrix()));
  }
  j["weights"] = std::move(weights);
  j["means"] = std::move(means);
  j["covariances"] = std::move(covs);
  j["reg"] = gmm.reg();
  j["seed"] = gmm.seed();
  j["final_log_likelihood"] = gmm.final_log_likelihood();
  return j;
}

GmmModel gmm_from_json(const Json& j, Eigen::Index dim) {
  const auto& weights = j.at("weights");
  const auto& means = j.at("means");
  const auto& covs = j.at("covariances");
  if (weights.size() != means.size() || weights.size() != covs.size()) {
    fail(ErrorCode::kIo, "mixture arrays have mismatched lengths");
  }
  std::vector<GaussianComponent> components;
  components.reserve(weights.size());
  for (size_t c = 0; c < weights.size(); ++c) {
    components.push_back(GaussianComponent{
        weights[c].get<double>(),
        GaussianParams{vector_from_json(means[c]),
                       SpdMatrix(matrix_from_json(covs[c], dim, dim))}});
  }
  return GmmModel(std::move(components), j.at("reg").get<double>(),
                  j.at("seed").get<std::uint64_t>(),
                  j.at("final_log_likelihood").get<double>());
}

Json matching_to_json(const MatchMatrix& m) {
  Json pairs = Json::array();
  for (const auto& [i, j] : m.pairs) pairs.push_back(Json::array({i, j}));
  Json out;
  out["pairs"] = std::move(pairs);
  out["total_cost"] = m.total_cost;
  return out;
}

MatchMatrix matching_from_json(const Json& j) {
  MatchMatrix m;
  const auto& pairs = j.at("pairs");
  m.k = static_cast<int>(pairs.size());
  for (const auto& p : pairs) {
    m.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  m.total_cost = j.at("total_cost").get<double>();
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::kIo, "write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIo, "rename to " + path + " failed: " + ec.message());
}

void save_model(const ModelFile& file, const std::string& path) {
  const LbwModel& model = file.model;
  Json j;
  j["schema_version"] = "lbw-1";
  j["k"] = model.k();
  j["dim"] = static_cast<int>(model.dim());
  j["reference_index"] = model.reference_index();
  j["groups"] = model.groups();
  {
    Json cfg;
    cfg["reg"] = file.gmm_cfg.reg;
    cfg["max_iter"] = file.gmm_cfg.max_iter;
    cfg["ll_tol"] = file.gmm_cfg.ll_tol;
    cfg["seed"] = file.gmm_cfg.seed;
    cfg["n_init"] = file.gmm_cfg.n_init;
    j["gmm_config"] = std::move(cfg);
  }
  {
    Json gmms = Json::array();
    for (int g = 0; g < model.num_groups(); ++g) {
      gmms.push_back(gmm_to_json(model.gmm(g)));
    }
    j["gmms"] = std::move(gmms);
  }
  {
    Json ms = Json::array();
    for (int g = 0; g < model.num_groups(); ++g) {
      ms.push_back(matching_to_json(model.matching(g)));
    }
    j["matchings"] = std::move(ms);
  }
  j["low_density_thresholds"] = model.low_density_thresholds();
  if (!file.k_sweep.empty()) {
    Json sweep = Json::array();
    for (const auto& [k, a] : file.k_sweep) {
      sweep.push_back(Json::array({k, a}));
    }
    j["k_selection"] = std::move(sweep);
  }
  if (file.bary) {
    const BarycenterModel& b = *file.bary;
    Json jb;
    jb["lambda"] = vector_to_json(b.lambda);
    Json weights = Json::array();
    Json means = Json::array();
    Json covs = Json::array();
    for (const auto& c : b.components) {
      weights.push_back(c.weight);
      means.push_back(vector_to_json(c.mean));
      covs.push_back(matrix_to_json(c.cov.matrix()));
    }
    jb["weights"] = std::move(weights);
    jb["means"] = std::move(means);
    jb["covariances"] = std::move(covs);
    Json prov = Json::array();
    for (const auto& tuple : b.provenance) {
      Json t = Json::array();
      for (const auto& [g, c] : tuple) t.push_back(Json::array({g, c}));
      prov.push_back(std::move(t));
    }
    jb["provenance"] = std::move(prov);
    Json reports = Json::array();
    for (const auto& r : b.solve_reports) {
      Json jr;
      jr["iterations"] = r.iterations;
      jr["residual"] = r.residual;
      jr["converged"] = r.converged;
      reports.push_back(std::move(jr));
    }
    jb["solve_reports"] = std::move(reports);
    j["barycenter"] = std::move(jb);
  }
  atomic_write(path, j.dump(2) + "\n");
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    fail(ErrorCode::kIo, std::string("invalid model file: ") + e.what());
  }
  if (j.value("schema_version", "") != "lbw-1") {
    fail(ErrorCode::kIo, "unsupported model schema");
  }

  const Eigen::Index dim = j.at("dim").get<Eigen::Index>();
  std::vector<std::string> groups = j.at("groups").get<std::vector<std::string>>();
  std::vector<GmmModel> gmms;
  for (const auto& jg : j.at("gmms")) gmms.push_back(gmm_from_json(jg, dim));
  std::vector<MatchMatrix> matchings;
  for (const auto& jm : j.at("matchings")) matchings.push_back(matching_from_json(jm));
  std::vector<double> thresholds =
      j.value("low_density_thresholds", std::vector<double>{});

  ModelFile file{
      LbwModel(std::move(groups), std::move(gmms), std::move(matchings),
               j.at("reference_index").get<int>(), std::move(thresholds)),
      std::nullopt,
      GmmConfig{},
      {}};

  const auto& cfg = j.at("gmm_config");
  file.gmm_cfg.reg = cfg.at("reg").get<double>();
  file.gmm_cfg.max_iter = cfg.at("max_iter").get<int>();
  file.gmm_cfg.ll_tol = cfg.at("ll_tol").get<double>();
  file.gmm_cfg.seed = cfg.at("seed").get<std::uint64_t>();
  file.gmm_cfg.n_init = cfg.at("n_init").get<int>();

  if (j.contains("k_selection")) {
    for (const auto& entry : j.at("k_selection")) {
      file.k_sweep.emplace_back(entry[0].get<int>(), entry[1].get<double>());
    }
  }

  if (j.contains("barycenter")) {
    const auto& jb = j.at("barycenter");
    BarycenterModel b;
    b.lambda = vector_from_json(jb.at("lambda"));
    const auto& weights = jb.at("weights");
    const auto& means = jb.at("means");
    const auto& covs = jb.at("covariances");
    b.k = static_cast<int>(weights.size());
    for (size_t h = 0; h < weights.size(); ++h) {
      b.components.push_back(BarycenterComponent{
          vector_from_json(means[h]),
          SpdMatrix(matrix_from_json(covs[h], dim, dim)),
          weights[h].get<double>()});
    }
    for (const auto& tuple : jb.at("provenance")) {
      std::vector<std::pair<int, int>> prov;
      for (const auto& p : tuple) {
        prov.emplace_back(p[0].get<int>(), p[1].get<int>());
      }
      b.provenance.push_back(std::move(prov));
    }
    for (const auto& jr : jb.at("solve_reports")) {
      BarycenterSolveReport r;
      r.iterations = jr.at("iterations").get<int>();
      r.residual = jr.at("residual").get<double>();
      r.converged = jr.at("converged").get<bool>();
      b.solve_reports.push_back(std::move(r));
    }
    b.model_fingerprint = file.model.fingerprint();
    file.bary = std::move(b);
  }
  return file;
}

bench::Silhouette load_silhouette(const std::string& path) {
  const std::string ext = std::filesystem::path(path).extension().string();
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);

  if (ext == ".pgm") {
    std::string magic;
    in >> magic;
    if (magic != "P5") fail(ErrorCode::kIo, path + ": expected binary PGM (P5)");
    const auto next_int = [&]() {
      // Skip whitespace and '#' comment lines between header fields.
      int c = in.peek();
      while (c == '#' || std::isspace(c)) {
        if (c == '#') {
          std::string line;
          std::getline(in, line);
        } else {
          in.get();
        }
        c = in.peek();
      }
      int value = 0;
      in >> value;
      return value;
    };
    const int width = next_int();
    const int height = next_int();
    const int maxval = next_int();
    if (width <= 0 || height <= 0 || maxval != 255) {
      fail(ErrorCode::kIo, path + ": unsupported PGM header");
    }
    in.get();  // single whitespace byte after maxval
    std::vector<char> raw(static_cast<size_t>(width) * static_cast<size_t>(height));
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      fail(ErrorCode::kIo, path + ": truncated PGM payload");
    }
    std::vector<std::uint8_t> mask(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
      mask[i] = static_cast<unsigned char>(raw[i]) >= 128 ? 1 : 0;
    }
    return bench::Silhouette(width, height, std::move(mask));
  }

  if (ext == ".csv") {
    std::vector<std::uint8_t> mask;
    int width = -1;
    int height = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      int row_width = 0;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        if (cell != "0" && cell != "1") {
          fail(ErrorCode::kIo, path + ": silhouette CSV cells must be 0 or 1");
        }
        mask.push_back(cell == "1" ? 1 : 0);
        ++row_width;
      }
      if (width < 0) {
        width = row_width;
      } else if (row_width != width) {
        fail(ErrorCode::kIo, path + ": ragged silhouette CSV");
      }
      ++height;
    }
    if (width <= 0 || height <= 0) fail(ErrorCode::kIo, path + ": empty CSV");
    return bench::Silhouette(width, height, std::move(mask));
  }

  fail(ErrorCode::kIo, path + ": unsupported silhouette format (use .pgm or .csv)");
}

void save_pgm(const bench::Silhouette& mask, const std::string& path) {
  std::string content = "P5\n" + std::to_string(mask.width) + " " +
                        std::to_string(mask.height) + "\n255\n";
  content.reserve(content.size() + mask.mask.size());
  for (std::uint8_t v : mask.mask) {
    content.push_back(v != 0 ? static_cast<char>(255) : static_cast<char>(0));
  }
  atomic_write(path, content);
}

void save_records_csv(const std::vector<bench::BenchRecord>& records,
                      const std::string& path) {
  if (records.empty()) fail(ErrorCode::kInvalidArgument, "no records to write");
  const size_t n_lambda = records.front().lambda.size();
  std::string out = "k";
  for (size_t i = 0; i < n_lambda; ++i) out += ",lambda" + std::to_string(i);
  out += ",agreement,pixel_accuracy,train_seconds,transport_seconds,seed\n";
  for (const auto& r : records) {
    out += std::to_string(r.k);
    for (double l : r.lambda) out += "," + format_double(l);
    out += "," + (std::isnan(r.agreement) ? std::string("nan")
                                          : format_double(r.agreement));
    out += "," + (std::isnan(r.pixel_acc) ? std::string("nan")
                                          : format_double(r.pixel_acc));
    out += "," + format_double(r.train_seconds);
    out += "," + format_double(r.transport_seconds);
    out += "," + std::to_string(r.seed) + "\n";
  }
  atomic_write(path, out);
}

}  // namespace lbw::io
