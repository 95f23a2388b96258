#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lbw/model.hpp"
#include "lbw/shapes.hpp"

namespace lbw::io {

/// Everything a model file carries besides the model itself.
struct ModelFile {
  LbwModel model;
  std::optional<BarycenterModel> bary;
  GmmConfig gmm_cfg;
  // AIC sweep recorded when k was grid-selected: (k, summed aic) pairs.
  std::vector<std::pair<int, double>> k_sweep;
};

/// Serialize to the "lbw-1" JSON schema. All floats survive a save/load round
/// trip bitwise. Writes are atomic (temp file + rename), and identical inputs
/// produce byte-identical files.
void save_model(const ModelFile& file, const std::string& path);
ModelFile load_model(const std::string& path);

/// Write text atomically: the target never holds a partial file.
void atomic_write(const std::string& path, const std::string& content);

/// Silhouette from a PGM (P5, maxval 255, >= 128 is foreground) or a CSV grid
/// of 0/1 values; the format is picked by extension.
bench::Silhouette load_silhouette(const std::string& path);
void save_pgm(const bench::Silhouette& mask, const std::string& path);

/// Bench records as CSV with one row per (k, lambda, seed) cell.
void save_records_csv(const std::vector<bench::BenchRecord>& records,
                      const std::string& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace lbw::io
