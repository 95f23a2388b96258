// Integration driver for the command-line tool. Takes the binary path as
// argv[1], runs each scenario in a scratch directory, and reports one line per
// scenario. Exits nonzero when any scenario fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

int g_failures = 0;
std::string g_cli;
fs::path g_dir;

void expect(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = g_cli + " " + args;
  if (!stdout_file.empty()) cmd += " > " + (g_dir / stdout_file).string();
  cmd += " 2> " + (g_dir / "stderr.log").string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing:" + path.string() + ">";
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string make_group_csv(std::uint64_t seed, double shift, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::ostringstream out;
  out << "x0,x1\n";
  for (int i = 0; i < n; ++i) {
    out << (normal(rng) + shift) << "," << normal(rng) << "\n";
  }
  return out.str();
}

std::vector<std::vector<double>> parse_numeric_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

void scenario_fit_transport_roundtrip() {
  write_file(g_dir / "a.csv", make_group_csv(1, 0.0, 200));
  write_file(g_dir / "b.csv", make_group_csv(2, 6.0, 200));

  int rc = run("fit --input " + (g_dir / "a.csv").string() + " --input " +
               (g_dir / "b.csv").string() +
               " --inputs-are-groups --k 1 --seed 7 --out " +
               (g_dir / "m.json").string());
  expect(rc == 0, "fit exits 0");

  // Re-running the identical command writes byte-identical output.
  rc = run("fit --input " + (g_dir / "a.csv").string() + " --input " +
           (g_dir / "b.csv").string() +
           " --inputs-are-groups --k 1 --seed 7 --out " +
           (g_dir / "m2.json").string());
  expect(rc == 0, "fit rerun exits 0");
  expect(slurp(g_dir / "m.json") == slurp(g_dir / "m2.json"),
         "fit rerun is byte-identical");

  // Self transport: output equals input within 1e-9 per coordinate.
  rc = run("transport --model " + (g_dir / "m.json").string() +
               " --from a --to a --input " + (g_dir / "a.csv").string(),
           "self.csv");
  expect(rc == 0, "self transport exits 0");
  const auto original = parse_numeric_csv(slurp(g_dir / "a.csv"));
  const auto self_moved = parse_numeric_csv(slurp(g_dir / "self.csv"));
  bool self_ok = original.size() == self_moved.size();
  for (size_t i = 0; self_ok && i < original.size(); ++i) {
    for (size_t j = 0; j < original[i].size(); ++j) {
      if (std::abs(original[i][j] - self_moved[i][j]) > 1e-9) self_ok = false;
    }
  }
  expect(self_ok, "self transport is the identity within 1e-9");

  // Transport with the saved model, then with a save/load copy: identical bytes.
  rc = run("transport --model " + (g_dir / "m.json").string() +
               " --from a --to b --input " + (g_dir / "a.csv").string() +
               " --out " + (g_dir / "moved1.csv").string());
  expect(rc == 0, "transport a->b exits 0");
  rc = run("transport --model " + (g_dir / "m2.json").string() +
               " --from a --to b --input " + (g_dir / "a.csv").string() +
               " --out " + (g_dir / "moved2.csv").string());
  expect(rc == 0, "transport with reloaded model exits 0");
  expect(slurp(g_dir / "moved1.csv") == slurp(g_dir / "moved2.csv"),
         "transported outputs are byte-identical across save/load");

  const auto moved = parse_numeric_csv(slurp(g_dir / "moved1.csv"));
  double mean_x = 0.0;
  for (const auto& row : moved) mean_x += row[0];
  mean_x /= static_cast<double>(moved.size());
  expect(std::abs(mean_x - 6.0) < 0.5, "transported cloud lands on group b");
}

void scenario_barycenter() {
  int rc = run("barycenter --model " + (g_dir / "m.json").string() +
               " --lambda 0.5,0.5 --out " + (g_dir / "mb.json").string());
  expect(rc == 0, "barycenter exits 0");
  rc = run("transport --model " + (g_dir / "mb.json").string() +
               " --from a --to-barycenter --input " + (g_dir / "a.csv").string() +
               " --out " + (g_dir / "to_bary.csv").string());
  expect(rc == 0, "transport --to-barycenter exits 0");
  const auto moved = parse_numeric_csv(slurp(g_dir / "to_bary.csv"));
  double mean_x = 0.0;
  for (const auto& row : moved) mean_x += row[0];
  mean_x /= static_cast<double>(moved.size());
  expect(std::abs(mean_x - 3.0) < 0.5, "barycenter transport lands midway");

  // Without a barycenter block the same command is a runtime error.
  rc = run("transport --model " + (g_dir / "m.json").string() +
           " --from a --to-barycenter --input " + (g_dir / "a.csv").string() +
           " --out " + (g_dir / "nope.csv").string());
  expect(rc == 1, "transport to missing barycenter exits 1");
}

void scenario_dist() {
  const int rc = run("dist --model " + (g_dir / "m.json").string() + " --pair a,b",
                     "dist.csv");
  expect(rc == 0, "dist exits 0");
  const std::string text = slurp(g_dir / "dist.csv");
  expect(text.find("total,,") != std::string::npos, "dist prints a total row");
}

void scenario_repair() {
  // Group offset on x1, class signal on x0.
  std::mt19937_64 rng(33);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::ostringstream data;
  data << "x0,x1,y,z\n";
  for (int i = 0; i < 400; ++i) {
    const int y = i % 2;
    const bool grp_b = i >= 200;
    data << (normal(rng) + (y != 0 ? 1.5 : -1.5)) << ","
         << (normal(rng) + (grp_b ? 4.0 : 0.0)) << "," << y << ","
         << (grp_b ? "B" : "A") << "\n";
  }
  write_file(g_dir / "fair.csv", data.str());

  const int rc = run("repair --input " + (g_dir / "fair.csv").string() +
                     " --target-col y --protected-col z --k 1 --seed 5 --out " +
                     (g_dir / "repaired.csv").string() + " --report " +
                     (g_dir / "report.json").string());
  expect(rc == 0, "repair exits 0");

  const std::string report = slurp(g_dir / "report.json");
  expect(report.find("\"before\"") != std::string::npos &&
             report.find("\"after\"") != std::string::npos &&
             report.find("\"dp_gamma\"") != std::string::npos &&
             report.find("\"auc\"") != std::string::npos,
         "report has before/after dp_gamma and auc");

  const std::string repaired = slurp(g_dir / "repaired.csv");
  int repaired_lines = 0;
  for (char c : repaired) {
    if (c == '\n') ++repaired_lines;
  }
  expect(repaired_lines == 401, "repaired CSV keeps all rows");
  // y and z columns are untouched.
  std::istringstream in(repaired);
  std::string header;
  std::getline(in, header);
  expect(header == "x0,x1,y,z", "repaired CSV keeps the column order");
  std::string line;
  int checked = 0;
  bool labels_ok = true;
  for (int i = 0; std::getline(in, line) && i < 400; ++i) {
    const auto last_comma = line.find_last_of(',');
    const std::string z = line.substr(last_comma + 1);
    if (i < 200 ? z != "A" : z != "B") labels_ok = false;
    ++checked;
  }
  expect(labels_ok && checked == 400, "protected labels are unchanged");
}

void scenario_bench() {
  // Two tiny disk silhouettes as CSV masks.
  const auto write_disk = [&](const std::string& name, double cx) {
    std::ostringstream text;
    for (int r = 0; r < 24; ++r) {
      for (int c = 0; c < 24; ++c) {
        const double dx = c + 0.5 - cx, dy = r + 0.5 - 12.0;
        text << ((dx * dx + dy * dy <= 25.0) ? '1' : '0')
             << (c + 1 < 24 ? "," : "\n");
      }
    }
    write_file(g_dir / name, text.str());
  };
  write_disk("s0.csv", 8.0);
  write_disk("s1.csv", 16.0);

  const int rc = run(
      "bench shapes --silhouette " + (g_dir / "s0.csv").string() +
      " --silhouette " + (g_dir / "s1.csv").string() +
      " --k-grid 1 --lambda-grid \"1,0;0.5,0.5;0,1\" --n 300 --seeds 2 --out " +
      (g_dir / "records.csv").string());
  expect(rc == 0, "bench shapes exits 0");
  const std::string text = slurp(g_dir / "records.csv");
  int lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  expect(lines == 1 + 3 * 2, "records.csv has header + k*lambda*seed rows");
  expect(text.rfind("k,lambda0,lambda1,agreement", 0) == 0,
         "records.csv header");
}

void scenario_errors() {
  expect(run("fit --input missing.csv --inputs-are-groups") == 2,
         "missing required --out is a usage error");
  expect(run("transport --model " + (g_dir / "m.json").string() +
             " --from a --to b --to-barycenter --input " +
             (g_dir / "a.csv").string()) == 2,
         "--to with --to-barycenter is a usage error");
  expect(run("fit --input " + (g_dir / "does_not_exist.csv").string() +
             " --input " + (g_dir / "b.csv").string() +
             " --inputs-are-groups --k 1 --out " + (g_dir / "x.json").string()) ==
             1,
         "missing input file is a runtime error");
  expect(run("transport --model " + (g_dir / "m.json").string() +
             " --from zzz --to b --input " + (g_dir / "a.csv").string()) == 1,
         "unknown group is a runtime error");
  expect(run("--help", "help.txt") == 0, "--help exits 0");

  write_file(g_dir / "nonfinite.csv", "x0,x1\n1.0,nan\n2.0,3.0\n");
  expect(run("transport --model " + (g_dir / "m.json").string() +
             " --from a --to b --input " + (g_dir / "nonfinite.csv").string()) ==
             1,
         "non-finite input is rejected");
  const std::string err = slurp(g_dir / "stderr.log");
  expect(err.find("row 1") != std::string::npos &&
             err.find("x1") != std::string::npos,
         "rejection names the row and column");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-cli>\n", argv[0]);
    return 2;
  }
  g_cli = argv[1];
  g_dir = fs::temp_directory_path() / "lbw_cli_driver";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);

  scenario_fit_transport_roundtrip();
  scenario_barycenter();
  scenario_dist();
  scenario_repair();
  scenario_bench();
  scenario_errors();

  if (g_failures > 0) {
    std::printf("%d scenario check(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all cli scenarios passed\n");
  return 0;
}
