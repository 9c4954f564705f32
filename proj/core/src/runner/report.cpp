#include "colltime/runner/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "colltime/runner/experiments.hpp"
#include "colltime/runner/manifest.hpp"

namespace colltime::runner {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  const char* theorem;
  const char* file;
  const char* primary;  // quantity that makes the trend row
};

constexpr Table kTables[] = {
    {"A", "theorem_A.csv", "ks_exp1"},
    {"B", "theorem_B.csv", "ks_gamma"},
    {"1.1", "theorem_1_1.csv", "joint"},
    {"DPRE", "dpre.csv", "moment"},
};

struct Run {
  RunManifest manifest;
  std::filesystem::path dir;
  std::vector<SummaryRow> rows;
};

std::string shape(const RunManifest& m) {
  std::string s = "h=" + std::to_string(m.h) + " betas=";
  for (double b : m.betas) s += num(b) + ";";
  return s;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ReportError("report: cannot write " + p.string());
  out << text;
}

}  // namespace

ReportResult report(const std::vector<std::filesystem::path>& manifests, const std::filesystem::path& out_dir) {
  if (manifests.empty()) throw ReportError("report: no manifests given");
  std::vector<Run> runs;
  for (const auto& arg : manifests) {
    const auto path = std::filesystem::is_directory(arg) ? arg / "manifest.json" : arg;
    Run r;
    r.manifest = read_manifest(path);
    r.dir = path.parent_path();
    verify_files(r.manifest, r.dir);
    const auto* summary = r.manifest.find_role("summary");
    if (!summary) throw IntegrityError("report: " + path.string() + " lists no summary file");
    std::ifstream in(r.dir / summary->path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    r.rows = parse_summary_csv(text.str());
    runs.push_back(std::move(r));
  }

  std::filesystem::create_directories(out_dir);
  ReportResult result;
  result.runs = runs.size();

  for (const auto& t : kTables) {
    std::optional<std::string> expected_shape;
    std::string first_source;
    std::map<std::int64_t, SummaryRow> trend;
    std::map<std::int64_t, double> baseline;
    for (const auto& r : runs) {
      bool contributes = false;
      for (const auto& row : r.rows) {
        if (row.theorem != t.theorem) continue;
        contributes = true;
        if (row.quantity == t.primary) {
          if (!trend.emplace(row.N, row).second)
            throw ReportError(std::string("report: N=") + std::to_string(row.N) + " appears twice in " + t.file);
        } else if (row.quantity == "pair_exact_product") {
          if (!baseline.emplace(row.N, row.statistic).second)
            throw ReportError("report: two pair baselines at N=" + std::to_string(row.N));
        }
      }
      if (!contributes) continue;
      const auto s = shape(r.manifest);
      if (!expected_shape) {
        expected_shape = s;
        first_source = r.dir.string();
      } else if (*expected_shape != s) {
        throw ReportError(std::string("report: ") + t.file + " mixes runs with different h or betas (" +
                          *expected_shape + " from " + first_source + ", " + s + " from " + r.dir.string() + ")");
      }
    }
    if (trend.empty()) continue;
    const bool with_gap = std::string(t.theorem) == "1.1";
    std::ostringstream csv;
    csv << "N,statistic,target,gap,SE" << (with_gap ? ",factorization_gap" : "") << '\n';
    for (const auto& [N, row] : trend) {
      csv << N << ',' << num(row.statistic) << ',' << num(row.target) << ',' << num(row.gap) << ',' << num(row.se);
      if (with_gap) {
        const auto it = baseline.find(N);
        csv << ',' << (it == baseline.end() ? "" : num(row.statistic - it->second));
      }
      csv << '\n';
    }
    const auto p = out_dir / t.file;
    write_text(p, csv.str());
    result.files.push_back(p);
  }

  std::ostringstream lng;
  lng << "run,kind,theorem,N,quantity,statistic,target,gap,SE\n";
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (const auto& row : runs[i].rows)
      lng << i << ',' << runs[i].manifest.kind << ',' << row.theorem << ',' << row.N << ',' << row.quantity << ','
          << num(row.statistic) << ',' << num(row.target) << ',' << num(row.gap) << ',' << num(row.se) << '\n';
  const auto p = out_dir / "summary_long.csv";
  write_text(p, lng.str());
  result.files.push_back(p);
  return result;
}

}  // namespace colltime::runner
