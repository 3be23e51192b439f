// Copyright 2026 The ActLoc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Standalone SVG output for metrics CSVs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "actloc/harness.hpp"
#include "json.hpp"

namespace actloc {
namespace {

constexpr const char* kColumns[] = {"scenario", "seed", "recall", "precision",
                                    "precision_relaxed", "aae_deg", "auc_judd",
                                    "steps"};
constexpr std::size_t kNumColumns = 8;

struct CsvRow {
  std::string scenario;
  std::uint64_t seed = 0;
  double values[6] = {};  // recall .. steps
};

struct CsvFile {
  std::string agent = "agent";
  std::string provenance;  ///< the CSV's "# actloc ..." line, without '#'

  std::vector<CsvRow> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvFile read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open CSV");
  CsvFile f;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  auto where = [&] { return path.string() + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# actloc", 0) == 0) f.provenance = line.substr(2);
      const auto pos = line.find("agent=");
      if (pos != std::string::npos) {
        f.agent = line.substr(pos + 6);
        f.agent = f.agent.substr(0, f.agent.find(' '));
      }
      continue;
    }
    const std::vector<std::string> fields = split(line);
    if (!header) {
      if (fields.size() != kNumColumns ||
          !std::equal(fields.begin(), fields.end(), std::begin(kColumns))) {
        throw Error(where() + "expected header " +
                    std::string("scenario,seed,recall,precision,precision_relaxed,"
                                "aae_deg,auc_judd,steps"));
      }
      header = true;
      continue;
    }
    if (fields.size() != kNumColumns) {
      throw Error(where() + "expected 8 fields, got " + std::to_string(fields.size()));
    }
    CsvRow row;
    row.scenario = fields[0];
    try {
      std::size_t used = 0;
      row.seed = std::stoull(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("seed");
      for (std::size_t k = 0; k < 6; ++k) {
        row.values[k] = std::stod(fields[k + 2], &used);
        if (used != fields[k + 2].size() || !std::isfinite(row.values[k])) {
          throw std::invalid_argument("value");
        }
      }
    } catch (const std::exception&) {
      throw Error(where() + "malformed number in '" + line + "'");
    }
    f.rows.push_back(std::move(row));
  }
  if (!header) throw Error(path.string() + ": empty CSV (no header)");
  if (f.rows.empty()) throw Error(path.string() + ": CSV has no data rows");
  return f;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string svg_open(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) +
         " " + std::to_string(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle",
                 int size = 12) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
}

std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values) {
  const int w = 640, h = 360, left = 60, right = 20, top = 40, bottom = 50;
  double hi = 0.0, lo = 0.0;
  for (double v : values) {
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  if (hi == lo) hi = lo + 1.0;
  const double plot_w = w - left - right, plot_h = h - top - bottom;
  auto y_of = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };
  std::string out = svg_open(w, h);
  out += text(w / 2.0, 22, title, "middle", 16);
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(y_of(0)) + "\" x2=\"" +
         num(w - right) + "\" y2=\"" + num(y_of(0)) + "\" stroke=\"black\"/>\n";
  out += text(left - 6, y_of(hi) + 4, num(hi), "end", 10);
  out += text(left - 6, y_of(lo) + 4, num(lo), "end", 10);
  const double slot = plot_w / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = left + slot * i + slot * 0.15;
    const double y0 = y_of(std::max(0.0, values[i]));
    const double y1 = y_of(std::min(0.0, values[i]));
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(y0) + "\" width=\"" + num(slot * 0.7) +
           "\" height=\"" + num(y1 - y0) + "\" fill=\"#4c72b0\"/>\n";
    if (values.size() <= 40) {
      out += text(x + slot * 0.35, h - bottom + 16, labels[i], "middle", 10);
    }
  }
  out += "</svg>\n";
  return out;
}

std::string trace_chart(const std::string& title, const std::vector<double>& gamma) {
  const int w = 720, h = 320, left = 50, right = 20, top = 40, bottom = 40;
  const double plot_w = w - left - right, plot_h = h - top - bottom;
  auto x_of = [&](std::size_t i) {
    return left + (gamma.size() > 1 ? plot_w * i / double(gamma.size() - 1) : 0.0);
  };
  auto y_of = [&](double g) { return top + (1.0 - g) / 2.0 * plot_h; };
  std::string out = svg_open(w, h);
  out += text(w / 2.0, 22, title, "middle", 16);
  for (double g : {-1.0, 0.0, 1.0}) {
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(y_of(g)) + "\" x2=\"" +
           num(w - right) + "\" y2=\"" + num(y_of(g)) + "\" stroke=\"#cccccc\"/>\n";
    out += text(left - 6, y_of(g) + 4, num(g), "end", 10);
  }
  out += "<polyline fill=\"none\" stroke=\"#c44e52\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    out += num(x_of(i)) + "," + num(y_of(gamma[i])) + (i + 1 < gamma.size() ? " " : "");
  }
  out += "\"/>\n";
  out += text(w / 2.0, h - 10, "step", "middle", 11);
  out += "</svg>\n";
  return out;
}

// Plots carry the tool version and config hash of the data they show.
void write(const std::filesystem::path& p, const std::string& provenance,
           const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << "<!-- "
     << (provenance.empty() ? std::string("actloc ") + kToolVersion : provenance)
     << " -->\n"
     << s;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv,
                                              const std::filesystem::path& out_dir) {
  const CsvFile f = read_csv(csv);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  if (f.rows.size() == 1) {
    const CsvRow& r = f.rows.front();
    const std::string stem =
        "episode_" + r.scenario + "_" + f.agent + "_s" + std::to_string(r.seed);
    const auto log = csv.parent_path() / (stem + ".jsonl");
    std::ifstream in(log);
    if (!in) throw Error(log.string() + ": episode log for the trace not found");
    std::vector<double> gamma;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        throw Error(log.string() + ":" + std::to_string(lineno) + ": invalid JSON");
      }
      if (j.contains("gamma")) gamma.push_back(j.at("gamma").get<double>());
    }
    const auto path = out_dir / ("trace_" + stem + ".svg");
    write(path, f.provenance, trace_chart("gamma per step: " + stem, gamma));
    written.push_back(path);
    return written;
  }
  std::vector<std::string> labels;
  for (const CsvRow& r : f.rows) labels.push_back(std::to_string(r.seed));
  for (std::size_t k = 0; k < 5; ++k) {
    std::vector<double> values;
    for (const CsvRow& r : f.rows) values.push_back(r.values[k]);
    const std::string metric = kColumns[k + 2];
    const auto path = out_dir / ("bars_" + f.agent + "_" + metric + ".svg");
    write(path, f.provenance, bar_chart(metric + " per seed (" + f.agent + ")", labels, values));
    written.push_back(path);
  }
  return written;
}

}  // namespace actloc
