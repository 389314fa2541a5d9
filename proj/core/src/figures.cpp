/* Copyright (c) 2026 The LDVD Lab Authors. All Rights Reserved.
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at
   http://www.apache.org/licenses/LICENSE-2.0
   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

#include "ldvd/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace ldvd {

namespace {

constexpr double kWidth = 800, kHeight = 480;
constexpr double kLeft = 70, kRight = 770, kTop = 50, kBottom = 430;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Axis {
  double lo = 0, hi = 1;
  double map(double v, double plo, double phi) const {
    if (hi == lo) return 0.5 * (plo + phi);
    return plo + (v - lo) / (hi - lo) * (phi - plo);
  }
};

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"28\" font-family=\"monospace\" font-size=\"16\" text-anchor=\"middle\">"
     << title << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\"" << kBottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kBottom
     << "\" stroke=\"black\"/>\n";
}

void axis_labels(std::ostringstream& os, const Axis& x, const Axis& y, const std::string& xlab,
                 const std::string& ylab) {
  os << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 14
     << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">" << xlab << "</text>\n";
  os << "<text x=\"16\" y=\"" << (kTop + kBottom) / 2
     << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (kTop + kBottom) / 2 << ")\">" << ylab << "</text>\n";
  os << "<text x=\"" << kLeft << "\" y=\"" << kBottom + 16
     << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">" << num(x.lo) << "</text>\n";
  os << "<text x=\"" << kRight << "\" y=\"" << kBottom + 16
     << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">" << num(x.hi) << "</text>\n";
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kBottom
     << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">" << num(y.lo) << "</text>\n";
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4
     << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">" << num(y.hi) << "</text>\n";
}

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string render_spectra_svg(const std::vector<SpectraCsvRow>& rows, const std::string& title) {
  std::ostringstream os;
  header(os, title);
  if (rows.empty()) {
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << (kTop + kBottom) / 2
       << "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">no spectra recorded</text>\n";
    os << "</svg>\n";
    return os.str();
  }
  std::set<int64_t> iter_set;
  int64_t max_rank = 0;
  Axis y;
  y.lo = rows[0].eig_value;
  y.hi = rows[0].eig_value;
  double lambda_plus = rows[0].lambda_plus, lambda_minus = rows[0].lambda_minus;
  for (const auto& r : rows) {
    iter_set.insert(r.iteration);
    max_rank = std::max(max_rank, r.eig_rank);
    y.lo = std::min(y.lo, r.eig_value);
    y.hi = std::max(y.hi, r.eig_value);
    lambda_plus = std::max(lambda_plus, r.lambda_plus);
    lambda_minus = std::min(lambda_minus, r.lambda_minus);
  }
  y.lo = std::min(y.lo, lambda_minus);
  y.hi = std::max(y.hi, lambda_plus);
  if (y.lo == y.hi) {
    y.lo -= 1;
    y.hi += 1;
  }
  Axis x;
  x.lo = static_cast<double>(*iter_set.begin());
  x.hi = static_cast<double>(*iter_set.rbegin());
  if (x.lo == x.hi) x.hi = x.lo + 1;

  // one polyline per eigenvalue rank across iterations
  for (int64_t rank = 0; rank <= max_rank; ++rank) {
    std::map<int64_t, double> series;
    for (const auto& r : rows)
      if (r.eig_rank == rank) series[r.iteration] = r.eig_value;
    if (series.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[rank % 10] << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [it, v] : series) {
      os << num(x.map(static_cast<double>(it), kLeft, kRight)) << "," << num(y.map(v, kBottom, kTop)) << " ";
    }
    // a single record still needs a visible line segment
    if (series.size() == 1) {
      const auto& [it, v] = *series.begin();
      os << num(x.map(static_cast<double>(it), kLeft, kRight) + 4) << "," << num(y.map(v, kBottom, kTop)) << " ";
    }
    os << "\"/>\n";
  }
  const double yp = y.map(lambda_plus, kBottom, kTop);
  const double ym = y.map(lambda_minus, kBottom, kTop);
  os << "<line x1=\"" << kLeft << "\" y1=\"" << num(yp) << "\" x2=\"" << kRight << "\" y2=\"" << num(yp)
     << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << num(ym) << "\" x2=\"" << kRight << "\" y2=\"" << num(ym)
     << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
  os << "<text x=\"" << kRight - 4 << "\" y=\"" << num(yp - 4)
     << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">lambda+ = " << num(lambda_plus)
     << "</text>\n";
  os << "<text x=\"" << kRight - 4 << "\" y=\"" << num(ym + 14)
     << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">lambda- = " << num(lambda_minus)
     << "</text>\n";
  axis_labels(os, x, y, "iteration", "eigenvalue");
  os << "</svg>\n";
  return os.str();
}

std::string render_losses_svg(const std::vector<LossCsvRow>& rows, const std::string& title) {
  std::ostringstream os;
  header(os, title);
  if (rows.empty()) {
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << (kTop + kBottom) / 2
       << "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">no iterations recorded</text>\n";
    os << "</svg>\n";
    return os.str();
  }
  Axis x{static_cast<double>(rows.front().iteration), static_cast<double>(rows.back().iteration)};
  if (x.lo == x.hi) x.hi = x.lo + 1;
  Axis y{rows[0].loss_d, rows[0].loss_d};
  for (const auto& r : rows) {
    y.lo = std::min({y.lo, r.loss_d, r.loss_g});
    y.hi = std::max({y.hi, r.loss_d, r.loss_g});
  }
  if (y.lo == y.hi) {
    y.lo -= 1;
    y.hi += 1;
  }
  const char* names[2] = {"loss_d", "loss_g"};
  for (int s = 0; s < 2; ++s) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[s] << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : rows) {
      const double v = s == 0 ? r.loss_d : r.loss_g;
      os << num(x.map(static_cast<double>(r.iteration), kLeft, kRight)) << "," << num(y.map(v, kBottom, kTop))
         << " ";
    }
    if (rows.size() == 1) {
      const double v = s == 0 ? rows[0].loss_d : rows[0].loss_g;
      os << num(x.map(static_cast<double>(rows[0].iteration), kLeft, kRight) + 4) << ","
         << num(y.map(v, kBottom, kTop)) << " ";
    }
    os << "\"/>\n";
    os << "<text x=\"" << kLeft + 10 + 90 * s << "\" y=\"" << kTop - 8 << "\" font-family=\"monospace\" "
       << "font-size=\"12\" fill=\"" << kPalette[s] << "\">" << names[s] << "</text>\n";
  }
  axis_labels(os, x, y, "iteration", "loss");
  os << "</svg>\n";
  return os.str();
}

std::string render_gradnorms_svg(const std::vector<GradNormCsvRow>& rows, const std::string& title) {
  std::ostringstream os;
  header(os, title);
  if (rows.empty()) {
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << (kTop + kBottom) / 2
       << "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">no gradient norms recorded</text>\n";
    os << "</svg>\n";
    return os.str();
  }
  // latest sampled iteration: norm per node, one polyline per batch kind
  int64_t last_iter = rows[0].iteration;
  for (const auto& r : rows) last_iter = std::max(last_iter, r.iteration);
  std::map<std::string, std::map<int64_t, double>> series;
  Axis x{1e300, -1e300}, y{0, -1e300};
  for (const auto& r : rows) {
    if (r.iteration != last_iter) continue;
    series[r.batch_kind][r.node_id] = r.adjoint_norm;
    x.lo = std::min(x.lo, static_cast<double>(r.node_id));
    x.hi = std::max(x.hi, static_cast<double>(r.node_id));
    y.hi = std::max(y.hi, r.adjoint_norm);
  }
  if (x.lo >= x.hi) x.hi = x.lo + 1;
  if (y.hi <= 0) y.hi = 1;
  int si = 0;
  for (const auto& [kind, pts] : series) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[si % 10] << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [node, v] : pts) {
      os << num(x.map(static_cast<double>(node), kLeft, kRight)) << "," << num(y.map(v, kBottom, kTop)) << " ";
    }
    os << "\"/>\n";
    os << "<text x=\"" << kLeft + 10 + 90 * si << "\" y=\"" << kTop - 8 << "\" font-family=\"monospace\" "
       << "font-size=\"12\" fill=\"" << kPalette[si % 10] << "\">" << kind << "</text>\n";
    ++si;
  }
  axis_labels(os, x, y, "node id (topological)", "adjoint norm");
  os << "</svg>\n";
  return os.str();
}

}  // namespace ldvd
