#include "nhqmc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "nhqmc/errors.hpp"

namespace nhqmc {

namespace {

// Shortest round-trip representation, so reruns compare byte for byte.
std::string number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw InputError("bad number '" + s + "' in CSV");
  }
  return x;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

struct Panel {
  double x0, y0, w, h;
  double tmin, tmax, vmin, vmax;

  double px(double t) const { return x0 + (t - tmin) / (tmax - tmin) * w; }
  double py(double v) const { return y0 + h - (v - vmin) / (vmax - vmin) * h; }
};

void axes(std::ostringstream& svg, const Panel& p, const std::string& ylabel,
          bool log_axis) {
  svg << fmt::format(
      "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
      "fill=\"none\" stroke=\"#333\"/>\n",
      p.x0, p.y0, p.w, p.h);
  for (int i = 0; i <= 4; ++i) {
    const double t = p.tmin + (p.tmax - p.tmin) * i / 4.0;
    svg << fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" "
        "text-anchor=\"middle\">{:.3g}</text>\n",
        p.px(t), p.y0 + p.h + 15, t);
    const double v = p.vmin + (p.vmax - p.vmin) * i / 4.0;
    const std::string label =
        log_axis ? fmt::format("1e{:.1f}", v) : fmt::format("{:.3g}", v);
    svg << fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" "
        "text-anchor=\"end\">{}</text>\n",
        p.x0 - 5, p.py(v) + 4, label);
  }
  svg << fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"12\" "
      "text-anchor=\"middle\">t</text>\n",
      p.x0 + p.w / 2, p.y0 + p.h + 32);
  svg << fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"12\" "
      "transform=\"rotate(-90 {:.1f} {:.1f})\" text-anchor=\"middle\">{}</text>\n",
      p.x0 - 48, p.y0 + p.h / 2, p.x0 - 48, p.y0 + p.h / 2, ylabel);
}

void polyline(std::ostringstream& svg, const Panel& p,
              const std::vector<std::pair<double, double>>& pts,
              const std::string& colour, bool dashed) {
  std::string path;
  for (const auto& [t, v] : pts) {
    if (!std::isfinite(v)) continue;
    path += fmt::format("{:.2f},{:.2f} ", p.px(t), p.py(v));
  }
  if (path.empty()) return;
  svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\""
      << (dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << path
      << "\"/>\n";
}

}  // namespace

std::optional<double> ResultRow::abs_error() const {
  if (!exact || std::isnan(estimate)) return std::nullopt;
  return std::abs(estimate - *exact);
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    const auto err = r.abs_error();
    out += number(r.t) + "," + r.method + "," + number(r.estimate) + "," +
           number(r.stderr_) + "," + (r.exact ? number(*r.exact) : "") + "," +
           (err ? number(*err) : "") + "," + std::to_string(r.n_samples) + "," +
           std::to_string(r.seed) + "\n";
  }
  return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw InputError("CSV header does not match the result schema");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw InputError("CSV row has " + std::to_string(f.size()) + " fields");
    ResultRow r;
    r.t = to_double(f[0]);
    r.method = f[1];
    r.estimate = to_double(f[2]);
    r.stderr_ = to_double(f[3]);
    if (!f[4].empty()) r.exact = to_double(f[4]);
    r.n_samples = std::stoull(f[6]);
    r.seed = std::stoull(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string render_svg(const std::string& csv_text) {
  const auto rows = parse_csv(csv_text);
  std::vector<std::string> methods;
  std::map<std::string, std::vector<std::pair<double, double>>> values, errors;
  std::map<double, double> exact;
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -tmin;
  double vmin = tmin, vmax = -tmin, emin = tmin, emax = -tmin;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
    tmin = std::min(tmin, r.t);
    tmax = std::max(tmax, r.t);
    if (std::isfinite(r.estimate)) {
      values[r.method].emplace_back(r.t, r.estimate);
      vmin = std::min(vmin, r.estimate);
      vmax = std::max(vmax, r.estimate);
    }
    if (r.exact) {
      exact[r.t] = *r.exact;
      vmin = std::min(vmin, *r.exact);
      vmax = std::max(vmax, *r.exact);
    }
    if (const auto e = r.abs_error(); e && *e > 0.0) {
      const double le = std::log10(*e);
      errors[r.method].emplace_back(r.t, le);
      emin = std::min(emin, le);
      emax = std::max(emax, le);
    }
  }
  if (rows.empty()) throw InputError("no rows to plot");
  if (tmax <= tmin) tmax = tmin + 1.0;
  if (!(vmax > vmin)) { vmin -= 0.5; vmax += 0.5; }
  if (!(emax > emin)) { emin = std::isfinite(emin) ? emin - 1 : -4; emax = emin + 2; }
  const double vpad = 0.05 * (vmax - vmin);
  emin = std::floor(emin);
  emax = std::ceil(emax);

  const Panel top{70, 30, 560, 220, tmin, tmax, vmin - vpad, vmax + vpad};
  const Panel bottom{70, 320, 560, 220, tmin, tmax, emin, emax};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"820\" height=\"590\" "
         "font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  axes(svg, top, "estimate", false);
  axes(svg, bottom, "log10 |error|", true);
  std::vector<std::pair<double, double>> exact_pts(exact.begin(), exact.end());
  polyline(svg, top, exact_pts, "#000", true);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const std::string colour = kPalette[m % std::size(kPalette)];
    polyline(svg, top, values[methods[m]], colour, false);
    polyline(svg, bottom, errors[methods[m]], colour, false);
  }
  double ly = 40;
  const auto legend = [&](const std::string& name, const std::string& colour,
                          bool dashed) {
    svg << fmt::format(
        "<line x1=\"650\" y1=\"{0:.1f}\" x2=\"675\" y2=\"{0:.1f}\" stroke=\"{1}\" "
        "stroke-width=\"1.5\"{2}/>\n<text x=\"680\" y=\"{3:.1f}\" "
        "font-size=\"12\">{4}</text>\n",
        ly, colour, dashed ? " stroke-dasharray=\"5,3\"" : "", ly + 4, name);
    ly += 18;
  };
  if (!exact.empty()) legend("exact", "#000", true);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    legend(methods[m], kPalette[m % std::size(kPalette)], false);
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace nhqmc
