#include "geocume/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "geocume/error.hpp"
#include "geocume/experiment.hpp"

namespace geocume {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct CsvRow {
  std::string check;
  std::string n;
  std::string param;
  std::string value;
  std::string stderr_;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<CsvRow> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::file, "cannot read results " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorKind::file, "results " + path.string() + " lack the expected header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 9) throw Error(ErrorKind::file, "malformed results row: " + line);
    rows.push_back({cells[2], cells[3], cells[4], cells[5], cells[6]});
  }
  if (rows.empty()) throw Error(ErrorKind::file, "results " + path.string() + " contain no rows");
  return rows;
}

double parse(const std::string& s) { return s.empty() ? std::nan("") : std::stod(s); }

Series collect(const std::vector<CsvRow>& rows, const std::string& check, const std::string& param,
               const std::string& label, bool with_err) {
  Series s;
  s.label = label;
  for (const auto& r : rows) {
    if (r.check != check || r.param != param || r.n.empty() || r.value.empty()) continue;
    s.x.push_back(parse(r.n));
    s.y.push_back(parse(r.value));
    if (with_err) s.err.push_back(r.stderr_.empty() ? 0.0 : parse(r.stderr_));
  }
  return s;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, bool log_x) {
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = s.err.empty() ? 0.0 : s.err[i];
      const double x = log_x ? std::log10(s.x[i]) : s.x[i];
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, s.y[i] - e);
      y_hi = std::max(y_hi, s.y[i] + e);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi == y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + ((log_x ? std::log10(x) : x) - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << px(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
  out << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(plot_w) << "\" height=\""
      << px(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = y_lo + (y_hi - y_lo) * t / 4.0;
    out << "<line x1=\"" << px(kLeft - 4) << "\" y1=\"" << px(sy(y)) << "\" x2=\"" << px(kLeft) << "\" y2=\""
        << px(sy(y)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(kLeft - 6) << "\" y=\"" << px(sy(y) + 4) << "\" text-anchor=\"end\">" << num(y)
        << "</text>\n";
  }
  std::vector<double> ticks;
  for (const auto& s : series) ticks.insert(ticks.end(), s.x.begin(), s.x.end());
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (double x : ticks) {
    out << "<line x1=\"" << px(sx(x)) << "\" y1=\"" << px(kTop + plot_h) << "\" x2=\"" << px(sx(x)) << "\" y2=\""
        << px(kTop + plot_h + 4) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(sx(x)) << "\" y=\"" << px(kTop + plot_h + 18) << "\" text-anchor=\"middle\">" << num(x)
        << "</text>\n";
  }
  out << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kHeight - 10) << "\" text-anchor=\"middle\">"
      << escape(x_label) << (log_x ? " (log scale)" : "") << "</text>\n";
  out << "<text x=\"16\" y=\"" << px(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << px(kTop + plot_h / 2) << ")\">" << escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::vector<std::size_t> order(s.x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
    if (!order.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t j = 0; j < order.size(); ++j) {
        out << (j ? " " : "") << px(sx(s.x[order[j]])) << ',' << px(sy(s.y[order[j]]));
      }
      out << "\"/>\n";
    }
    for (std::size_t i : order) {
      if (!s.err.empty() && s.err[i] > 0.0) {
        out << "<line x1=\"" << px(sx(s.x[i])) << "\" y1=\"" << px(sy(s.y[i] - s.err[i])) << "\" x2=\""
            << px(sx(s.x[i])) << "\" y2=\"" << px(sy(s.y[i] + s.err[i])) << "\" stroke=\"" << color << "\"/>\n";
      }
      out << "<circle cx=\"" << px(sx(s.x[i])) << "\" cy=\"" << px(sy(s.y[i])) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << px(kWidth - kRight + 10) << "\" y1=\"" << px(ly - 4) << "\" x2=\""
        << px(kWidth - kRight + 30) << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(kWidth - kRight + 35) << "\" y=\"" << px(ly) << "\">" << escape(s.label)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::vector<std::filesystem::path> cmd_report(const std::filesystem::path& results,
                                              const std::filesystem::path& out_dir) {
  const auto csv = std::filesystem::is_directory(results) ? results / "results.csv" : results;
  if (!std::filesystem::exists(csv)) throw Error(ErrorKind::file, "missing results " + csv.string());
  const auto rows = read_results(csv);
  const auto dir = out_dir.empty() ? csv.parent_path() : out_dir;
  std::filesystem::create_directories(dir);

  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& file, const std::string& svg) {
    const auto path = dir / file;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::file, "cannot write " + path.string());
    out << svg;
    written.push_back(path);
  };

  Series ks = collect(rows, "clt", "ks", "KS distance", false);
  if (!ks.x.empty()) {
    Series floor;
    floor.label = "1/sqrt(reps)";
    for (const auto& r : rows) {
      if (r.check == "clt" && r.param == "ks" && !r.n.empty()) {
        floor.x.push_back(parse(r.n));
        floor.y.push_back(parse(r.stderr_));
      }
    }
    emit("ks.svg", render_svg("KS distance to the Gaussian", "n", "KS", {ks, floor}, true));
  }
  Series var = collect(rows, "variance", "var_per_n", "Var/n", true);
  if (!var.x.empty()) {
    Series mean = collect(rows, "variance", "mean_per_n", "Mean/n", true);
    emit("variance.svg", render_svg("Variance and mean per unit volume", "n", "value", {var, mean}, true));
  }
  std::map<std::string, Series> by_k;
  for (const auto& r : rows) {
    if (r.check != "cumulant_growth" || r.n.empty() || r.value.empty()) continue;
    Series& s = by_k[r.param];
    s.label = "kappa_" + r.param.substr(r.param.find('=') + 1) + "/n";
    s.x.push_back(parse(r.n));
    s.y.push_back(parse(r.value));
    s.err.push_back(r.stderr_.empty() ? 0.0 : parse(r.stderr_));
  }
  if (!by_k.empty()) {
    std::vector<Series> list;
    for (auto& [k, s] : by_k) list.push_back(std::move(s));
    emit("cumulants.svg", render_svg("Cumulants per unit volume", "n", "kappa_k / n", list, true));
  }
  return written;
}

}  // namespace geocume
