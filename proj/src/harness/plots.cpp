#include "fenc/harness/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "fenc/harness/config.hpp"
#include "fenc/harness/results.hpp"

namespace fenc::harness {

namespace fs = std::filesystem;

namespace {

constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 55;
const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string f(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Axis {
  double lo, hi;
  bool log;
  double px0, px1;

  double map(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double t = ((log ? std::log10(v) : v) - a) / (b - a);
    return px0 + t * (px1 - px0);
  }
};

Axis make_axis(std::vector<double> vals, bool log, double px0, double px1) {
  if (log) vals.erase(std::remove_if(vals.begin(), vals.end(), [](double v) { return !(v > 0); }), vals.end());
  vals.erase(std::remove_if(vals.begin(), vals.end(), [](double v) { return !std::isfinite(v); }), vals.end());
  double lo = vals.empty() ? 0 : *std::min_element(vals.begin(), vals.end());
  double hi = vals.empty() ? 1 : *std::max_element(vals.begin(), vals.end());
  if (vals.empty() && log) lo = 1, hi = 10;
  if (hi <= lo) {
    const double pad = log ? lo : std::max(1.0, std::abs(lo)) * 0.05;
    lo -= log ? lo / 2 : pad;
    hi += pad;
  }
  return {lo, hi, log, px0, px1};
}

std::vector<double> read_column(const fs::path& path, const std::string& name, std::vector<double>* first = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string h;
    while (std::getline(ss, h, ',')) header.push_back(h);
  }
  const auto col = std::find(header.begin(), header.end(), name) - header.begin();
  if (col == static_cast<long>(header.size())) throw std::runtime_error(path.string() + ": no column " + name);
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (long k = 0; std::getline(ss, cell, ','); ++k) {
      if (k == 0 && first) first->push_back(std::stod(cell));
      if (k == col) out.push_back(std::stod(cell));
    }
  }
  return out;
}

std::vector<fs::path> seed_files(const fs::path& dir, const std::string& name) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && e.path().filename().string().rfind("seed_", 0) == 0 && fs::exists(e.path() / name))
      out.push_back(e.path() / name);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

BandSeries band_from_curves(std::string label, const std::vector<double>& x,
                            const std::vector<std::vector<double>>& curves) {
  BandSeries s{std::move(label), {}, {}, {}, {}};
  if (curves.empty()) return s;
  std::size_t n = x.size();
  for (const auto& c : curves) n = std::min(n, c.size());
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> at;
    for (const auto& c : curves) at.push_back(c[k]);
    s.x.push_back(x[k]);
    s.lo.push_back(*std::min_element(at.begin(), at.end()));
    s.hi.push_back(*std::max_element(at.begin(), at.end()));
    s.mid.push_back(median(at));
  }
  return s;
}

std::string line_chart_svg(const ChartSpec& spec, const std::vector<BandSeries>& series) {
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.lo.begin(), s.lo.end());
    ys.insert(ys.end(), s.hi.begin(), s.hi.end());
  }
  const Axis ax = make_axis(xs, spec.log_x, L, W - R);
  const Axis ay = make_axis(ys, spec.log_y, H - B, T);
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
    << "</text>\n"
    << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double tx = ax.log ? std::pow(10, std::log10(ax.lo) + k * (std::log10(ax.hi) - std::log10(ax.lo)) / 4)
                             : ax.lo + k * (ax.hi - ax.lo) / 4;
    const double ty = ay.log ? std::pow(10, std::log10(ay.lo) + k * (std::log10(ay.hi) - std::log10(ay.lo)) / 4)
                             : ay.lo + k * (ay.hi - ay.lo) / 4;
    o << "<text x=\"" << ax.map(tx) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << f(tx)
      << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << ay.map(ty) + 4 << "\" text-anchor=\"end\">" << f(ty) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n"
    << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(spec.y_label) << "</text>\n";

  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!ax.log || x > 0) && (!ay.log || y > 0);
  };
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const char* color = palette[s % std::size(palette)];
    std::ostringstream band, line;
    for (std::size_t k = 0; k < ser.x.size(); ++k)
      if (ok(ser.x[k], ser.hi[k])) band << ax.map(ser.x[k]) << ',' << ay.map(ser.hi[k]) << ' ';
    for (std::size_t k = ser.x.size(); k-- > 0;)
      if (ok(ser.x[k], ser.lo[k])) band << ax.map(ser.x[k]) << ',' << ay.map(ser.lo[k]) << ' ';
    for (std::size_t k = 0; k < ser.x.size(); ++k)
      if (ok(ser.x[k], ser.mid[k])) line << ax.map(ser.x[k]) << ',' << ay.map(ser.mid[k]) << ' ';
    o << "<polygon points=\"" << band.str() << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n"
      << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.8\"/>\n"
      << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 16 + 16 * s << "\" text-anchor=\"end\" fill=\"" << color
      << "\">" << escape(ser.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string heatmap_svg(const std::string& title, const std::vector<double>& axis, const Eigen::MatrixXd& values) {
  const auto n = static_cast<double>(axis.size());
  const double cell = std::min((W - L - R) / n, (H - T - B) / n);
  const double lo = values.minCoeff(), hi = values.maxCoeff();
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const double t = hi > lo ? (values(i, j) - lo) / (hi - lo) : 1.0;
      const int shade = static_cast<int>(std::lround(255 * (1 - t)));
      const double x = L + j * cell, y = T + i * cell;
      o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
        << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\"/>\n"
        << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"middle\">"
        << f(values(i, j)) << "</text>\n";
    }
  for (std::size_t k = 0; k < axis.size(); ++k) {
    o << "<text x=\"" << L + (k + 0.5) * cell << "\" y=\"" << T + n * cell + 16 << "\" text-anchor=\"middle\">"
      << f(axis[k]) << "</text>\n"
      << "<text x=\"" << L - 6 << "\" y=\"" << T + (k + 0.5) * cell + 4 << "\" text-anchor=\"end\">" << f(axis[k])
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_line_chart(const fs::path& svg_path, const ChartSpec& spec, const std::vector<BandSeries>& series) {
  std::ofstream svg(svg_path);
  if (!svg) throw std::runtime_error("cannot write " + svg_path.string());
  svg << line_chart_svg(spec, series);
  fs::path csv_path = svg_path;
  csv_path.replace_extension(".csv");
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  csv << "series,x,min,median,max\n";
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k)
      csv << s.label << ',' << format_number(s.x[k]) << ',' << format_number(s.lo[k]) << ','
          << format_number(s.mid[k]) << ',' << format_number(s.hi[k]) << '\n';
}

std::vector<fs::path> emit_plots(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("no results directory at " + dir.string());
  const fs::path out = dir / "plots";
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const ChartSpec& spec, const std::vector<BandSeries>& series) {
    fs::create_directories(out);
    write_line_chart(out / (name + ".svg"), spec, series);
    written.push_back(out / (name + ".svg"));
    written.push_back(out / (name + ".csv"));
  };

  // Per-seed curves in this directory.
  for (const auto& [file, column, name, spec] :
       {std::tuple{"loss_curve.csv", "loss", "loss_curves", ChartSpec{"Training loss", "step", "loss", false, true}},
        std::tuple{"learning_curve.csv", "mean_return", "learning_curves",
                   ChartSpec{"Learning curve", "episode", "mean discounted return", false, false}}}) {
    const auto files = seed_files(dir, file);
    if (files.empty()) continue;
    std::vector<std::vector<double>> curves;
    std::vector<double> x;
    for (const auto& p : files) {
      std::vector<double> first;
      curves.push_back(read_column(p, column, &first));
      if (x.empty()) x = first;
    }
    emit(name, spec, {band_from_curves("median (min-max band)", x, curves)});
  }

  // Sweep tables: one chart per base metric, x = swept value.
  if (fs::exists(dir / "sweep.csv")) {
    const auto table = ResultsTable::read_csv((dir / "sweep.csv").string());
    static const std::regex pat(R"((.+)@(\w+)=(.+))");
    std::map<std::string, std::map<double, std::vector<double>>> by_metric;
    std::string axis;
    for (const auto& r : table.rows()) {
      std::smatch m;
      if (!std::regex_match(r.metric, m, pat)) continue;
      axis = m[2];
      by_metric[m[1]][std::stod(m[3])].push_back(r.value);
    }
    for (const auto& [metric, points] : by_metric) {
      BandSeries s{metric, {}, {}, {}, {}};
      for (const auto& [x, vals] : points) {
        s.x.push_back(x);
        s.lo.push_back(*std::min_element(vals.begin(), vals.end()));
        s.hi.push_back(*std::max_element(vals.begin(), vals.end()));
        s.mid.push_back(median(vals));
      }
      const bool positive = std::all_of(s.lo.begin(), s.lo.end(), [](double v) { return v > 0; });
      emit("sweep_" + metric, {metric + " vs " + axis, axis, metric, true, positive}, {s});
    }
  }

  if (fs::exists(dir / "similarity.csv")) {
    std::ifstream in(dir / "similarity.csv");
    std::string line, cell;
    std::getline(in, line);
    std::vector<double> axis;
    std::stringstream hs(line);
    std::string param;
    std::getline(hs, param, ',');
    while (std::getline(hs, cell, ',')) axis.push_back(std::stod(cell));
    Eigen::MatrixXd grid(axis.size(), axis.size());
    for (std::size_t i = 0; i < axis.size() && std::getline(in, line); ++i) {
      std::stringstream ss(line);
      std::getline(ss, cell, ',');
      for (std::size_t j = 0; j < axis.size() && std::getline(ss, cell, ','); ++j) grid(i, j) = std::stod(cell);
    }
    fs::create_directories(out);
    std::ofstream(out / "similarity.svg") << heatmap_svg("Cosine similarity of representations vs " + param, axis, grid);
    fs::copy_file(dir / "similarity.csv", out / "similarity.csv", fs::copy_options::overwrite_existing);
    written.push_back(out / "similarity.svg");
    written.push_back(out / "similarity.csv");
  }
  return written;
}

}  // namespace fenc::harness
