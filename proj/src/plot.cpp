#include "sgcn/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "sgcn/errors.hpp"

namespace sgcn {

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "lowpass") return PlotKind::Lowpass;
  if (name == "highpass") return PlotKind::Highpass;
  if (name == "augment") return PlotKind::Augment;
  if (name == "spectrum") return PlotKind::Spectrum;
  if (name == "sensitivity") return PlotKind::Sensitivity;
  if (name == "train") return PlotKind::Train;
  throw InputError("unknown plot kind '" + name +
                   "' (lowpass, highpass, augment, spectrum, sensitivity, train)");
}

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

std::string text_of(const CsvCell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return format_double(std::get<double>(c));
}

class Columns {
 public:
  explicit Columns(const CsvTable& t) : t_(t) {}

  std::size_t require(const std::string& name) const {
    const auto it = std::find(t_.header.begin(), t_.header.end(), name);
    if (it == t_.header.end())
      throw ValidationError(ValidationKind::Schema, "plot: CSV lacks column '" + name + "'");
    return static_cast<std::size_t>(it - t_.header.begin());
  }

  std::string cell(std::size_t row, std::size_t col) const {
    const auto& r = t_.rows[row];
    if (col >= r.size())
      throw ValidationError(ValidationKind::Schema, "plot: short row " + std::to_string(row + 2));
    return text_of(r[col]);
  }

  double number(std::size_t row, std::size_t col) const {
    try {
      return parse_double(cell(row, col));
    } catch (const ValidationError&) {
      throw ValidationError(ValidationKind::Schema,
                            "plot: non-numeric value in row " + std::to_string(row + 2));
    }
  }

 private:
  const CsvTable& t_;
};

// Mean of y per x (and per group), skipping rows with a non-empty error.
std::map<std::string, std::map<double, std::pair<double, int>>> averaged(
    const CsvTable& t, const std::string& x, const std::string& y, const std::string& group) {
  const Columns c(t);
  const std::size_t xi = c.require(x);
  const std::size_t yi = c.require(y);
  const std::size_t gi = group.empty() ? 0 : c.require(group);
  const auto err = std::find(t.header.begin(), t.header.end(), "error");
  const bool has_error = err != t.header.end();
  const auto ei = static_cast<std::size_t>(err - t.header.begin());

  std::map<std::string, std::map<double, std::pair<double, int>>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (has_error && !c.cell(r, ei).empty()) continue;
    const std::string g = group.empty() ? "" : c.cell(r, gi);
    auto& slot = out[g][c.number(r, xi)];
    slot.first += c.number(r, yi);
    slot.second += 1;
  }
  return out;
}

Chart sweep_chart(const CsvTable& t, const std::string& title, const std::string& group,
                  const std::string& group_prefix) {
  Chart chart{title, "retained spectrum (%)", "mean test accuracy", {}};
  for (const auto& [g, by_x] : averaged(t, "fraction", "test_acc", group)) {
    Series s{group.empty() ? "test accuracy" : group_prefix + g, {}};
    for (const auto& [x, acc] : by_x) s.points.emplace_back(100.0 * x, acc.first / acc.second);
    chart.series.push_back(std::move(s));
  }
  if (group == "depth") {
    std::sort(chart.series.begin(), chart.series.end(), [&](const Series& a, const Series& b) {
      return std::stoll(a.label.substr(group_prefix.size())) <
             std::stoll(b.label.substr(group_prefix.size()));
    });
  }
  return chart;
}

Chart column_chart(const CsvTable& t, const std::string& title, const std::string& x,
                   const std::vector<std::string>& ys, const std::string& y_label) {
  const Columns c(t);
  const std::size_t xi = c.require(x);
  Chart chart{title, x, y_label, {}};
  for (const auto& y : ys) {
    const std::size_t yi = c.require(y);
    Series s{y, {}};
    for (std::size_t r = 0; r < t.rows.size(); ++r) s.points.emplace_back(c.number(r, xi), c.number(r, yi));
    chart.series.push_back(std::move(s));
  }
  return chart;
}

std::string fmt(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return buf.data();
}

std::string tick_label(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.3g", v);
  return buf.data();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string draw(const Chart& chart) {
  constexpr double width = 720.0;
  constexpr double height = 440.0;
  constexpr double left = 70.0;
  constexpr double right = 170.0;
  constexpr double top = 40.0;
  constexpr double bottom = 60.0;
  constexpr std::array<const char*, 8> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& s : chart.series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (!std::isfinite(x0))
    throw ValidationError(ValidationKind::Schema, "plot: no finite points to draw");
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  const auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  const auto sy = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
         fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" + escape(chart.title) + "</text>\n";
  svg += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) +
         "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    svg += "<line x1=\"" + fmt(sx(xv)) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(sx(xv)) +
           "\" y2=\"" + fmt(top + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(sx(xv)) + "\" y=\"" + fmt(top + ph + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           tick_label(xv) + "</text>\n";
    svg += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(sy(yv)) + "\" x2=\"" + fmt(left) +
           "\" y2=\"" + fmt(sy(yv)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(sy(yv) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           tick_label(yv) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(height - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape(chart.x_label) + "</text>\n";
  svg += "<text transform=\"translate(18 " + fmt(top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape(chart.y_label) + "</text>\n";

  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    const char* color = palette[i % palette.size()];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!first) svg += ' ';
      svg += fmt(sx(x)) + "," + fmt(sy(y));
      first = false;
    }
    svg += "\"/>\n";
    const double ly = top + 14.0 + 18.0 * static_cast<double>(i);
    svg += "<line x1=\"" + fmt(width - right + 12) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
           fmt(width - right + 32) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(width - right + 38) + "\" y=\"" + fmt(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

std::string render_svg(const CsvTable& table, PlotKind kind) {
  if (table.rows.empty()) throw ValidationError(ValidationKind::Schema, "plot: CSV has no rows");
  Chart chart;
  switch (kind) {
    case PlotKind::Lowpass:
      chart = sweep_chart(table, "GCN accuracy vs retained low-frequency band", "depth", "depth ");
      break;
    case PlotKind::Highpass:
      chart = sweep_chart(table, "GCN accuracy vs retained high-frequency band", "", "");
      break;
    case PlotKind::Augment:
      chart = sweep_chart(table, "MLP accuracy vs appended eigenvectors", "", "");
      break;
    case PlotKind::Spectrum:
      chart = column_chart(table, "Spectrum of the propagation operator", "index", {"eigenvalue"},
                           "eigenvalue");
      break;
    case PlotKind::Sensitivity:
      chart = column_chart(table, "|dl/d lambda_k|", "index", {"grad_init", "grad_trained"},
                           "gradient magnitude");
      break;
    case PlotKind::Train:
      chart = column_chart(table, "Training curve", "epoch", {"train_acc", "val_acc", "test_acc"},
                           "accuracy");
      break;
  }
  return draw(chart);
}

void plot_csv(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg) {
  const std::string body = render_svg(read_csv(csv), kind);
  std::ofstream out(svg, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + svg.string());
  out << body;
  out.flush();
  if (!out) throw IoError("write failed: " + svg.string());
}

}  // namespace sgcn
