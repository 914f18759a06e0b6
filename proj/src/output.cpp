#include "dfsearch/output.hpp"

#include "dfsearch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dfsearch {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << v;
  return os.str();
}

std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header.size()) {
    throw ArgumentError("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header.size()));
  }
  rows.push_back(std::move(cells));
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  auto out = open_output(path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  if (!out) throw ConfigError("failed writing " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

void write_svg(const std::filesystem::path& path, const SvgPlot& plot) {
  constexpr double W = 640, H = 480, L = 70, R = 160, T = 40, B = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (plot.diagonal) {
    y0 = x0 = std::min(x0, y0);
    y1 = x1 = std::max(x1, y1);
  }
  if (x1 - x0 <= 0) x1 = x0 + 1;
  if (y1 - y0 <= 0) y1 = y0 + 1;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << escape_xml(plot.title) << "</text>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    svg << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << H - B + 18
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    svg << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(yv) + 4)
        << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
      << escape_xml(plot.x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (T + H - B) / 2 << ")\">" << escape_xml(plot.y_label) << "</text>\n";
  if (plot.diagonal) {
    svg << "<line x1=\"" << fixed(px(x0)) << "\" y1=\"" << fixed(py(x0)) << "\" x2=\""
        << fixed(px(x1)) << "\" y2=\"" << fixed(py(x1))
        << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  }
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const auto& ser = plot.series[s];
    if (ser.markers) {
      for (std::size_t k = 0; k < ser.x.size() && k < ser.y.size(); ++k) {
        if (!std::isfinite(ser.x[k]) || !std::isfinite(ser.y[k])) continue;
        svg << "<circle cx=\"" << fixed(px(ser.x[k])) << "\" cy=\"" << fixed(py(ser.y[k]))
            << "\" r=\"3\" fill=\"" << ser.color << "\"/>\n";
      }
    } else {
      svg << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" points=\"";
      for (std::size_t k = 0; k < ser.x.size() && k < ser.y.size(); ++k) {
        if (!std::isfinite(ser.x[k]) || !std::isfinite(ser.y[k])) continue;
        svg << fixed(px(ser.x[k])) << "," << fixed(py(ser.y[k])) << " ";
      }
      svg << "\"/>\n";
    }
    const double ly = T + 10 + 18.0 * static_cast<double>(s);
    svg << "<rect x=\"" << W - R + 12 << "\" y=\"" << ly - 8 << "\" width=\"12\" height=\"4\" fill=\""
        << ser.color << "\"/>\n";
    svg << "<text x=\"" << W - R + 30 << "\" y=\"" << ly - 2 << "\">" << escape_xml(ser.name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  write_text(path, svg.str());
}

}  // namespace dfsearch
