#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "pell/common.hpp"

namespace pell {

/// Deterministic numeric formatting for reports: %.12g reproduces bytes
/// across runs of the same binary and configuration.
inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// CSV with '#'-prefixed header lines echoing the configuration.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& config_echo,
            const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
    for (const auto& line : config_echo) out_ << "# " << line << "\n";
    write_row_strings(columns);
  }

  struct Cell {
    std::string text;
    Cell(double v) : text(fmt_num(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(const std::string& s) : text(s) {}
    Cell(const char* s) : text(s) {}
    Cell(Complex z) : text(fmt_num(z.real()) + "+" + fmt_num(z.imag()) + "i") {}
  };

  void write_row(const std::vector<Cell>& cells) {
    for (size_t k = 0; k < cells.size(); ++k)
      out_ << cells[k].text << (k + 1 < cells.size() ? "," : "\n");
  }

 private:
  void write_row_strings(const std::vector<std::string>& cells) {
    for (size_t k = 0; k < cells.size(); ++k)
      out_ << cells[k] << (k + 1 < cells.size() ? "," : "\n");
  }
  std::ofstream out_;
};

/// Minimal SVG 1.1 writer: polylines and text on a fixed canvas, enough for
/// one-page decay plots without a plotting dependency.
class SvgWriter {
 public:
  SvgWriter(double width = 640, double height = 480) : w_(width), h_(height) {}

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke = "black", double stroke_width = 1.5) {
    std::string d;
    for (const auto& [x, y] : pts)
      d += fmt_num(x) + "," + fmt_num(y) + " ";
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
             fmt_num(stroke_width) + "\" points=\"" + d + "\"/>\n";
  }

  void text(double x, double y, const std::string& s, int size = 12) {
    body_ += "<text x=\"" + fmt_num(x) + "\" y=\"" + fmt_num(y) +
             "\" font-family=\"monospace\" font-size=\"" + std::to_string(size) +
             "\">" + s + "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke = "gray") {
    polyline({{x1, y1}, {x2, y2}}, stroke, 1.0);
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
        << "width=\"" << fmt_num(w_) << "\" height=\"" << fmt_num(h_)
        << "\" viewBox=\"0 0 " << fmt_num(w_) << " " << fmt_num(h_) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_ << "</svg>\n";
  }

 private:
  double w_, h_;
  std::string body_;
};

}  // namespace pell
