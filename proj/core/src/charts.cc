// Copyright 2026 The Sentiscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <png.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <variant>

#include "absl/status/status.h"
#include "sentiscope/analytics.h"
#include "sentiscope/csv.h"
#include "strings.h"

namespace sentiscope {
namespace {

std::string ShortestDouble(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

struct Rgb {
  uint8_t r, g, b;
};

constexpr Rgb kInk{0x33, 0x33, 0x33};
constexpr Rgb kGrid{0xdd, 0xdd, 0xdd};
constexpr Rgb kBar{0x4c, 0x72, 0xb0};
constexpr Rgb kLine{0xc4, 0x4e, 0x52};

struct Rect {
  double x, y, w, h;
  Rgb fill;
};
struct Line {
  double x1, y1, x2, y2;
  Rgb stroke;
  double width;
};
struct Dot {
  double cx, cy, r;
  Rgb fill;
};
struct Text {
  double x, y;
  std::string text;
  const char* anchor;  // start | middle | end
  double size;
};
using Shape = std::variant<Rect, Line, Dot, Text>;

struct Chart {
  int width = 800;
  int height = 500;
  std::string title;
  std::vector<Shape> shapes;
};

std::string Hex(Rgb c) { return fmt::sprintf("#%02x%02x%02x", c.r, c.g, c.b); }

std::string XmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string RenderSvg(const Chart& chart) {
  std::string out = fmt::sprintf(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
      "viewBox=\"0 0 %d %d\" font-family=\"sans-serif\">\n"
      "<title>%s</title>\n<rect width=\"100%%\" height=\"100%%\" fill=\"#ffffff\"/>\n",
      chart.width, chart.height, chart.width, chart.height, XmlEscape(chart.title));
  for (const auto& shape : chart.shapes) {
    if (const auto* r = std::get_if<Rect>(&shape)) {
      out += fmt::sprintf("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" "
                            "height=\"%.2f\" fill=\"%s\"/>\n",
                            r->x, r->y, r->w, r->h, Hex(r->fill));
    } else if (const auto* l = std::get_if<Line>(&shape)) {
      out += fmt::sprintf("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                            "stroke=\"%s\" stroke-width=\"%.1f\"/>\n",
                            l->x1, l->y1, l->x2, l->y2, Hex(l->stroke), l->width);
    } else if (const auto* d = std::get_if<Dot>(&shape)) {
      out += fmt::sprintf("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.1f\" fill=\"%s\"/>\n",
                            d->cx, d->cy, d->r, Hex(d->fill));
    } else if (const auto* t = std::get_if<Text>(&shape)) {
      out += fmt::sprintf("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"%s\" "
                            "font-size=\"%.0f\" fill=\"%s\">%s</text>\n",
                            t->x, t->y, t->anchor, t->size, Hex(kInk),
                            XmlEscape(t->text));
    }
  }
  out += "</svg>\n";
  return out;
}

// Raster output draws geometry only; labels are left to the SVG and tables.
class Canvas {
 public:
  Canvas(int width, int height)
      : width_(width), height_(height), pixels_(width * height * 3, 0xff) {}

  void Fill(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
    uint8_t* p = &pixels_[(static_cast<size_t>(y) * width_ + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  void FillRect(double x, double y, double w, double h, Rgb c) {
    for (int py = static_cast<int>(std::floor(y)); py < std::ceil(y + h); ++py) {
      for (int px = static_cast<int>(std::floor(x)); px < std::ceil(x + w); ++px) {
        Fill(px, py, c);
      }
    }
  }
  void DrawLine(double x1, double y1, double x2, double y2, double width, Rgb c) {
    const double length = std::max(std::abs(x2 - x1), std::abs(y2 - y1));
    const int steps = std::max(1, static_cast<int>(std::ceil(length)));
    const double half = std::max(0.5, width / 2);
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      FillRect(x1 + t * (x2 - x1) - half + 0.5, y1 + t * (y2 - y1) - half + 0.5,
               2 * half, 2 * half, c);
    }
  }
  void FillCircle(double cx, double cy, double r, Rgb c) {
    for (int py = static_cast<int>(cy - r); py <= static_cast<int>(cy + r); ++py) {
      for (int px = static_cast<int>(cx - r); px <= static_cast<int>(cx + r); ++px) {
        if ((px - cx) * (px - cx) + (py - cy) * (py - cy) <= r * r) Fill(px, py, c);
      }
    }
  }

  absl::Status WritePng(const std::filesystem::path& path) const {
    FILE* file = std::fopen(path.c_str(), "wb");
    if (file == nullptr) {
      return absl::PermissionDeniedError(
          StrCat("cannot open for writing: ", path.string()));
    }
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr || setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      std::fclose(file);
      return absl::InternalError(StrCat("PNG encoding failed: ", path.string()));
    }
    png_init_io(png, file);
    png_set_IHDR(png, info, width_, height_, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height_; ++y) {
      png_write_row(png, const_cast<png_bytep>(&pixels_[static_cast<size_t>(y) * width_ * 3]));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(file);
    return absl::OkStatus();
  }

 private:
  int width_;
  int height_;
  std::vector<uint8_t> pixels_;
};

absl::Status RenderPng(const Chart& chart, const std::filesystem::path& path) {
  Canvas canvas(chart.width, chart.height);
  for (const auto& shape : chart.shapes) {
    if (const auto* r = std::get_if<Rect>(&shape)) {
      canvas.FillRect(r->x, r->y, r->w, r->h, r->fill);
    } else if (const auto* l = std::get_if<Line>(&shape)) {
      canvas.DrawLine(l->x1, l->y1, l->x2, l->y2, l->width, l->stroke);
    } else if (const auto* d = std::get_if<Dot>(&shape)) {
      canvas.FillCircle(d->cx, d->cy, d->r, d->fill);
    }
  }
  return canvas.WritePng(path);
}

// Plot area shared by all charts.
struct Frame {
  double left = 70, right = 770, top = 50, bottom = 430;
  double width() const { return right - left; }
  double height() const { return bottom - top; }
};

// y_max <= 0 draws no horizontal grid or y tick labels.
void AddAxes(Chart& chart, const Frame& f, std::string_view x_label,
             std::string_view y_label, double y_max, bool y_is_fraction) {
  chart.shapes.push_back(Text{chart.width / 2.0, 28, chart.title, "middle", 18});
  for (int i = 0; i <= 4 && y_max > 0; ++i) {
    const double y = f.bottom - f.height() * i / 4.0;
    chart.shapes.push_back(Line{f.left, y, f.right, y, kGrid, 1});
    const double value = y_max * i / 4.0;
    chart.shapes.push_back(Text{f.left - 8, y + 4,
                                y_is_fraction ? fmt::sprintf("%.2f", value)
                                              : fmt::sprintf("%.0f", value),
                                "end", 11});
  }
  chart.shapes.push_back(Line{f.left, f.bottom, f.right, f.bottom, kInk, 1.5});
  chart.shapes.push_back(Line{f.left, f.top, f.left, f.bottom, kInk, 1.5});
  chart.shapes.push_back(
      Text{(f.left + f.right) / 2, chart.height - 12.0, std::string(x_label), "middle", 13});
  chart.shapes.push_back(Text{18, (f.top + f.bottom) / 2, std::string(y_label), "start", 13});
}

Chart HistogramChart(const Histogram& h) {
  Chart chart;
  chart.title = "Distribution of sentiment scores";
  Frame f;
  const int64_t max_count =
      h.counts.empty() ? 0 : *std::max_element(h.counts.begin(), h.counts.end());
  const double y_max = std::max<int64_t>(1, max_count);
  AddAxes(chart, f, "normalized sentiment score", "abstracts", y_max, false);
  const double bar_w = f.width() / std::max<size_t>(1, h.counts.size());
  for (size_t i = 0; i < h.counts.size(); ++i) {
    const double bar_h = f.height() * static_cast<double>(h.counts[i]) / y_max;
    chart.shapes.push_back(
        Rect{f.left + i * bar_w + 1, f.bottom - bar_h, bar_w - 2, bar_h, kBar});
  }
  for (size_t i = 0; i < h.bin_edges.size(); i += 4) {
    chart.shapes.push_back(Text{f.left + i * bar_w, f.bottom + 16,
                                fmt::sprintf("%.2f", h.bin_edges[i]), "middle", 11});
  }
  return chart;
}

Chart TrendChart(const YearlyTrend& trend) {
  Chart chart;
  chart.title = "Average sentiment score by year";
  Frame f;
  AddAxes(chart, f, "publication year", "mean score", 1.0, true);
  const size_t n = trend.entries.size();
  auto x_of = [&](size_t i) {
    return n <= 1 ? (f.left + f.right) / 2 : f.left + f.width() * i / (n - 1);
  };
  std::optional<std::pair<double, double>> previous;
  for (size_t i = 0; i < n; ++i) {
    const auto& e = trend.entries[i];
    chart.shapes.push_back(Text{x_of(i), f.bottom + 16, StrCat(e.year), "middle", 11});
    if (!e.mean_score) {
      previous.reset();  // gap years break the line
      continue;
    }
    const double x = x_of(i);
    const double y = f.bottom - f.height() * *e.mean_score;
    if (previous) {
      chart.shapes.push_back(Line{previous->first, previous->second, x, y, kLine, 2});
    }
    chart.shapes.push_back(Dot{x, y, 4, kLine});
    previous = {x, y};
  }
  return chart;
}

Chart JournalChart(const JournalStats& stats) {
  Chart chart;
  chart.title = "Average sentiment score by journal";
  chart.height = std::max(500, 120 + 22 * static_cast<int>(stats.entries.size()));
  Frame f;
  f.left = 320;
  f.bottom = chart.height - 70;
  // Horizontal bars: y axis lists journals, x axis is the score.
  AddAxes(chart, f, "mean score (whisker = 1 std dev)", "", 0.0, true);
  for (int i = 0; i <= 4; ++i) {
    const double x = f.left + f.width() * i / 4.0;
    chart.shapes.push_back(Line{x, f.top, x, f.bottom, kGrid, 1});
    chart.shapes.push_back(Text{x, f.bottom + 16,
                                fmt::sprintf("%.2f", i / 4.0), "middle", 11});
  }
  const size_t n = stats.entries.size();
  const double row_h = n == 0 ? 0 : f.height() / n;
  for (size_t i = 0; i < n; ++i) {
    const auto& e = stats.entries[i];
    const double y = f.top + i * row_h;
    const double w = f.width() * e.mean_score;
    chart.shapes.push_back(Rect{f.left, y + row_h * 0.15, w, row_h * 0.7, kBar});
    const double lo = std::max(0.0, e.mean_score - e.std_dev);
    const double hi = std::min(1.0, e.mean_score + e.std_dev);
    chart.shapes.push_back(Line{f.left + f.width() * lo, y + row_h / 2,
                                f.left + f.width() * hi, y + row_h / 2, kInk, 1});
    chart.shapes.push_back(Text{f.left - 8, y + row_h / 2 + 4,
                                fmt::sprintf("%s (n=%d)", e.journal, e.count), "end", 11});
  }
  return chart;
}

}  // namespace

absl::StatusOr<ChartFormat> ParseChartFormat(std::string_view name) {
  if (name == "svg") return ChartFormat::kSvg;
  if (name == "png") return ChartFormat::kPng;
  return absl::InvalidArgumentError(
      StrCat("chart format '", name, "' must be svg or png"));
}

std::string HistogramTableCsv(const Histogram& histogram) {
  std::string out = FormatCsvRow({"bin_low", "bin_high", "count"});
  for (size_t i = 0; i < histogram.counts.size(); ++i) {
    out += FormatCsvRow({ShortestDouble(histogram.bin_edges[i]),
                         ShortestDouble(histogram.bin_edges[i + 1]),
                         StrCat(histogram.counts[i])});
  }
  return out;
}

std::string TrendTableCsv(const YearlyTrend& trend) {
  std::string out = FormatCsvRow({"year", "count", "mean_score"});
  for (const auto& e : trend.entries) {
    out += FormatCsvRow({StrCat(e.year), StrCat(e.count),
                         e.mean_score ? ShortestDouble(*e.mean_score) : ""});
  }
  return out;
}

std::string JournalTableCsv(const JournalStats& stats) {
  std::string out = FormatCsvRow({"journal", "count", "mean_score", "std_dev"});
  for (const auto& e : stats.entries) {
    out += FormatCsvRow({e.journal, StrCat(e.count),
                         ShortestDouble(e.mean_score), ShortestDouble(e.std_dev)});
  }
  return out;
}

absl::StatusOr<std::vector<std::filesystem::path>> RenderCharts(
    const Histogram& histogram, const YearlyTrend& trend,
    const JournalStats& stats, const std::filesystem::path& out_dir,
    ChartFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    return absl::PermissionDeniedError(
        StrCat("cannot create output directory: ", out_dir.string()));
  }
  const char* extension = format == ChartFormat::kSvg ? ".svg" : ".png";
  const std::pair<std::string, Chart> charts[] = {
      {"histogram", HistogramChart(histogram)},
      {"trend", TrendChart(trend)},
      {"journals", JournalChart(stats)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, chart] : charts) {
    const auto path = out_dir / (name + extension);
    const absl::Status status = format == ChartFormat::kSvg
                                    ? WriteFile(path, RenderSvg(chart))
                                    : RenderPng(chart, path);
    if (!status.ok()) return status;
    written.push_back(path);
  }
  const std::pair<std::string, std::string> tables[] = {
      {"histogram.csv", HistogramTableCsv(histogram)},
      {"trend.csv", TrendTableCsv(trend)},
      {"journals.csv", JournalTableCsv(stats)},
  };
  for (const auto& [name, content] : tables) {
    const auto path = out_dir / name;
    if (auto status = WriteFile(path, content); !status.ok()) return status;
    written.push_back(path);
  }
  return written;
}

}  // namespace sentiscope
