#include "lavdm/point_cloud_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lavdm/errors.hpp"

namespace lavdm {

namespace {

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream stream(line);
  std::string cell;
  while (std::getline(stream, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, std::size_t line) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error(ErrorKind::FormatError, "line " + std::to_string(line) + ": '" + text + "' is not a number");
  }
  return value;
}

}  // namespace

std::filesystem::path point_cloud_sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta.json");
}

void write_point_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << "idx";
  for (Index j = 0; j < cloud.dim(); ++j) out << ",x" << j;
  if (cloud.params) out << ",u,v";
  out << '\n';
  for (Index i = 0; i < cloud.size(); ++i) {
    out << i;
    for (Index j = 0; j < cloud.dim(); ++j) out << ',' << format_number(cloud.points(i, j));
    if (cloud.params) out << ',' << format_number((*cloud.params)(i, 0)) << ',' << format_number((*cloud.params)(i, 1));
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());

  const auto sidecar = point_cloud_sidecar(path);
  if (cloud.chart) {
    const SurfaceChart& c = *cloud.chart;
    nlohmann::json meta = {{"chart", std::string(to_string(c.kind))},
                           {"R", c.R}, {"P", c.P}, {"gamma", c.gamma},
                           {"a", c.a}, {"b", c.b}, {"c", c.c}, {"n", cloud.size()}};
    std::ofstream side(sidecar);
    side << meta.dump(2) << '\n';
    if (!side) throw Error(ErrorKind::IoError, "failed writing " + sidecar.string());
  } else {
    std::error_code ignored;
    std::filesystem::remove(sidecar, ignored);
  }
}

PointCloud read_point_cloud_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::FormatError, path.string() + " is empty");
  const std::vector<std::string> header = split(line);
  if (header.empty() || header.front() != "idx") {
    throw Error(ErrorKind::FormatError, "line 1: header must start with 'idx'");
  }
  Index p = 0;
  while (static_cast<std::size_t>(p + 1) < header.size() && header[static_cast<std::size_t>(p + 1)] == "x" + std::to_string(p)) ++p;
  const std::size_t rest = header.size() - 1 - static_cast<std::size_t>(p);
  const bool has_params = rest == 2 && header[header.size() - 2] == "u" && header.back() == "v";
  if (p == 0 || (rest != 0 && !has_params)) {
    throw Error(ErrorKind::FormatError, "line 1: expected columns idx,x0..x{p-1}[,u,v]");
  }

  std::vector<double> coords;
  std::vector<double> params;
  std::size_t line_no = 1;
  Index n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::FormatError, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(header.size()) + " columns");
    }
    for (Index j = 0; j < p; ++j) coords.push_back(parse_number(cells[static_cast<std::size_t>(j + 1)], line_no));
    if (has_params) {
      params.push_back(parse_number(cells[cells.size() - 2], line_no));
      params.push_back(parse_number(cells.back(), line_no));
    }
    ++n;
  }

  PointCloud cloud;
  cloud.points = Eigen::Map<RowMatrix>(coords.data(), n, p);
  if (has_params) cloud.params = RowMatrix(Eigen::Map<RowMatrix>(params.data(), n, 2));

  const auto sidecar = point_cloud_sidecar(path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream side(sidecar);
    nlohmann::json meta;
    try {
      side >> meta;
      SurfaceChart chart;
      chart.kind = parse_chart_kind(meta.at("chart").get<std::string>());
      chart.R = meta.value("R", chart.R);
      chart.P = meta.value("P", chart.P);
      chart.gamma = meta.value("gamma", chart.gamma);
      chart.a = meta.value("a", chart.a);
      chart.b = meta.value("b", chart.b);
      chart.c = meta.value("c", chart.c);
      chart.validate();
      cloud.chart = chart;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::FormatError, sidecar.string() + ": " + e.what());
    }
  }
  return cloud;
}

}  // namespace lavdm
