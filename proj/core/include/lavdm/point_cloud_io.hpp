#pragma once

#include <filesystem>

#include "lavdm/manifold.hpp"

namespace lavdm {

/// CSV with header idx,x0..x{p-1}[,u,v], 17 significant digits. When the
/// cloud carries a chart, its kind and shape go to `<path>.meta.json`.
void write_point_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud);

/// Reads a cloud written by write_point_cloud_csv (the sidecar is optional).
PointCloud read_point_cloud_csv(const std::filesystem::path& path);

std::filesystem::path point_cloud_sidecar(const std::filesystem::path& path);

}  // namespace lavdm
