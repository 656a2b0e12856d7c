#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lavdm/container.hpp"
#include "lavdm/errors.hpp"
#include "lavdm/point_cloud_io.hpp"

namespace lavdm {
namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lavdm_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

Container sample_container() {
  Rng rng = make_rng(3);
  const AffinityMatrix w = testing::random_affinity(5, 3, rng);
  Container c;
  AffinityMatrix truncated = w;
  truncated.epsilon = 0.25;
  truncated.truncation = 5.0;
  c.add("W", truncated);
  c.add("S", testing::random_connections(w.entries, 2, rng));
  c.add("Omega", testing::random_connections(w.entries, 2, rng), true);
  FrameField frames;
  frames.source = FrameSource::LocalPCA;
  frames.frames = {testing::random_orthogonal(3, rng).leftCols(2), testing::random_orthogonal(3, rng).leftCols(2)};
  c.add("frames", frames);
  c.add("values", Vector(Vector::LinSpaced(4, 1.0, 0.25)));
  c.add("vectors", Matrix(Matrix::Random(6, 2)));
  return c;
}

TEST(Container, RoundTrip) {
  const Container c = sample_container();
  const auto bytes = c.serialize();
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "LVDM");
  const Container back = Container::deserialize(bytes);
  EXPECT_EQ(back.serialize(), bytes);
  const AffinityMatrix& w = back.get<AffinityMatrix>("W");
  EXPECT_EQ(Matrix(w.entries), Matrix(c.get<AffinityMatrix>("W").entries));
  EXPECT_EQ(w.epsilon, 0.25);
  EXPECT_EQ(w.truncation, 5.0);
  EXPECT_EQ(back.get<BlockSparseMatrix>("S").values(), c.get<BlockSparseMatrix>("S").values());
  EXPECT_EQ(back.at("Omega").tag, Container::Tag::Connections);
  EXPECT_EQ(back.get<FrameField>("frames").frames[1], c.get<FrameField>("frames").frames[1]);
  EXPECT_EQ(back.get<FrameField>("frames").source, FrameSource::LocalPCA);
  EXPECT_EQ(back.get<Vector>("values"), c.get<Vector>("values"));
  EXPECT_EQ(back.get<Matrix>("vectors"), c.get<Matrix>("vectors"));
}

TEST(Container, FileRoundTrip) {
  const Container c = sample_container();
  const auto path = scratch("round.lvdm");
  c.write(path);
  EXPECT_EQ(Container::read(path).serialize(), c.serialize());
}

TEST(Container, RejectsCorruption) {
  auto bytes = sample_container().serialize();
  auto truncated = bytes;
  truncated.resize(truncated.size() - 5);
  EXPECT_THROW(Container::deserialize(truncated), Error);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(Container::deserialize(bad_magic), Error);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(Container::deserialize(trailing), Error);
  const Container c = sample_container();
  EXPECT_THROW(c.get<Matrix>("W"), Error);
  EXPECT_THROW(c.at("nothing"), Error);
  EXPECT_THROW(Container::read(scratch("does-not-exist.lvdm")), Error);
}

TEST(PointCloudCsv, RoundTripWithChart) {
  const PointCloud cloud = sample_surface(SurfaceChart::klein_bottle(), 50, SamplingDensity::area_uniform(), 8);
  const auto path = scratch("klein.csv");
  write_point_cloud_csv(path, cloud);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "idx,x0,x1,x2,x3,u,v");
  EXPECT_TRUE(std::filesystem::exists(point_cloud_sidecar(path)));
  const PointCloud back = read_point_cloud_csv(path);
  EXPECT_EQ(back.points, cloud.points);
  EXPECT_EQ(*back.params, *cloud.params);
  ASSERT_TRUE(back.chart.has_value());
  EXPECT_EQ(back.chart->kind, ChartKind::KleinBottle);
  EXPECT_LE(back.chart_reproduction_error(), 1e-12);
}

TEST(PointCloudCsv, PlainCloud) {
  PointCloud cloud;
  cloud.points = RowMatrix::Random(4, 2);
  const auto path = scratch("plain.csv");
  std::filesystem::remove(point_cloud_sidecar(path));
  write_point_cloud_csv(path, cloud);
  const PointCloud back = read_point_cloud_csv(path);
  EXPECT_EQ(back.points, cloud.points);
  EXPECT_FALSE(back.params.has_value());
}

TEST(PointCloudCsv, RejectsMalformed) {
  const auto path = scratch("bad.csv");
  {
    std::ofstream out(path);
    out << "idx,x0,x1\n0,1.0,abc\n";
  }
  EXPECT_THROW(read_point_cloud_csv(path), Error);
  {
    std::ofstream out(path);
    out << "id,x0\n";
  }
  EXPECT_THROW(read_point_cloud_csv(path), Error);
}

}  // namespace
}  // namespace lavdm
