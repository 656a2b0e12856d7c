#include "lavdm/container.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lavdm/errors.hpp"

namespace lavdm {

namespace {

constexpr std::array<char, 4> kMagic{'L', 'V', 'D', 'M'};

std::array<char, 4> tag_bytes(Container::Tag tag) {
  switch (tag) {
    case Container::Tag::Affinity: return {'A', 'F', 'F', '\0'};
    case Container::Tag::BlockSparse: return {'B', 'S', 'R', '\0'};
    case Container::Tag::Connections: return {'C', 'O', 'N', '\0'};
    case Container::Tag::Frames: return {'F', 'R', 'M', '\0'};
    case Container::Tag::Vector: return {'V', 'E', 'C', '\0'};
    case Container::Tag::Dense: return {'D', 'N', 'S', '\0'};
  }
  return {};
}

class Writer {
 public:
  void raw(const char* data, std::size_t size) { bytes.insert(bytes.end(), data, data + size); }

  template <typename U>
  void uint(U value) {
    for (std::size_t b = 0; b < sizeof(U); ++b) bytes.push_back(static_cast<std::uint8_t>(value >> (8 * b)));
  }
  void u64(Index value) { uint(static_cast<std::uint64_t>(value)); }
  void f64(double value) { uint(std::bit_cast<std::uint64_t>(value)); }
  void f64s(const double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) f64(data[i]);
  }

  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& data) : data_(data) {}

  void need(std::size_t count) const {
    if (pos_ + count > data_.size()) throw Error(ErrorKind::FormatError, "container truncated");
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U value = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) value |= static_cast<U>(static_cast<U>(data_[pos_ + b]) << (8 * b));
    pos_ += sizeof(U);
    return value;
  }
  Index u64() {
    const std::uint64_t v = uint<std::uint64_t>();
    if (v > (std::uint64_t{1} << 48)) throw Error(ErrorKind::FormatError, "implausible size in container");
    return static_cast<Index>(v);
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  void f64s(double* out, std::size_t count) {
    need(count * 8);
    for (std::size_t i = 0; i < count; ++i) out[i] = f64();
  }
  std::vector<Index> indices(std::size_t count) {
    need(count * 8);
    std::vector<Index> out(count);
    for (auto& v : out) v = u64();
    return out;
  }
  std::string string(std::size_t count) {
    need(count);
    std::string out(reinterpret_cast<const char*>(data_.data() + pos_), count);
    pos_ += count;
    return out;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  const std::vector<std::uint8_t>& data_;
  std::size_t pos_ = 0;
};

void write_block_sparse(Writer& w, const BlockSparseMatrix& m) {
  w.u64(m.block_rows());
  w.u64(m.block_cols());
  w.u64(m.block_size());
  w.u64(m.nonzero_blocks());
  for (Index v : m.row_offsets()) w.u64(v);
  for (Index v : m.col_indices()) w.u64(v);
  w.f64s(m.values().data(), m.values().size());
}

BlockSparseMatrix read_block_sparse(Reader& r) {
  const Index rows = r.u64();
  const Index cols = r.u64();
  const Index q = r.u64();
  const Index blocks = r.u64();
  std::vector<Index> offsets = r.indices(static_cast<std::size_t>(rows + 1));
  std::vector<Index> col = r.indices(static_cast<std::size_t>(blocks));
  std::vector<double> values(static_cast<std::size_t>(blocks * q * q));
  r.f64s(values.data(), values.size());
  return BlockSparseMatrix::from_raw(rows, cols, q, std::move(offsets), std::move(col), std::move(values));
}

}  // namespace

void Container::add(std::string name, AffinityMatrix value) {
  value.entries.makeCompressed();
  sections_.push_back({Tag::Affinity, std::move(name), std::move(value)});
}
void Container::add(std::string name, BlockSparseMatrix value, bool connections) {
  sections_.push_back({connections ? Tag::Connections : Tag::BlockSparse, std::move(name), std::move(value)});
}
void Container::add(std::string name, FrameField value) {
  sections_.push_back({Tag::Frames, std::move(name), std::move(value)});
}
void Container::add(std::string name, lavdm::Vector value) {
  sections_.push_back({Tag::Vector, std::move(name), std::move(value)});
}
void Container::add(std::string name, Matrix value) {
  sections_.push_back({Tag::Dense, std::move(name), std::move(value)});
}

const Container::Section& Container::at(const std::string& name) const {
  for (const Section& s : sections_) {
    if (s.name == name) return s;
  }
  throw Error(ErrorKind::FormatError, "container has no section '" + name + "'");
}

void Container::throw_wrong_type(const std::string& name) {
  throw Error(ErrorKind::FormatError, "section '" + name + "' has a different type");
}

std::vector<std::uint8_t> Container::serialize() const {
  Writer w;
  w.raw(kMagic.data(), kMagic.size());
  w.uint(kVersion);
  w.uint(static_cast<std::uint32_t>(sections_.size()));
  for (const Section& s : sections_) {
    const auto tag = tag_bytes(s.tag);
    w.raw(tag.data(), tag.size());
    w.uint(static_cast<std::uint32_t>(s.name.size()));
    w.raw(s.name.data(), s.name.size());
    switch (s.tag) {
      case Tag::Affinity: {
        const auto& a = std::get<AffinityMatrix>(s.value);
        const SparseRows& e = a.entries;
        w.u64(e.rows());
        w.u64(e.cols());
        w.u64(e.nonZeros());
        w.f64(a.epsilon);
        w.f64(a.truncation);
        for (Index i = 0; i <= e.rows(); ++i) w.u64(e.outerIndexPtr()[i]);
        for (Index k = 0; k < e.nonZeros(); ++k) w.u64(e.innerIndexPtr()[k]);
        w.f64s(e.valuePtr(), static_cast<std::size_t>(e.nonZeros()));
        break;
      }
      case Tag::BlockSparse:
      case Tag::Connections:
        write_block_sparse(w, std::get<BlockSparseMatrix>(s.value));
        break;
      case Tag::Frames: {
        const auto& f = std::get<FrameField>(s.value);
        w.u64(f.size());
        w.u64(f.ambient_dim());
        w.u64(f.fiber_dim());
        w.uint(static_cast<std::uint8_t>(f.source));
        for (const Matrix& m : f.frames) w.f64s(m.data(), static_cast<std::size_t>(m.size()));
        break;
      }
      case Tag::Vector: {
        const auto& v = std::get<lavdm::Vector>(s.value);
        w.u64(v.size());
        w.f64s(v.data(), static_cast<std::size_t>(v.size()));
        break;
      }
      case Tag::Dense: {
        const auto& m = std::get<Matrix>(s.value);
        w.u64(m.rows());
        w.u64(m.cols());
        w.f64s(m.data(), static_cast<std::size_t>(m.size()));
        break;
      }
    }
  }
  return std::move(w.bytes);
}

Container Container::deserialize(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.string(4) != std::string(kMagic.data(), kMagic.size())) {
    throw Error(ErrorKind::FormatError, "not an LVDM container (bad magic)");
  }
  const auto version = r.uint<std::uint32_t>();
  if (version != kVersion) {
    throw Error(ErrorKind::FormatError, "unsupported container version " + std::to_string(version));
  }
  const auto count = r.uint<std::uint32_t>();
  Container out;
  for (std::uint32_t c = 0; c < count; ++c) {
    const std::string tag = r.string(4);
    const auto name_length = r.uint<std::uint32_t>();
    std::string name = r.string(name_length);
    if (tag == std::string("AFF\0", 4)) {
      AffinityMatrix a;
      const Index rows = r.u64();
      const Index cols = r.u64();
      const Index nnz = r.u64();
      a.epsilon = r.f64();
      a.truncation = r.f64();
      const std::vector<Index> outer = r.indices(static_cast<std::size_t>(rows + 1));
      const std::vector<Index> inner = r.indices(static_cast<std::size_t>(nnz));
      std::vector<double> values(static_cast<std::size_t>(nnz));
      r.f64s(values.data(), values.size());
      if (outer.front() != 0 || outer.back() != nnz) throw Error(ErrorKind::FormatError, "bad affinity row pointers");
      std::vector<Eigen::Triplet<double>> triplets;
      triplets.reserve(values.size());
      for (Index i = 0; i < rows; ++i) {
        const auto begin = outer[static_cast<std::size_t>(i)];
        const auto end = outer[static_cast<std::size_t>(i + 1)];
        if (end < begin || end > nnz) throw Error(ErrorKind::FormatError, "bad affinity row pointers");
        for (Index k = begin; k < end; ++k) {
          const Index col = inner[static_cast<std::size_t>(k)];
          if (col < 0 || col >= cols) throw Error(ErrorKind::FormatError, "affinity column out of range");
          triplets.emplace_back(i, col, values[static_cast<std::size_t>(k)]);
        }
      }
      a.entries.resize(rows, cols);
      a.entries.setFromTriplets(triplets.begin(), triplets.end());
      out.add(std::move(name), std::move(a));
    } else if (tag == std::string("BSR\0", 4) || tag == std::string("CON\0", 4)) {
      out.add(std::move(name), read_block_sparse(r), tag[0] == 'C');
    } else if (tag == std::string("FRM\0", 4)) {
      FrameField f;
      const Index n = r.u64();
      const Index p = r.u64();
      const Index q = r.u64();
      const auto source = r.uint<std::uint8_t>();
      if (source > 1) throw Error(ErrorKind::FormatError, "unknown frame source");
      f.source = static_cast<FrameSource>(source);
      f.frames.assign(static_cast<std::size_t>(n), Matrix(p, q));
      for (Matrix& m : f.frames) r.f64s(m.data(), static_cast<std::size_t>(m.size()));
      out.add(std::move(name), std::move(f));
    } else if (tag == std::string("VEC\0", 4)) {
      lavdm::Vector v(r.u64());
      r.f64s(v.data(), static_cast<std::size_t>(v.size()));
      out.add(std::move(name), std::move(v));
    } else if (tag == std::string("DNS\0", 4)) {
      const Index rows = r.u64();
      const Index cols = r.u64();
      Matrix m(rows, cols);
      r.f64s(m.data(), static_cast<std::size_t>(m.size()));
      out.add(std::move(name), std::move(m));
    } else {
      throw Error(ErrorKind::FormatError, "unknown section tag in container");
    }
  }
  if (!r.done()) throw Error(ErrorKind::FormatError, "trailing bytes after the last section");
  return out;
}

void Container::write(const std::filesystem::path& path) const {
  const std::vector<std::uint8_t> bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

Container Container::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize(bytes);
}

}  // namespace lavdm
