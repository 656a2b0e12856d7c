#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "lavdm/block_matrix.hpp"
#include "lavdm/connection.hpp"
#include "lavdm/kernel.hpp"
#include "lavdm/types.hpp"

namespace lavdm {

/// Binary container for matrices, frames and vectors.
///
/// Layout (all integers unsigned little-endian, reals IEEE-754 binary64):
///   "LVDM" | u32 version | u32 section count | sections...
/// Each section starts with a 4-byte tag ("AFF", "BSR", "CON", "FRM", "VEC",
/// "DNS" padded with NUL), a u32 name length and the name bytes.
///   AFF: u64 rows, cols, nnz | f64 epsilon, truncation | u64 row_ptr[rows+1]
///        | u64 col_idx[nnz] | f64 values[nnz]
///   BSR/CON: u64 block_rows, block_cols, q, blocks | u64 row_ptr[block_rows+1]
///        | u64 col_idx[blocks] | f64 values[blocks*q*q] (each block column-major)
///   FRM: u64 count, p, q | u8 source | f64 values[count*p*q] (column-major)
///   VEC: u64 length | f64 values
///   DNS: u64 rows, cols | f64 values (column-major)
class Container {
 public:
  static constexpr std::uint32_t kVersion = 1;

  enum class Tag : std::uint8_t { Affinity, BlockSparse, Connections, Frames, Vector, Dense };

  using Payload = std::variant<AffinityMatrix, BlockSparseMatrix, FrameField, lavdm::Vector, Matrix>;

  struct Section {
    Tag tag;
    std::string name;
    Payload value;
  };

  void add(std::string name, AffinityMatrix value);
  void add(std::string name, BlockSparseMatrix value, bool connections = false);
  void add(std::string name, FrameField value);
  void add(std::string name, lavdm::Vector value);
  void add(std::string name, Matrix value);

  const std::vector<Section>& sections() const { return sections_; }
  const Section& at(const std::string& name) const;

  template <typename T>
  const T& get(const std::string& name) const {
    const Section& s = at(name);
    if (const T* v = std::get_if<T>(&s.value)) return *v;
    throw_wrong_type(name);
  }

  std::vector<std::uint8_t> serialize() const;
  static Container deserialize(const std::vector<std::uint8_t>& bytes);

  void write(const std::filesystem::path& path) const;
  static Container read(const std::filesystem::path& path);

 private:
  [[noreturn]] static void throw_wrong_type(const std::string& name);
  std::vector<Section> sections_;
};

}  // namespace lavdm
