#ifndef IRK_FIXTURE_IO_HPP
#define IRK_FIXTURE_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "irk/types.hpp"

namespace irk {

/// Shape description stored next to a raw vector file.
struct RawHeader {
  std::vector<Index> shape;  // row-count first; product equals the length
  std::string order = "column_major";
  std::string description;
};

/// Writes `<path>` (little-endian float64, no padding) and `<path>.hdr`
/// (plain text key: value lines). Both files are replaced atomically.
void write_raw_vector(const std::filesystem::path& path, const Vector& v,
                      const RawHeader& header);

/// Reads a vector written by write_raw_vector; validates the header shape
/// against the file size. Throws std::runtime_error on any mismatch.
Vector read_raw_vector(const std::filesystem::path& path, RawHeader* header = nullptr);

/// Writes `contents` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace irk

#endif  // IRK_FIXTURE_IO_HPP
