#include "irk/fixture_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace irk {

namespace {

std::string header_text(const RawHeader& header, Index length) {
  std::ostringstream os;
  os << "format: float64_le\n";
  os << "length: " << length << "\n";
  os << "shape:";
  for (Index d : header.shape) os << ' ' << d;
  os << "\n";
  os << "order: " << header.order << "\n";
  if (!header.description.empty()) os << "description: " << header.description << "\n";
  return os.str();
}

std::filesystem::path header_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out += ".hdr";
  return out;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_raw_vector(const std::filesystem::path& path, const Vector& v,
                      const RawHeader& header) {
  Index count = 1;
  for (Index d : header.shape) count *= d;
  if (header.shape.empty() || count != v.size()) {
    throw std::invalid_argument("write_raw_vector: shape does not match vector length");
  }
  std::string bytes(static_cast<std::size_t>(v.size()) * 8, '\0');
  for (Index i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    const double value = v[i];
    std::memcpy(&bits, &value, sizeof bits);
    for (int k = 0; k < 8; ++k) {
      bytes[static_cast<std::size_t>(8 * i + k)] = static_cast<char>((bits >> (8 * k)) & 0xFFu);
    }
  }
  write_file_atomic(path, bytes);
  write_file_atomic(header_path(path), header_text(header, v.size()));
}

Vector read_raw_vector(const std::filesystem::path& path, RawHeader* header) {
  std::ifstream hdr(header_path(path));
  if (!hdr) throw std::runtime_error("missing header " + header_path(path).string());
  RawHeader parsed;
  Index length = -1;
  std::string line;
  while (std::getline(hdr, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    if (!value.empty() && value.front() == ' ') value.erase(0, 1);
    std::istringstream is(value);
    if (key == "format" && value != "float64_le") {
      throw std::runtime_error("unsupported raw format '" + value + "'");
    } else if (key == "length") {
      is >> length;
    } else if (key == "shape") {
      Index d = 0;
      while (is >> d) parsed.shape.push_back(d);
    } else if (key == "order") {
      parsed.order = value;
    } else if (key == "description") {
      parsed.description = value;
    }
  }
  Index count = 1;
  for (Index d : parsed.shape) count *= d;
  if (length < 0 || parsed.shape.empty() || count != length) {
    throw std::runtime_error("inconsistent header for " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (static_cast<Index>(bytes.size()) != 8 * length) {
    throw std::runtime_error("size of " + path.string() + " does not match its header");
  }
  Vector v(length);
  for (Index i = 0; i < length; ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) {
      bits |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(bytes[static_cast<std::size_t>(8 * i + k)]))
              << (8 * k);
    }
    std::memcpy(&v[i], &bits, sizeof bits);
  }
  if (header) *header = parsed;
  return v;
}

}  // namespace irk
