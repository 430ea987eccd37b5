// Artifact writers shared by the command-line runner: CSV text with the
// config hash on the first header line, and the KPGRID1 binary lattice
// format. Both are deterministic byte-for-byte for a fixed config.
//
// KPGRID1 layout, all fields little-endian:
//   8 bytes magic "KPGRID1\0"
//   u32 rank
//   per dimension: u64 count, f64 min, f64 max
//   f64 values, row-major (first dimension fastest)
//   f64 error_estimate
//   u64 config hash (trailing metadata; readers of the core layout may stop
//   after error_estimate, ours verifies the hash when present)
#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kpmass/fields.hpp"

namespace kpmass::io {

static_assert(std::endian::native == std::endian::little,
              "KPGRID1 writer assumes a little-endian host");

// Locale-independent shortest round-trip float rendering for CSV cells.
inline std::string cell(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// CSV artifact: "# config <hash>" first, then the column header, then rows.
class CsvWriter {
 public:
  CsvWriter(std::string hash_hex, std::string header) {
    body_ = "# config " + std::move(hash_hex) + "\n" + std::move(header) + "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ += ',';
      body_ += cells[i];
    }
    body_ += '\n';
  }

  const std::string& text() const { return body_; }

  void save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("io: cannot open '" + path.string() + "' for writing");
    os.write(body_.data(), static_cast<std::streamsize>(body_.size()));
    if (!os) throw std::runtime_error("io: short write to '" + path.string() + "'");
  }

 private:
  std::string body_;
};

struct GridDim {
  std::uint64_t count = 0;
  double min = 0.0, max = 0.0;
};

struct GridArtifact {
  std::vector<GridDim> dims;   // first dimension varies fastest in values
  std::vector<double> values;  // row-major
  double error_estimate = 0.0;
  std::uint64_t config_hash = 0;
};

namespace detail {

template <class T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("KPGRID1: truncated file");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline void save_grid(const std::filesystem::path& path, const GridArtifact& g) {
  std::uint64_t n = 1;
  for (const GridDim& d : g.dims) n *= d.count;
  if (g.dims.empty() || n != g.values.size())
    throw std::invalid_argument("KPGRID1: dimension counts do not match the value payload");
  std::string out;
  out.reserve(32 + 24 * g.dims.size() + 8 * g.values.size());
  out.append("KPGRID1\0", 8);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dims.size()));
  for (const GridDim& d : g.dims) {
    detail::put<std::uint64_t>(out, d.count);
    detail::put<double>(out, d.min);
    detail::put<double>(out, d.max);
  }
  for (double v : g.values) detail::put<double>(out, v);
  detail::put<double>(out, g.error_estimate);
  detail::put<std::uint64_t>(out, g.config_hash);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("io: cannot open '" + path.string() + "' for writing");
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw std::runtime_error("io: short write to '" + path.string() + "'");
}

inline GridArtifact load_grid(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("io: cannot open '" + path.string() + "'");
  std::string in((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  if (in.size() < 8 || std::memcmp(in.data(), "KPGRID1\0", 8) != 0)
    throw std::runtime_error("KPGRID1: bad magic in '" + path.string() + "'");
  pos = 8;
  GridArtifact g;
  const std::uint32_t rank = detail::get<std::uint32_t>(in, pos);
  if (rank == 0 || rank > 8) throw std::runtime_error("KPGRID1: implausible rank");
  std::uint64_t n = 1;
  for (std::uint32_t d = 0; d < rank; ++d) {
    GridDim dim;
    dim.count = detail::get<std::uint64_t>(in, pos);
    dim.min = detail::get<double>(in, pos);
    dim.max = detail::get<double>(in, pos);
    n *= dim.count;
    g.dims.push_back(dim);
  }
  if (n > (in.size() - pos) / 8) throw std::runtime_error("KPGRID1: truncated payload");
  g.values.resize(n);
  std::memcpy(g.values.data(), in.data() + pos, n * sizeof(double));
  pos += n * sizeof(double);
  g.error_estimate = detail::get<double>(in, pos);
  if (pos + sizeof(std::uint64_t) <= in.size())
    g.config_hash = detail::get<std::uint64_t>(in, pos);
  return g;
}

// Output directory resolution: an explicit --output flag wins, then the
// config's outputs.directory when it is not the default ".", then the
// KPMASS_OUTPUT_DIR environment fallback, then the working directory.
inline std::filesystem::path resolve_output_dir(const std::string& flag_dir,
                                                const std::string& config_dir) {
  if (!flag_dir.empty()) return flag_dir;
  if (!config_dir.empty() && config_dir != ".") return config_dir;
  if (const char* env = std::getenv("KPMASS_OUTPUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return ".";
}

}  // namespace kpmass::io
