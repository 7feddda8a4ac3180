#pragma once

// MTEN: portable little-endian tensor file.
//
//   bytes 0..3   magic "MTEN"
//   u32          version (1)
//   u32          rank
//   rank x u64   dims
//   prod(dims) x f64 values, row-major
//
// Filters are stored with rank 4 (c_out, c_in, kh, kw), blobs with rank 3.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "modmorph/tensor.hpp"

namespace modmorph::mten {

inline constexpr std::uint32_t kVersion = 1;

struct RawTensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

std::string encode(const RawTensor& t);
RawTensor decode(const std::string& bytes);

void write_file(const std::filesystem::path& path, const RawTensor& t);
RawTensor read_file(const std::filesystem::path& path);

void write_filter(const std::filesystem::path& path, const Filter& f);
Filter read_filter(const std::filesystem::path& path);
void write_blob(const std::filesystem::path& path, const Blob& b);
Blob read_blob(const std::filesystem::path& path);

RawTensor to_raw(const Filter& f);
RawTensor to_raw(const Blob& b);
Filter filter_from_raw(const RawTensor& t);
Blob blob_from_raw(const RawTensor& t);

}  // namespace modmorph::mten
