#include "modmorph/mten.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "modmorph/errors.hpp"

namespace modmorph::mten {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
  }
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  if (pos + sizeof(T) > in.size()) throw FormatError("MTEN: truncated input");
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    bits |= static_cast<U>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  }
  pos += sizeof(T);
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

int checked_dim(std::uint64_t d) {
  if (d == 0 || d > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw FormatError("MTEN: dimension out of range");
  }
  return static_cast<int>(d);
}

}  // namespace

std::string encode(const RawTensor& t) {
  std::string out = "MTEN";
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_le<std::uint64_t>(out, d);
  for (double v : t.values) put_le<double>(out, v);
  return out;
}

RawTensor decode(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "MTEN") != 0) throw FormatError("MTEN: bad magic");
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kVersion) throw FormatError("MTEN: unsupported version " + std::to_string(version));
  const auto rank = get_le<std::uint32_t>(bytes, pos);
  if (rank > 16) throw FormatError("MTEN: implausible rank " + std::to_string(rank));
  RawTensor t;
  std::uint64_t count = 1;
  for (std::uint32_t r = 0; r < rank; ++r) {
    const auto d = get_le<std::uint64_t>(bytes, pos);
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / d) throw FormatError("MTEN: size overflow");
    count *= d;
    t.dims.push_back(d);
  }
  if (bytes.size() - pos != count * sizeof(double)) {
    throw FormatError("MTEN: payload length does not match dims");
  }
  t.values.reserve(count);
  for (std::uint64_t n = 0; n < count; ++n) t.values.push_back(get_le<double>(bytes, pos));
  return t;
}

void write_file(const std::filesystem::path& path, const RawTensor& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("MTEN: cannot open " + path.string() + " for writing");
  const std::string bytes = encode(t);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("MTEN: write failed for " + path.string());
}

RawTensor read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("MTEN: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

RawTensor to_raw(const Filter& f) {
  return {{static_cast<std::uint64_t>(f.c_out()), static_cast<std::uint64_t>(f.c_in()),
           static_cast<std::uint64_t>(f.kh()), static_cast<std::uint64_t>(f.kw())},
          {f.data().begin(), f.data().end()}};
}

RawTensor to_raw(const Blob& b) {
  return {{static_cast<std::uint64_t>(b.c()), static_cast<std::uint64_t>(b.h()), static_cast<std::uint64_t>(b.w())},
          {b.data().begin(), b.data().end()}};
}

Filter filter_from_raw(const RawTensor& t) {
  if (t.dims.size() != 4) throw FormatError("MTEN: filter must have rank 4, got " + std::to_string(t.dims.size()));
  try {
    return Filter(checked_dim(t.dims[0]), checked_dim(t.dims[1]), {checked_dim(t.dims[2]), checked_dim(t.dims[3])},
                  t.values);
  } catch (const InvalidKernelError& e) {
    throw FormatError(std::string("MTEN: ") + e.what());
  }
}

Blob blob_from_raw(const RawTensor& t) {
  if (t.dims.size() != 3) throw FormatError("MTEN: blob must have rank 3, got " + std::to_string(t.dims.size()));
  return Blob(checked_dim(t.dims[0]), checked_dim(t.dims[1]), checked_dim(t.dims[2]), t.values);
}

void write_filter(const std::filesystem::path& path, const Filter& f) { write_file(path, to_raw(f)); }
Filter read_filter(const std::filesystem::path& path) { return filter_from_raw(read_file(path)); }
void write_blob(const std::filesystem::path& path, const Blob& b) { write_file(path, to_raw(b)); }
Blob read_blob(const std::filesystem::path& path) { return blob_from_raw(read_file(path)); }

}  // namespace modmorph::mten
