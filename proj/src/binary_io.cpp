#include "metato/binary_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace metato {

namespace {

template <class T>
void put_le(std::string& buf, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <class T>
T get_le(std::string_view s) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(s[i])) << (8 * i);
  return v;
}

}  // namespace

void ByteWriter::u32(std::uint32_t v) { put_le(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { put_le(buf_, v); }
void ByteWriter::f64(double v) { put_le(buf_, std::bit_cast<std::uint64_t>(v)); }
void ByteWriter::seal() { u32(crc32_of(buf_)); }

std::string_view ByteReader::bytes(std::size_t n) {
  if (remaining() < n) throw FormatError("unexpected end of data");
  auto s = data_.substr(pos_, n);
  pos_ += n;
  return s;
}
std::uint8_t ByteReader::u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
std::uint32_t ByteReader::u32() { return get_le<std::uint32_t>(bytes(4)); }
std::uint64_t ByteReader::u64() { return get_le<std::uint64_t>(bytes(8)); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::uint32_t crc32_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks
  const auto* p = reinterpret_cast<const Bytef*>(data.data());
  std::size_t left = data.size();
  while (left > 0) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, p, n);
    p += n;
    left -= n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string_view verify_sealed(std::string_view data) {
  if (data.size() < 4) throw FormatError("file too short for checksum");
  auto body = data.substr(0, data.size() - 4);
  const auto stored = get_le<std::uint32_t>(data.substr(data.size() - 4));
  if (stored != crc32_of(body)) throw FormatError("checksum mismatch");
  return body;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace metato
