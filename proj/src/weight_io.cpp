#include "simbias/weight_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <zlib.h>

#include "simbias/errors.hpp"

namespace simbias {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'B', 'N', 'W'};
constexpr std::uint32_t kMaxLayers = 1024;

class ByteWriter {
 public:
  void put_u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) bytes_.push_back(static_cast<unsigned char>(v >> (8 * b)));
  }
  void put_f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<unsigned char>(v >> (8 * b)));
  }
  void put_raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& bytes, std::size_t end)
      : bytes_(bytes), end_(end) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * b);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * b);
    return std::bit_cast<double>(v);
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw FormatError("weight file truncated");
  }
  const std::vector<unsigned char>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void write_weights(std::ostream& out, const DeepNet& net) {
  ByteWriter w;
  w.put_raw(kMagic.data(), kMagic.size());
  w.put_u32(kWeightFileVersion);
  w.put_u32(static_cast<std::uint32_t>(net.depth()));
  w.put_u32(static_cast<std::uint32_t>(net.input_dim()));
  for (int l = 0; l < net.depth(); ++l) w.put_u32(static_cast<std::uint32_t>(net.weight(l).rows()));
  for (int l = 0; l < net.depth(); ++l) {
    const auto& m = net.weight(l);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.put_f64(m(r, c));
  }
  for (int l = 0; l < net.depth(); ++l)
    for (Eigen::Index r = 0; r < net.bias(l).size(); ++r) w.put_f64(net.bias(l)[r]);
  w.put_u32(crc_of(w.bytes().data(), w.bytes().size()));
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error("failed to write weight file");
}

void write_weights(const std::filesystem::path& path, const DeepNet& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_weights(out, net);
}

DeepNet read_weights(std::istream& in, NetworkConfig loaded_config) {
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.size() < 4 + 4 + 4 + 4) throw FormatError("weight file truncated");
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) throw FormatError("bad magic, not an SBNW file");

  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored_crc = 0;
  for (int b = 0; b < 4; ++b) stored_crc |= static_cast<std::uint32_t>(bytes[body + b]) << (8 * b);
  if (crc_of(bytes.data(), body) != stored_crc) throw FormatError("CRC32 mismatch");

  ByteReader r(bytes, body);
  r.u32();  // magic
  const std::uint32_t version = r.u32();
  if (version != kWeightFileVersion) throw FormatError("unsupported weight file version " + std::to_string(version));
  const std::uint32_t depth = r.u32();
  if (depth < 2 || depth > kMaxLayers) throw FormatError("layer count out of range");
  std::vector<Eigen::Index> dims(depth + 1);
  for (auto& d : dims) {
    d = r.u32();
    if (d < 1) throw FormatError("zero layer width");
  }
  if (dims.back() != 1) throw FormatError("network must have a single output unit");

  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  for (std::uint32_t l = 0; l < depth; ++l) {
    Eigen::MatrixXd m(dims[l + 1], dims[l]);
    for (Eigen::Index row = 0; row < m.rows(); ++row)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(row, c) = r.f64();
    weights.push_back(std::move(m));
  }
  for (std::uint32_t l = 0; l < depth; ++l) {
    Eigen::VectorXd b(dims[l + 1]);
    for (Eigen::Index row = 0; row < b.size(); ++row) b[row] = r.f64();
    biases.push_back(std::move(b));
  }
  if (r.position() != body) throw FormatError("trailing bytes before CRC");

  loaded_config.input_dim = static_cast<int>(dims.front());
  loaded_config.hidden_widths.assign(dims.begin() + 1, dims.end() - 1);
  return DeepNet(std::move(loaded_config), std::move(weights), std::move(biases));
}

DeepNet read_weights(const std::filesystem::path& path, NetworkConfig loaded_config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_weights(in, std::move(loaded_config));
}

}  // namespace simbias
