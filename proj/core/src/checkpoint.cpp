#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "czero/net.hpp"

namespace czero {

namespace {

constexpr std::array<unsigned char, 4> kMagic{'C', 'Z', 'N', 'T'};

std::uint64_t fnv1a(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> vs) {
    u64(vs.size());
    for (double v : vs) f64(v);
  }
  std::vector<unsigned char> out;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> f64s(std::size_t expected) {
    const auto n = u64();
    if (n != expected) throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint: block length mismatch");
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  std::size_t position() const noexcept { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint: truncated file");
  }
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> serialize(const TripleHeadNet& net) {
  Writer w;
  w.out.insert(w.out.end(), kMagic.begin(), kMagic.end());
  w.u32(kCheckpointVersion);
  const auto& s = net.shape();
  w.u64(s.input_size);
  w.u64(s.depth);
  w.u64(s.width);
  w.u64(s.num_actions);
  w.f64(net.value_norm.mean);
  w.f64(net.value_norm.std);
  w.f64s(net.input_mean);
  w.f64s(net.input_std);
  w.f64s(net.parameters());
  w.u64(net.adam_step);
  w.f64s(net.adam_m);
  w.f64s(net.adam_v);
  w.u64(fnv1a(w.out));
  return std::move(w.out);
}

TripleHeadNet deserialize(std::span<const unsigned char> bytes) {
  if (bytes.size() < kMagic.size() + 4 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint: bad magic");
  Reader r(bytes.subspan(kMagic.size()));
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw CheckpointError(CheckpointError::Kind::Version, "checkpoint: unsupported version " + std::to_string(version) +
                                                              " (expected " + std::to_string(kCheckpointVersion) + ")");
  NetShape shape;
  shape.input_size = r.u64();
  shape.depth = r.u64();
  shape.width = r.u64();
  shape.num_actions = r.u64();
  if (shape.input_size == 0 || shape.depth == 0 || shape.width == 0 || shape.num_actions == 0 ||
      shape.input_size > (1u << 20) || shape.depth > 1024 || shape.width > (1u << 16) || shape.num_actions > (1u << 16))
    throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint: implausible network shape");
  TripleHeadNet net(shape);
  net.value_norm.mean = r.f64();
  net.value_norm.std = r.f64();
  net.input_mean = r.f64s(shape.input_size);
  net.input_std = r.f64s(shape.input_size);
  const auto params = r.f64s(net.num_parameters());
  std::copy(params.begin(), params.end(), net.parameters().begin());
  net.adam_step = r.u64();
  net.adam_m = r.f64s(net.num_parameters());
  net.adam_v = r.f64s(net.num_parameters());
  const std::size_t body = kMagic.size() + r.position();
  const auto stored = r.u64();
  if (stored != fnv1a(bytes.first(body)))
    throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint: checksum mismatch");
  if (kMagic.size() + r.position() != bytes.size())
    throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint: trailing bytes");
  return net;
}

void save_checkpoint(const TripleHeadNet& net, const std::filesystem::path& path) {
  const auto bytes = serialize(net);
  // Write-then-rename keeps the previous checkpoint intact if the process dies mid-write.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointError::Kind::Io, "checkpoint: cannot open " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError(CheckpointError::Kind::Io, "checkpoint: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TripleHeadNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::Io, "checkpoint: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace czero
