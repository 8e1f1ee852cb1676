#include "ied/checkpoint.hpp"

#include <zlib.h>

#include <cstring>

namespace ied::train {

namespace {

constexpr char kMagic[] = "NNCKPT1\n";
constexpr std::size_t kMagicLen = 8;
constexpr std::size_t kCrcLen = 4;

std::uint32_t crc_of(const std::uint8_t* data, std::size_t len) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(len)));
}

void put_string(Bytes& out, const std::string& s) {
  put_u32le(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

std::string get_string(ByteReader& r) {
  const std::uint32_t n = r.u32le();
  return r.text(n);
}

}  // namespace

Bytes serialize_checkpoint(const Checkpoint& ckpt) {
  Bytes out;
  out.insert(out.end(), kMagic, kMagic + kMagicLen);
  put_string(out, ckpt.model_name);
  put_string(out, ckpt.variant);
  put_u64le(out, ckpt.seed);
  put_u32le(out, ckpt.epoch);
  put_u32le(out, static_cast<std::uint32_t>(ckpt.params.size()));
  for (const nn::Parameter& p : ckpt.params) {
    put_string(out, p.name);
    put_u32le(out, static_cast<std::uint32_t>(p.tensor.shape.size()));
    for (int d : p.tensor.shape) put_u32le(out, static_cast<std::uint32_t>(d));
    out.push_back(p.trainable ? 1 : 0);
    for (double v : p.tensor.values) put_f64le(out, v);
  }
  put_u32le(out, crc_of(out.data(), out.size()));
  return out;
}

Checkpoint deserialize_checkpoint(const Bytes& bytes) {
  if (bytes.size() < kMagicLen + kCrcLen)
    throw Error(ErrorCode::CorruptCheckpoint, "file too short for a checkpoint");
  if (std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    if (std::memcmp(bytes.data(), "NNCKPT", 6) == 0)
      throw Error(ErrorCode::VersionMismatch,
                  "checkpoint version '" +
                      std::string(bytes.begin(), bytes.begin() + kMagicLen) +
                      "' not supported");
    throw Error(ErrorCode::CorruptCheckpoint, "bad magic");
  }

  ByteReader tail(bytes.data() + bytes.size() - kCrcLen, kCrcLen,
                  ErrorCode::CorruptCheckpoint);
  const std::uint32_t declared = tail.u32le();
  const std::uint32_t actual = crc_of(bytes.data(), bytes.size() - kCrcLen);
  if (declared != actual)
    throw Error(ErrorCode::CorruptCheckpoint, "checksum mismatch");

  ByteReader r(bytes.data() + kMagicLen, bytes.size() - kMagicLen - kCrcLen,
               ErrorCode::CorruptCheckpoint);
  Checkpoint ckpt;
  ckpt.model_name = get_string(r);
  ckpt.variant = get_string(r);
  ckpt.seed = r.u64le();
  ckpt.epoch = r.u32le();
  const std::uint32_t count = r.u32le();
  ckpt.params.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    nn::Parameter p;
    p.name = get_string(r);
    const std::uint32_t rank = r.u32le();
    std::vector<int> shape(rank);
    long numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<int>(r.u32le());
      numel *= shape[d];
    }
    p.trainable = r.u8() != 0;
    std::vector<double> values(static_cast<std::size_t>(numel));
    for (double& v : values) v = r.f64le();
    p.tensor = nn::Tensor(std::move(shape), std::move(values));
    ckpt.params.push_back(std::move(p));
  }
  if (r.remaining() != 0)
    throw Error(ErrorCode::CorruptCheckpoint, "trailing bytes in checkpoint");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace ied::train
