#ifndef IED_CHECKPOINT_HPP
#define IED_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "ied/nn/tensor.hpp"

namespace ied::train {

// Serialized model state. Binary layout:
//   magic "NNCKPT1\n"
//   model_name  (u32 length + bytes)
//   variant_tag (u32 length + bytes)
//   seed (u64), epoch (u32), parameter count (u32)
//   per parameter: name (u32 length + bytes), rank (u32), dims (u32 each),
//                  trainable flag (u8), values (f64 little-endian each)
//   crc32 (u32) over all preceding bytes
struct Checkpoint {
  std::string model_name;
  std::string variant;
  std::uint64_t seed = 0;
  std::uint32_t epoch = 0;
  std::vector<nn::Parameter> params;
};

Bytes serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const Bytes& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ied::train

#endif  // IED_CHECKPOINT_HPP
