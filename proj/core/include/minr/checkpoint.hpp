#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "minr/model.hpp"

namespace minr {

inline constexpr char kCheckpointMagic[4] = {'M', 'I', 'N', 'R'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

// Little-endian layout:
//   "MINR" | u16 version
//   u32 d_in | u32 width | u32 n_intermediate | u32 d_out
//   u8 activation tag | f64 hyper0 | f64 hyper1
//   u32 n_images | u64 share bitset (bit p-1 = position p) | u8 use_projection
//   u64 shared block offset | u64 shared block bytes | u64 image block bytes
//   u64 image block offset x n_images
//   shared block, then one block per image in id order.
// A block is raw f32 values, layer by layer in forward order, each layer its
// row-major weight followed by its bias.
struct CheckpointHeader {
  MinrConfig config;
  std::uint64_t shared_offset = 0;
  std::uint64_t shared_bytes = 0;
  std::uint64_t image_bytes = 0;
  std::vector<std::uint64_t> image_offsets;

  std::uint64_t file_size() const;
};

std::vector<unsigned char> encode_checkpoint(const MinrModel<float>& model);
MinrModel<float> decode_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const MinrModel<float>& model, const std::filesystem::path& path);
MinrModel<float> load_checkpoint(const std::filesystem::path& path);

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

// Reads the header, the shared block and one image's block only, and returns
// that image's full forward network.
SirenModel<float> load_image_network(const std::filesystem::path& path, std::size_t image_id);

}  // namespace minr
