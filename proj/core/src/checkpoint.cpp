#include "minr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace minr {

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void layer(const LinearLayer<float>& l) {
    for (float w : l.weight.data()) f32(w);
    for (float b : l.bias.data()) f32(b);
  }
  std::size_t size() const { return out_.size(); }
  std::vector<unsigned char>& buffer() { return out_; }

 private:
  std::vector<unsigned char> out_;
};

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  void need(std::size_t n) const {
    if (pos_ + n > size_) throw FormatError("checkpoint: truncated");
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= U(data_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  void layer(LinearLayer<float>& l) {
    need(4 * l.param_count());
    for (float& w : l.weight.data()) w = f32();
    for (float& b : l.bias.data()) b = f32();
  }
  std::size_t pos() const { return pos_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::size_t header_bytes(std::size_t n_images) {
  return 4 + 2 + 4 * 4 + 1 + 8 + 8 + 4 + 8 + 1 + 8 * 3 + 8 * n_images;
}

std::uint64_t layer_bytes(std::size_t in, std::size_t out) { return 4ull * (in * out + out); }

std::uint64_t image_block_bytes(const MinrConfig& c) {
  const auto& s = c.shape;
  std::uint64_t n = layer_bytes(s.d_in, s.width) + layer_bytes(s.width, s.d_out);
  if (c.use_projection) n += layer_bytes(s.width, s.width);
  n += c.n_private() * layer_bytes(s.width, s.width);
  return n;
}

CheckpointHeader parse_header(Reader& r) {
  r.need(4);
  char magic[4];
  for (char& m : magic) m = static_cast<char>(r.uint<std::uint8_t>());
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("checkpoint: bad magic");
  const auto version = r.uint<std::uint16_t>();
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));

  CheckpointHeader h;
  auto& c = h.config;
  c.shape.d_in = r.uint<std::uint32_t>();
  c.shape.width = r.uint<std::uint32_t>();
  c.shape.n_intermediate = r.uint<std::uint32_t>();
  c.shape.d_out = r.uint<std::uint32_t>();
  const auto tag = static_cast<ActivationTag>(r.uint<std::uint8_t>());
  const double p0 = r.f64();
  const double p1 = r.f64();
  c.n_images = r.uint<std::uint32_t>();
  const auto bits = r.uint<std::uint64_t>();
  c.use_projection = r.uint<std::uint8_t>() != 0;
  try {
    c.shape.activation = activation_from_tag(tag, p0, p1);
    if (c.shape.n_intermediate > kMaxIntermediate) throw ConfigError("too many intermediate layers");
    for (std::size_t p = 1; p <= c.shape.n_intermediate; ++p)
      if (bits >> (p - 1) & 1u) c.share_mask.push_back(p);
    if (c.shape.n_intermediate < kMaxIntermediate && (bits >> c.shape.n_intermediate) != 0)
      throw ConfigError("share bits beyond n_intermediate");
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: invalid header: ") + e.what());
  }
  h.shared_offset = r.uint<std::uint64_t>();
  h.shared_bytes = r.uint<std::uint64_t>();
  h.image_bytes = r.uint<std::uint64_t>();
  h.image_offsets.resize(c.n_images);
  for (auto& o : h.image_offsets) o = r.uint<std::uint64_t>();

  if (h.shared_bytes != c.share_mask.size() * layer_bytes(c.shape.width, c.shape.width) ||
      h.image_bytes != image_block_bytes(c) || h.shared_offset != header_bytes(c.n_images))
    throw FormatError("checkpoint: block sizes disagree with header");
  for (std::size_t i = 0; i < c.n_images; ++i)
    if (h.image_offsets[i] != h.shared_offset + h.shared_bytes + i * h.image_bytes)
      throw FormatError("checkpoint: bad image block offset");
  return h;
}

// Empty model with every layer allocated per the config.
MinrModel<float> allocate(const MinrConfig& c) {
  const auto& s = c.shape;
  MinrModel<float> m;
  m.config = c;
  m.shared.assign(c.share_mask.size(), LinearLayer<float>(s.width, s.width));
  for (std::size_t i = 0; i < c.n_images; ++i) {
    ImageLayers<float> img;
    img.input = LinearLayer<float>(s.d_in, s.width);
    if (c.use_projection) img.projection = LinearLayer<float>(s.width, s.width);
    img.private_layers.assign(c.n_private(), LinearLayer<float>(s.width, s.width));
    img.output = LinearLayer<float>(s.width, s.d_out);
    m.per_image.push_back(std::move(img));
  }
  return m;
}

void read_image_block(Reader& r, ImageLayers<float>& img) {
  r.layer(img.input);
  if (img.projection) r.layer(*img.projection);
  for (auto& p : img.private_layers) r.layer(p);
  r.layer(img.output);
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<unsigned char> read_range(std::ifstream& in, std::uint64_t offset, std::uint64_t n) {
  std::vector<unsigned char> buf(n);
  in.seekg(std::streamoff(offset));
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n));
  if (std::uint64_t(in.gcount()) != n) throw FormatError("checkpoint: truncated");
  return buf;
}

}  // namespace

std::uint64_t CheckpointHeader::file_size() const { return shared_offset + shared_bytes + image_bytes * config.n_images; }

std::vector<unsigned char> encode_checkpoint(const MinrModel<float>& model) {
  const auto& c = model.config;
  c.validate();
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.uint<std::uint16_t>(kCheckpointVersion);
  w.uint<std::uint32_t>(std::uint32_t(c.shape.d_in));
  w.uint<std::uint32_t>(std::uint32_t(c.shape.width));
  w.uint<std::uint32_t>(std::uint32_t(c.shape.n_intermediate));
  w.uint<std::uint32_t>(std::uint32_t(c.shape.d_out));
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(activation_tag(c.shape.activation)));
  const auto [p0, p1] = activation_hyperparameters(c.shape.activation);
  w.f64(p0);
  w.f64(p1);
  w.uint<std::uint32_t>(std::uint32_t(c.n_images));
  std::uint64_t bits = 0;
  for (std::size_t p : c.share_mask) bits |= std::uint64_t(1) << (p - 1);
  w.uint<std::uint64_t>(bits);
  w.uint<std::uint8_t>(c.use_projection ? 1 : 0);

  const std::uint64_t shared_offset = header_bytes(c.n_images);
  const std::uint64_t shared_bytes = c.share_mask.size() * layer_bytes(c.shape.width, c.shape.width);
  const std::uint64_t image_bytes = image_block_bytes(c);
  w.uint<std::uint64_t>(shared_offset);
  w.uint<std::uint64_t>(shared_bytes);
  w.uint<std::uint64_t>(image_bytes);
  for (std::size_t i = 0; i < c.n_images; ++i) w.uint<std::uint64_t>(shared_offset + shared_bytes + i * image_bytes);

  for (const auto& l : model.shared) w.layer(l);
  for (const auto& img : model.per_image) {
    w.layer(img.input);
    if (img.projection) w.layer(*img.projection);
    for (const auto& p : img.private_layers) w.layer(p);
    w.layer(img.output);
  }
  if (w.size() != shared_offset + shared_bytes + c.n_images * image_bytes)
    throw ShapeError("checkpoint: model layers disagree with its config");
  return std::move(w.buffer());
}

MinrModel<float> decode_checkpoint(const std::vector<unsigned char>& bytes) {
  Reader r(bytes.data(), bytes.size());
  const auto header = parse_header(r);
  if (bytes.size() != header.file_size()) throw FormatError("checkpoint: size disagrees with header (truncated?)");
  auto model = allocate(header.config);
  for (auto& l : model.shared) r.layer(l);
  for (auto& img : model.per_image) read_image_block(r, img);
  return model;
}

void save_checkpoint(const MinrModel<float>& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

MinrModel<float> load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  // Fixed prefix up to n_images, then the offset table.
  constexpr std::size_t prefix = 4 + 2 + 16 + 1 + 16 + 4;
  auto head = read_range(in, 0, prefix);
  Reader probe(head.data(), head.size());
  probe.uint<std::uint32_t>();
  probe.uint<std::uint16_t>();
  for (int i = 0; i < 4; ++i) probe.uint<std::uint32_t>();
  probe.uint<std::uint8_t>();
  probe.f64();
  probe.f64();
  const std::uint32_t n_images = probe.uint<std::uint32_t>();
  auto full = read_range(in, 0, header_bytes(n_images));
  Reader r(full.data(), full.size());
  auto header = parse_header(r);
  in.seekg(0, std::ios::end);
  if (std::uint64_t(in.tellg()) != header.file_size())
    throw FormatError("checkpoint: size disagrees with header (truncated?)");
  return header;
}

SirenModel<float> load_image_network(const std::filesystem::path& path, std::size_t image_id) {
  const auto header = read_checkpoint_header(path);
  if (image_id >= header.config.n_images)
    throw ConfigError("checkpoint: image id " + std::to_string(image_id) + " out of range");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");

  // A one-image model holding only the requested per-image block.
  MinrConfig single = header.config;
  single.n_images = 1;
  auto model = allocate(single);
  const auto shared = read_range(in, header.shared_offset, header.shared_bytes);
  Reader rs(shared.data(), shared.size());
  for (auto& l : model.shared) rs.layer(l);
  const auto block = read_range(in, header.image_offsets[image_id], header.image_bytes);
  Reader ri(block.data(), block.size());
  read_image_block(ri, model.per_image[0]);
  return assemble_image_network(model, 0);
}

}  // namespace minr
