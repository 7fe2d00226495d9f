#include "fpnn/field/field_io.hpp"

#include <cmath>

#include "fpnn/common/binary_io.hpp"
#include "fpnn/common/error.hpp"

namespace fpnn::field {

namespace {
constexpr std::string_view kMagic = "FPF1";
}

std::vector<std::uint8_t> encode_field(const Field3D& field) {
  ByteWriter w;
  w.text(kMagic);
  w.u32(static_cast<std::uint32_t>(field.resolution()));
  w.u32(static_cast<std::uint32_t>(field.channels()));
  for (auto role : field.roles()) w.u8(static_cast<std::uint8_t>(role));
  w.f32s(field.values());
  return w.take();
}

Field3D decode_field(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.text(4, "field header");
  if (magic != kMagic) throw FormatError("bad field magic '" + magic + "', expected 'FPF1'");
  const std::uint32_t res = r.u32();
  const std::uint32_t channels = r.u32();
  if (res == 0 || res > 2048) throw FormatError("implausible field resolution " + std::to_string(res));
  if (channels == 0 || channels > 256) throw FormatError("implausible channel count " + std::to_string(channels));
  std::vector<ChannelRole> roles(channels);
  for (auto& role : roles) {
    const std::uint8_t tag = r.u8();
    if (tag > static_cast<std::uint8_t>(ChannelRole::other)) {
      throw FormatError("unknown channel role tag " + std::to_string(tag));
    }
    role = static_cast<ChannelRole>(tag);
  }
  const std::size_t count = static_cast<std::size_t>(res) * res * res * channels;
  std::vector<float> values(count);
  r.f32s(values, "field payload");
  if (r.remaining() != 0) {
    throw FormatError("field payload has " + std::to_string(r.remaining()) + " trailing bytes");
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(values[i])) throw FormatError("non-finite value in field payload at index " + std::to_string(i));
  }
  return Field3D(static_cast<int>(res), std::move(roles), std::move(values));
}

void write_field(const Field3D& field, const std::string& path) { write_file_bytes(path, encode_field(field)); }

Field3D read_field(const std::string& path) { return decode_field(read_file_bytes(path)); }

}  // namespace fpnn::field
