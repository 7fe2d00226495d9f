#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpnn/field/field.hpp"

namespace fpnn::field {

/// Little-endian "FPF1" | u32 R | u32 T | T role bytes | R^3*T float32,
/// channel-major then z, y, x fastest. No padding.
std::vector<std::uint8_t> encode_field(const Field3D& field);

/// Throws FormatError on bad magic, unknown role tag, truncated or
/// oversized payload, or non-finite values.
Field3D decode_field(std::span<const std::uint8_t> bytes);

void write_field(const Field3D& field, const std::string& path);
Field3D read_field(const std::string& path);

}  // namespace fpnn::field
