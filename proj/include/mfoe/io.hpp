#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfoe/image.hpp"

namespace mfoe {

// Grayscale ingestion (8/16-bit binary PGM or PNG; color PNG is converted to
// luminance), normalized to [0,1].
Image read_image(const std::string& path);

Image read_pgm(const std::string& path);
Image read_png(const std::string& path);

// 16-bit binary PGM (P5, maxval 65535); values clamped to [0,1].
void write_pgm16(const Image& img, const std::string& path);

// Self-describing flat f64 array: magic "MFOE", u32 version, u32 dtype
// (0 = f64 little-endian), u32 rank, u64 dims[rank], payload.
struct ArrayFile {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
};

void write_array(const std::string& path, const std::vector<std::uint64_t>& dims,
                 const std::vector<double>& data);
ArrayFile read_array(const std::string& path);

void write_array(const std::string& path, const Image& img);

// Plain-text matrix (rows of whitespace-separated decimals), e.g. blur kernels.
Image read_kernel_text(const std::string& path);
void write_kernel_text(const Image& kernel, const std::string& path);

// Shortest round-trip decimal representation (deterministic output files).
std::string format_double(double v);

// FNV-1a 64-bit over a byte string, hex-encoded (model/manifest hashes).
std::string fnv1a_hex(const std::string& bytes);

} // namespace mfoe
