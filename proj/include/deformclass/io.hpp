#pragma once

// IDX (MNIST container) parsing, PGM export and the dataset manifest.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deformclass/datagen.hpp"
#include "deformclass/model.hpp"

namespace deformclass::io {

using Bytes = std::vector<std::uint8_t>;

/// Bytes 0-1 zero, byte 2 type code (0x08 = unsigned byte), byte 3 rank,
/// then rank big-endian u32 dims, then the payload.
struct IdxFile {
  std::uint8_t type_code = 0x08;
  std::vector<std::uint32_t> dims;
  Bytes payload;
};

/// Throws BadMagic, TruncatedPayload, DimMismatch (payload longer than dims).
IdxFile parse_idx(std::span<const std::uint8_t> bytes);
Bytes serialize_idx(const IdxFile& f);

/// Magic 0x00000803, dims (n, rows, cols) with rows == cols; pixels / 255.
std::vector<GrayImage> parse_idx_images(std::span<const std::uint8_t> bytes);
/// Magic 0x00000801, dims (n).
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes);
/// Inverse of parse_idx_images for images with values in [0, 1].
Bytes images_to_idx(std::span<const GrayImage> imgs);
Bytes labels_to_idx(std::span<const int> labels);

enum class PgmScale { PerImageMax, Fixed };

/// Binary P5, "P5\n<w> <h>\n255\n" then round(255 * v / max) per pixel where
/// max is the image maximum or 1.0. An all-zero image under PerImageMax is
/// written as zero bytes and reported through all_zero.
Bytes write_pgm(const GrayImage& img, PgmScale policy = PgmScale::PerImageMax,
                bool* all_zero = nullptr);
/// Reads a square 8-bit P5 image; values are scaled by 1/255. Throws BadMagic,
/// TruncatedPayload, DimMismatch.
GrayImage read_pgm(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

struct ManifestRow {
  int index = 0;
  int label = 0;
  int template_index = 0;
  DeformParams params;
  std::string file;
};

/// Header index,label,template_index,eta,xi,xi_prime,tau,tau_prime,file.
std::string manifest_csv(const datagen::Dataset& ds, const std::string& file_prefix = "img_");
/// Throws BadManifest on a wrong header or malformed row.
std::vector<ManifestRow> parse_manifest(const std::string& text);

/// Writes manifest.csv and one PGM per image into dir (created if missing).
void write_dataset(const std::string& dir, const datagen::Dataset& ds,
                   PgmScale policy = PgmScale::PerImageMax);

/// Loads an MNIST image/label file pair; throws DimMismatch if counts differ.
struct MnistSet {
  std::vector<GrayImage> images;
  std::vector<int> labels;
};
MnistSet load_mnist(const std::string& images_path, const std::string& labels_path);

}  // namespace deformclass::io
