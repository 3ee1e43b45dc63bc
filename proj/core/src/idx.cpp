#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fedcpsl/data.hpp"

namespace fedcpsl {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) throw IdxError(path.string() + ": truncated header");
  return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
         (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), b.size());
}

std::string hex(std::uint32_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << v;
  return s.str();
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
  const auto images = read_all(images_path);
  const auto labels = read_all(labels_path);

  const std::uint32_t image_magic = read_be32(images, 0, images_path);
  if (image_magic != kImageMagic) {
    throw IdxError(images_path.string() + ": bad magic " + hex(image_magic) + ", expected " +
                   hex(kImageMagic));
  }
  const std::uint32_t label_magic = read_be32(labels, 0, labels_path);
  if (label_magic != kLabelMagic) {
    throw IdxError(labels_path.string() + ": bad magic " + hex(label_magic) + ", expected " +
                   hex(kLabelMagic));
  }

  const std::uint64_t n_images = read_be32(images, 4, images_path);
  const std::uint64_t rows = read_be32(images, 8, images_path);
  const std::uint64_t cols = read_be32(images, 12, images_path);
  const std::uint64_t n_labels = read_be32(labels, 4, labels_path);
  if (n_images != n_labels) {
    throw IdxError("count mismatch: " + std::to_string(n_images) + " images vs " +
                   std::to_string(n_labels) + " labels");
  }
  const std::uint64_t width = rows * cols;
  if (images.size() < 16 + n_images * width) {
    throw IdxError(images_path.string() + ": truncated pixel data");
  }
  if (labels.size() < 8 + n_labels) throw IdxError(labels_path.string() + ": truncated labels");

  LabeledDataset data;
  data.inputs.resize(static_cast<Eigen::Index>(n_images), static_cast<Eigen::Index>(width));
  data.labels.resize(n_images);
  const unsigned char* pixels = images.data() + 16;
  for (std::uint64_t i = 0; i < n_images; ++i) {
    for (std::uint64_t k = 0; k < width; ++k) {
      data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          pixels[i * width + k] / 255.0;
    }
    data.labels[i] = labels[8 + i];
  }
  int max_label = 1;
  for (int y : data.labels) max_label = std::max(max_label, y);
  data.num_classes = max_label + 1;
  return data;
}

void write_idx(const LabeledDataset& data, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, int image_rows) {
  data.validate();
  const auto width = static_cast<std::uint32_t>(data.inputs.cols());
  const std::uint32_t rows =
      (image_rows > 0 && width % static_cast<std::uint32_t>(image_rows) == 0) ? image_rows : 1;

  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw IdxError("cannot open IDX output files for writing");

  write_be32(img, kImageMagic);
  write_be32(img, static_cast<std::uint32_t>(data.size()));
  write_be32(img, rows);
  write_be32(img, width / rows);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index k = 0; k < data.inputs.cols(); ++k) {
      const double v = std::clamp(data.inputs(i, k), 0.0, 1.0);
      img.put(static_cast<char>(std::lround(v * 255.0)));
    }
  }

  write_be32(lab, kLabelMagic);
  write_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (int y : data.labels) lab.put(static_cast<char>(y));
  if (!img || !lab) throw IdxError("failed writing IDX files");
}

}  // namespace fedcpsl
