#include "sat2pano/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

namespace sat2pano {
namespace {

struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;   // after transforms: 1 or 3
  int bit_depth = 0;  // 8 or 16
  std::vector<std::uint16_t> samples;
};

struct MemoryReader {
  const std::vector<unsigned char>* bytes = nullptr;
  std::size_t offset = 0;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + count > reader->bytes->size()) {
    png_error(png, "unexpected end of file");
  }
  std::memcpy(out, reader->bytes->data() + reader->offset, count);
  reader->offset += count;
}

void silent_warning(png_structp, png_const_charp) {}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

// libpng reports errors via longjmp back into this frame. Only libpng's own C
// frames are unwound; every C++ object here is declared before setjmp.
bool decode(const std::vector<unsigned char>& bytes, RawPng& out) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) return false;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, silent_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  MemoryReader reader{&bytes, 0};
  std::vector<png_bytep> rows;
  std::vector<unsigned char> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &reader, read_from_memory);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  if ((channels != 1 && channels != 3) || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  pixels.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = pixels.data() + r * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = channels;
  out.bit_depth = depth;
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  out.samples.resize(count);
  if (depth == 8) {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = pixels[i];
  } else {
    std::memcpy(out.samples.data(), pixels.data(), count * 2);
  }
  return true;
}

RawPng read_raw(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = slurp(path);
  RawPng raw;
  if (!decode(bytes, raw) || raw.width < 1 || raw.height < 1) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "not a readable PNG: " + path.string());
  }
  return raw;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

bool encode(std::FILE* file, int width, int height, int channels,
            int bit_depth, const std::vector<unsigned char>& bytes) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, silent_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  std::vector<png_const_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, width, height, bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_write_info(png, info);
  const std::size_t row_bytes =
      static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  for (int r = 0; r < height; ++r) rows[r] = bytes.data() + r * row_bytes;
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_raw(const std::filesystem::path& path, int width, int height,
               int channels, int bit_depth,
               const std::vector<std::uint16_t>& samples) {
  std::vector<unsigned char> bytes;
  if (bit_depth == 8) {
    bytes.assign(samples.begin(), samples.end());
  } else {
    bytes.resize(samples.size() * 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      bytes[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
      bytes[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
    }
  }
  std::unique_ptr<std::FILE, FileCloser> file(
      std::fopen(path.string().c_str(), "wb"));
  if (!file) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  if (!encode(file.get(), width, height, channels, bit_depth, bytes)) {
    throw Error(ErrorCode::kIoError, "PNG encoding failed for " + path.string());
  }
}

}  // namespace

ImageBuffer load_png(const std::filesystem::path& path) {
  const RawPng raw = read_raw(path);
  ImageBuffer img(raw.width, raw.height, raw.channels);
  const float denom = raw.bit_depth == 8 ? 255.0f : 65535.0f;
  auto data = img.data();
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    data[i] = static_cast<float>(raw.samples[i]) / denom;
  }
  img.clamp01();
  return img;
}

void save_png(const std::filesystem::path& path, const ImageBuffer& img,
              int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(ErrorCode::kInvalidArgument, "PNG bit depth must be 8 or 16");
  }
  const float full = bit_depth == 8 ? 255.0f : 65535.0f;
  std::vector<std::uint16_t> samples(img.data().size());
  std::transform(img.data().begin(), img.data().end(), samples.begin(),
                 [full](float x) {
                   return static_cast<std::uint16_t>(
                       std::lround(std::clamp(x, 0.0f, 1.0f) * full));
                 });
  write_raw(path, img.width(), img.height(), img.channels(), bit_depth,
            samples);
}

void save_mask_png(const std::filesystem::path& path, const ImageBuffer& img) {
  std::vector<std::uint16_t> samples(img.pixel_count(), 255);
  if (img.has_mask()) {
    std::transform(img.mask().begin(), img.mask().end(), samples.begin(),
                   [](std::uint8_t m) -> std::uint16_t { return m ? 255 : 0; });
  }
  write_raw(path, img.width(), img.height(), 1, 8, samples);
}

HeightMap load_height_png(const std::filesystem::path& path, double scale,
                          double offset) {
  const RawPng raw = read_raw(path);
  if (raw.channels != 1) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "height maps must be grayscale: " + path.string());
  }
  HeightMap map(raw.width, raw.height);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    map.meters[i] = static_cast<float>(raw.samples[i] * scale + offset);
  }
  return map;
}

void save_height_png(const std::filesystem::path& path, const HeightMap& map,
                     double scale, double offset) {
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "height scale must be positive");
  }
  std::vector<std::uint16_t> samples(map.meters.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double stored = std::round((map.meters[i] - offset) / scale);
    samples[i] = static_cast<std::uint16_t>(std::clamp(stored, 0.0, 65535.0));
  }
  write_raw(path, map.width, map.height, 1, 16, samples);
}

}  // namespace sat2pano
