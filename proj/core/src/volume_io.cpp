#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sat2pano/error.hpp"
#include "sat2pano/mpi.hpp"

namespace sat2pano {
namespace {

constexpr char kMagic[4] = {'H', 'P', 'V', '1'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(x >> (8 * i)));
}

void put_f32(std::vector<unsigned char>& out, float x) {
  put_u32(out, std::bit_cast<std::uint32_t>(x));
}

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  std::uint32_t u32() {
    if (pos_ + 4 > bytes_.size()) {
      throw Error(ErrorCode::kUnsupportedFormat,
                  "truncated HPV1 file: " + source_);
    }
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) {
      x |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return x;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::string source_;
  std::size_t pos_ = 4;  // past the magic
};

}  // namespace

void write_hpv(const std::filesystem::path& path,
               const HeightProbabilityVolume& d) {
  std::vector<unsigned char> bytes(kMagic, kMagic + 4);
  bytes.reserve(16 + 4 * (d.plane_heights().size() + d.data().size()));
  put_u32(bytes, static_cast<std::uint32_t>(d.width()));
  put_u32(bytes, static_cast<std::uint32_t>(d.height()));
  put_u32(bytes, static_cast<std::uint32_t>(d.n_planes()));
  for (double h : d.plane_heights()) put_f32(bytes, static_cast<float>(h));
  for (float p : d.data()) put_f32(bytes, p);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

HeightProbabilityVolume read_hpv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "missing HPV1 header: " + path.string());
  }
  ByteReader reader(bytes, path.string());
  const std::uint32_t width = reader.u32();
  const std::uint32_t height = reader.u32();
  const std::uint32_t n_planes = reader.u32();
  const std::uint64_t expected =
      4ull * n_planes + 4ull * width * height * n_planes;
  if (width == 0 || height == 0 || n_planes == 0 ||
      reader.remaining() != expected) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "HPV1 size fields do not match the payload: " + path.string());
  }
  std::vector<double> heights(n_planes);
  for (double& h : heights) h = reader.f32();
  HeightProbabilityVolume d(static_cast<int>(width), static_cast<int>(height),
                            std::move(heights));
  for (float& p : d.data()) p = reader.f32();
  return d;
}

}  // namespace sat2pano
