#include <algorithm>
#include <cctype>
#include <filesystem>

#ifdef VIGIL_HAVE_PNG
#include <png.h>
#endif

#include "vigil/error.hpp"
#include "vigil/vision.hpp"

namespace vigil::vision {

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string_view next_token(std::string_view bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

int header_int(std::string_view bytes, std::size_t& pos, const char* what) {
  const auto tok = next_token(bytes, pos);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      tok.size() > 9) {
    throw Error(Errc::ImageFormat, std::string("PGM header: bad ") + what);
  }
  return std::stoi(std::string(tok));
}

}  // namespace

GrayImage decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  const auto magic = next_token(bytes, pos);
  if (magic != "P5" && magic != "P2") throw Error(Errc::ImageFormat, "not a PGM (P5/P2) image");
  const int w = header_int(bytes, pos, "width");
  const int h = header_int(bytes, pos, "height");
  const int maxval = header_int(bytes, pos, "maxval");
  if (w <= 0 || h <= 0) throw Error(Errc::ImageFormat, "PGM has zero size");
  if (maxval <= 0 || maxval > 255) throw Error(Errc::ImageFormat, "only 8-bit PGM is supported");

  GrayImage img(w, h);
  const auto scale = [maxval](int v) {
    return static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
  };
  if (magic == "P5") {
    ++pos;  // single whitespace byte after maxval
    if (bytes.size() < pos + img.pixels.size()) throw Error(Errc::ImageFormat, "PGM pixel data truncated");
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      img.pixels[i] = scale(static_cast<unsigned char>(bytes[pos + i]));
    }
  } else {
    for (auto& p : img.pixels) {
      const int v = header_int(bytes, pos, "pixel");
      if (v > maxval) throw Error(Errc::ImageFormat, "PGM pixel exceeds maxval");
      p = scale(v);
    }
  }
  return img;
}

std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

GrayImage read_image(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".png" || ext == ".PNG") {
#ifdef VIGIL_HAVE_PNG
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
      throw Error(Errc::ImageFormat, path + ": " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    GrayImage img(static_cast<int>(image.width), static_cast<int>(image.height));
    if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
      png_image_free(&image);
      throw Error(Errc::ImageFormat, path + ": " + image.message);
    }
    return img;
#else
    throw Error(Errc::ImageFormat, path + ": built without PNG support");
#endif
  }
  try {
    return decode_pgm(io::read_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::ImageFormat) throw Error(Errc::ImageFormat, path + ": " + e.detail());
    throw;
  }
}

std::vector<std::string> list_frames(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::IoError, dir + " is not a directory");
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".png" || ext == ".PGM" || ext == ".PNG") out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

GrayImage crop(const GrayImage& img, int x, int y, int w, int h) {
  const int x0 = std::clamp(x, 0, img.width);
  const int y0 = std::clamp(y, 0, img.height);
  const int x1 = std::clamp(x + w, x0, img.width);
  const int y1 = std::clamp(y + h, y0, img.height);
  GrayImage out(x1 - x0, y1 - y0);
  for (int yy = y0; yy < y1; ++yy) {
    std::copy_n(img.pixels.begin() + static_cast<std::ptrdiff_t>(yy) * img.width + x0, x1 - x0,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(yy - y0) * out.width);
  }
  return out;
}

IntegralImage::IntegralImage(const GrayImage& img) : width_(img.width), height_(img.height) {
  if (img.empty()) throw Error(Errc::EmptyImage, "integral image of an empty image");
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  sum_.assign(stride * (static_cast<std::size_t>(height_) + 1), 0);
  sq_.assign(sum_.size(), 0);
  for (int y = 0; y < height_; ++y) {
    std::uint64_t row = 0, row_sq = 0;
    for (int x = 0; x < width_; ++x) {
      const std::uint64_t p = img.at(x, y);
      row += p;
      row_sq += p * p;
      sum_[index(x + 1, y + 1)] = sum_[index(x + 1, y)] + row;
      sq_[index(x + 1, y + 1)] = sq_[index(x + 1, y)] + row_sq;
    }
  }
}

}  // namespace vigil::vision
