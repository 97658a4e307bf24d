#include "distraxion/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#ifdef DISTRAXION_HAVE_PNG
#include <png.h>
#endif

namespace distraxion {

Frame::Frame(int width, int height, Rgb8 fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ImageError("frame dimensions must be positive, got " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
  data_.resize(static_cast<std::size_t>(width) * height * kChannels);
  for (std::size_t i = 0; i < data_.size(); i += kChannels) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Frame crop(const Frame& frame, PixelOffset offset, Size crop_size) {
  if (crop_size.width <= 0 || crop_size.height <= 0 || offset.x < 0 || offset.y < 0 ||
      offset.x + crop_size.width > frame.width() || offset.y + crop_size.height > frame.height()) {
    throw ImageError("crop window (" + std::to_string(offset.x) + "," + std::to_string(offset.y) + ") " +
                     std::to_string(crop_size.width) + "x" + std::to_string(crop_size.height) +
                     " outside frame " + std::to_string(frame.width()) + "x" +
                     std::to_string(frame.height()));
  }
  Frame out(crop_size.width, crop_size.height);
  const std::size_t row_bytes = static_cast<std::size_t>(crop_size.width) * Frame::kChannels;
  for (int y = 0; y < crop_size.height; ++y) {
    const auto src = frame.data().begin() +
                     ((static_cast<std::size_t>(offset.y + y) * frame.width() + offset.x) * Frame::kChannels);
    std::copy(src, src + row_bytes, out.data().begin() + y * row_bytes);
  }
  return out;
}

Frame center_crop(const Frame& frame, Size crop_size) {
  return crop(frame, {(frame.width() - crop_size.width) / 2, (frame.height() - crop_size.height) / 2},
              crop_size);
}

Frame resize_bilinear(const Frame& frame, Size size) {
  if (frame.size() == size) return frame;
  Frame out(size.width, size.height);
  const double sx = static_cast<double>(frame.width()) / size.width;
  const double sy = static_cast<double>(frame.height()) / size.height;
  for (int y = 0; y < size.height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, frame.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, frame.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < size.width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, frame.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, frame.width() - 1);
      const double wx = fx - x0;
      const Rgb8 a = frame.at(x0, y0), b = frame.at(x1, y0), c = frame.at(x0, y1), d = frame.at(x1, y1);
      auto mix = [&](double va, double vb, double vc, double vd) {
        const double v = (va * (1 - wx) + vb * wx) * (1 - wy) + (vc * (1 - wx) + vd * wx) * wy;
        return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      };
      out.set(x, y, {mix(a.r, b.r, c.r, d.r), mix(a.g, b.g, c.g, d.g), mix(a.b, b.b, c.b, d.b)});
    }
  }
  return out;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string ppm_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  if (token.empty()) throw ImageError("truncated PPM header in " + path.string());
  return token;
}

int ppm_int(std::istream& in, const std::filesystem::path& path) {
  const std::string t = ppm_token(in, path);
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ImageError("bad PPM header field '" + t + "' in " + path.string());
  }
}

}  // namespace

Frame read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open image " + path.string());
  if (ppm_token(in, path) != "P6") throw ImageError("not a binary PPM (P6): " + path.string());
  const int w = ppm_int(in, path);
  const int h = ppm_int(in, path);
  const int maxval = ppm_int(in, path);
  if (w <= 0 || h <= 0) throw ImageError("bad PPM dimensions in " + path.string());
  if (maxval != 255) throw ImageError("unsupported PPM maxval " + std::to_string(maxval) + " in " + path.string());
  // ppm_token consumed exactly one whitespace byte after maxval.
  Frame frame(w, h);
  in.read(reinterpret_cast<char*>(frame.data().data()), static_cast<std::streamsize>(frame.data().size()));
  if (in.gcount() != static_cast<std::streamsize>(frame.data().size())) {
    throw ImageError("truncated PPM pixel data in " + path.string());
  }
  return frame;
}

void write_ppm(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageError("cannot write image " + path.string());
  out << "P6\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data().data()), static_cast<std::streamsize>(frame.data().size()));
  if (!out) throw ImageError("write failed for " + path.string());
}

#ifdef DISTRAXION_HAVE_PNG

bool png_supported() { return true; }

Frame read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw ImageError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  Frame frame(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, frame.data().data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ImageError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return frame;
}

void write_png(const Frame& frame, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, frame.data().data(), 0, nullptr)) {
    throw ImageError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

#else

bool png_supported() { return false; }

Frame read_png(const std::filesystem::path& path) {
  throw ImageError("PNG support not compiled in; cannot read " + path.string());
}

void write_png(const Frame&, const std::filesystem::path& path) {
  throw ImageError("PNG support not compiled in; cannot write " + path.string());
}

#endif

Frame read_image(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".ppm") return read_ppm(path);
  if (ext == ".png") return read_png(path);
  throw ImageError("unsupported image extension: " + path.string());
}

Frame tile(const std::vector<Frame>& frames, int columns, int gap, Rgb8 fill) {
  if (frames.empty() || columns <= 0) throw ImageError("tile needs at least one frame and column");
  const Size cell = frames.front().size();
  for (const Frame& f : frames) {
    if (f.size() != cell) throw ImageError("tile requires equally sized frames");
  }
  const int cols = std::min<int>(columns, static_cast<int>(frames.size()));
  const int rows = (static_cast<int>(frames.size()) + cols - 1) / cols;
  Frame out(cols * cell.width + (cols - 1) * gap, rows * cell.height + (rows - 1) * gap, fill);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const int ox = static_cast<int>(i % cols) * (cell.width + gap);
    const int oy = static_cast<int>(i / cols) * (cell.height + gap);
    for (int y = 0; y < cell.height; ++y) {
      for (int x = 0; x < cell.width; ++x) out.set(ox + x, oy + y, frames[i].at(x, y));
    }
  }
  return out;
}

}  // namespace distraxion
