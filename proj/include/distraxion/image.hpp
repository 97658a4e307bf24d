#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace distraxion {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Size {
  int width = 0;
  int height = 0;
  friend bool operator==(const Size&, const Size&) = default;
};

struct PixelOffset {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelOffset&, const PixelOffset&) = default;
};

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

// Row-major 8-bit RGB image.
class Frame {
 public:
  static constexpr int kChannels = 3;

  Frame() = default;
  Frame(int width, int height, Rgb8 fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  Size size() const { return {width_, height_}; }
  bool empty() const { return data_.empty(); }

  Rgb8 at(int x, int y) const {
    const std::uint8_t* p = &data_[index(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb8 c) {
    std::uint8_t* p = &data_[index(x, y)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Contiguous sub-window copy. Throws ImageError if the window leaves the frame.
Frame crop(const Frame& frame, PixelOffset offset, Size crop_size);

// Centered crop; offset = ((W - w) / 2, (H - h) / 2).
Frame center_crop(const Frame& frame, Size crop_size);

Frame resize_bilinear(const Frame& frame, Size size);

// Binary PPM (P6, maxval 255).
Frame read_ppm(const std::filesystem::path& path);
void write_ppm(const Frame& frame, const std::filesystem::path& path);

bool png_supported();
Frame read_png(const std::filesystem::path& path);
void write_png(const Frame& frame, const std::filesystem::path& path);

// Dispatches on extension (.ppm, .png).
Frame read_image(const std::filesystem::path& path);

// Tiles equally sized frames into a grid, row-major, with `gap` pixels of `fill`.
Frame tile(const std::vector<Frame>& frames, int columns, int gap = 2, Rgb8 fill = {255, 255, 255});

}  // namespace distraxion
