#include "distraxion/background.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "distraxion/rng.hpp"

namespace fs = std::filesystem;

namespace distraxion {

std::string split_directory(Split split) { return split == Split::train ? "train" : "val"; }

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val" || name == "validation") return Split::validation;
  throw ConfigError("unknown split '" + name + "' (expected train or val)");
}

std::vector<int> BackgroundSet::lengths() const {
  std::vector<int> out;
  out.reserve(sequences.size());
  for (const auto& s : sequences) out.push_back(s.length());
  return out;
}

BackgroundSet BackgroundSet::first(int count) const {
  if (count < 0 || count > size()) {
    throw ConfigError("cannot select " + std::to_string(count) + " of " + std::to_string(size()) + " videos");
  }
  BackgroundSet out;
  out.split = split;
  out.sequences.assign(sequences.begin(), sequences.begin() + count);
  return out;
}

namespace {

bool is_frame_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".ppm" || (ext == ".png" && png_supported());
}

long frame_number(const fs::path& p) {
  const std::string stem = p.stem().string();
  if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw LoadError("frame file name is not numeric: " + p.string());
  }
  return std::stol(stem);
}

FrameSequence load_sequence(const fs::path& dir, const std::optional<Size>& resize_to) {
  std::vector<std::pair<long, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_frame_file(entry.path())) {
      files.emplace_back(frame_number(entry.path()), entry.path());
    }
  }
  if (files.empty()) throw LoadError("video directory has no frames: " + dir.string());
  std::sort(files.begin(), files.end());

  FrameSequence seq;
  seq.id = dir.filename().string();
  std::optional<Size> native;
  for (const auto& [number, path] : files) {
    Frame frame;
    try {
      frame = read_image(path);
    } catch (const ImageError& e) {
      throw LoadError(std::string("unreadable frame ") + path.string() + ": " + e.what());
    }
    if (native && frame.size() != *native) {
      throw LoadError("mixed frame dimensions in video " + seq.id + " at " + path.string());
    }
    native = frame.size();
    seq.frames.push_back(resize_to ? resize_bilinear(frame, *resize_to) : std::move(frame));
  }
  return seq;
}

}  // namespace

BackgroundSet load_background_set(const fs::path& root, Split split, std::optional<Size> resize_to) {
  const fs::path dir = root / split_directory(split);
  if (!fs::is_directory(dir)) throw LoadError("background directory not found: " + dir.string());
  std::vector<fs::path> videos;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) videos.push_back(entry.path());
  }
  if (videos.empty()) throw LoadError("no videos found in " + dir.string());
  std::sort(videos.begin(), videos.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  BackgroundSet set;
  set.split = split;
  for (const fs::path& v : videos) set.sequences.push_back(load_sequence(v, resize_to));
  return set;
}

BackgroundSet procedural_background(int count, int length, Size size, std::uint64_t seed) {
  if (count < 1 || length < 1 || size.width < 1 || size.height < 1) {
    throw ConfigError("procedural_background needs count, length and size >= 1");
  }
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  BackgroundSet set;
  set.split = Split::train;
  for (int v = 0; v < count; ++v) {
    Rng rng(derive_seed(seed, "procedural-video-" + std::to_string(v)));
    struct Wave {
      double kx, ky, speed, phase;
    };
    std::array<Wave, 3> waves{};
    for (Wave& w : waves) {
      const double angle = uniform(rng, 0.0, kTwoPi);
      const double freq = uniform(rng, 1.0, 4.0) * kTwoPi;
      const double speed = (uniform_int(rng, 0, 1) == 0 ? -1.0 : 1.0) * uniform(rng, 0.04, 0.12);
      w = {freq * std::cos(angle), freq * std::sin(angle), speed, uniform(rng, 0.0, kTwoPi)};
    }
    // Two contrasting colors: every channel differs by at least 0.3.
    std::array<Eigen::Vector3d, 2> palette;
    for (int ch = 0; ch < 3; ++ch) {
      palette[0][ch] = uniform(rng, 0.0, 1.0);
      palette[1][ch] = std::fmod(palette[0][ch] + 0.5 + uniform(rng, -0.2, 0.2), 1.0);
    }

    FrameSequence seq;
    char id[32];
    std::snprintf(id, sizeof(id), "procedural_%03d", v);
    seq.id = id;
    for (int t = 0; t < length; ++t) {
      Frame frame(size.width, size.height);
      for (int y = 0; y < size.height; ++y) {
        const double fy = (y + 0.5) / size.height;
        for (int x = 0; x < size.width; ++x) {
          const double fx = (x + 0.5) / size.width;
          double s = 0.0;
          for (const Wave& w : waves) s += std::sin(w.kx * fx + w.ky * fy + w.speed * t + w.phase);
          const double mix = 0.5 + s / 6.0;  // in [0, 1]
          const Eigen::Vector3d c = (1.0 - mix) * palette[0] + mix * palette[1];
          auto q = [](double val) { return static_cast<std::uint8_t>(std::lround(std::clamp(val, 0.0, 1.0) * 255.0)); };
          frame.set(x, y, {q(c[0]), q(c[1]), q(c[2])});
        }
      }
      seq.frames.push_back(std::move(frame));
    }
    set.sequences.push_back(std::move(seq));
  }
  return set;
}

}  // namespace distraxion
