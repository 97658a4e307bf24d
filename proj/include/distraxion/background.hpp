#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "distraxion/image.hpp"

namespace distraxion {

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FrameSequence {
  std::string id;
  std::vector<Frame> frames;

  int length() const { return static_cast<int>(frames.size()); }
};

enum class Split { train, validation };

// Directory name of a split: "train" or "val".
std::string split_directory(Split split);
Split parse_split(const std::string& name);

// Immutable after construction; sequences are ordered lexicographically by id.
struct BackgroundSet {
  std::vector<FrameSequence> sequences;
  Split split = Split::train;

  int size() const { return static_cast<int>(sequences.size()); }
  std::vector<int> lengths() const;
  // The lexicographically first `count` sequences.
  BackgroundSet first(int count) const;
};

// Reads `<root>/<split>/<video>/<NNNNN>.ppm` (or .png when supported). Frames
// are ordered by their numeric file stem and optionally resized to
// `resize_to`. Throws LoadError on missing directories, an empty tree,
// undecodable images or mixed frame sizes inside a video.
BackgroundSet load_background_set(const std::filesystem::path& root, Split split,
                                  std::optional<Size> resize_to = std::nullopt);

// Deterministic animated gradient/interference patterns, used when no video
// dataset is available. Same arguments produce bitwise-identical sets.
BackgroundSet procedural_background(int count, int length, Size size, std::uint64_t seed);

}  // namespace distraxion
