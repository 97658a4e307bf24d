#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "distraxion/background.hpp"
#include "distraxion/image.hpp"
#include "distraxion/rng.hpp"

using namespace distraxion;
namespace fs = std::filesystem;

namespace {

Frame pattern(int w, int h, int salt = 0) {
  Frame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      f.set(x, y, {static_cast<std::uint8_t>((x * 7 + salt) % 256), static_cast<std::uint8_t>((y * 13 + salt) % 256),
                   static_cast<std::uint8_t>((x + y + salt) % 256)});
  return f;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("distraxion_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_video(const fs::path& dir, int frames, int w, int h, int salt) {
  fs::create_directories(dir);
  for (int i = 0; i < frames; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%05d.ppm", i);
    write_ppm(pattern(w, h, salt + i), dir / name);
  }
}

}  // namespace

TEST(Frame, Layout) {
  Frame f(4, 3);
  EXPECT_EQ(f.data().size(), 4u * 3u * 3u);
  f.set(2, 1, {1, 2, 3});
  EXPECT_EQ(f.data()[(1 * 4 + 2) * 3 + 1], 2);
  EXPECT_EQ(f.at(2, 1), (Rgb8{1, 2, 3}));
}

TEST(Crop, Identity) {
  const Frame f = pattern(10, 7);
  EXPECT_EQ(crop(f, {0, 0}, f.size()), f);
}

TEST(Crop, CenterCropMatchesSubarray) {
  const Frame f = pattern(100, 100);
  const Frame c = crop(f, {8, 8}, {84, 84});
  EXPECT_EQ(center_crop(f, {84, 84}), c);
  for (int y = 0; y < 84; ++y)
    for (int x = 0; x < 84; ++x) ASSERT_EQ(c.at(x, y), f.at(x + 8, y + 8));
}

TEST(Crop, EnumeratesNineSubwindows) {
  Frame f(4, 4);
  for (int i = 0; i < 16; ++i) f.set(i % 4, i / 4, {static_cast<std::uint8_t>(i), 0, 0});
  std::set<std::vector<std::uint8_t>> windows;
  for (int y = 0; y + 2 <= 4; ++y)
    for (int x = 0; x + 2 <= 4; ++x) windows.insert(crop(f, {x, y}, {2, 2}).data());
  EXPECT_EQ(windows.size(), 9u);
}

TEST(Crop, OutOfBoundsThrows) {
  const Frame f = pattern(10, 10);
  EXPECT_THROW(crop(f, {5, 0}, {6, 6}), ImageError);
  EXPECT_THROW(crop(f, {-1, 0}, {2, 2}), ImageError);
  EXPECT_THROW(crop(f, {0, 0}, {0, 2}), ImageError);
}

TEST(Resize, ConstantStaysConstant) {
  const Frame f(13, 9, {10, 20, 30});
  const Frame r = resize_bilinear(f, {32, 17});
  EXPECT_EQ(r, Frame(32, 17, {10, 20, 30}));
  EXPECT_EQ(resize_bilinear(pattern(8, 8), {8, 8}), pattern(8, 8));
}

TEST(Ppm, RoundTrip) {
  TempDir dir;
  const Frame f = pattern(17, 5);
  write_ppm(f, dir.path() / "a.ppm");
  EXPECT_EQ(read_ppm(dir.path() / "a.ppm"), f);
  EXPECT_EQ(read_image(dir.path() / "a.ppm"), f);
}

TEST(Ppm, RejectsGarbage) {
  TempDir dir;
  std::ofstream(dir.path() / "bad.ppm") << "P6\n4 4\n255\nabc";
  EXPECT_THROW(read_ppm(dir.path() / "bad.ppm"), ImageError);
  std::ofstream(dir.path() / "bad2.ppm") << "P3\n1 1\n255\n0 0 0\n";
  EXPECT_THROW(read_ppm(dir.path() / "bad2.ppm"), ImageError);
}

TEST(Png, RoundTripWhenSupported) {
  if (!png_supported()) GTEST_SKIP() << "built without libpng";
  TempDir dir;
  const Frame f = pattern(9, 11);
  write_png(f, dir.path() / "a.png");
  EXPECT_EQ(read_image(dir.path() / "a.png"), f);
}

TEST(Tile, GridLayout) {
  const Frame a(2, 2, {1, 1, 1}), b(2, 2, {2, 2, 2}), c(2, 2, {3, 3, 3});
  const Frame t = tile({a, b, c}, 2, 1, {9, 9, 9});
  EXPECT_EQ(t.width(), 5);
  EXPECT_EQ(t.height(), 5);
  EXPECT_EQ(t.at(0, 0), (Rgb8{1, 1, 1}));
  EXPECT_EQ(t.at(3, 1), (Rgb8{2, 2, 2}));
  EXPECT_EQ(t.at(1, 4), (Rgb8{3, 3, 3}));
  EXPECT_EQ(t.at(2, 0), (Rgb8{9, 9, 9}));
  EXPECT_EQ(t.at(4, 4), (Rgb8{9, 9, 9}));
}

TEST(Loader, EnumeratesSortedVideos) {
  TempDir dir;
  write_video(dir.path() / "train" / "b", 5, 6, 4, 10);
  write_video(dir.path() / "train" / "a", 3, 6, 4, 0);
  const BackgroundSet set = load_background_set(dir.path(), Split::train);
  ASSERT_EQ(set.size(), 2);
  EXPECT_EQ(set.sequences[0].id, "a");
  EXPECT_EQ(set.sequences[1].id, "b");
  EXPECT_EQ(set.lengths(), (std::vector<int>{3, 5}));
  EXPECT_EQ(set.sequences[1].frames[2], pattern(6, 4, 12));
  EXPECT_EQ(set.first(1).size(), 1);
  EXPECT_EQ(set.first(1).sequences[0].id, "a");
}

TEST(Loader, NumericFrameOrder) {
  TempDir dir;
  const fs::path v = dir.path() / "val" / "clip";
  fs::create_directories(v);
  write_ppm(pattern(4, 4, 2), v / "10.ppm");
  write_ppm(pattern(4, 4, 1), v / "9.ppm");
  const BackgroundSet set = load_background_set(dir.path(), Split::validation);
  ASSERT_EQ(set.sequences[0].length(), 2);
  EXPECT_EQ(set.sequences[0].frames[0], pattern(4, 4, 1));
}

TEST(Loader, ResizesToRenderSize) {
  TempDir dir;
  write_video(dir.path() / "train" / "a", 2, 8, 6, 0);
  const BackgroundSet set = load_background_set(dir.path(), Split::train, Size{5, 5});
  EXPECT_EQ(set.sequences[0].frames[0].size(), (Size{5, 5}));
}

TEST(Loader, MissingDirectory) {
  TempDir dir;
  EXPECT_THROW(load_background_set(dir.path() / "nope", Split::train), LoadError);
}

TEST(Loader, EmptyDirectory) {
  TempDir dir;
  fs::create_directories(dir.path() / "train");
  try {
    load_background_set(dir.path(), Split::train);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("no videos found"), std::string::npos);
  }
}

TEST(Loader, CorruptImageNamesFile) {
  TempDir dir;
  write_video(dir.path() / "train" / "a", 2, 4, 4, 0);
  std::ofstream(dir.path() / "train" / "a" / "00002.ppm") << "not an image";
  try {
    load_background_set(dir.path(), Split::train);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("00002.ppm"), std::string::npos);
  }
}

TEST(Loader, MixedDimensions) {
  TempDir dir;
  const fs::path v = dir.path() / "train" / "a";
  write_video(v, 1, 4, 4, 0);
  write_ppm(pattern(5, 4), v / "00001.ppm");
  EXPECT_THROW(load_background_set(dir.path(), Split::train), LoadError);
}

TEST(Procedural, Deterministic) {
  const BackgroundSet a = procedural_background(2, 4, {64, 64}, 7);
  const BackgroundSet b = procedural_background(2, 4, {64, 64}, 7);
  ASSERT_EQ(a.size(), 2);
  for (int v = 0; v < 2; ++v) {
    ASSERT_EQ(a.sequences[v].length(), 4);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(a.sequences[v].frames[i], b.sequences[v].frames[i]);
  }
}

TEST(Procedural, AnimatedButSmooth) {
  const BackgroundSet set = procedural_background(3, 10, {64, 64}, 7);
  for (const auto& seq : set.sequences) {
    for (int i = 0; i + 1 < seq.length(); ++i) {
      const auto& a = seq.frames[i].data();
      const auto& b = seq.frames[i + 1].data();
      double total = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) total += std::abs(int(a[k]) - int(b[k]));
      const double mean = total / a.size();
      EXPECT_GT(mean, 0.0);
      EXPECT_LT(mean, 25.5);
    }
  }
}

TEST(Procedural, SeedsDiffer) {
  EXPECT_NE(procedural_background(1, 1, {32, 32}, 1).sequences[0].frames[0],
            procedural_background(1, 1, {32, 32}, 2).sequences[0].frames[0]);
}

TEST(Split, Names) {
  EXPECT_EQ(split_directory(Split::train), "train");
  EXPECT_EQ(split_directory(Split::validation), "val");
  EXPECT_EQ(parse_split("val"), Split::validation);
  EXPECT_THROW(parse_split("test"), ConfigError);
}
