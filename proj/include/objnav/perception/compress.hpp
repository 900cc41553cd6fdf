#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "objnav/perception/semantic_map.hpp"

namespace objnav::perception {

using Color = std::array<std::uint8_t, 3>;

// Cell classes of the compressed map. Category c has class kCategoryClass + c.
inline constexpr std::uint8_t kUnknownClass = 0;
inline constexpr std::uint8_t kFreeClass = 1;
inline constexpr std::uint8_t kObstacleClass = 2;
inline constexpr std::uint8_t kCategoryClass = 3;

struct Palette {
  Color unknown{255, 255, 255};
  Color free{230, 230, 230};
  Color obstacle{90, 90, 90};
  std::vector<Color> categories;

  // Colour of a class index.
  const Color& color(std::uint8_t cls) const {
    if (cls == kUnknownClass) return unknown;
    if (cls == kFreeClass) return free;
    if (cls == kObstacleClass) return obstacle;
    return categories.at(static_cast<std::size_t>(cls - kCategoryClass));
  }

  std::size_t classes() const { return categories.size() + kCategoryClass; }

  void validate(int num_categories) const {
    if (static_cast<int>(categories.size()) < num_categories)
      throw ConfigError("palette-incomplete: palette has " + std::to_string(categories.size()) +
                        " category colours, map needs " + std::to_string(num_categories));
    std::set<Color> seen;
    for (std::size_t i = 0; i < classes(); ++i)
      if (!seen.insert(color(static_cast<std::uint8_t>(i))).second)
        throw ConfigError("palette: colour of class " + std::to_string(i) + " is not unique");
  }
};

inline Palette default_palette(int num_categories) {
  static const Color kBase[] = {
      {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},  {145, 30, 180},
      {70, 240, 240}, {240, 50, 230},  {210, 245, 60}, {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
      {170, 110, 40}, {255, 250, 200}, {128, 0, 0},    {170, 255, 195}, {128, 128, 0},  {255, 215, 180},
      {0, 0, 128},    {128, 128, 128}, {0, 0, 0},      {100, 149, 237}, {255, 99, 71},  {46, 139, 87}};
  Palette p;
  for (int i = 0; i < num_categories; ++i) {
    if (i < static_cast<int>(std::size(kBase))) {
      p.categories.push_back(kBase[i]);
    } else {
      const auto v = static_cast<std::uint32_t>(i) * 2654435761u;
      p.categories.push_back({static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                              static_cast<std::uint8_t>(v >> 8 | 1u)});
    }
  }
  p.validate(num_categories);
  return p;
}

struct CompressedMap {
  int size = 0;
  std::vector<std::uint8_t> classes;  // row-major class index per cell
  Palette palette;

  // 3 x M x M, channel-major.
  std::vector<std::uint8_t> planes() const {
    const std::size_t n = classes.size();
    std::vector<std::uint8_t> out(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const Color& col = palette.color(classes[i]);
      out[i] = col[0];
      out[n + i] = col[1];
      out[2 * n + i] = col[2];
    }
    return out;
  }
};

// Class of one map cell: highest set category, then obstacle, then explored
// free, else unknown.
inline std::uint8_t cell_class(const SemanticMap& map, int r, int c) {
  for (int k = map.categories() - 1; k >= 0; --k)
    if (map.get(kFirstCategory + k, r, c)) return static_cast<std::uint8_t>(kCategoryClass + k);
  if (map.get(kObstacle, r, c)) return kObstacleClass;
  if (map.get(kExplored, r, c)) return kFreeClass;
  return kUnknownClass;
}

inline CompressedMap compress_map(const SemanticMap& map, const Palette& palette) {
  palette.validate(map.categories());
  CompressedMap out;
  out.size = map.size();
  out.palette = palette;
  out.classes.resize(map.plane());
  for (int r = 0; r < map.size(); ++r)
    for (int c = 0; c < map.size(); ++c)
      out.classes[static_cast<std::size_t>(r) * static_cast<std::size_t>(map.size()) + static_cast<std::size_t>(c)] =
          cell_class(map, r, c);
  return out;
}

// Recovers per-cell classes from the colour planes alone.
inline std::vector<std::uint8_t> decompress_classes(const std::vector<std::uint8_t>& planes, int size,
                                                    const Palette& palette) {
  std::map<Color, std::uint8_t> lookup;
  for (std::size_t i = 0; i < palette.classes(); ++i) lookup[palette.color(static_cast<std::uint8_t>(i))] = static_cast<std::uint8_t>(i);
  const std::size_t n = static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  if (planes.size() != 3 * n) throw Error("compressed map has " + std::to_string(planes.size()) + " bytes, expected " + std::to_string(3 * n));
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = lookup.find(Color{planes[i], planes[n + i], planes[2 * n + i]});
    if (it == lookup.end()) throw Error("compressed map cell " + std::to_string(i) + " has a colour outside the palette");
    out[i] = it->second;
  }
  return out;
}

// Run-length encoding of the class sequence (row-major): [class, length] pairs.
inline std::vector<std::pair<std::uint8_t, std::uint32_t>> run_length_encode(const std::vector<std::uint8_t>& classes) {
  std::vector<std::pair<std::uint8_t, std::uint32_t>> runs;
  for (std::uint8_t v : classes) {
    if (!runs.empty() && runs.back().first == v) ++runs.back().second;
    else runs.push_back({v, 1});
  }
  return runs;
}

inline std::vector<std::uint8_t> run_length_decode(const std::vector<std::pair<std::uint8_t, std::uint32_t>>& runs) {
  std::vector<std::uint8_t> out;
  for (const auto& [v, n] : runs) out.insert(out.end(), n, v);
  return out;
}

inline std::string to_ppm(const CompressedMap& cm) {
  std::string out = "P6\n" + std::to_string(cm.size) + " " + std::to_string(cm.size) + "\n255\n";
  out.reserve(out.size() + 3 * cm.classes.size());
  for (std::uint8_t cls : cm.classes) {
    const Color& c = cm.palette.color(cls);
    out.push_back(static_cast<char>(c[0]));
    out.push_back(static_cast<char>(c[1]));
    out.push_back(static_cast<char>(c[2]));
  }
  return out;
}

inline void write_ppm(const CompressedMap& cm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_ppm(cm);
}

}  // namespace objnav::perception
