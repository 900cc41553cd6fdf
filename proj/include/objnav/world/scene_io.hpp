#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "objnav/world/scene.hpp"

namespace objnav::world {

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where, std::string("missing field '") + key + "'");
  return *it;
}

inline int as_int(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where, "expected an integer");
  return j.get<int>();
}

inline Rect parse_rect(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw ParseError(where, "expected [r0, c0, r1, c1]");
  return Rect{as_int(j[0], where + "[0]"), as_int(j[1], where + "[1]"), as_int(j[2], where + "[2]"),
              as_int(j[3], where + "[3]")};
}

inline nlohmann::json rect_json(const Rect& r) { return nlohmann::json::array({r.r0, r.c0, r.r1, r.c1}); }

}  // namespace detail

inline char cell_char(CellKind k) {
  switch (k) {
    case CellKind::Free: return '.';
    case CellKind::Obstacle: return '#';
    case CellKind::Stair: return 'S';
  }
  return '#';
}

inline Scene scene_from_json(const nlohmann::json& j) {
  using detail::as_int;
  using detail::require;
  if (!j.is_object()) throw ParseError("$", "scene must be a JSON object");
  SceneData d;
  const auto& id = require(j, "id", "$");
  if (!id.is_string()) throw ParseError("id", "expected a string");
  d.id = id.get<std::string>();
  const auto& cs = require(j, "cell_size", "$");
  if (!cs.is_number()) throw ParseError("cell_size", "expected a number");
  d.cell_size = cs.get<double>();
  d.width = as_int(require(j, "width", "$"), "width");
  d.height = as_int(require(j, "height", "$"), "height");

  const auto& floors = require(j, "floors", "$");
  if (!floors.is_array()) throw ParseError("floors", "expected an array of floors");
  for (std::size_t f = 0; f < floors.size(); ++f) {
    const std::string where = "floors[" + std::to_string(f) + "]";
    if (!floors[f].is_array()) throw ParseError(where, "expected an array of row strings");
    if (static_cast<int>(floors[f].size()) != d.height)
      throw InvariantError("floor-dimensions", where + " has " + std::to_string(floors[f].size()) + " rows");
    std::vector<CellKind> grid;
    grid.reserve(static_cast<std::size_t>(d.width) * static_cast<std::size_t>(std::max(d.height, 0)));
    for (std::size_t r = 0; r < floors[f].size(); ++r) {
      const std::string rw = where + "[" + std::to_string(r) + "]";
      if (!floors[f][r].is_string()) throw ParseError(rw, "expected a row string");
      const auto row = floors[f][r].get<std::string>();
      if (static_cast<int>(row.size()) != d.width)
        throw InvariantError("floor-dimensions", rw + " has length " + std::to_string(row.size()));
      for (std::size_t c = 0; c < row.size(); ++c) {
        switch (row[c]) {
          case '.': grid.push_back(CellKind::Free); break;
          case '#': grid.push_back(CellKind::Obstacle); break;
          case 'S': grid.push_back(CellKind::Stair); break;
          default: throw ParseError(rw + "[" + std::to_string(c) + "]", std::string("bad grid character '") + row[c] + "'");
        }
      }
    }
    d.floors.push_back(std::move(grid));
  }

  if (auto it = j.find("objects"); it != j.end()) {
    if (!it->is_array()) throw ParseError("objects", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& o = (*it)[i];
      const std::string where = "objects[" + std::to_string(i) + "]";
      if (!o.is_object()) throw ParseError(where, "expected an object");
      ObjectInstance inst;
      inst.category = as_int(require(o, "category", where), where + ".category");
      inst.floor = as_int(require(o, "floor", where), where + ".floor");
      const auto& cells = require(o, "cells", where);
      if (!cells.is_array()) throw ParseError(where + ".cells", "expected an array of [r, c]");
      for (std::size_t k = 0; k < cells.size(); ++k) {
        const std::string cw = where + ".cells[" + std::to_string(k) + "]";
        if (!cells[k].is_array() || cells[k].size() != 2) throw ParseError(cw, "expected [r, c]");
        inst.cells.push_back(Cell{as_int(cells[k][0], cw), as_int(cells[k][1], cw)});
      }
      d.objects.push_back(std::move(inst));
    }
  }

  if (auto it = j.find("stair_links"); it != j.end()) {
    if (!it->is_array()) throw ParseError("stair_links", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& l = (*it)[i];
      const std::string where = "stair_links[" + std::to_string(i) + "]";
      if (!l.is_object()) throw ParseError(where, "expected an object");
      StairLink link;
      link.floor_a = as_int(require(l, "floor_a", where), where + ".floor_a");
      link.floor_b = as_int(require(l, "floor_b", where), where + ".floor_b");
      link.region_a = detail::parse_rect(require(l, "region_a", where), where + ".region_a");
      link.region_b = detail::parse_rect(require(l, "region_b", where), where + ".region_b");
      d.stair_links.push_back(link);
    }
  }
  return Scene(std::move(d));
}

inline Scene parse_scene(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("line " + std::to_string(detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0)), e.what());
  }
  return scene_from_json(j);
}

inline nlohmann::json scene_to_json(const Scene& scene) {
  const auto& d = scene.data();
  nlohmann::json j;
  j["id"] = d.id;
  j["cell_size"] = d.cell_size;
  j["width"] = d.width;
  j["height"] = d.height;
  j["floors"] = nlohmann::json::array();
  for (const auto& grid : d.floors) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < d.height; ++r) {
      std::string row(static_cast<std::size_t>(d.width), '#');
      for (int c = 0; c < d.width; ++c) row[static_cast<std::size_t>(c)] = cell_char(grid[scene.index({r, c})]);
      rows.push_back(std::move(row));
    }
    j["floors"].push_back(std::move(rows));
  }
  j["objects"] = nlohmann::json::array();
  for (const auto& o : d.objects) {
    nlohmann::json cells = nlohmann::json::array();
    for (const Cell& c : o.cells) cells.push_back({c.row, c.col});
    j["objects"].push_back({{"category", o.category}, {"floor", o.floor}, {"cells", std::move(cells)}});
  }
  j["stair_links"] = nlohmann::json::array();
  for (const auto& l : d.stair_links)
    j["stair_links"].push_back({{"floor_a", l.floor_a},
                                {"region_a", detail::rect_json(l.region_a)},
                                {"floor_b", l.floor_b},
                                {"region_b", detail::rect_json(l.region_b)}});
  return j;
}

// Canonical form: sorted keys, two-space indent, LF endings, trailing newline.
inline std::string serialize_scene(const Scene& scene) { return scene_to_json(scene).dump(2) + "\n"; }

inline Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scene file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scene(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.location(), e.detail());
  }
}

inline void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write scene file " + path.string());
  out << serialize_scene(scene);
  if (!out) throw Error("failed writing scene file " + path.string());
}

}  // namespace objnav::world
