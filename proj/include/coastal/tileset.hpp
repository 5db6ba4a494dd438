#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "coastal/io.hpp"
#include "coastal/tiling.hpp"

namespace coastal::io {

inline constexpr const char* kTileManifestHeader = "coastal-tiles v1";
inline constexpr const char* kTileManifestName = "manifest.txt";

inline std::string tile_file_name(std::size_t grid_row, std::size_t grid_col) {
    return "tile_" + std::to_string(grid_row) + "_" + std::to_string(grid_col) + ".png";
}

struct TileManifest {
    std::string kind; // "image" or "labels"
    std::size_t parent_width = 0;
    std::size_t parent_height = 0;
    std::size_t tile_size = 0;
    std::size_t bands = 0;
    GeoTransform geo;
};

namespace detail {

inline void write_manifest(const TileManifest& m, const fs::path& dir) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << kTileManifestHeader << '\n'
        << "kind " << m.kind << '\n'
        << "parent_width " << m.parent_width << '\n'
        << "parent_height " << m.parent_height << '\n'
        << "tile_size " << m.tile_size << '\n'
        << "bands " << m.bands << '\n'
        << "geo " << m.geo.origin_x() << ' ' << m.geo.origin_y() << ' ' << m.geo.pixel_size_x() << ' '
        << m.geo.pixel_size_y() << '\n';
    write_text(out.str(), (dir / kTileManifestName).string());
}

template <typename R>
void write_tiles(const std::vector<Tile<R>>& tiles, const fs::path& dir, TileManifest manifest) {
    if (tiles.empty()) throw InvalidArgument("write_tile_set: no tiles");
    fs::create_directories(dir);
    write_manifest(manifest, dir);
    for (const auto& t : tiles) {
        const std::string path = (dir / tile_file_name(t.grid_row, t.grid_col)).string();
        if constexpr (std::is_same_v<R, ImageRaster>) {
            detail::write_png(t.payload, path);
        } else {
            detail::write_png(ImageRaster(t.payload.width(), t.payload.height(), 1,
                                          std::vector<std::uint8_t>(t.payload.labels().begin(),
                                                                    t.payload.labels().end())),
                              path);
        }
    }
}

} // namespace detail

inline TileManifest read_tile_manifest(const fs::path& dir) {
    const std::string path = (dir / kTileManifestName).string();
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line) || coastal::detail::trim(line) != kTileManifestHeader) {
        throw IoError(path, "not a tile manifest");
    }
    TileManifest m;
    std::string key;
    double ox = 0, oy = 0, px = 0, py = 0;
    bool have_geo = false;
    while (in >> key) {
        if (key == "kind") in >> m.kind;
        else if (key == "parent_width") in >> m.parent_width;
        else if (key == "parent_height") in >> m.parent_height;
        else if (key == "tile_size") in >> m.tile_size;
        else if (key == "bands") in >> m.bands;
        else if (key == "geo") have_geo = static_cast<bool>(in >> ox >> oy >> px >> py);
        else throw IoError(path, "unknown manifest key '" + key + "'");
        if (!in) throw IoError(path, "bad value for '" + key + "'");
    }
    if ((m.kind != "image" && m.kind != "labels") || m.parent_width == 0 || m.parent_height == 0 ||
        m.tile_size == 0 || !have_geo) {
        throw IoError(path, "incomplete tile manifest");
    }
    try {
        m.geo = GeoTransform(ox, oy, px, py);
    } catch (const InvalidArgument& e) {
        throw IoError(path, e.what());
    }
    return m;
}

/// Directory of tile_{row}_{col}.png files plus manifest.txt.
inline void write_tile_set(const std::vector<ImageTile>& tiles, const fs::path& dir, const GeoTransform& parent_geo) {
    const auto& t = tiles.at(0);
    detail::write_tiles(tiles, dir, {"image", t.parent_width, t.parent_height, t.tile_size, t.payload.bands(), parent_geo});
}

inline void write_tile_set(const std::vector<LabelTile>& tiles, const fs::path& dir, const GeoTransform& parent_geo) {
    const auto& t = tiles.at(0);
    detail::write_tiles(tiles, dir, {"labels", t.parent_width, t.parent_height, t.tile_size, 1, parent_geo});
}

namespace detail {

template <typename R>
std::vector<Tile<R>> read_tiles(const fs::path& dir, const TileManifest& m) {
    const std::size_t cols = tile_grid_extent(m.parent_width, m.tile_size);
    const std::size_t rows = tile_grid_extent(m.parent_height, m.tile_size);
    std::vector<Tile<R>> tiles;
    for (std::size_t gr = 0; gr < rows; ++gr) {
        for (std::size_t gc = 0; gc < cols; ++gc) {
            const std::string path = (dir / tile_file_name(gr, gc)).string();
            if (!fs::exists(path)) throw IoError(path, "missing tile (row " + std::to_string(gr) + ", col " + std::to_string(gc) + ")");
            ImageRaster img = read_png(path);
            if (img.width() != m.tile_size || img.height() != m.tile_size) throw IoError(path, "tile has wrong size");
            const PixelIndex origin{gc * m.tile_size, gr * m.tile_size};
            const GeoTransform geo = m.geo.offset(origin.col, origin.row);
            if constexpr (std::is_same_v<R, ImageRaster>) {
                img.set_geo(geo);
                tiles.push_back({gc, gr, origin, m.tile_size, m.parent_width, m.parent_height, std::move(img)});
            } else {
                if (img.bands() != 1) throw IoError(path, "label tiles must be single-channel");
                LabelRaster labels(img.width(), img.height(),
                                   std::vector<ClassId>(img.samples().begin(), img.samples().end()), geo);
                tiles.push_back({gc, gr, origin, m.tile_size, m.parent_width, m.parent_height, std::move(labels)});
            }
        }
    }
    return tiles;
}

} // namespace detail

inline std::vector<ImageTile> read_image_tiles(const fs::path& dir) {
    const TileManifest m = read_tile_manifest(dir);
    if (m.kind != "image") throw IoError(dir.string(), "tile set holds " + m.kind + ", not imagery");
    return detail::read_tiles<ImageRaster>(dir, m);
}

inline std::vector<LabelTile> read_label_tiles(const fs::path& dir) {
    const TileManifest m = read_tile_manifest(dir);
    if (m.kind != "labels") throw IoError(dir.string(), "tile set holds " + m.kind + ", not labels");
    return detail::read_tiles<LabelRaster>(dir, m);
}

} // namespace coastal::io
