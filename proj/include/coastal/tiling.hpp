#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "coastal/raster.hpp"

namespace coastal {

inline constexpr std::size_t kDefaultTileSize = 256;

template <typename R>
concept TileableRaster = std::is_same_v<R, ImageRaster> || std::is_same_v<R, LabelRaster>;

/**
 * Fixed-size square piece of a parent raster. Pixels beyond the parent's
 * right or bottom edge are padding: zeros for imagery, the masked id for
 * labels.
 */
template <TileableRaster R>
struct Tile {
    std::size_t grid_col = 0;
    std::size_t grid_row = 0;
    PixelIndex pixel_origin;
    std::size_t tile_size = 0;
    std::size_t parent_width = 0;
    std::size_t parent_height = 0;
    R payload;

    /// Columns/rows of the payload that lie inside the parent raster.
    std::size_t valid_width() const noexcept { return std::min(tile_size, parent_width - pixel_origin.col); }
    std::size_t valid_height() const noexcept { return std::min(tile_size, parent_height - pixel_origin.row); }

    bool is_padding(std::size_t col, std::size_t row) const noexcept {
        return col >= valid_width() || row >= valid_height();
    }

    MaskRaster pad_mask() const {
        MaskRaster m(tile_size, tile_size, false);
        for (std::size_t y = 0; y < valid_height(); ++y) {
            for (std::size_t x = 0; x < valid_width(); ++x) m.set(x, y, true);
        }
        return m;
    }
};

using ImageTile = Tile<ImageRaster>;
using LabelTile = Tile<LabelRaster>;

struct TilePair {
    ImageTile image;
    LabelTile label;
};

inline std::size_t tile_grid_extent(std::size_t pixels, std::size_t tile_size) {
    return (pixels + tile_size - 1) / tile_size;
}

namespace detail {

inline ImageRaster blank_payload(const ImageRaster& parent, std::size_t size, const GeoTransform& geo, ClassId) {
    return ImageRaster(size, size, parent.bands(), geo);
}

inline LabelRaster blank_payload(const LabelRaster&, std::size_t size, const GeoTransform& geo, ClassId fill) {
    return LabelRaster(size, size, fill, geo);
}

inline void copy_pixel(const ImageRaster& src, std::size_t sx, std::size_t sy, ImageRaster& dst, std::size_t dx,
                       std::size_t dy) {
    auto s = src.pixel(sx, sy);
    std::copy(s.begin(), s.end(), dst.pixel(dx, dy).begin());
}

inline void copy_pixel(const LabelRaster& src, std::size_t sx, std::size_t sy, LabelRaster& dst, std::size_t dx,
                       std::size_t dy) {
    dst.at(dx, dy) = src.at(sx, sy);
}

inline std::string grid_name(std::size_t row, std::size_t col) {
    return "(row " + std::to_string(row) + ", col " + std::to_string(col) + ")";
}

} // namespace detail

/**
 * Slices a raster into tile_size x tile_size tiles in row-major order.
 * Label padding uses `label_fill` (normally the scheme's masked id).
 */
template <TileableRaster R>
std::vector<Tile<R>> tile_raster(const R& raster, std::size_t tile_size = kDefaultTileSize,
                                 ClassId label_fill = kDefaultMaskedId) {
    if (tile_size < 1) throw InvalidArgument("tile_raster: tile size must be at least 1");
    if (raster.empty()) throw InvalidArgument("tile_raster: raster is empty");
    const std::size_t cols = tile_grid_extent(raster.width(), tile_size);
    const std::size_t rows = tile_grid_extent(raster.height(), tile_size);
    std::vector<Tile<R>> tiles;
    tiles.reserve(cols * rows);
    for (std::size_t gr = 0; gr < rows; ++gr) {
        for (std::size_t gc = 0; gc < cols; ++gc) {
            const PixelIndex origin{gc * tile_size, gr * tile_size};
            Tile<R> t{gc,
                      gr,
                      origin,
                      tile_size,
                      raster.width(),
                      raster.height(),
                      detail::blank_payload(raster, tile_size, raster.geo().offset(origin.col, origin.row),
                                            label_fill)};
            for (std::size_t y = 0; y < t.valid_height(); ++y) {
                for (std::size_t x = 0; x < t.valid_width(); ++x) {
                    detail::copy_pixel(raster, origin.col + x, origin.row + y, t.payload, x, y);
                }
            }
            tiles.push_back(std::move(t));
        }
    }
    return tiles;
}

/// Matches image and label tiles by grid index; output is row-major.
inline std::vector<TilePair> pair_tiles(const std::vector<ImageTile>& images, const std::vector<LabelTile>& labels) {
    if (images.size() != labels.size()) {
        throw InvalidArgument("pair_tiles: " + std::to_string(images.size()) + " image tiles but " +
                              std::to_string(labels.size()) + " label tiles");
    }
    std::map<std::pair<std::size_t, std::size_t>, const LabelTile*> by_index;
    for (const auto& l : labels) {
        if (!by_index.emplace(std::pair{l.grid_row, l.grid_col}, &l).second) {
            throw InvalidArgument("pair_tiles: duplicate label tile " + detail::grid_name(l.grid_row, l.grid_col));
        }
    }
    std::vector<TilePair> pairs;
    pairs.reserve(images.size());
    for (const auto& img : images) {
        auto it = by_index.find({img.grid_row, img.grid_col});
        if (it == by_index.end()) {
            throw InvalidArgument("pair_tiles: no label tile for " + detail::grid_name(img.grid_row, img.grid_col));
        }
        const LabelTile& lbl = *it->second;
        if (lbl.tile_size != img.tile_size || lbl.parent_width != img.parent_width ||
            lbl.parent_height != img.parent_height || !(lbl.pixel_origin == img.pixel_origin)) {
            throw InvalidArgument("pair_tiles: tiling geometry differs at " +
                                  detail::grid_name(img.grid_row, img.grid_col));
        }
        if (!(lbl.payload.geo() == img.payload.geo())) {
            throw InvalidArgument("pair_tiles: georeferencing differs at " +
                                  detail::grid_name(img.grid_row, img.grid_col));
        }
        pairs.push_back({img, lbl});
    }
    std::sort(pairs.begin(), pairs.end(), [](const TilePair& a, const TilePair& b) {
        return std::pair{a.image.grid_row, a.image.grid_col} < std::pair{b.image.grid_row, b.image.grid_col};
    });
    return pairs;
}

/**
 * Reassembles tiles into a parent_width x parent_height raster. Tiles may
 * arrive in any order but must cover the grid exactly once.
 */
template <TileableRaster R>
R mosaic_tiles(const std::vector<Tile<R>>& tiles, std::size_t parent_width, std::size_t parent_height) {
    if (tiles.empty()) throw InvalidArgument("mosaic_tiles: no tiles");
    const std::size_t tile_size = tiles.front().tile_size;
    if (tile_size == 0 || parent_width == 0 || parent_height == 0) throw InvalidArgument("mosaic_tiles: empty grid");
    const std::size_t cols = tile_grid_extent(parent_width, tile_size);
    const std::size_t rows = tile_grid_extent(parent_height, tile_size);

    std::vector<const Tile<R>*> slots(cols * rows, nullptr);
    for (const auto& t : tiles) {
        if (t.tile_size != tile_size || t.payload.width() != tile_size || t.payload.height() != tile_size) {
            throw InvalidArgument("mosaic_tiles: mixed tile sizes");
        }
        if (t.grid_col >= cols || t.grid_row >= rows || t.pixel_origin.col != t.grid_col * tile_size ||
            t.pixel_origin.row != t.grid_row * tile_size) {
            throw InvalidArgument("mosaic_tiles: tile " + detail::grid_name(t.grid_row, t.grid_col) +
                                  " is out of range");
        }
        auto& slot = slots[t.grid_row * cols + t.grid_col];
        if (slot) throw InvalidArgument("mosaic_tiles: tile " + detail::grid_name(t.grid_row, t.grid_col) + " overlaps");
        slot = &t;
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) throw InvalidArgument("mosaic_tiles: missing tile " + detail::grid_name(i / cols, i % cols));
    }

    const Tile<R>& first = *slots.front();
    R out = [&] {
        if constexpr (std::is_same_v<R, ImageRaster>) {
            return ImageRaster(parent_width, parent_height, first.payload.bands(), first.payload.geo());
        } else {
            return LabelRaster(parent_width, parent_height, ClassId{0}, first.payload.geo());
        }
    }();
    for (const Tile<R>* t : slots) {
        if constexpr (std::is_same_v<R, ImageRaster>) {
            if (t->payload.bands() != out.bands()) throw InvalidArgument("mosaic_tiles: mixed band counts");
        }
        const std::size_t vw = std::min(tile_size, parent_width - t->pixel_origin.col);
        const std::size_t vh = std::min(tile_size, parent_height - t->pixel_origin.row);
        for (std::size_t y = 0; y < vh; ++y) {
            for (std::size_t x = 0; x < vw; ++x) {
                detail::copy_pixel(t->payload, x, y, out, t->pixel_origin.col + x, t->pixel_origin.row + y);
            }
        }
    }
    return out;
}

} // namespace coastal
