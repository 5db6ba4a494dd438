#pragma once

#include <cstdint>
#include <limits>
#include <optional>

#include "coastal/parallel.hpp"
#include "coastal/raster.hpp"
#include "coastal/scheme.hpp"

namespace coastal {

inline int squared_distance(Rgb a, Rgb b) noexcept {
    const int dr = int(a.r) - int(b.r);
    const int dg = int(a.g) - int(b.g);
    const int db = int(a.b) - int(b.b);
    return dr * dr + dg * dg + db * db;
}

/// Class whose color is nearest in unweighted RGB; ties go to the lowest id.
inline ClassId nearest_class(const ClassScheme& scheme, Rgb color) noexcept {
    ClassId best = 0;
    int best_d = std::numeric_limits<int>::max();
    for (const auto& c : scheme.classes()) {
        const int d = squared_distance(color, c.color);
        if (d < best_d) {
            best_d = d;
            best = c.id;
        }
    }
    return best;
}

/**
 * Maps a colored classification image back to class ids by nearest palette
 * color. Pixels that are invalid under `mask` or fully transparent become
 * the scheme's masked id.
 */
inline LabelRaster decode_labels(const ImageRaster& image, const ClassScheme& scheme,
                                 const MaskRaster* mask = nullptr, unsigned threads = 1) {
    if (scheme.empty()) throw InvalidArgument("decode_labels: scheme has no classes");
    if (image.empty()) throw InvalidArgument("decode_labels: image is empty");
    if (image.bands() < 3) throw InvalidArgument("decode_labels: image needs at least 3 bands");
    if (mask && !same_grid(*mask, image)) throw InvalidArgument("decode_labels: mask size differs from image");

    LabelRaster out(image.width(), image.height(), scheme.masked_id(), image.geo());
    // Memo of the previous color keeps flat regions cheap.
    parallel_for(image.height(), threads, [&](std::size_t row_begin, std::size_t row_end) {
        std::optional<Rgb> last;
        ClassId last_id = 0;
        for (std::size_t row = row_begin; row < row_end; ++row) {
            for (std::size_t col = 0; col < image.width(); ++col) {
                if ((mask && !mask->valid(col, row)) || !image.opaque(col, row)) continue;
                auto px = image.pixel(col, row);
                const Rgb c{px[0], px[1], px[2]};
                if (!last || !(*last == c)) {
                    last = c;
                    last_id = nearest_class(scheme, c);
                }
                out.at(col, row) = last_id;
            }
        }
    });
    return out;
}

/// Paints each pixel with its class color. Output is always RGBA.
inline ImageRaster encode_labels(const LabelRaster& labels, const ClassScheme& scheme) {
    ImageRaster out(labels.width(), labels.height(), 4, labels.geo());
    const Rgba masked = scheme.mask_color();
    for (std::size_t row = 0; row < labels.height(); ++row) {
        for (std::size_t col = 0; col < labels.width(); ++col) {
            const ClassId id = labels.at(col, row);
            auto px = out.pixel(col, row);
            if (id == scheme.masked_id()) {
                px[0] = masked.r;
                px[1] = masked.g;
                px[2] = masked.b;
                px[3] = masked.a;
            } else if (scheme.contains(id)) {
                const Rgb c = scheme.classes()[id].color;
                px[0] = c.r;
                px[1] = c.g;
                px[2] = c.b;
                px[3] = 255;
            } else {
                throw InvalidArgument("encode_labels: label " + std::to_string(id) + " at (" + std::to_string(col) +
                                      "," + std::to_string(row) + ") is not in the scheme");
            }
        }
    }
    return out;
}

/// Throws unless every label is a scheme class or the masked id.
inline void validate_labels(const LabelRaster& labels, const ClassScheme& scheme) {
    for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
        if (!scheme.valid_label(labels.labels()[i])) {
            throw InvalidArgument("label " + std::to_string(labels.labels()[i]) + " at pixel " + std::to_string(i) +
                                  " is not in the scheme");
        }
    }
}

} // namespace coastal
