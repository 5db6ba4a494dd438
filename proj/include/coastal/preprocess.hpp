#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include "coastal/parallel.hpp"
#include "coastal/raster.hpp"

namespace coastal {

namespace detail {

// ceil(extent / resolution), ignoring floating-point dust just above an integer.
inline std::size_t resampled_extent(std::size_t pixels, double pixel_size, double target) {
    const double exact = static_cast<double>(pixels) * pixel_size / target;
    const double n = std::ceil(exact - 1e-9 * std::max(1.0, exact));
    return static_cast<std::size_t>(std::max(1.0, n));
}

inline void check_resolution(double target) {
    if (!(target > 0.0) || !std::isfinite(target)) {
        throw InvalidArgument("resample: target resolution must be positive");
    }
}

inline std::size_t nearest_source(std::size_t out, double scale, std::size_t limit) {
    const double s = std::floor((static_cast<double>(out) + 0.5) * scale);
    return std::min(static_cast<std::size_t>(std::max(0.0, s)), limit - 1);
}

} // namespace detail

/**
 * Resamples imagery to `target` metres per pixel, keeping the origin.
 * Color bands are interpolated bilinearly; the alpha band is taken from the
 * nearest source pixel so transparent borders stay crisp.
 */
inline ImageRaster resample(const ImageRaster& img, double target, unsigned threads = 1) {
    detail::check_resolution(target);
    if (img.empty()) throw InvalidArgument("resample: image is empty");
    const auto& geo = img.geo();
    if (geo.pixel_size_x() == target && geo.pixel_size_y() == target) return img;

    const std::size_t out_w = detail::resampled_extent(img.width(), geo.pixel_size_x(), target);
    const std::size_t out_h = detail::resampled_extent(img.height(), geo.pixel_size_y(), target);
    const double sx = target / geo.pixel_size_x();
    const double sy = target / geo.pixel_size_y();
    const std::size_t color_bands = img.has_alpha() ? 3 : img.bands();
    ImageRaster out(out_w, out_h, img.bands(), geo.with_pixel_size(target, target));

    parallel_for(out_h, threads, [&](std::size_t row_begin, std::size_t row_end) {
        for (std::size_t row = row_begin; row < row_end; ++row) {
            const double fy = std::clamp((static_cast<double>(row) + 0.5) * sy - 0.5, 0.0,
                                         static_cast<double>(img.height() - 1));
            const auto y0 = static_cast<std::size_t>(fy);
            const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
            const double wy = fy - static_cast<double>(y0);
            for (std::size_t col = 0; col < out_w; ++col) {
                const double fx = std::clamp((static_cast<double>(col) + 0.5) * sx - 0.5, 0.0,
                                             static_cast<double>(img.width() - 1));
                const auto x0 = static_cast<std::size_t>(fx);
                const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
                const double wx = fx - static_cast<double>(x0);
                for (std::size_t b = 0; b < color_bands; ++b) {
                    const double top = img.at(x0, y0, b) * (1.0 - wx) + img.at(x1, y0, b) * wx;
                    const double bottom = img.at(x0, y1, b) * (1.0 - wx) + img.at(x1, y1, b) * wx;
                    const double v = top * (1.0 - wy) + bottom * wy;
                    out.at(col, row, b) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
                }
                if (img.has_alpha()) {
                    out.at(col, row, 3) = img.at(detail::nearest_source(col, sx, img.width()),
                                                 detail::nearest_source(row, sy, img.height()), 3);
                }
            }
        }
    });
    return out;
}

/// Nearest-neighbor resampling; the output label set is a subset of the input's.
inline LabelRaster resample(const LabelRaster& labels, double target) {
    detail::check_resolution(target);
    if (labels.empty()) throw InvalidArgument("resample: label raster is empty");
    const auto& geo = labels.geo();
    if (geo.pixel_size_x() == target && geo.pixel_size_y() == target) return labels;

    const std::size_t out_w = detail::resampled_extent(labels.width(), geo.pixel_size_x(), target);
    const std::size_t out_h = detail::resampled_extent(labels.height(), geo.pixel_size_y(), target);
    const double sx = target / geo.pixel_size_x();
    const double sy = target / geo.pixel_size_y();
    LabelRaster out(out_w, out_h, ClassId{0}, geo.with_pixel_size(target, target));
    for (std::size_t row = 0; row < out_h; ++row) {
        const std::size_t src_row = detail::nearest_source(row, sy, labels.height());
        for (std::size_t col = 0; col < out_w; ++col) {
            out.at(col, row) = labels.at(detail::nearest_source(col, sx, labels.width()), src_row);
        }
    }
    return out;
}

/**
 * Validity mask: a pixel is invalid when its alpha is 0 or its RGB equals
 * `nodata`.
 */
inline MaskRaster build_mask(const ImageRaster& img, std::optional<Rgb> nodata = std::nullopt) {
    MaskRaster mask(img.width(), img.height());
    for (std::size_t row = 0; row < img.height(); ++row) {
        for (std::size_t col = 0; col < img.width(); ++col) {
            bool valid = img.opaque(col, row);
            if (valid && nodata && img.bands() >= 3) {
                auto px = img.pixel(col, row);
                valid = !(px[0] == nodata->r && px[1] == nodata->g && px[2] == nodata->b);
            } else if (valid && nodata && img.bands() == 1) {
                valid = img.at(col, row, 0) != nodata->r;
            }
            mask.set(col, row, valid);
        }
    }
    return mask;
}

using LevelLookup = std::array<std::uint8_t, 256>;
using LevelHistogram = std::array<std::uint64_t, 256>;

/// Histogram of one band over valid pixels.
inline LevelHistogram band_histogram(const ImageRaster& img, std::size_t band, const MaskRaster& mask) {
    LevelHistogram hist{};
    for (std::size_t row = 0; row < img.height(); ++row) {
        for (std::size_t col = 0; col < img.width(); ++col) {
            if (mask.valid(col, row)) ++hist[img.at(col, row, band)];
        }
    }
    return hist;
}

/**
 * Monotone lookup that carries the source distribution onto the reference
 * one: each source level maps to the lowest reference level whose CDF
 * reaches the source level's CDF. Comparisons are done on integer counts.
 */
inline LevelLookup histogram_lookup(const LevelHistogram& source, const LevelHistogram& reference) {
    std::uint64_t src_total = 0;
    std::uint64_t ref_total = 0;
    for (auto c : source) src_total += c;
    for (auto c : reference) ref_total += c;
    if (ref_total == 0) throw InvalidArgument("match_color_levels: reference has no valid pixels");

    LevelLookup lut{};
    if (src_total == 0) {
        for (std::size_t v = 0; v < 256; ++v) lut[v] = static_cast<std::uint8_t>(v);
        return lut;
    }
    std::uint64_t src_cum = 0;
    std::uint64_t ref_cum = reference[0];
    std::size_t r = 0;
    for (std::size_t v = 0; v < 256; ++v) {
        src_cum += source[v];
        // src_cum/src_total <= ref_cum/ref_total without division.
        while (r < 255 && static_cast<unsigned __int128>(ref_cum) * src_total <
                              static_cast<unsigned __int128>(src_cum) * ref_total) {
            ++r;
            ref_cum += reference[r];
        }
        lut[v] = static_cast<std::uint8_t>(r);
    }
    return lut;
}

struct ColorMatch {
    ImageRaster image;
    std::vector<LevelLookup> lookups; // one per color band
};

/**
 * Per-band histogram matching of `source` onto `reference`. Histograms are
 * built from valid pixels only (alpha and optional masks); invalid source
 * pixels are copied unchanged.
 */
inline ColorMatch match_color_levels_with_lookups(const ImageRaster& source, const ImageRaster& reference,
                                                  const MaskRaster* source_mask = nullptr,
                                                  const MaskRaster* reference_mask = nullptr) {
    if (source.bands() != reference.bands()) throw InvalidArgument("match_color_levels: band counts differ");
    if (source_mask && !same_grid(*source_mask, source)) throw InvalidArgument("match_color_levels: source mask size");
    if (reference_mask && !same_grid(*reference_mask, reference)) {
        throw InvalidArgument("match_color_levels: reference mask size");
    }
    auto combine = [](const ImageRaster& img, const MaskRaster* extra) {
        MaskRaster m = build_mask(img);
        if (extra) {
            for (std::size_t row = 0; row < img.height(); ++row) {
                for (std::size_t col = 0; col < img.width(); ++col) {
                    if (!extra->valid(col, row)) m.set(col, row, false);
                }
            }
        }
        return m;
    };
    const MaskRaster src_valid = combine(source, source_mask);
    const MaskRaster ref_valid = combine(reference, reference_mask);
    if (ref_valid.valid_count() == 0) throw InvalidArgument("match_color_levels: reference has no valid pixels");

    const std::size_t color_bands = source.has_alpha() ? 3 : source.bands();
    ColorMatch result{source, {}};
    for (std::size_t b = 0; b < color_bands; ++b) {
        result.lookups.push_back(
            histogram_lookup(band_histogram(source, b, src_valid), band_histogram(reference, b, ref_valid)));
    }
    for (std::size_t row = 0; row < source.height(); ++row) {
        for (std::size_t col = 0; col < source.width(); ++col) {
            if (!src_valid.valid(col, row)) continue;
            for (std::size_t b = 0; b < color_bands; ++b) {
                result.image.at(col, row, b) = result.lookups[b][source.at(col, row, b)];
            }
        }
    }
    return result;
}

inline ImageRaster match_color_levels(const ImageRaster& source, const ImageRaster& reference,
                                      const MaskRaster* source_mask = nullptr,
                                      const MaskRaster* reference_mask = nullptr) {
    return match_color_levels_with_lookups(source, reference, source_mask, reference_mask).image;
}

} // namespace coastal
