#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coastal/labels.hpp"
#include "coastal/parallel.hpp"
#include "coastal/raster.hpp"
#include "coastal/scheme.hpp"
#include "coastal/tiling.hpp"

namespace coastal {

/// R, G, B, then windowed mean of each band, then windowed stddev of each band.
inline constexpr std::size_t kFeatureCount = 9;
inline constexpr std::size_t kDefaultWindow = 9;
/// Lower bound on a per-feature spread, in 8-bit intensity units.
inline constexpr double kSpreadFloor = 1.0;

using FeatureVector = std::array<double, kFeatureCount>;

/**
 * Per-pixel class scores. Column k < classes.size() holds the score of
 * classes[k]; the extra trailing column carries all the mass for pixels
 * that are padding or transparent, so every pixel sums to 1.
 */
struct ScoreMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<ClassId> classes;
    std::vector<double> scores;

    std::size_t columns() const noexcept { return classes.size() + 1; }
    std::span<const double> at(std::size_t col, std::size_t row) const noexcept {
        return {scores.data() + (row * width + col) * columns(), columns()};
    }
    std::span<double> at(std::size_t col, std::size_t row) noexcept {
        return {scores.data() + (row * width + col) * columns(), columns()};
    }
    bool masked(std::size_t col, std::size_t row) const noexcept { return at(col, row).back() > 0.5; }
};

struct ClassCentroid {
    ClassId id = 0;
    FeatureVector centroid{};
    FeatureVector spread{};
    std::uint64_t samples = 0;

    friend bool operator==(const ClassCentroid&, const ClassCentroid&) = default;
};

/// Nearest-centroid classifier over spread-normalized texture features.
struct BaselineModel {
    std::size_t window = kDefaultWindow;
    std::vector<ClassCentroid> classes; // ascending id

    bool trained() const noexcept { return !classes.empty(); }

    friend bool operator==(const BaselineModel&, const BaselineModel&) = default;
};

/// Features of every pixel in an image tile; `valid` marks pixels that are neither padding nor transparent.
struct TileFeatures {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<FeatureVector> features;
    std::vector<std::uint8_t> valid;
};

namespace detail {

inline void check_window(std::size_t window) {
    if (window < 1 || window % 2 == 0) throw InvalidArgument("window must be odd and at least 1");
}

} // namespace detail

/**
 * Windowed moments are taken over valid pixels only, with the window
 * clipped at the tile border. Sums use summed-area tables of integers so
 * results do not depend on traversal order.
 */
inline TileFeatures compute_features(const ImageTile& tile, std::size_t window) {
    detail::check_window(window);
    const ImageRaster& img = tile.payload;
    if (img.bands() < 3) throw InvalidArgument("compute_features: imagery needs RGB bands");
    const std::size_t w = img.width();
    const std::size_t h = img.height();
    const std::size_t stride = w + 1;

    TileFeatures out{w, h, std::vector<FeatureVector>(w * h), std::vector<std::uint8_t>(w * h, 0)};
    std::vector<std::int64_t> count((w + 1) * (h + 1), 0);
    std::array<std::vector<std::int64_t>, 3> sum;
    std::array<std::vector<std::int64_t>, 3> sumsq;
    for (std::size_t b = 0; b < 3; ++b) {
        sum[b].assign((w + 1) * (h + 1), 0);
        sumsq[b].assign((w + 1) * (h + 1), 0);
    }
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const bool v = !tile.is_padding(x, y) && img.opaque(x, y);
            out.valid[y * w + x] = v;
            const std::size_t i = (y + 1) * stride + (x + 1);
            count[i] = count[i - 1] + count[i - stride] - count[i - stride - 1] + (v ? 1 : 0);
            for (std::size_t b = 0; b < 3; ++b) {
                const std::int64_t s = v ? img.at(x, y, b) : 0;
                sum[b][i] = sum[b][i - 1] + sum[b][i - stride] - sum[b][i - stride - 1] + s;
                sumsq[b][i] = sumsq[b][i - 1] + sumsq[b][i - stride] - sumsq[b][i - stride - 1] + s * s;
            }
        }
    }
    auto box = [&](const std::vector<std::int64_t>& t, std::size_t x0, std::size_t y0, std::size_t x1,
                   std::size_t y1) { return t[y1 * stride + x1] - t[y0 * stride + x1] - t[y1 * stride + x0] + t[y0 * stride + x0]; };

    const std::size_t r = window / 2;
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t y0 = y >= r ? y - r : 0;
        const std::size_t y1 = std::min(h, y + r + 1);
        for (std::size_t x = 0; x < w; ++x) {
            if (!out.valid[y * w + x]) continue;
            const std::size_t x0 = x >= r ? x - r : 0;
            const std::size_t x1 = std::min(w, x + r + 1);
            const std::int64_t n = box(count, x0, y0, x1, y1);
            FeatureVector& f = out.features[y * w + x];
            for (std::size_t b = 0; b < 3; ++b) {
                const std::int64_t s = box(sum[b], x0, y0, x1, y1);
                const std::int64_t q = box(sumsq[b], x0, y0, x1, y1);
                f[b] = img.at(x, y, b);
                f[3 + b] = static_cast<double>(s) / static_cast<double>(n);
                const std::int64_t var_n2 = q * n - s * s; // n^2 * population variance
                f[6 + b] = std::sqrt(static_cast<double>(std::max<std::int64_t>(var_n2, 0))) / static_cast<double>(n);
            }
        }
    }
    return out;
}

/**
 * Estimates per-class feature centroids and spreads from paired tiles.
 * Padding, transparent pixels and masked labels are ignored.
 */
inline BaselineModel train_baseline(const std::vector<TilePair>& pairs, std::size_t window = kDefaultWindow,
                                    ClassId masked_id = kDefaultMaskedId) {
    detail::check_window(window);
    if (pairs.empty()) throw InvalidArgument("train_baseline: no training tiles");

    struct Moments {
        std::uint64_t n = 0;
        std::array<long double, kFeatureCount> sum{};
        std::array<long double, kFeatureCount> sumsq{};
    };
    std::array<Moments, 256> acc{};
    for (const auto& pair : pairs) {
        if (!same_grid(pair.image.payload, pair.label.payload)) throw InvalidArgument("train_baseline: tile size mismatch");
        const TileFeatures tf = compute_features(pair.image, window);
        for (std::size_t y = 0; y < tf.height; ++y) {
            for (std::size_t x = 0; x < tf.width; ++x) {
                const ClassId label = pair.label.payload.at(x, y);
                if (label == masked_id || !tf.valid[y * tf.width + x] || pair.label.is_padding(x, y)) continue;
                Moments& m = acc[label];
                ++m.n;
                const FeatureVector& f = tf.features[y * tf.width + x];
                for (std::size_t k = 0; k < kFeatureCount; ++k) {
                    m.sum[k] += f[k];
                    m.sumsq[k] += static_cast<long double>(f[k]) * f[k];
                }
            }
        }
    }
    BaselineModel model;
    model.window = window;
    for (std::size_t id = 0; id < acc.size(); ++id) {
        const Moments& m = acc[id];
        if (m.n == 0) continue;
        ClassCentroid c;
        c.id = static_cast<ClassId>(id);
        c.samples = m.n;
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            const long double mean = m.sum[k] / m.n;
            const long double var = std::max<long double>(0.0L, m.sumsq[k] / m.n - mean * mean);
            c.centroid[k] = static_cast<double>(mean);
            c.spread[k] = std::max(kSpreadFloor, static_cast<double>(std::sqrt(var)));
        }
        model.classes.push_back(c);
    }
    if (model.classes.empty()) throw InvalidArgument("train_baseline: no usable labeled pixels");
    return model;
}

/// Sum of squared spread-normalized feature differences.
inline double normalized_distance(const FeatureVector& f, const ClassCentroid& c) noexcept {
    double d = 0.0;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        const double z = (f[k] - c.centroid[k]) / c.spread[k];
        d += z * z;
    }
    return d;
}

/// Softmax over -d/2 of the normalized distance to each class centroid.
inline ScoreMap predict_tile(const BaselineModel& model, const ImageTile& tile) {
    if (!model.trained()) throw InvalidArgument("predict_tile: model is not trained");
    const TileFeatures tf = compute_features(tile, model.window);
    ScoreMap sm;
    sm.width = tf.width;
    sm.height = tf.height;
    for (const auto& c : model.classes) sm.classes.push_back(c.id);
    const std::size_t k = model.classes.size();
    sm.scores.assign(tf.width * tf.height * sm.columns(), 0.0);
    std::vector<double> dist(k);
    for (std::size_t y = 0; y < tf.height; ++y) {
        for (std::size_t x = 0; x < tf.width; ++x) {
            auto s = sm.at(x, y);
            if (!tf.valid[y * tf.width + x]) {
                s[k] = 1.0;
                continue;
            }
            const FeatureVector& f = tf.features[y * tf.width + x];
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                dist[c] = normalized_distance(f, model.classes[c]);
                best = std::min(best, dist[c]);
            }
            double total = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                s[c] = std::exp(-0.5 * (dist[c] - best));
                total += s[c];
            }
            for (std::size_t c = 0; c < k; ++c) s[c] /= total;
        }
    }
    return sm;
}

/**
 * Argmax labeling with ties to the lowest class id. Pixels whose best
 * score is below `confidence_floor` go to the scheme's not-classified class.
 */
inline LabelRaster scores_to_labels(const ScoreMap& scores, const ClassScheme& scheme, double confidence_floor = 0.0) {
    if (!(confidence_floor >= 0.0 && confidence_floor < 1.0)) {
        throw InvalidArgument("scores_to_labels: confidence floor must be in [0,1)");
    }
    if (scores.classes.empty() || scores.classes.size() > scheme.size()) {
        throw InvalidArgument("scores_to_labels: score map has " + std::to_string(scores.classes.size()) +
                              " classes but scheme has " + std::to_string(scheme.size()));
    }
    for (std::size_t i = 0; i < scores.classes.size(); ++i) {
        if (!scheme.contains(scores.classes[i])) {
            throw InvalidArgument("scores_to_labels: score class " + std::to_string(scores.classes[i]) +
                                  " is not in the scheme");
        }
        if (i > 0 && scores.classes[i] <= scores.classes[i - 1]) {
            throw InvalidArgument("scores_to_labels: score classes must be ascending");
        }
    }
    if (scores.scores.size() != scores.width * scores.height * scores.columns()) {
        throw InvalidArgument("scores_to_labels: score buffer size does not match classes");
    }
    std::optional<ClassId> unclassified = scheme.unclassified_id();
    if (confidence_floor > 0.0 && !unclassified) {
        throw InvalidArgument("scores_to_labels: a confidence floor needs a not_classified class in the scheme");
    }

    LabelRaster out(scores.width, scores.height, scheme.masked_id());
    const std::size_t k = scores.classes.size();
    for (std::size_t y = 0; y < scores.height; ++y) {
        for (std::size_t x = 0; x < scores.width; ++x) {
            if (scores.masked(x, y)) continue;
            auto s = scores.at(x, y);
            std::size_t best = 0;
            for (std::size_t c = 1; c < k; ++c) {
                if (s[c] > s[best]) best = c;
            }
            out.at(x, y) = s[best] < confidence_floor ? *unclassified : scores.classes[best];
        }
    }
    return out;
}

struct ClassifyOptions {
    std::size_t tile_size = kDefaultTileSize;
    double confidence_floor = 0.0;
    unsigned threads = 1;
};

/// Tiles the image, scores each tile, labels it and mosaics the result.
inline LabelRaster classify_raster(const BaselineModel& model, const ImageRaster& image, const ClassScheme& scheme,
                                   const MaskRaster* mask = nullptr, const ClassifyOptions& options = {}) {
    if (!model.trained()) throw InvalidArgument("classify_raster: model is not trained");
    if (mask && !same_grid(*mask, image)) throw InvalidArgument("classify_raster: mask size differs from image");
    const auto tiles = tile_raster(image, options.tile_size);
    std::vector<LabelTile> labeled(tiles.size());
    parallel_for(tiles.size(), options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const ImageTile& t = tiles[i];
            LabelRaster payload = scores_to_labels(predict_tile(model, t), scheme, options.confidence_floor);
            payload.set_geo(t.payload.geo());
            labeled[i] = LabelTile{t.grid_col, t.grid_row, t.pixel_origin, t.tile_size,
                                   t.parent_width, t.parent_height, std::move(payload)};
        }
    });
    LabelRaster out = mosaic_tiles(labeled, image.width(), image.height());
    if (mask) {
        for (std::size_t y = 0; y < out.height(); ++y) {
            for (std::size_t x = 0; x < out.width(); ++x) {
                if (!mask->valid(x, y)) out.at(x, y) = scheme.masked_id();
            }
        }
    }
    return out;
}

/**
 * Replaces each unmasked pixel by the most frequent class among unmasked
 * pixels of its (2r+1)^2 window. A tie for the top count keeps the pixel's
 * own label.
 */
inline LabelRaster majority_filter(const LabelRaster& labels, ClassId masked_id = kDefaultMaskedId,
                                   std::size_t radius = 1, std::size_t iterations = 1, unsigned threads = 1) {
    if (radius < 1) throw InvalidArgument("majority_filter: radius must be at least 1");
    LabelRaster current = labels;
    const std::size_t w = labels.width();
    const std::size_t h = labels.height();
    for (std::size_t it = 0; it < iterations; ++it) {
        LabelRaster next = current;
        parallel_for(h, threads, [&](std::size_t row_begin, std::size_t row_end) {
            std::array<std::uint32_t, 256> counts{};
            std::vector<ClassId> seen;
            for (std::size_t y = row_begin; y < row_end; ++y) {
                const std::size_t y0 = y >= radius ? y - radius : 0;
                const std::size_t y1 = std::min(h, y + radius + 1);
                for (std::size_t x = 0; x < w; ++x) {
                    const ClassId own = current.at(x, y);
                    if (own == masked_id) continue;
                    const std::size_t x0 = x >= radius ? x - radius : 0;
                    const std::size_t x1 = std::min(w, x + radius + 1);
                    seen.clear();
                    for (std::size_t yy = y0; yy < y1; ++yy) {
                        for (std::size_t xx = x0; xx < x1; ++xx) {
                            const ClassId l = current.at(xx, yy);
                            if (l == masked_id) continue;
                            if (counts[l]++ == 0) seen.push_back(l);
                        }
                    }
                    std::uint32_t best = 0;
                    std::size_t winners = 0;
                    ClassId mode = own;
                    for (ClassId l : seen) {
                        if (counts[l] > best) {
                            best = counts[l];
                            winners = 1;
                            mode = l;
                        } else if (counts[l] == best) {
                            ++winners;
                        }
                    }
                    next.at(x, y) = winners == 1 ? mode : own;
                    for (ClassId l : seen) counts[l] = 0;
                }
            }
        });
        current = std::move(next);
    }
    return current;
}

inline constexpr const char* kModelHeader = "baseline-model v1";

/// Plain-text model: header, window, class count, then one class per line.
inline void write_model(const BaselineModel& model, std::ostream& out) {
    out << kModelHeader << '\n';
    out << "window " << model.window << '\n';
    out << "classes " << model.classes.size() << '\n';
    out << std::setprecision(17);
    for (const auto& c : model.classes) {
        out << int(c.id) << ' ' << c.samples;
        for (double v : c.centroid) out << ' ' << v;
        for (double v : c.spread) out << ' ' << v;
        out << '\n';
    }
}

inline std::string format_model(const BaselineModel& model) {
    std::ostringstream out;
    write_model(model, out);
    return out.str();
}

inline BaselineModel parse_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kModelHeader) {
        throw InvalidArgument("model: expected header '" + std::string(kModelHeader) + "'");
    }
    BaselineModel model;
    std::string key;
    std::size_t n = 0;
    if (!(in >> key >> model.window) || key != "window") throw InvalidArgument("model: missing window");
    detail::check_window(model.window);
    if (!(in >> key >> n) || key != "classes" || n == 0) throw InvalidArgument("model: missing class count");
    for (std::size_t i = 0; i < n; ++i) {
        ClassCentroid c;
        int id = -1;
        if (!(in >> id >> c.samples) || id < 0 || id > 254) throw InvalidArgument("model: bad class line");
        c.id = static_cast<ClassId>(id);
        for (double& v : c.centroid) {
            if (!(in >> v)) throw InvalidArgument("model: truncated centroid");
        }
        for (double& v : c.spread) {
            if (!(in >> v) || !(v > 0.0)) throw InvalidArgument("model: spreads must be positive");
        }
        if (!model.classes.empty() && c.id <= model.classes.back().id) {
            throw InvalidArgument("model: class ids must be ascending");
        }
        model.classes.push_back(c);
    }
    return model;
}

} // namespace coastal
