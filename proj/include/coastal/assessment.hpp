#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "coastal/parallel.hpp"
#include "coastal/raster.hpp"
#include "coastal/scheme.hpp"

namespace coastal {

/// Distinct valid pixels drawn without replacement, sorted row-major.
struct PointSample {
    std::vector<PixelIndex> points;
    std::uint64_t seed = 0;
    std::size_t n_requested = 0;
};

namespace detail {

// Unbiased draw from [0, bound] on the raw 64-bit Mersenne Twister output,
// which is fully specified by the standard (unlike its distributions).
inline std::uint64_t uniform_below_or_equal(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == UINT64_MAX) return rng();
    const std::uint64_t range = bound + 1;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % range;
}

} // namespace detail

/**
 * Uniform random sample of `n` distinct valid pixels (Floyd's algorithm).
 * Identical seed, mask and n always give identical points.
 */
inline PointSample sample_points(const MaskRaster& mask, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample_points: n must be at least 1");
    std::vector<std::size_t> valid;
    valid.reserve(mask.pixel_count());
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
        if (mask.flags()[i]) valid.push_back(i);
    }
    if (n > valid.size()) {
        throw InvalidArgument("sample_points: requested " + std::to_string(n) + " points but only " +
                              std::to_string(valid.size()) + " valid pixels");
    }
    std::mt19937_64 rng(seed);
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(n * 2);
    const std::size_t total = valid.size();
    for (std::size_t j = total - n; j < total; ++j) {
        const auto t = static_cast<std::size_t>(detail::uniform_below_or_equal(rng, j));
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::size_t> picked(chosen.begin(), chosen.end());
    std::sort(picked.begin(), picked.end());
    PointSample sample{{}, seed, n};
    sample.points.reserve(n);
    for (std::size_t k : picked) sample.points.push_back({valid[k] % mask.width(), valid[k] / mask.width()});
    return sample;
}

/**
 * Reference-by-predicted count matrix. Rows are reference classes, columns
 * predicted classes, both in the order of `ids`.
 */
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;

    ConfusionMatrix(std::vector<ClassId> ids, std::vector<std::string> names)
        : ids_(std::move(ids)), names_(std::move(names)), counts_(ids_.size() * ids_.size(), 0) {
        if (ids_.size() != names_.size()) throw InvalidArgument("ConfusionMatrix: ids and names differ in length");
    }

    static ConfusionMatrix for_scheme(const ClassScheme& scheme) {
        std::vector<ClassId> ids;
        std::vector<std::string> names;
        for (const auto& c : scheme.classes()) {
            ids.push_back(c.id);
            names.push_back(c.name);
        }
        return {std::move(ids), std::move(names)};
    }

    /// Square matrix from explicit rows; class i gets id i and name "class_i".
    static ConfusionMatrix from_rows(const std::vector<std::vector<std::uint64_t>>& rows) {
        std::vector<ClassId> ids;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) throw InvalidArgument("ConfusionMatrix: rows must be square");
            ids.push_back(static_cast<ClassId>(i));
            names.push_back("class_" + std::to_string(i));
        }
        ConfusionMatrix cm(std::move(ids), std::move(names));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t p = 0; p < rows.size(); ++p) cm.counts_[r * rows.size() + p] = rows[r][p];
        }
        return cm;
    }

    std::size_t size() const noexcept { return ids_.size(); }
    const std::vector<ClassId>& ids() const noexcept { return ids_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

    std::uint64_t count(std::size_t ref, std::size_t pred) const noexcept { return counts_[ref * size() + pred]; }
    std::uint64_t& count(std::size_t ref, std::size_t pred) noexcept { return counts_[ref * size() + pred]; }

    std::optional<std::size_t> index_of(ClassId id) const noexcept {
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (ids_[i] == id) return i;
        }
        return std::nullopt;
    }

    std::uint64_t total() const noexcept {
        std::uint64_t t = 0;
        for (auto c : counts_) t += c;
        return t;
    }
    std::uint64_t diagonal() const noexcept {
        std::uint64_t d = 0;
        for (std::size_t i = 0; i < size(); ++i) d += count(i, i);
        return d;
    }
    std::uint64_t row_total(std::size_t i) const noexcept {
        std::uint64_t t = 0;
        for (std::size_t j = 0; j < size(); ++j) t += count(i, j);
        return t;
    }
    std::uint64_t column_total(std::size_t j) const noexcept {
        std::uint64_t t = 0;
        for (std::size_t i = 0; i < size(); ++i) t += count(i, j);
        return t;
    }

    /// Adds another matrix over the same classes.
    ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
        if (other.ids_ != ids_) throw InvalidArgument("ConfusionMatrix: cannot add matrices over different classes");
        for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
        return *this;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::vector<ClassId> ids_;
    std::vector<std::string> names_;
    std::vector<std::uint64_t> counts_;
};

struct ConfusionTally {
    ConfusionMatrix matrix;
    std::size_t used = 0;
    std::size_t skipped = 0; // points masked in either raster
};

/**
 * Tallies reference/predicted labels at the sampled points. Points on a
 * masked pixel of either raster are skipped and counted.
 */
inline ConfusionTally build_confusion(const LabelRaster& reference, const LabelRaster& predicted,
                                      const PointSample& sample, const ClassScheme& scheme, unsigned threads = 1) {
    if (!same_grid(reference, predicted)) throw InvalidArgument("build_confusion: raster dimensions differ");
    const ClassId masked = scheme.masked_id();
    std::vector<ConfusionTally> partial(std::max(1u, threads));
    for (auto& p : partial) p.matrix = ConfusionMatrix::for_scheme(scheme);
    const std::size_t chunks = partial.size();
    parallel_for(chunks, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            ConfusionTally& t = partial[c];
            const std::size_t lo = sample.points.size() * c / chunks;
            const std::size_t hi = sample.points.size() * (c + 1) / chunks;
            for (std::size_t i = lo; i < hi; ++i) {
                const auto& p = sample.points[i];
                if (p.col >= reference.width() || p.row >= reference.height()) {
                    throw InvalidArgument("build_confusion: sample point outside the rasters");
                }
                const ClassId r = reference.at(p.col, p.row);
                const ClassId q = predicted.at(p.col, p.row);
                if (r == masked || q == masked) {
                    ++t.skipped;
                    continue;
                }
                if (!scheme.contains(r) || !scheme.contains(q)) {
                    throw InvalidArgument("build_confusion: label outside the scheme at (" + std::to_string(p.col) +
                                          "," + std::to_string(p.row) + ")");
                }
                ++t.matrix.count(r, q);
                ++t.used;
            }
        }
    });
    ConfusionTally out{ConfusionMatrix::for_scheme(scheme), 0, 0};
    for (const auto& p : partial) {
        out.matrix += p.matrix;
        out.used += p.used;
        out.skipped += p.skipped;
    }
    return out;
}

namespace detail {
inline void require_points(const ConfusionMatrix& cm, const char* what) {
    if (cm.total() == 0) throw InvalidArgument(std::string(what) + ": confusion matrix is empty");
}
} // namespace detail

inline double overall_accuracy(const ConfusionMatrix& cm) {
    detail::require_points(cm, "overall_accuracy");
    return static_cast<double>(cm.diagonal()) / static_cast<double>(cm.total());
}

/// Chance agreement: sum of row_i * col_i over total squared.
inline double expected_agreement(const ConfusionMatrix& cm) {
    detail::require_points(cm, "expected_agreement");
    long double acc = 0.0L;
    for (std::size_t i = 0; i < cm.size(); ++i) {
        acc += static_cast<long double>(cm.row_total(i)) * static_cast<long double>(cm.column_total(i));
    }
    const long double n = static_cast<long double>(cm.total());
    return static_cast<double>(acc / (n * n));
}

/// Cohen's kappa; nullopt when chance agreement is 1.
inline std::optional<double> cohen_kappa(const ConfusionMatrix& cm) {
    const double po = overall_accuracy(cm);
    const double pe = expected_agreement(cm);
    if (pe >= 1.0) return std::nullopt;
    return (po - pe) / (1.0 - pe);
}

/// Per-class scores; nullopt marks an undefined value (zero denominator).
struct ClassMetric {
    ClassId id = 0;
    std::string name;
    std::optional<double> producers_accuracy;
    std::optional<double> users_accuracy;
    std::optional<double> rand_accuracy;
};

inline std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline std::vector<ClassMetric> per_class_metrics(const ConfusionMatrix& cm) {
    detail::require_points(cm, "per_class_metrics");
    const std::uint64_t total = cm.total();
    std::vector<ClassMetric> out;
    for (std::size_t c = 0; c < cm.size(); ++c) {
        const std::uint64_t tp = cm.count(c, c);
        const std::uint64_t fn = cm.row_total(c) - tp;
        const std::uint64_t fp = cm.column_total(c) - tp;
        const std::uint64_t tn = total - tp - fn - fp;
        out.push_back({cm.ids()[c], cm.names()[c], ratio(tp, tp + fn), ratio(tp, tp + fp),
                       ratio(tp + tn, tp + tn + fp + fn)});
    }
    return out;
}

/**
 * Sums the rows and columns of `members` into one class named `group_name`,
 * placed where the first member was. Other cells are unchanged.
 */
inline ConfusionMatrix merge_classes(const ConfusionMatrix& cm, const std::vector<ClassId>& members,
                                     const std::string& group_name) {
    if (members.empty()) throw InvalidArgument("merge_classes: empty group");
    std::vector<std::uint8_t> in_group(cm.size(), 0);
    for (ClassId m : members) {
        auto idx = cm.index_of(m);
        if (!idx) throw InvalidArgument("merge_classes: class " + std::to_string(m) + " is not in the matrix");
        in_group[*idx] = 1;
    }
    std::vector<std::size_t> target(cm.size());
    std::vector<ClassId> ids;
    std::vector<std::string> names;
    std::optional<std::size_t> group_slot;
    for (std::size_t i = 0; i < cm.size(); ++i) {
        if (in_group[i]) {
            if (!group_slot) {
                group_slot = ids.size();
                ids.push_back(cm.ids()[i]);
                names.push_back(group_name);
            }
            target[i] = *group_slot;
        } else {
            target[i] = ids.size();
            ids.push_back(cm.ids()[i]);
            names.push_back(cm.names()[i]);
        }
    }
    ConfusionMatrix out(std::move(ids), std::move(names));
    for (std::size_t r = 0; r < cm.size(); ++r) {
        for (std::size_t p = 0; p < cm.size(); ++p) out.count(target[r], target[p]) += cm.count(r, p);
    }
    return out;
}

inline ConfusionMatrix merge_classes(const ConfusionMatrix& cm, const MergeGroup& group) {
    return merge_classes(cm, group.members, group.name);
}

/// Everything one view of an accuracy table needs.
struct AccuracyView {
    std::string name;
    ConfusionMatrix matrix;
    double overall = 0.0;
    std::optional<double> kappa;
    std::vector<ClassMetric> classes;
};

inline AccuracyView make_view(std::string name, ConfusionMatrix matrix) {
    AccuracyView v{std::move(name), std::move(matrix), 0.0, std::nullopt, {}};
    v.overall = overall_accuracy(v.matrix);
    v.kappa = cohen_kappa(v.matrix);
    v.classes = per_class_metrics(v.matrix);
    return v;
}

struct AccuracyReport {
    std::size_t points_requested = 0;
    std::size_t points_used = 0;
    std::size_t points_skipped = 0;
    std::vector<AccuracyView> views; // all classes first, then one per merge group
};

inline AccuracyReport assess(const ConfusionTally& tally, const ClassScheme& scheme, std::size_t requested) {
    AccuracyReport report{requested, tally.used, tally.skipped, {}};
    report.views.push_back(make_view("classes", tally.matrix));
    for (const auto& g : scheme.groups()) report.views.push_back(make_view(g.name, merge_classes(tally.matrix, g)));
    return report;
}

} // namespace coastal
