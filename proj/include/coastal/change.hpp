#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coastal/raster.hpp"
#include "coastal/scheme.hpp"

namespace coastal {

inline constexpr double kSquareMetresPerHectare = 10000.0;

struct AreaRow {
    std::string name;
    std::optional<ClassId> class_id;         // empty for merge-group rows
    std::optional<std::uint64_t> pixel_count; // empty when only hectares are known
    double area_ha = 0.0;

    bool is_group() const noexcept { return !class_id.has_value(); }
};

/// Per-class area of one classified map (one epoch).
struct AreaTable {
    std::string epoch;
    double pixel_area_m2 = 0.0;
    std::uint64_t masked_pixels = 0;
    std::vector<AreaRow> rows;

    const AreaRow* find(const std::string& name) const noexcept {
        for (const auto& r : rows) {
            if (r.name == name) return &r;
        }
        return nullptr;
    }
};

/// Appends one row per scheme merge group holding the sum of its members' areas.
inline void add_group_rows(AreaTable& table, const ClassScheme& scheme) {
    for (const auto& g : scheme.groups()) {
        if (table.find(g.name)) continue;
        AreaRow row{g.name, std::nullopt, std::uint64_t{0}, 0.0};
        for (ClassId m : g.members) {
            const AreaRow* member = table.find(scheme.at(m).name);
            if (!member) continue;
            row.area_ha += member->area_ha;
            if (member->pixel_count && row.pixel_count) {
                *row.pixel_count += *member->pixel_count;
            } else {
                row.pixel_count.reset();
            }
        }
        table.rows.push_back(row);
    }
}

/**
 * Counts unmasked pixels per scheme class and converts them to hectares
 * using the raster's pixel footprint.
 */
inline AreaTable class_areas(const LabelRaster& labels, const ClassScheme& scheme, std::string epoch = {},
                             bool with_groups = true) {
    const double pixel_area = labels.geo().pixel_area_m2();
    if (!(pixel_area > 0.0)) throw InvalidArgument("class_areas: degenerate pixel size");
    std::vector<std::uint64_t> counts(scheme.size(), 0);
    std::uint64_t masked = 0;
    for (ClassId l : labels.labels()) {
        if (l == scheme.masked_id()) {
            ++masked;
        } else if (scheme.contains(l)) {
            ++counts[l];
        } else {
            throw InvalidArgument("class_areas: label " + std::to_string(l) + " is not in the scheme");
        }
    }
    AreaTable table{std::move(epoch), pixel_area, masked, {}};
    for (const auto& c : scheme.classes()) {
        table.rows.push_back(
            {c.name, c.id, counts[c.id], static_cast<double>(counts[c.id]) * pixel_area / kSquareMetresPerHectare});
    }
    if (with_groups) add_group_rows(table, scheme);
    return table;
}

struct ChangeRow {
    std::string name;
    double area_t0 = 0.0;
    double area_t1 = 0.0;
    double delta_ha = 0.0;
    std::optional<double> relative_change; // empty when area_t0 is 0
};

struct AreaChangeReport {
    std::string method;
    std::string epoch_t0;
    std::string epoch_t1;
    std::vector<ChangeRow> rows;
};

/**
 * Per-class change from t0 to t1. A class missing from one table counts as
 * zero area there; a class whose id or kind differs between tables is an
 * error.
 */
inline AreaChangeReport change_table(const AreaTable& t0, const AreaTable& t1, std::string method = {}) {
    AreaChangeReport report{std::move(method), t0.epoch, t1.epoch, {}};
    std::vector<std::string> order;
    for (const auto& r : t0.rows) order.push_back(r.name);
    for (const auto& r : t1.rows) {
        const AreaRow* before = t0.find(r.name);
        if (!before) {
            order.push_back(r.name);
        } else if (before->class_id != r.class_id) {
            throw InvalidArgument("change_table: class '" + r.name + "' has different ids in the two tables");
        }
    }
    for (const auto& name : order) {
        const AreaRow* a = t0.find(name);
        const AreaRow* b = t1.find(name);
        ChangeRow row{name, a ? a->area_ha : 0.0, b ? b->area_ha : 0.0, 0.0, std::nullopt};
        row.delta_ha = row.area_t1 - row.area_t0;
        if (row.area_t0 != 0.0) row.relative_change = row.delta_ha / row.area_t0;
        report.rows.push_back(row);
    }
    return report;
}

/// RGBA map: white where the class changed, black where it did not, transparent where either epoch is masked.
inline ImageRaster change_mask(const LabelRaster& t0, const LabelRaster& t1, ClassId masked_id = kDefaultMaskedId) {
    if (!same_grid(t0, t1)) throw InvalidArgument("change_mask: rasters differ in size");
    ImageRaster out(t0.width(), t0.height(), 4, t0.geo());
    for (std::size_t y = 0; y < t0.height(); ++y) {
        for (std::size_t x = 0; x < t0.width(); ++x) {
            auto px = out.pixel(x, y);
            const ClassId a = t0.at(x, y);
            const ClassId b = t1.at(x, y);
            if (a == masked_id || b == masked_id) continue;
            const std::uint8_t v = a != b ? 255 : 0;
            px[0] = px[1] = px[2] = v;
            px[3] = 255;
        }
    }
    return out;
}

} // namespace coastal
