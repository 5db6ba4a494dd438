#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coastal/assessment.hpp"
#include "coastal/change.hpp"
#include "coastal/scheme.hpp"

namespace coastal {

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw InvalidArgument("unknown report format '" + std::string(name) + "' (expected csv or json)");
}

/// Format implied by a file name's extension; csv unless it ends in .json.
inline ReportFormat report_format_for_path(std::string_view path) {
    return path.size() >= 5 && path.substr(path.size() - 5) == ".json" ? ReportFormat::json : ReportFormat::csv;
}

inline constexpr int kHectareDecimals = 1;
inline constexpr int kRatioDecimals = 3;
inline constexpr std::string_view kUndefined = "NA";

/// Fixed-point text without a "-0.0" artifact.
inline std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

inline std::string format_optional(const std::optional<double>& v, int decimals) {
    return v ? format_fixed(*v, decimals) : std::string(kUndefined);
}

namespace detail {

using ordered_json = nlohmann::ordered_json;

// JSON mirrors carry exactly the rounded numbers printed in the CSV.
inline ordered_json rounded(double value, int decimals) { return std::stod(format_fixed(value, decimals)); }

inline ordered_json rounded(const std::optional<double>& v, int decimals) {
    return v ? rounded(*v, decimals) : ordered_json(nullptr);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

/// Columns: epoch,class,class_id,pixel_count,pixel_area_m2,area_ha. Group rows leave class_id empty.
inline std::string render_areas(const AreaTable& table, ReportFormat format) {
    if (format == ReportFormat::json) {
        detail::ordered_json j;
        j["epoch"] = table.epoch;
        j["pixel_area_m2"] = table.pixel_area_m2;
        j["masked_pixels"] = table.masked_pixels;
        j["rows"] = detail::ordered_json::array();
        for (const auto& r : table.rows) {
            detail::ordered_json row;
            row["class"] = r.name;
            row["class_id"] = r.class_id ? detail::ordered_json(int(*r.class_id)) : detail::ordered_json(nullptr);
            row["pixel_count"] = r.pixel_count ? detail::ordered_json(*r.pixel_count) : detail::ordered_json(nullptr);
            row["area_ha"] = detail::rounded(r.area_ha, kHectareDecimals);
            j["rows"].push_back(row);
        }
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "epoch,class,class_id,pixel_count,pixel_area_m2,area_ha\n";
    char px[64];
    std::snprintf(px, sizeof px, "%.17g", table.pixel_area_m2);
    for (const auto& r : table.rows) {
        out << detail::csv_field(table.epoch) << ',' << detail::csv_field(r.name) << ','
            << (r.class_id ? std::to_string(*r.class_id) : "") << ','
            << (r.pixel_count ? std::to_string(*r.pixel_count) : "") << ',' << (r.pixel_count ? px : "") << ','
            << format_fixed(r.area_ha, kHectareDecimals) << '\n';
    }
    return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

} // namespace detail

/**
 * Reads an area table. Only `class` and `area_ha` are required; when
 * pixel_count and pixel_area_m2 are both present the area is recomputed
 * from them at full precision.
 */
inline AreaTable parse_areas_csv(const std::string& text, const std::string& source = "<areas>") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError(source, "empty area table");
    const auto header = detail::split_csv_line(line);
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (detail::trim(header[i]) == name) return i;
        }
        return std::nullopt;
    };
    const auto c_class = column("class");
    const auto c_area = column("area_ha");
    if (!c_class || !c_area) throw IoError(source, "area table needs 'class' and 'area_ha' columns");
    const auto c_epoch = column("epoch");
    const auto c_id = column("class_id");
    const auto c_count = column("pixel_count");
    const auto c_px = column("pixel_area_m2");

    AreaTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(line);
        auto get = [&](const std::optional<std::size_t>& c) -> std::string_view {
            return c && *c < f.size() ? detail::trim(f[*c]) : std::string_view{};
        };
        const std::string where = "line " + std::to_string(lineno);
        AreaRow row;
        row.name = std::string(get(c_class));
        if (row.name.empty()) throw IoError(source, where + ": empty class name");
        if (auto id = get(c_id); !id.empty()) {
            auto v = detail::parse_number<int>(id);
            if (!v || *v < 0 || *v > 254) throw IoError(source, where + ": bad class_id");
            row.class_id = static_cast<ClassId>(*v);
        }
        auto area = detail::parse_number<double>(get(c_area));
        if (!area) throw IoError(source, where + ": bad area_ha");
        row.area_ha = *area;
        if (auto count = get(c_count); !count.empty()) {
            auto v = detail::parse_number<std::uint64_t>(count);
            if (!v) throw IoError(source, where + ": bad pixel_count");
            row.pixel_count = *v;
            if (auto px = get(c_px); !px.empty()) {
                auto p = detail::parse_number<double>(px);
                if (!p || !(*p > 0.0)) throw IoError(source, where + ": bad pixel_area_m2");
                table.pixel_area_m2 = *p;
                row.area_ha = static_cast<double>(*v) * *p / kSquareMetresPerHectare;
            }
        }
        if (auto e = get(c_epoch); !e.empty()) table.epoch = std::string(e);
        if (table.find(row.name)) throw IoError(source, where + ": duplicate class '" + row.name + "'");
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Columns: class,area_ha_t0,area_ha_t1,delta_ha,relative_change.
inline std::string render_change(const AreaChangeReport& report, ReportFormat format) {
    if (format == ReportFormat::json) {
        detail::ordered_json j;
        j["method"] = report.method;
        j["epoch_t0"] = report.epoch_t0;
        j["epoch_t1"] = report.epoch_t1;
        j["rows"] = detail::ordered_json::array();
        for (const auto& r : report.rows) {
            detail::ordered_json row;
            row["class"] = r.name;
            row["area_ha_t0"] = detail::rounded(r.area_t0, kHectareDecimals);
            row["area_ha_t1"] = detail::rounded(r.area_t1, kHectareDecimals);
            row["delta_ha"] = detail::rounded(r.delta_ha, kHectareDecimals);
            row["relative_change"] = detail::rounded(r.relative_change, kRatioDecimals);
            j["rows"].push_back(row);
        }
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "class,area_ha_t0,area_ha_t1,delta_ha,relative_change\n";
    for (const auto& r : report.rows) {
        out << detail::csv_field(r.name) << ',' << format_fixed(r.area_t0, kHectareDecimals) << ','
            << format_fixed(r.area_t1, kHectareDecimals) << ',' << format_fixed(r.delta_ha, kHectareDecimals) << ','
            << format_optional(r.relative_change, kRatioDecimals) << '\n';
    }
    return out.str();
}

/**
 * Accuracy table as `view,class,metric,value` rows: point counts, then for
 * each view the overall accuracy and kappa followed by producer's, user's
 * and rand accuracy per class.
 */
inline std::string render_accuracy(const AccuracyReport& report, ReportFormat format) {
    struct Row {
        std::string view;
        std::string cls;
        std::string metric;
        std::optional<double> value;
        int decimals;
    };
    std::vector<Row> rows;
    rows.push_back({"summary", "ALL", "points_requested", double(report.points_requested), 0});
    rows.push_back({"summary", "ALL", "points_used", double(report.points_used), 0});
    rows.push_back({"summary", "ALL", "points_skipped", double(report.points_skipped), 0});
    for (const auto& v : report.views) {
        rows.push_back({v.name, "ALL", "overall_accuracy", v.overall, kRatioDecimals});
        rows.push_back({v.name, "ALL", "kappa", v.kappa, kRatioDecimals});
        for (const auto& c : v.classes) {
            rows.push_back({v.name, c.name, "producers_accuracy", c.producers_accuracy, kRatioDecimals});
            rows.push_back({v.name, c.name, "users_accuracy", c.users_accuracy, kRatioDecimals});
            rows.push_back({v.name, c.name, "rand_accuracy", c.rand_accuracy, kRatioDecimals});
        }
    }
    if (format == ReportFormat::json) {
        detail::ordered_json j = detail::ordered_json::array();
        for (const auto& r : rows) {
            detail::ordered_json row;
            row["view"] = r.view;
            row["class"] = r.cls;
            row["metric"] = r.metric;
            if (r.decimals == 0) {
                row["value"] = static_cast<std::uint64_t>(*r.value);
            } else {
                row["value"] = detail::rounded(r.value, r.decimals);
            }
            j.push_back(row);
        }
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "view,class,metric,value\n";
    for (const auto& r : rows) {
        out << detail::csv_field(r.view) << ',' << detail::csv_field(r.cls) << ',' << r.metric << ','
            << format_optional(r.value, r.decimals) << '\n';
    }
    return out.str();
}

} // namespace coastal
