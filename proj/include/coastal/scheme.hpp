#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "coastal/error.hpp"
#include "coastal/raster.hpp"

namespace coastal {

struct ClassInfo {
    ClassId id = 0;
    std::string name;
    Rgb color;

    friend bool operator==(const ClassInfo&, const ClassInfo&) = default;
};

/// Named union of classes, e.g. total vegetation = dense + sparse.
struct MergeGroup {
    std::string name;
    std::vector<ClassId> members;

    friend bool operator==(const MergeGroup&, const MergeGroup&) = default;
};

/**
 * Land-cover class table: ids, names, display colors and merge groups.
 *
 * Class ids are contiguous from 0 in declaration order. The class named
 * "not_classified" (if any) receives low-confidence pixels.
 */
class ClassScheme {
public:
    ClassScheme() = default;

    ClassScheme(std::vector<ClassInfo> classes, std::vector<MergeGroup> groups = {},
                ClassId masked_id = kDefaultMaskedId, Rgba mask_color = {0, 0, 0, 0})
        : classes_(std::move(classes)), groups_(std::move(groups)), masked_id_(masked_id), mask_color_(mask_color) {
        validate();
    }

    const std::vector<ClassInfo>& classes() const noexcept { return classes_; }
    const std::vector<MergeGroup>& groups() const noexcept { return groups_; }
    ClassId masked_id() const noexcept { return masked_id_; }
    Rgba mask_color() const noexcept { return mask_color_; }
    std::size_t size() const noexcept { return classes_.size(); }
    bool empty() const noexcept { return classes_.empty(); }

    bool contains(ClassId id) const noexcept { return id < classes_.size(); }
    bool valid_label(ClassId id) const noexcept { return contains(id) || id == masked_id_; }

    const ClassInfo& at(ClassId id) const {
        if (!contains(id)) throw InvalidArgument("class id " + std::to_string(id) + " is not in the scheme");
        return classes_[id];
    }

    std::optional<ClassId> find(std::string_view name) const noexcept {
        for (const auto& c : classes_) {
            if (c.name == name) return c.id;
        }
        return std::nullopt;
    }

    const MergeGroup* find_group(std::string_view name) const noexcept {
        for (const auto& g : groups_) {
            if (g.name == name) return &g;
        }
        return nullptr;
    }

    /// Class that receives pixels below a confidence floor.
    std::optional<ClassId> unclassified_id() const noexcept {
        for (const auto& c : classes_) {
            if (c.name == "not_classified" || c.name == "not-classified" || c.name == "unclassified") return c.id;
        }
        return std::nullopt;
    }

    friend bool operator==(const ClassScheme&, const ClassScheme&) = default;

private:
    void validate() const {
        if (classes_.size() > kDefaultMaskedId) throw InvalidArgument("scheme: too many classes");
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            if (classes_[i].id != i) {
                throw InvalidArgument("scheme: class ids must be unique and contiguous from 0 (got " +
                                      std::to_string(classes_[i].id) + " at position " + std::to_string(i) + ")");
            }
            if (classes_[i].name.empty()) throw InvalidArgument("scheme: class name is empty");
            for (std::size_t j = 0; j < i; ++j) {
                if (classes_[j].color == classes_[i].color) {
                    throw InvalidArgument("scheme: classes '" + classes_[j].name + "' and '" + classes_[i].name +
                                          "' share a color");
                }
                if (classes_[j].name == classes_[i].name) {
                    throw InvalidArgument("scheme: duplicate class name '" + classes_[i].name + "'");
                }
            }
        }
        if (contains(masked_id_)) throw InvalidArgument("scheme: masked id collides with a class id");
        for (const auto& g : groups_) {
            if (g.name.empty() || g.members.empty()) throw InvalidArgument("scheme: merge group needs a name and members");
            for (auto m : g.members) {
                if (m == masked_id_) throw InvalidArgument("scheme: masked id cannot join merge group " + g.name);
                if (!contains(m)) {
                    throw InvalidArgument("scheme: merge group " + g.name + " references unknown class " +
                                          std::to_string(m));
                }
            }
        }
    }

    std::vector<ClassInfo> classes_;
    std::vector<MergeGroup> groups_;
    ClassId masked_id_ = kDefaultMaskedId;
    Rgba mask_color_{0, 0, 0, 0};
};

/// Sand, dense/sparse vegetation, oyster rafts, debris and not-classified.
inline ClassScheme default_scheme() {
    return ClassScheme({{0, "sand", {210, 180, 140}},
                        {1, "dense_vegetation", {0, 100, 0}},
                        {2, "sparse_vegetation", {144, 238, 144}},
                        {3, "oyster_raft", {139, 69, 19}},
                        {4, "debris", {255, 0, 0}},
                        {5, "not_classified", {0, 0, 255}}},
                       {{"total_vegetation", {1, 2}}});
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

inline std::uint8_t parse_channel(std::string_view s, const std::string& where) {
    auto v = parse_number<int>(s);
    if (!v || *v < 0 || *v > 255) throw InvalidArgument(where + ": color channel '" + std::string(s) + "' not in 0..255");
    return static_cast<std::uint8_t>(*v);
}

} // namespace detail

/// Parses "R,G,B".
inline Rgb parse_rgb(std::string_view text) {
    auto parts = detail::split(text, ',');
    if (parts.size() != 3) throw InvalidArgument("expected R,G,B but got '" + std::string(text) + "'");
    return {detail::parse_channel(parts[0], "color"), detail::parse_channel(parts[1], "color"),
            detail::parse_channel(parts[2], "color")};
}

/**
 * Reads the line-oriented scheme format:
 *
 *     # comment
 *     id,name,R,G,B
 *     merge,<group>,<id>,<id>,...
 *     masked,<id>
 */
inline ClassScheme parse_scheme(std::istream& in, const std::string& source = "<scheme>") {
    std::vector<ClassInfo> classes;
    std::vector<MergeGroup> groups;
    ClassId masked = kDefaultMaskedId;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto fields = detail::split(body, ',');
        if (fields[0] == "merge") {
            if (fields.size() < 3) throw IoError(source, "line " + std::to_string(lineno) + ": merge needs a name and ids");
            MergeGroup g{std::string(fields[1]), {}};
            for (std::size_t i = 2; i < fields.size(); ++i) {
                auto id = detail::parse_number<int>(fields[i]);
                if (!id || *id < 0 || *id > 255) throw IoError(source, "line " + std::to_string(lineno) + ": bad class id");
                g.members.push_back(static_cast<ClassId>(*id));
            }
            groups.push_back(std::move(g));
        } else if (fields[0] == "masked") {
            auto id = fields.size() == 2 ? detail::parse_number<int>(fields[1]) : std::nullopt;
            if (!id || *id < 0 || *id > 255) throw IoError(source, "line " + std::to_string(lineno) + ": bad masked id");
            masked = static_cast<ClassId>(*id);
        } else {
            if (fields.size() != 5) {
                throw IoError(source, "line " + std::to_string(lineno) + ": expected id,name,R,G,B");
            }
            auto id = detail::parse_number<int>(fields[0]);
            if (!id || *id < 0 || *id > 254) throw IoError(source, "line " + std::to_string(lineno) + ": bad class id");
            try {
                classes.push_back({static_cast<ClassId>(*id), std::string(fields[1]),
                                   {detail::parse_channel(fields[2], where), detail::parse_channel(fields[3], where),
                                    detail::parse_channel(fields[4], where)}});
            } catch (const InvalidArgument& e) {
                throw IoError(source, e.what());
            }
        }
    }
    std::sort(classes.begin(), classes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    try {
        return ClassScheme(std::move(classes), std::move(groups), masked);
    } catch (const InvalidArgument& e) {
        throw IoError(source, e.what());
    }
}

inline ClassScheme load_scheme(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open scheme file");
    return parse_scheme(in, path);
}

inline std::string format_scheme(const ClassScheme& scheme) {
    std::ostringstream out;
    for (const auto& c : scheme.classes()) {
        out << int(c.id) << ',' << c.name << ',' << int(c.color.r) << ',' << int(c.color.g) << ',' << int(c.color.b)
            << '\n';
    }
    for (const auto& g : scheme.groups()) {
        out << "merge," << g.name;
        for (auto m : g.members) out << ',' << int(m);
        out << '\n';
    }
    if (scheme.masked_id() != kDefaultMaskedId) out << "masked," << int(scheme.masked_id()) << '\n';
    return out.str();
}

} // namespace coastal
