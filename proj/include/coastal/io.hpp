#pragma once

#include <png.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coastal/error.hpp"
#include "coastal/labels.hpp"
#include "coastal/raster.hpp"
#include "coastal/scheme.hpp"

namespace coastal::io {

namespace fs = std::filesystem;

namespace detail {

inline std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return ext;
}

inline ImageRaster read_png(const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw IoError(path, std::string("cannot read PNG: ") + image.message);
    }
    std::size_t bands = 3;
    const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    const bool has_color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    if (!has_color && !has_alpha) {
        image.format = PNG_FORMAT_GRAY;
        bands = 1;
    } else if (has_alpha) {
        image.format = PNG_FORMAT_RGBA;
        bands = 4;
    } else {
        image.format = PNG_FORMAT_RGB;
    }
    std::vector<std::uint8_t> samples(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, samples.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError(path, "cannot decode PNG: " + msg);
    }
    return ImageRaster(image.width, image.height, bands, std::move(samples));
}

inline void write_png(const ImageRaster& img, const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = img.bands() == 1 ? PNG_FORMAT_GRAY : img.bands() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_RGBA;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.samples().data(), 0, nullptr)) {
        throw IoError(path, std::string("cannot write PNG: ") + image.message);
    }
}

// Binary PPM (P6, maxval 255). Comments allowed in the header.
inline ImageRaster read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open PPM");
    auto token = [&]() {
        std::string tok;
        char ch;
        while (in.get(ch)) {
            if (ch == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(ch);
        }
        return tok;
    };
    if (token() != "P6") throw IoError(path, "not a binary PPM (P6)");
    auto w = coastal::detail::parse_number<std::size_t>(token());
    auto h = coastal::detail::parse_number<std::size_t>(token());
    auto maxval = coastal::detail::parse_number<int>(token());
    if (!w || !h || !maxval) throw IoError(path, "malformed PPM header");
    if (*maxval != 255) throw IoError(path, "only 8-bit PPM (maxval 255) is supported");
    std::vector<std::uint8_t> samples(*w * *h * 3);
    in.read(reinterpret_cast<char*>(samples.data()), static_cast<std::streamsize>(samples.size()));
    if (in.gcount() != static_cast<std::streamsize>(samples.size())) throw IoError(path, "truncated PPM data");
    return ImageRaster(*w, *h, 3, std::move(samples));
}

inline void write_ppm(const ImageRaster& img, const std::string& path) {
    if (img.bands() != 3) throw IoError(path, "PPM output needs a 3-band image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.samples().data()), static_cast<std::streamsize>(img.samples().size()));
    if (!out) throw IoError(path, "write failed");
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// ESRI sidecar name: first and last letter of the extension plus 'w' (img.png -> img.pgw).
inline fs::path world_file_path(const fs::path& raster_path) {
    std::string ext = raster_path.extension().string();
    fs::path out = raster_path;
    if (ext.size() >= 3) {
        out.replace_extension(std::string(".") + ext[1] + ext.back() + "w");
    } else {
        out.replace_extension(".wld");
    }
    return out;
}

/**
 * ESRI world file: pixel_size_x, 0, 0, -pixel_size_y, then the map
 * coordinates of the center of the upper-left pixel.
 */
inline GeoTransform read_world_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string(), "cannot open world file");
    double v[6];
    for (double& x : v) {
        std::string line;
        while (std::getline(in, line) && coastal::detail::trim(line).empty()) {
        }
        auto parsed = coastal::detail::parse_number<double>(coastal::detail::trim(line));
        if (!parsed) throw IoError(path.string(), "world file needs six numeric lines");
        x = *parsed;
    }
    if (v[1] != 0.0 || v[2] != 0.0) throw IoError(path.string(), "rotated world files are not supported");
    if (!(v[0] > 0.0) || !(v[3] < 0.0)) throw IoError(path.string(), "world file pixel sizes must be +x / -y");
    const double size_x = v[0];
    const double size_y = -v[3];
    return GeoTransform(v[4] - 0.5 * size_x, v[5] + 0.5 * size_y, size_x, size_y);
}

inline void write_world_file(const GeoTransform& geo, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    const auto center = geo.pixel_center(0, 0);
    out << detail::format_double(geo.pixel_size_x()) << "\n0\n0\n"
        << detail::format_double(-geo.pixel_size_y()) << '\n'
        << detail::format_double(center.x) << '\n'
        << detail::format_double(center.y) << '\n';
    if (!out) throw IoError(path.string(), "write failed");
}

/// Reads a PNG or binary PPM and its world file sidecar when one exists.
inline ImageRaster read_image(const std::string& path) {
    if (!fs::exists(path)) throw IoError(path, "file does not exist");
    const auto ext = detail::lower_extension(path);
    ImageRaster img = (ext == ".ppm" || ext == ".pnm") ? detail::read_ppm(path) : detail::read_png(path);
    const auto world = world_file_path(path);
    if (fs::exists(world)) img.set_geo(read_world_file(world));
    return img;
}

/// Writes a PNG (or PPM by extension) and its world file sidecar.
inline void write_image(const ImageRaster& img, const std::string& path, bool with_world_file = true) {
    if (img.empty()) throw IoError(path, "refusing to write an empty image");
    const auto ext = detail::lower_extension(path);
    if (ext == ".ppm" || ext == ".pnm") {
        detail::write_ppm(img, path);
    } else {
        detail::write_png(img, path);
    }
    if (with_world_file) write_world_file(img.geo(), world_file_path(path));
}

/**
 * Label maps are stored either as single-channel PNGs of raw class ids or
 * as color images decoded through the scheme's palette.
 */
inline LabelRaster read_labels(const std::string& path, const ClassScheme& scheme) {
    ImageRaster img = read_image(path);
    if (img.bands() == 1) {
        LabelRaster labels(img.width(), img.height(),
                           std::vector<ClassId>(img.samples().begin(), img.samples().end()), img.geo());
        try {
            validate_labels(labels, scheme);
        } catch (const InvalidArgument& e) {
            throw IoError(path, e.what());
        }
        return labels;
    }
    return decode_labels(img, scheme);
}

inline void write_labels(const LabelRaster& labels, const std::string& path) {
    ImageRaster img(labels.width(), labels.height(), 1,
                    std::vector<std::uint8_t>(labels.labels().begin(), labels.labels().end()), labels.geo());
    write_image(img, path);
}

inline void write_colored_labels(const LabelRaster& labels, const ClassScheme& scheme, const std::string& path) {
    write_image(encode_labels(labels, scheme), path);
}

/// Masks are single-channel PNGs: nonzero = valid.
inline MaskRaster read_mask(const std::string& path) {
    ImageRaster img = read_image(path);
    std::vector<std::uint8_t> flags(img.pixel_count());
    for (std::size_t i = 0; i < flags.size(); ++i) {
        auto s = img.samples().subspan(i * img.bands(), img.bands());
        flags[i] = img.bands() == 4 ? s[3] != 0 : s[0] != 0;
    }
    return MaskRaster(img.width(), img.height(), std::move(flags));
}

inline void write_mask(const MaskRaster& mask, const std::string& path, const GeoTransform& geo = {}) {
    std::vector<std::uint8_t> samples(mask.pixel_count());
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = mask.flags()[i] ? 255 : 0;
    write_image(ImageRaster(mask.width(), mask.height(), 1, std::move(samples), geo), path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << text;
    if (!out) throw IoError(path, "write failed");
}

} // namespace coastal::io
