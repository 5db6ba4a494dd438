#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coastal/assessment.hpp"
#include "coastal/change.hpp"
#include "coastal/classification.hpp"
#include "coastal/external.hpp"
#include "coastal/io.hpp"
#include "coastal/preprocess.hpp"
#include "coastal/report.hpp"
#include "coastal/scheme.hpp"
#include "coastal/tileset.hpp"
#include "coastal/tiling.hpp"

namespace coastal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default scheme file.
inline constexpr const char* kSchemeEnv = "COASTAL_SCHEME";

inline Region parse_region(const std::string& text) {
    auto parts = coastal::detail::split(text, ',');
    if (parts.size() != 4) throw InvalidArgument("region must be col,row,width,height");
    std::size_t v[4];
    for (int i = 0; i < 4; ++i) {
        auto n = coastal::detail::parse_number<std::size_t>(parts[i]);
        if (!n) throw InvalidArgument("region must be col,row,width,height");
        v[i] = *n;
    }
    return {v[0], v[1], v[2], v[3]};
}

namespace detail {

inline ClassScheme load_scheme_or_default(const std::string& path) {
    return path.empty() ? default_scheme() : load_scheme(path);
}

inline void write_label_output(const LabelRaster& labels, const ClassScheme& scheme, const std::string& path,
                               bool color) {
    if (color) {
        io::write_colored_labels(labels, scheme, path);
    } else {
        io::write_labels(labels, path);
    }
}

inline void write_report(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        io::write_text(text, path);
    }
}

const auto kOddWindow = CLI::Validator(
    [](std::string& s) -> std::string {
        auto v = coastal::detail::parse_number<long>(s);
        if (!v || *v < 1 || *v % 2 == 0) return "window must be an odd integer >= 1";
        return {};
    },
    "ODD");

const auto kRgbValue = CLI::Validator(
    [](std::string& s) -> std::string {
        try {
            parse_rgb(s);
        } catch (const InvalidArgument& e) {
            return e.what();
        }
        return {};
    },
    "R,G,B");

const auto kRegionValue = CLI::Validator(
    [](std::string& s) -> std::string {
        try {
            parse_region(s);
        } catch (const InvalidArgument& e) {
            return e.what();
        }
        return {};
    },
    "C,R,W,H");

const auto kUnitInterval = CLI::Validator(
    [](std::string& s) -> std::string {
        auto v = coastal::detail::parse_number<double>(s);
        if (!v || *v < 0.0 || *v >= 1.0) return "value must be in [0,1)";
        return {};
    },
    "[0,1)");

} // namespace detail

/**
 * Entry point for the `coastcover` tool. Returns 0 on success, 1 when an
 * input file is missing or invalid, and 2 for usage errors.
 */
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Coastal land-cover classification, accuracy assessment and change accounting", "coastcover"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_config("--config", "", "Run-config file (INI/TOML; command-line flags take precedence)");
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads; outputs do not depend on it")
        ->check(CLI::Range(1u, 1024u));

    std::string scheme_path;
    auto add_scheme = [&](CLI::App* sub) {
        sub->add_option("--scheme", scheme_path, "Class scheme file (default: built-in palette)")->envname(kSchemeEnv);
    };

    // prep
    struct {
        std::string in, out, reference, nodata, mask_out;
        std::optional<double> resolution;
    } prep;
    auto* cmd_prep = app.add_subcommand("prep", "Resample, match color levels to a reference, build a validity mask");
    cmd_prep->add_option("--in", prep.in, "Input image (PNG/PPM)")->required();
    cmd_prep->add_option("--out", prep.out, "Output image")->required();
    cmd_prep->add_option("--reference", prep.reference, "Image whose color levels are matched");
    cmd_prep->add_option("--resolution", prep.resolution, "Target metres per pixel")->check(CLI::PositiveNumber);
    cmd_prep->add_option("--nodata", prep.nodata, "Color marking pixels outside the image")->check(detail::kRgbValue);
    cmd_prep->add_option("--mask-out", prep.mask_out, "Write the validity mask here");

    // tile
    struct {
        std::string in, out_dir;
        std::size_t size = kDefaultTileSize;
        bool labels = false;
    } tile;
    auto* cmd_tile = app.add_subcommand("tile", "Slice a raster into a tile directory");
    cmd_tile->add_option("--in", tile.in, "Input image or label map")->required();
    cmd_tile->add_option("--out-dir", tile.out_dir, "Output directory")->required();
    cmd_tile->add_option("--size", tile.size, "Tile edge in pixels")->check(CLI::PositiveNumber)->capture_default_str();
    cmd_tile->add_flag("--labels", tile.labels, "Input is a label map");
    add_scheme(cmd_tile);

    // train
    struct {
        std::string image, labels, image_tiles, label_tiles, region, out;
        std::size_t window = kDefaultWindow;
        std::size_t tile_size = kDefaultTileSize;
    } train;
    auto* cmd_train = app.add_subcommand("train", "Train the baseline classifier on paired imagery and labels");
    auto* opt_image = cmd_train->add_option("--image", train.image, "Training image");
    auto* opt_labels = cmd_train->add_option("--labels", train.labels, "Training label map");
    auto* opt_itiles = cmd_train->add_option("--image-tiles", train.image_tiles, "Image tile directory");
    auto* opt_ltiles = cmd_train->add_option("--label-tiles", train.label_tiles, "Label tile directory");
    opt_image->needs(opt_labels);
    opt_labels->needs(opt_image);
    opt_itiles->needs(opt_ltiles);
    opt_ltiles->needs(opt_itiles);
    opt_image->excludes(opt_itiles);
    cmd_train->add_option("--region", train.region, "Train only on col,row,width,height")->check(detail::kRegionValue);
    cmd_train->add_option("--window", train.window, "Texture window (odd)")->check(detail::kOddWindow)->capture_default_str();
    cmd_train->add_option("--tile-size", train.tile_size, "Tile edge in pixels")->check(CLI::PositiveNumber);
    cmd_train->add_option("--out", train.out, "Model file")->required();
    add_scheme(cmd_train);

    // classify
    struct {
        std::string model, in, mask, out;
        std::size_t tile_size = kDefaultTileSize;
        double floor = 0.0;
        bool color = false;
    } classify;
    auto* cmd_classify = app.add_subcommand("classify", "Classify an image with a trained baseline model");
    cmd_classify->add_option("--model", classify.model, "Model file")->required();
    cmd_classify->add_option("--in", classify.in, "Input image")->required();
    cmd_classify->add_option("--mask", classify.mask, "Validity mask (nonzero = valid)");
    cmd_classify->add_option("--tile-size", classify.tile_size, "Tile edge in pixels")->check(CLI::PositiveNumber);
    cmd_classify->add_option("--floor", classify.floor, "Confidence floor for not_classified")->check(detail::kUnitInterval);
    cmd_classify->add_option("--out", classify.out, "Output label map")->required();
    cmd_classify->add_flag("--color", classify.color, "Write a colored map instead of raw class ids");
    add_scheme(cmd_classify);

    // import
    struct {
        std::string in, out;
        std::optional<std::size_t> width, height;
        bool color = false;
    } import;
    auto* cmd_import = app.add_subcommand("import", "Import a label raster produced by an external model");
    cmd_import->add_option("--in", import.in, "External label image")->required();
    cmd_import->add_option("--out", import.out, "Output label map")->required();
    auto* opt_w = cmd_import->add_option("--width", import.width, "Expected width");
    auto* opt_h = cmd_import->add_option("--height", import.height, "Expected height");
    opt_w->needs(opt_h);
    opt_h->needs(opt_w);
    cmd_import->add_flag("--color", import.color, "Write a colored map instead of raw class ids");
    add_scheme(cmd_import);

    // filter
    struct {
        std::string in, out;
        std::size_t radius = 1, iterations = 1;
        bool color = false;
    } filter;
    auto* cmd_filter = app.add_subcommand("filter", "Majority-filter a label map");
    cmd_filter->add_option("--in", filter.in, "Input label map")->required();
    cmd_filter->add_option("--out", filter.out, "Output label map")->required();
    cmd_filter->add_option("--radius", filter.radius, "Window radius")->check(CLI::PositiveNumber)->capture_default_str();
    cmd_filter->add_option("--iterations", filter.iterations, "Passes")->capture_default_str();
    cmd_filter->add_flag("--color", filter.color, "Write a colored map instead of raw class ids");
    add_scheme(cmd_filter);

    // assess
    struct {
        std::string ref, pred, mask, region, out, json;
        std::size_t n = 100000;
        std::uint64_t seed = 0;
    } assess_opt;
    auto* cmd_assess = app.add_subcommand("assess", "Random-point accuracy assessment");
    cmd_assess->add_option("--ref", assess_opt.ref, "Reference label map")->required();
    cmd_assess->add_option("--pred", assess_opt.pred, "Predicted label map")->required();
    cmd_assess->add_option("--mask", assess_opt.mask, "Sampling mask (nonzero = valid)");
    cmd_assess->add_option("--region", assess_opt.region, "Assess only col,row,width,height")->check(detail::kRegionValue);
    cmd_assess->add_option("--n", assess_opt.n, "Number of random points")->check(CLI::PositiveNumber)->capture_default_str();
    cmd_assess->add_option("--seed", assess_opt.seed, "Sampling seed")->required();
    cmd_assess->add_option("--out", assess_opt.out, "Report path (.csv or .json; '-' for stdout)")->required();
    cmd_assess->add_option("--json", assess_opt.json, "Also write the JSON mirror here");
    add_scheme(cmd_assess);

    // area
    struct {
        std::string labels, epoch, out;
        std::optional<double> pixel_size;
        bool no_groups = false;
    } area;
    auto* cmd_area = app.add_subcommand("area", "Per-class areas in hectares");
    cmd_area->add_option("--labels", area.labels, "Label map")->required();
    cmd_area->add_option("--epoch", area.epoch, "Epoch label written into the table");
    cmd_area->add_option("--pixel-size", area.pixel_size, "Override metres per pixel")->check(CLI::PositiveNumber);
    cmd_area->add_flag("--no-groups", area.no_groups, "Omit merge-group rows");
    cmd_area->add_option("--out", area.out, "Output table (.csv or .json; '-' for stdout)")->required();
    add_scheme(cmd_area);

    // change
    struct {
        std::string t0, t1, method, out, format;
    } change;
    auto* cmd_change = app.add_subcommand("change", "Before/after area change table");
    cmd_change->add_option("--t0", change.t0, "Area table of the earlier epoch")->required();
    cmd_change->add_option("--t1", change.t1, "Area table of the later epoch")->required();
    cmd_change->add_option("--method", change.method, "Method label (manual, baseline, ...)");
    cmd_change->add_option("--format", change.format, "csv or json (default: by extension)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd_change->add_option("--out", change.out, "Output path ('-' for stdout)")->required();
    add_scheme(cmd_change);

    // render
    struct {
        std::string labels, out, t0, t1, out_dir;
    } render;
    auto* cmd_render = app.add_subcommand("render", "Color a label map, or render a t0/t1/change triptych");
    auto* opt_rl = cmd_render->add_option("--labels", render.labels, "Label map to color");
    auto* opt_ro = cmd_render->add_option("--out", render.out, "Colored output PNG");
    auto* opt_r0 = cmd_render->add_option("--t0", render.t0, "Earlier label map");
    auto* opt_r1 = cmd_render->add_option("--t1", render.t1, "Later label map");
    auto* opt_rd = cmd_render->add_option("--out-dir", render.out_dir, "Triptych output directory");
    opt_rl->needs(opt_ro);
    opt_r0->needs(opt_r1)->needs(opt_rd);
    opt_r1->needs(opt_r0);
    opt_rl->excludes(opt_r0);
    add_scheme(cmd_render);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (cmd_render->parsed() && render.labels.empty() && render.t0.empty()) {
            throw CLI::ValidationError("render", "give --labels/--out or --t0/--t1/--out-dir");
        }
        if (cmd_train->parsed() && train.image.empty() && train.image_tiles.empty()) {
            throw CLI::ValidationError("train", "give --image/--labels or --image-tiles/--label-tiles");
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "coastcover: " << e.what() << '\n';
        auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        const ClassScheme scheme = detail::load_scheme_or_default(scheme_path);

        if (cmd_prep->parsed()) {
            std::optional<Rgb> nodata;
            if (!prep.nodata.empty()) nodata = parse_rgb(prep.nodata);
            ImageRaster img = io::read_image(prep.in);
            if (prep.resolution) img = resample(img, *prep.resolution, threads);
            MaskRaster mask = build_mask(img, nodata);
            if (!prep.reference.empty()) {
                ImageRaster ref = io::read_image(prep.reference);
                if (prep.resolution) ref = resample(ref, *prep.resolution, threads);
                const MaskRaster ref_mask = build_mask(ref, nodata);
                img = match_color_levels(img, ref, &mask, &ref_mask);
            }
            io::write_image(img, prep.out);
            if (!prep.mask_out.empty()) io::write_mask(mask, prep.mask_out, img.geo());
        } else if (cmd_tile->parsed()) {
            if (tile.labels) {
                const LabelRaster labels = io::read_labels(tile.in, scheme);
                io::write_tile_set(tile_raster(labels, tile.size, scheme.masked_id()), tile.out_dir, labels.geo());
            } else {
                const ImageRaster img = io::read_image(tile.in);
                io::write_tile_set(tile_raster(img, tile.size), tile.out_dir, img.geo());
            }
        } else if (cmd_train->parsed()) {
            std::vector<TilePair> pairs;
            if (!train.image.empty()) {
                ImageRaster img = io::read_image(train.image);
                LabelRaster labels = io::read_labels(train.labels, scheme);
                if (!same_grid(img, labels)) throw IoError(train.labels, "label map size differs from the image");
                if (!train.region.empty()) {
                    const Region r = parse_region(train.region);
                    img = crop(img, r);
                    labels = crop(labels, r);
                }
                pairs = pair_tiles(tile_raster(img, train.tile_size),
                                   tile_raster(labels, train.tile_size, scheme.masked_id()));
            } else {
                pairs = pair_tiles(io::read_image_tiles(train.image_tiles), io::read_label_tiles(train.label_tiles));
            }
            io::write_text(format_model(train_baseline(pairs, train.window, scheme.masked_id())), train.out);
        } else if (cmd_classify->parsed()) {
            std::istringstream model_text(io::read_text(classify.model));
            BaselineModel model;
            try {
                model = parse_model(model_text);
            } catch (const InvalidArgument& e) {
                throw IoError(classify.model, e.what());
            }
            const ImageRaster img = io::read_image(classify.in);
            std::optional<MaskRaster> mask;
            if (!classify.mask.empty()) mask = io::read_mask(classify.mask);
            const LabelRaster labels = classify_raster(model, img, scheme, mask ? &*mask : nullptr,
                                                       {classify.tile_size, classify.floor, threads});
            detail::write_label_output(labels, scheme, classify.out, classify.color);
        } else if (cmd_import->parsed()) {
            std::optional<GridSize> expected;
            if (import.width) expected = GridSize{*import.width, *import.height};
            const LabelRaster labels = import_external_labels(import.in, scheme, expected, threads);
            detail::write_label_output(labels, scheme, import.out, import.color);
        } else if (cmd_filter->parsed()) {
            const LabelRaster labels = io::read_labels(filter.in, scheme);
            detail::write_label_output(
                majority_filter(labels, scheme.masked_id(), filter.radius, filter.iterations, threads), scheme,
                filter.out, filter.color);
        } else if (cmd_assess->parsed()) {
            const LabelRaster ref = io::read_labels(assess_opt.ref, scheme);
            const LabelRaster pred = io::read_labels(assess_opt.pred, scheme);
            if (!same_grid(ref, pred)) throw IoError(assess_opt.pred, "size differs from the reference map");
            MaskRaster mask = assess_opt.mask.empty() ? MaskRaster(ref.width(), ref.height())
                                                      : io::read_mask(assess_opt.mask);
            if (!same_grid(mask, ref)) throw IoError(assess_opt.mask, "mask size differs from the label maps");
            if (!assess_opt.region.empty()) {
                const Region r = parse_region(assess_opt.region);
                coastal::detail::check_region(r, ref.width(), ref.height());
                for (std::size_t y = 0; y < mask.height(); ++y) {
                    for (std::size_t x = 0; x < mask.width(); ++x) {
                        const bool inside = x >= r.col && x < r.col + r.width && y >= r.row && y < r.row + r.height;
                        if (!inside) mask.set(x, y, false);
                    }
                }
            }
            const PointSample sample = sample_points(mask, assess_opt.n, assess_opt.seed);
            const ConfusionTally tally = build_confusion(ref, pred, sample, scheme, threads);
            const AccuracyReport report = assess(tally, scheme, assess_opt.n);
            detail::write_report(render_accuracy(report, report_format_for_path(assess_opt.out)), assess_opt.out, out);
            if (!assess_opt.json.empty()) io::write_text(render_accuracy(report, ReportFormat::json), assess_opt.json);
        } else if (cmd_area->parsed()) {
            LabelRaster labels = io::read_labels(area.labels, scheme);
            if (area.pixel_size) {
                labels.set_geo(labels.geo().with_pixel_size(*area.pixel_size, *area.pixel_size));
            }
            const AreaTable table = class_areas(labels, scheme, area.epoch, !area.no_groups);
            detail::write_report(render_areas(table, report_format_for_path(area.out)), area.out, out);
        } else if (cmd_change->parsed()) {
            AreaTable t0 = parse_areas_csv(io::read_text(change.t0), change.t0);
            AreaTable t1 = parse_areas_csv(io::read_text(change.t1), change.t1);
            add_group_rows(t0, scheme);
            add_group_rows(t1, scheme);
            const ReportFormat fmt =
                change.format.empty() ? report_format_for_path(change.out) : parse_report_format(change.format);
            detail::write_report(render_change(change_table(t0, t1, change.method), fmt), change.out, out);
        } else if (cmd_render->parsed()) {
            if (!render.labels.empty()) {
                io::write_colored_labels(io::read_labels(render.labels, scheme), scheme, render.out);
            } else {
                const LabelRaster a = io::read_labels(render.t0, scheme);
                const LabelRaster b = io::read_labels(render.t1, scheme);
                if (!same_grid(a, b)) throw IoError(render.t1, "size differs from --t0");
                std::filesystem::create_directories(render.out_dir);
                const std::filesystem::path dir(render.out_dir);
                io::write_colored_labels(a, scheme, (dir / "t0.png").string());
                io::write_colored_labels(b, scheme, (dir / "t1.png").string());
                io::write_image(change_mask(a, b, scheme.masked_id()), (dir / "change_mask.png").string());
            }
        }
    } catch (const IoError& e) {
        err << "coastcover: " << e.what() << '\n';
        return kExitInputError;
    } catch (const Error& e) {
        err << "coastcover: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "coastcover: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitOk;
}

} // namespace coastal::cli
