// Copyright 2026 The nadir authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

#pragma once

#include <cctype>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nadir/config.hpp"
#include "nadir/dataset.hpp"
#include "nadir/http_client.hpp"
#include "nadir/mission.hpp"
#include "nadir/provider.hpp"

namespace nadir {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // transport/protocol/unexpected
inline constexpr int kExitParse = 2;     // bad input or configuration
inline constexpr int kExitAuth = 3;      // missing key, HTTP 403, quota
inline constexpr int kExitIo = 4;        // filesystem trouble

/// Mission names land in paths; anything outside [A-Za-z0-9._-] becomes '-'.
inline std::string sanitize_mission_name(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) ||
                        c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '-');
    }
    while (!out.empty() && out.front() == '-') out.erase(out.begin());
    if (out.empty()) out = "mission";
    return out;
}

namespace detail {

// Staging area for command-line values; only flags the user actually passed
// make it into the override layer.
struct CliStage {
    std::string coords;
    std::string config_path;
    Config v;  // value slots for the flag bindings
    std::vector<std::function<void(nlohmann::json&)>> setters;
    std::vector<int> img_size;
    bool dry_run = false;

    nlohmann::json overrides() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& s : setters) s(j);
        return j;
    }
};

template <typename T>
void bind_flag(CLI::App* sub, CliStage& st, const std::string& flag, T& slot,
          const char* key, const std::string& desc) {
    CLI::Option* o = sub->add_option(flag, slot, desc);
    st.setters.push_back([o, &slot, key](nlohmann::json& j) {
        if (o->count() > 0) j[key] = slot;
    });
}

inline void add_download_flags(CLI::App* sub, CliStage& st) {
    CLI::Option* oc = sub->add_option("coords", st.coords,
                                      "lat_lon_agl, latTL_lonTL_latBR_lonBR_agl, or a "
                                      "file of 'lat lon agl' lines (may also come from "
                                      "the config file)");
    st.setters.push_back([oc, &st](nlohmann::json& j) {
        if (oc->count() > 0) j["coords"] = st.coords;
    });
    sub->add_option("--config", st.config_path, "JSON config file");
    bind_flag(sub, st, "--fov", st.v.fov_deg, "fov", "diagonal field of view, degrees");
    bind_flag(sub, st, "--aspect-w", st.v.aspect_w, "aspect_w", "aspect ratio width term");
    bind_flag(sub, st, "--aspect-h", st.v.aspect_h, "aspect_h", "aspect ratio height term");
    bind_flag(sub, st, "--map-type", st.v.map_type, "map_type", "satellite, roadmap or terrain");
    bind_flag(sub, st, "--data-dir", st.v.data_dir, "data_dir", "dataset root directory");
    bind_flag(sub, st, "--mission-name", st.v.mission_name, "mission_name",
         "mission folder name (default: derived from coords)");
    bind_flag(sub, st, "--vmargin", st.v.vmargin, "vmargin",
         "vertical margin fraction cropped from captures");
    bind_flag(sub, st, "--overlap", st.v.overlap, "overlap", "footprint overlap fraction");
    bind_flag(sub, st, "--seed", st.v.seed, "seed", "seed for jitter and splits");
    bind_flag(sub, st, "--retry", st.v.retry, "retry", "extra fetch attempts per image after the first");
    bind_flag(sub, st, "--concurrency", st.v.concurrency, "concurrency", "parallel downloads");
    bind_flag(sub, st, "--entropy-threshold", st.v.entropy_threshold, "entropy_threshold",
         "cleanup threshold, bits");
    bind_flag(sub, st, "--provider", st.v.provider, "provider", "google or mock");
    bind_flag(sub, st, "--mock-density", st.v.mock_density, "mock_density",
         "road density of the mock roadmap");
    bind_flag(sub, st, "--stepping", st.v.stepping, "stepping",
         "raster stepping: truncate or cover");
    bind_flag(sub, st, "--api-key", st.v.api_key, "api_key", "static map API key");
    bind_flag(sub, st, "--hide-labels", st.v.hide_labels, "hide_labels",
         "request label-free imagery (true/false)");
    CLI::Option* osz = sub->add_option("--img-size", st.img_size,
                                       "resize stored images to W H [C]")
                           ->expected(2, 3);
    st.setters.push_back([osz, &st](nlohmann::json& j) {
        if (osz->count() > 0) j["img_size"] = st.img_size;
    });
    sub->add_flag("--dry-run", st.dry_run, "plan and report without fetching");
}

inline Config make_config(const CliStage& st) {
    std::optional<std::filesystem::path> file;
    if (!st.config_path.empty()) file = st.config_path;
    Config cfg = resolve_config(st.overrides(), file);
    cfg.dry_run = st.dry_run;
    validate_config(cfg);
    if (cfg.coords.empty()) {
        throw ParseError("no coordinates: pass them as the positional argument "
                         "or as \"coords\" in the config file");
    }
    return cfg;
}

inline std::string derive_mission_name(const Config& cfg) {
    if (!cfg.mission_name.empty()) return cfg.mission_name;
    std::filesystem::path p(cfg.coords);
    if (std::filesystem::exists(p) && std::filesystem::is_regular_file(p)) {
        return sanitize_mission_name(p.stem().string());
    }
    return sanitize_mission_name(cfg.coords);
}

inline std::unique_ptr<Provider> make_provider(const Config& cfg) {
    if (cfg.provider == "mock") {
        MockOptions opt;
        opt.seed = static_cast<uint64_t>(cfg.seed);
        opt.roadmap_density = cfg.mock_density;
        return std::make_unique<MockProvider>(opt);
    }
    const std::string key = resolve_api_key(cfg.api_key);
    if (key.empty()) {
        throw AuthError("no API key: pass --api-key, set " + std::string(kApiKeyEnvVar) +
                        ", or put {\"api_key\": ...} in " + kSecretsFile);
    }
    RetryPolicy policy;
    policy.retries = cfg.retry;
    policy.jitter_seed = static_cast<uint32_t>(cfg.seed);
    return std::make_unique<StaticMapClient>(key, make_http_transport(), policy);
}

inline void write_mission_json(const std::filesystem::path& dir, const Config& cfg,
                               const MissionPlan& plan) {
    ordered_json j;
    j["config"] = config_echo(cfg);
    j["plan"] = {{"rows", plan.n_rows},
                 {"cols", plan.n_cols},
                 {"images", plan.waypoints.size()},
                 {"utm_zone", plan.utm_zone},
                 {"zoom", plan.waypoints.empty() ? 0 : plan.waypoints.front().zoom},
                 {"res_x", plan.waypoints.empty() ? 0 : plan.waypoints.front().res_x},
                 {"res_y", plan.waypoints.empty() ? 0 : plan.waypoints.front().res_y}};
    std::ofstream out(dir / "mission.json", std::ios::trunc);
    if (!out) throw IoError("cannot create '" + (dir / "mission.json").string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed on '" + (dir / "mission.json").string() + "'");
}

inline int run_download(const Config& cfg_in, const MissionPlan& plan, std::ostream& out) {
    Config cfg = cfg_in;
    cfg.mission_name = derive_mission_name(cfg);
    const MapType map_type = map_type_from_string(cfg.map_type);
    const std::filesystem::path dir =
        mission_dir(cfg.data_dir, cfg.mission_name, map_type, cfg.overlap);

    out << "mission " << cfg.mission_name << ": " << plan.waypoints.size() << " image"
        << (plan.waypoints.size() == 1 ? "" : "s");
    if (plan.n_rows * plan.n_cols == static_cast<int>(plan.waypoints.size()) &&
        plan.utm_zone != 0) {
        out << " (" << plan.n_rows << " rows x " << plan.n_cols << " cols, zone "
            << plan.utm_zone << ")";
    }
    if (!plan.waypoints.empty()) {
        out << ", zoom " << plan.waypoints.front().zoom << ", "
            << plan.waypoints.front().res_x << "x" << plan.waypoints.front().res_y << " px";
    }
    out << "\n";

    if (cfg.dry_run) {
        out << "dry run: would fetch " << plan.waypoints.size() << " request"
            << (plan.waypoints.size() == 1 ? "" : "s") << " into " << dir.string() << "\n";
        return kExitOk;
    }

    std::unique_ptr<Provider> provider = make_provider(cfg);
    DownloadOptions opt;
    opt.data_dir = cfg.data_dir;
    opt.mission_name = cfg.mission_name;
    opt.map_type = map_type;
    opt.vmargin = cfg.vmargin;
    opt.img_w = cfg.img_w;
    opt.img_h = cfg.img_h;
    opt.img_c = cfg.img_c;
    opt.overlap = cfg.overlap;
    opt.concurrency = cfg.concurrency;
    opt.hide_labels = cfg.hide_labels;

    const DownloadReport report = write_dataset(plan, *provider, opt);
    write_mission_json(report.dir, cfg, plan);
    out << "wrote " << report.n_downloaded << " image"
        << (report.n_downloaded == 1 ? "" : "s");
    if (report.n_skipped > 0) out << " (" << report.n_skipped << " already present)";
    out << " to " << report.dir.string() << "\n";
    return kExitOk;
}

inline CameraSpec camera_of(const Config& cfg) {
    return CameraSpec{cfg.fov_deg, cfg.aspect_w, cfg.aspect_h};
}

inline bool coords_is_file(const std::string& coords) {
    std::error_code ec;
    return std::filesystem::is_regular_file(coords, ec);
}

inline int cmd_download_single(const CliStage& st, std::ostream& out) {
    Config cfg = make_config(st);
    GeoPoint center;
    double agl = 0.0;
    if (coords_is_file(cfg.coords)) {
        const auto pts = load_coords_file(cfg.coords);
        center = pts.front().first;
        agl = pts.front().second;
    } else {
        const Coords c = parse_coords(cfg.coords);
        if (const auto* s = std::get_if<SingleCoords>(&c)) {
            center = s->point;
            agl = s->agl_m;
        } else {
            // A box collapses to one capture at its north-west corner.
            const auto& r = std::get<RasterCoords>(c);
            center = r.box.top_left;
            agl = r.agl_m;
        }
    }
    return run_download(cfg, plan_single(center, agl, camera_of(cfg)), out);
}

inline int cmd_download_from_list(const CliStage& st, std::ostream& out) {
    Config cfg = make_config(st);
    if (!coords_is_file(cfg.coords)) {
        throw ParseError("download-from-list needs a coordinate file, got '" +
                         cfg.coords + "'");
    }
    return run_download(cfg, plan_list(load_coords_file(cfg.coords), camera_of(cfg)), out);
}

inline int cmd_download_raster(const CliStage& st, std::ostream& out) {
    Config cfg = make_config(st);
    if (coords_is_file(cfg.coords)) {
        throw ParseError("download-raster needs latTL_lonTL_latBR_lonBR_agl, not a file");
    }
    const Coords c = parse_coords(cfg.coords);
    const auto* r = std::get_if<RasterCoords>(&c);
    if (!r) {
        throw ParseError("download-raster needs latTL_lonTL_latBR_lonBR_agl "
                         "(5 fields), got a single point");
    }
    const MissionPlan plan = plan_raster(r->box, r->agl_m, camera_of(cfg), cfg.overlap,
                                         stepping_from_string(cfg.stepping));
    return run_download(cfg, plan, out);
}

struct CleanArgs {
    std::string dir;
    std::string reference_dir;
    std::string config_path;
    double threshold = 2.1;
    bool threshold_set = false;
    int seed = 2024;
    bool seed_set = false;
    double train = 0.8, val = 0.1, test = 0.1;
};

inline int cmd_clean(const CleanArgs& args, std::ostream& out) {
    nlohmann::json overrides = nlohmann::json::object();
    if (args.threshold_set) overrides["entropy_threshold"] = args.threshold;
    if (args.seed_set) overrides["seed"] = args.seed;
    std::optional<std::filesystem::path> file;
    if (!args.config_path.empty()) file = args.config_path;
    const Config cfg = resolve_config(overrides, file);
    validate_config(cfg);

    const std::filesystem::path dir(args.dir);
    const auto records = read_meta_csv(dir / kMetaCsvName);

    // A sibling roadmap_{overlap} folder supplies reference entropies for
    // non-roadmap datasets; roads are where human detail concentrates.
    std::vector<MetaRecord> ref;
    std::string ref_name;
    std::filesystem::path ref_dir;
    if (!args.reference_dir.empty()) {
        ref_dir = args.reference_dir;
    } else {
        const std::string own = dir.filename().string();
        if (own.rfind("roadmap_", 0) != 0) {
            const auto us = own.rfind('_');
            if (us != std::string::npos) {
                const std::filesystem::path cand =
                    dir.parent_path() / ("roadmap" + own.substr(us));
                if (std::filesystem::exists(cand / kMetaCsvName)) ref_dir = cand;
            }
        }
    }
    if (!ref_dir.empty()) {
        ref = read_meta_csv(ref_dir / kMetaCsvName);
        ref_name = ref_dir.filename().string();
    }

    const CleanupResult result = cleanup_records(records, cfg.entropy_threshold,
                                                 ref.empty() ? nullptr : &ref, ref_name);
    write_cleanup_manifest(dir / "clean_manifest.json", result);

    SplitFractions fractions{args.train, args.val, args.test};
    if (!result.kept.empty()) {
        const SplitManifest split = make_split(result.kept, fractions,
                                               static_cast<uint32_t>(cfg.seed));
        write_split_manifest(dir / "split_manifest.json", split);
        out << "split " << split.train.size() << "/" << split.val.size() << "/"
            << split.test.size() << " train/val/test (seed " << split.seed << ")\n";
    } else {
        out << "nothing to split: no records at or above the threshold\n";
    }
    out << "kept " << result.kept.size() << ", discarded " << result.discarded.size()
        << " of " << records.size() << " (threshold " << cfg.entropy_threshold;
    if (!ref_name.empty()) out << ", reference " << ref_name;
    out << ")\n";
    for (const auto& w : result.warnings) out << "warning: " << w << "\n";
    return kExitOk;
}

struct StatsArgs {
    std::string dir;
    std::string config_path;
    double threshold = 2.1;
    bool threshold_set = false;
};

inline int cmd_stats(const StatsArgs& args, std::ostream& out) {
    nlohmann::json overrides = nlohmann::json::object();
    if (args.threshold_set) overrides["entropy_threshold"] = args.threshold;
    std::optional<std::filesystem::path> file;
    if (!args.config_path.empty()) file = args.config_path;
    const Config cfg = resolve_config(overrides, file);
    validate_config(cfg);

    const std::filesystem::path dir(args.dir);
    const auto records = read_meta_csv(dir / kMetaCsvName);
    const EntropyStats stats = entropy_stats(records, cfg.entropy_threshold);
    write_entropy_hist_csv(dir / "entropy_hist.csv", stats);

    char line[160];
    std::snprintf(line, sizeof(line),
                  "%llu images: entropy mean %.4f, min %.4f, max %.4f; %.1f%% below %.2f\n",
                  static_cast<unsigned long long>(stats.total), stats.mean, stats.min,
                  stats.max, 100.0 * stats.below_threshold_fraction, cfg.entropy_threshold);
    out << line;
    out << "wrote " << (dir / "entropy_hist.csv").string() << "\n";
    return kExitOk;
}

}  // namespace detail

/// Entry point shared by the binary and the in-process tests.
inline int run_cli(int argc, const char* const* argv,
                   std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"virtual nadir-camera mapping missions over static map imagery"};
    app.require_subcommand(1);

    detail::CliStage single_st, list_st, raster_st;
    detail::CleanArgs clean_args;
    detail::StatsArgs stats_args;

    CLI::App* single = app.add_subcommand("download-single", "capture one image at a point");
    detail::add_download_flags(single, single_st);
    CLI::App* list = app.add_subcommand("download-from-list",
                                        "capture one image per point in a file");
    detail::add_download_flags(list, list_st);
    CLI::App* raster = app.add_subcommand("download-raster",
                                          "cover a bounding box with a grid of captures");
    detail::add_download_flags(raster, raster_st);

    CLI::App* clean = app.add_subcommand("clean",
                                         "entropy-filter a dataset and emit split manifests");
    clean->add_option("dir", clean_args.dir, "dataset folder holding meta_data.csv")
        ->required();
    clean->add_option("--config", clean_args.config_path, "JSON config file");
    clean->add_option("--entropy-threshold", clean_args.threshold, "cleanup threshold, bits")
        ->each([&](const std::string&) { clean_args.threshold_set = true; });
    clean->add_option("--seed", clean_args.seed, "split shuffle seed")
        ->each([&](const std::string&) { clean_args.seed_set = true; });
    clean->add_option("--reference-dir", clean_args.reference_dir,
                      "folder whose entropies drive the filter");
    clean->add_option("--train-frac", clean_args.train, "train fraction");
    clean->add_option("--val-frac", clean_args.val, "validation fraction");
    clean->add_option("--test-frac", clean_args.test, "test fraction");

    CLI::App* stats = app.add_subcommand("stats", "entropy histogram of a dataset");
    stats->add_option("dir", stats_args.dir, "dataset folder holding meta_data.csv")
        ->required();
    stats->add_option("--config", stats_args.config_path, "JSON config file");
    stats->add_option("--entropy-threshold", stats_args.threshold, "reporting threshold, bits")
        ->each([&](const std::string&) { stats_args.threshold_set = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    }

    try {
        if (single->parsed()) return detail::cmd_download_single(single_st, out);
        if (list->parsed()) return detail::cmd_download_from_list(list_st, out);
        if (raster->parsed()) return detail::cmd_download_raster(raster_st, out);
        if (clean->parsed()) return detail::cmd_clean(clean_args, out);
        if (stats->parsed()) return detail::cmd_stats(stats_args, out);
        err << "error: no subcommand\n";
        return kExitParse;
    } catch (const AuthError& e) {
        err << "error: " << e.what() << "\n";
        return kExitAuth;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace nadir
