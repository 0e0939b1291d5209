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

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "nadir/image_io.hpp"
#include "nadir/mission.hpp"
#include "nadir/provider.hpp"

namespace nadir {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

/// One row of meta_data.csv.
struct MetaRecord {
    std::string img_name;
    int col = 0;
    int row = 0;
    double lat = 0.0;
    double lon = 0.0;
    int alt = 0;  // zoom level of the capture
    double entropy = 0.0;
};

inline constexpr const char* kMetaCsvName = "meta_data.csv";
inline constexpr const char* kMetaCsvHeader = "img_names,columns,rows,Lat,Lon,Alt,entropy";

/// "{row:04}_{col:04}_{lat:.6f}_{lon:.6f}.png"
inline std::string image_filename(int row, int col, double lat, double lon) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%04d_%04d_%.6f_%.6f.png", row, col, lat, lon);
    return buf;
}

/// "{maptype}_{overlap percent}", e.g. satellite_0, roadmap_25.
inline std::string maptype_dirname(MapType t, double overlap) {
    return to_string(t) + "_" + std::to_string(static_cast<int>(std::lround(overlap * 100.0)));
}

inline fs::path mission_dir(const fs::path& data_dir, const std::string& mission_name,
                            MapType t, double overlap) {
    return data_dir / mission_name / maptype_dirname(t, overlap);
}

// --------------------------------- CSV --------------------------------------

// Lat/Lon carry 9 decimals (~0.1 mm) so re-projecting rows reproduces the
// planned grid; the 6-decimal values live in the file names.
inline void write_meta_csv(const fs::path& path, const std::vector<MetaRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    out << kMetaCsvHeader << '\n';
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.9f,%.9f,%d,%.12g",
                      r.img_name.c_str(), r.col, r.row, r.lat, r.lon, r.alt, r.entropy);
        out << buf << '\n';
    }
    if (!out) throw IoError("write failed on '" + path.string() + "'");
}

inline std::vector<MetaRecord> read_meta_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMetaCsvHeader) {
        throw ParseError("'" + path.string() + "': expected header '" +
                         kMetaCsvHeader + "', got '" + line + "'");
    }
    std::vector<MetaRecord> out;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split(line, ',');
        if (fields.size() != 7) {
            throw ParseError("expected 7 comma-separated fields", lineno);
        }
        MetaRecord r;
        r.img_name = std::string(fields[0]);
        try {
            r.col = static_cast<int>(detail::parse_double_field(fields[1], "columns"));
            r.row = static_cast<int>(detail::parse_double_field(fields[2], "rows"));
            r.lat = detail::parse_double_field(fields[3], "Lat");
            r.lon = detail::parse_double_field(fields[4], "Lon");
            r.alt = static_cast<int>(detail::parse_double_field(fields[5], "Alt"));
            r.entropy = detail::parse_double_field(fields[6], "entropy");
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ------------------------------- download -----------------------------------

struct DownloadOptions {
    fs::path data_dir = "datasets";
    std::string mission_name = "mission";
    MapType map_type = MapType::satellite;
    double vmargin = 0.2;
    int img_w = 0;  // 0 keeps the native capture size
    int img_h = 0;
    int img_c = 0;  // 0 keeps the native channel count
    double overlap = 0.0;  // only names the output folder
    int concurrency = 4;
    bool hide_labels = true;
};

struct DownloadReport {
    fs::path dir;
    std::vector<MetaRecord> records;  // plan order
    int n_downloaded = 0;
    int n_skipped = 0;
};

/// Fetches every waypoint of a plan into
/// {data_dir}/{mission_name}/{maptype}_{overlap}/, skipping files that
/// already exist with nonzero size, and writes meta_data.csv.
///
/// Per image: capture with the vertical margin extension, crop the margin,
/// take the entropy of the cropped frame, then apply the optional resize.
/// Waypoints are fetched by a small worker pool; outputs land in plan order.
inline DownloadReport write_dataset(const MissionPlan& plan, Provider& provider,
                                    const DownloadOptions& opt) {
    if (plan.waypoints.empty()) throw DomainError("write_dataset: empty plan");
    if (opt.concurrency < 1) throw DomainError("write_dataset: concurrency must be >= 1");
    if (opt.mission_name.empty()) throw DomainError("write_dataset: mission name is empty");
    if ((opt.img_w == 0) != (opt.img_h == 0)) {
        throw DomainError("write_dataset: resize needs both width and height");
    }

    DownloadReport report;
    report.dir = mission_dir(opt.data_dir, opt.mission_name, opt.map_type, opt.overlap);
    std::error_code ec;
    fs::create_directories(report.dir, ec);
    if (ec) throw IoError("cannot create '" + report.dir.string() + "': " + ec.message());

    // Entropy of already-present files comes from the previous run's CSV when
    // possible; re-measuring a resized file would drift.
    std::unordered_map<std::string, double> prior_entropy;
    const fs::path csv_path = report.dir / kMetaCsvName;
    if (fs::exists(csv_path)) {
        try {
            for (const auto& r : read_meta_csv(csv_path)) {
                prior_entropy.emplace(r.img_name, r.entropy);
            }
        } catch (const Error&) {
            // A half-written CSV just disables entropy reuse.
        }
    }

    const size_t n = plan.waypoints.size();
    std::vector<MetaRecord> records(n);
    std::vector<char> skipped(n, 0);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<size_t> next{0};

    auto worker = [&] {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            const Waypoint& wp = plan.waypoints[i];
            try {
                MetaRecord rec;
                rec.img_name = image_filename(wp.row, wp.col, wp.center.lat, wp.center.lon);
                rec.col = wp.col;
                rec.row = wp.row;
                rec.lat = wp.center.lat;
                rec.lon = wp.center.lon;
                rec.alt = wp.zoom;

                const fs::path out_path = report.dir / rec.img_name;
                std::error_code sec;
                const auto size = fs::file_size(out_path, sec);
                if (!sec && size > 0) {
                    const auto it = prior_entropy.find(rec.img_name);
                    rec.entropy = it != prior_entropy.end()
                                      ? it->second
                                      : shannon_entropy(read_image_file(out_path)).bits;
                    skipped[i] = 1;
                    records[i] = std::move(rec);
                    continue;
                }

                CaptureSpec cap;
                cap.center = wp.center;
                cap.zoom = wp.zoom;
                cap.res_x = wp.res_x;
                cap.res_y = wp.res_y;
                cap.map_type = opt.map_type;
                cap.hide_labels = opt.hide_labels;
                cap = with_vertical_margin(cap, opt.vmargin);

                ProviderResult got = provider.capture(cap);
                Image img = crop_vmargin(got.image, opt.vmargin);
                rec.entropy = shannon_entropy(img).bits;
                if (opt.img_w > 0) {
                    img = resize(img, opt.img_w, opt.img_h,
                                 opt.img_c == 0 ? img.channels : opt.img_c);
                }
                write_png_file(out_path, img);
                records[i] = std::move(rec);
            } catch (...) {
                errors[i] = std::current_exception();
                return;
            }
        }
    };

    const int n_threads = std::min<int>(opt.concurrency, static_cast<int>(n));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (char s : skipped) {
        if (s) ++report.n_skipped;
    }
    report.n_downloaded = static_cast<int>(n) - report.n_skipped;
    report.records = std::move(records);
    write_meta_csv(csv_path, report.records);
    return report;
}

// -------------------------------- cleanup -----------------------------------

struct CleanupResult {
    double threshold = 0.0;
    std::string reference;  // maptype whose entropy drove the decision, "" = own
    std::vector<MetaRecord> kept;
    std::vector<MetaRecord> discarded;
    std::vector<std::string> warnings;
};

/// Filters records whose effective entropy falls below the threshold
/// (records at exactly the threshold stay). When a roadmap reference is
/// given, each record is judged by the entropy of the roadmap image at the
/// same (row, col); records without a counterpart fall back to their own
/// entropy with a warning. Nothing is deleted from disk.
inline CleanupResult cleanup_records(const std::vector<MetaRecord>& records,
                                     double threshold,
                                     const std::vector<MetaRecord>* roadmap_ref = nullptr,
                                     const std::string& reference_name = "") {
    if (!(threshold >= 0.0) || !(threshold <= 8.0)) {
        throw DomainError("cleanup_records: threshold must lie in [0, 8]");
    }
    CleanupResult result;
    result.threshold = threshold;
    result.reference = roadmap_ref ? reference_name : "";

    std::map<std::pair<int, int>, double> ref_entropy;
    if (roadmap_ref) {
        for (const auto& r : *roadmap_ref) {
            ref_entropy[{r.row, r.col}] = r.entropy;
        }
    }
    for (const auto& r : records) {
        double eff = r.entropy;
        if (roadmap_ref) {
            const auto it = ref_entropy.find({r.row, r.col});
            if (it != ref_entropy.end()) {
                eff = it->second;
            } else {
                result.warnings.push_back("no reference image for (" +
                                          std::to_string(r.row) + ", " +
                                          std::to_string(r.col) + "); used own entropy");
            }
        }
        (eff >= threshold ? result.kept : result.discarded).push_back(r);
    }
    return result;
}

inline void write_cleanup_manifest(const fs::path& path, const CleanupResult& result) {
    ordered_json j;
    j["threshold"] = result.threshold;
    j["reference"] = result.reference;
    j["kept"] = ordered_json::array();
    for (const auto& r : result.kept) j["kept"].push_back(r.img_name);
    j["discarded"] = ordered_json::array();
    for (const auto& r : result.discarded) j["discarded"].push_back(r.img_name);
    j["warnings"] = result.warnings;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed on '" + path.string() + "'");
}

// --------------------------------- split ------------------------------------

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

struct ScalerStats {
    double mean_easting = 0.0;
    double std_easting = 1.0;
    double mean_northing = 0.0;
    double std_northing = 1.0;
};

struct SplitManifest {
    uint32_t seed = 0;
    SplitFractions fractions;
    int utm_zone = 0;
    ScalerStats stats;  // fitted on the train split only
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

/// Position label of a record in the manifest's pinned UTM frame,
/// standardized by the train-set statistics.
inline std::pair<double, double> normalized_label(const MetaRecord& r, int zone,
                                                  const ScalerStats& s) {
    const UtmCoord u = latlon_to_utm({r.lat, r.lon}, zone);
    return {(u.easting - s.mean_easting) / s.std_easting,
            (u.northing - s.mean_northing) / s.std_northing};
}

/// Deterministic train/val/test split. The record list is shuffled by a
/// Fisher-Yates pass driven by mt19937(seed) (the generator's output is
/// specified by the standard, so the order is stable across platforms),
/// sized by largest-remainder apportionment, and the position scaler is
/// fitted on the train records only, in the UTM zone of the first input
/// record.
inline SplitManifest make_split(const std::vector<MetaRecord>& records,
                                const SplitFractions& f, uint32_t seed) {
    if (records.empty()) throw DomainError("make_split: no records");
    if (!(f.train >= 0.0) || !(f.val >= 0.0) || !(f.test >= 0.0) ||
        std::fabs(f.train + f.val + f.test - 1.0) > 1e-9) {
        throw DomainError("make_split: fractions must be nonnegative and sum to 1");
    }

    const size_t n = records.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937 rng(seed);
    for (size_t i = n - 1; i > 0; --i) {
        const size_t j = rng() % (i + 1);
        std::swap(order[i], order[j]);
    }

    const double want[3] = {f.train * n, f.val * n, f.test * n};
    size_t counts[3];
    double rem[3];
    size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        counts[k] = static_cast<size_t>(std::floor(want[k]));
        rem[k] = want[k] - static_cast<double>(counts[k]);
        assigned += counts[k];
    }
    while (assigned < n) {
        int best = 0;
        for (int k = 1; k < 3; ++k) {
            if (rem[k] > rem[best]) best = k;
        }
        ++counts[best];
        rem[best] = -1.0;
        ++assigned;
    }

    SplitManifest m;
    m.seed = seed;
    m.fractions = f;
    m.utm_zone = utm_zone_for(records[0].lon);

    std::vector<std::string>* buckets[3] = {&m.train, &m.val, &m.test};
    size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
        for (size_t c = 0; c < counts[k]; ++c) {
            buckets[k]->push_back(records[order[pos++]].img_name);
        }
    }

    // Population statistics of the train-set UTM positions.
    double se = 0.0, sn = 0.0;
    std::unordered_map<std::string, const MetaRecord*> by_name;
    for (const auto& r : records) by_name[r.img_name] = &r;
    std::vector<UtmCoord> train_utm;
    train_utm.reserve(m.train.size());
    for (const auto& name : m.train) {
        const MetaRecord* r = by_name.at(name);
        train_utm.push_back(latlon_to_utm({r->lat, r->lon}, m.utm_zone));
        se += train_utm.back().easting;
        sn += train_utm.back().northing;
    }
    if (!train_utm.empty()) {
        const double tn = static_cast<double>(train_utm.size());
        m.stats.mean_easting = se / tn;
        m.stats.mean_northing = sn / tn;
        double ve = 0.0, vn = 0.0;
        for (const auto& u : train_utm) {
            ve += (u.easting - m.stats.mean_easting) * (u.easting - m.stats.mean_easting);
            vn += (u.northing - m.stats.mean_northing) * (u.northing - m.stats.mean_northing);
        }
        m.stats.std_easting = std::sqrt(ve / tn);
        m.stats.std_northing = std::sqrt(vn / tn);
        // A degenerate (single-point) train set scales by 1 instead of 0.
        if (m.stats.std_easting == 0.0) m.stats.std_easting = 1.0;
        if (m.stats.std_northing == 0.0) m.stats.std_northing = 1.0;
    }
    return m;
}

inline void write_split_manifest(const fs::path& path, const SplitManifest& m) {
    ordered_json j;
    j["seed"] = m.seed;
    j["fractions"] = {{"train", m.fractions.train},
                      {"val", m.fractions.val},
                      {"test", m.fractions.test}};
    j["utm_zone"] = m.utm_zone;
    j["label_stats"] = {
        {"easting", {{"mean", m.stats.mean_easting}, {"std", m.stats.std_easting}}},
        {"northing", {{"mean", m.stats.mean_northing}, {"std", m.stats.std_northing}}},
    };
    j["splits"] = {{"train", m.train}, {"val", m.val}, {"test", m.test}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed on '" + path.string() + "'");
}

inline SplitManifest read_split_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
    SplitManifest m;
    try {
        m.seed = j.at("seed").get<uint32_t>();
        m.fractions.train = j.at("fractions").at("train").get<double>();
        m.fractions.val = j.at("fractions").at("val").get<double>();
        m.fractions.test = j.at("fractions").at("test").get<double>();
        m.utm_zone = j.at("utm_zone").get<int>();
        m.stats.mean_easting = j.at("label_stats").at("easting").at("mean").get<double>();
        m.stats.std_easting = j.at("label_stats").at("easting").at("std").get<double>();
        m.stats.mean_northing = j.at("label_stats").at("northing").at("mean").get<double>();
        m.stats.std_northing = j.at("label_stats").at("northing").at("std").get<double>();
        m.train = j.at("splits").at("train").get<std::vector<std::string>>();
        m.val = j.at("splits").at("val").get<std::vector<std::string>>();
        m.test = j.at("splits").at("test").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
    return m;
}

// ------------------------------ entropy stats -------------------------------

inline constexpr int kEntropyHistBins = 64;

struct EntropyStats {
    std::array<uint64_t, kEntropyHistBins> bins{};  // over [0, 8] bits
    uint64_t total = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double below_threshold_fraction = 0.0;
};

inline EntropyStats entropy_stats(const std::vector<MetaRecord>& records, double threshold) {
    if (records.empty()) throw DomainError("entropy_stats: no records");
    EntropyStats s;
    s.total = records.size();
    s.min = records.front().entropy;
    s.max = records.front().entropy;
    double sum = 0.0;
    uint64_t below = 0;
    for (const auto& r : records) {
        if (!(r.entropy >= 0.0) || !(r.entropy <= 8.0 + 1e-12)) {
            throw DomainError("entropy_stats: entropy outside [0, 8] for '" + r.img_name + "'");
        }
        const double width = 8.0 / kEntropyHistBins;
        const int bin = std::min(kEntropyHistBins - 1,
                                 static_cast<int>(std::floor(r.entropy / width)));
        ++s.bins[bin];
        s.min = std::min(s.min, r.entropy);
        s.max = std::max(s.max, r.entropy);
        sum += r.entropy;
        if (r.entropy < threshold) ++below;
    }
    s.mean = sum / static_cast<double>(s.total);
    s.below_threshold_fraction = static_cast<double>(below) / static_cast<double>(s.total);
    return s;
}

inline void write_entropy_hist_csv(const fs::path& path, const EntropyStats& s) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    out << "bin_lo,bin_hi,count\n";
    char buf[96];
    const double width = 8.0 / kEntropyHistBins;
    for (int i = 0; i < kEntropyHistBins; ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%llu", i * width, (i + 1) * width,
                      static_cast<unsigned long long>(s.bins[i]));
        out << buf << '\n';
    }
    if (!out) throw IoError("write failed on '" + path.string() + "'");
}

}  // namespace nadir
