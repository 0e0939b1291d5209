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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>

#include "nadir/dataset.hpp"
#include "test_util.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using namespace nadir;

namespace {

// 5 rows x 4 cols of 323x242 captures at zoom 18.
MissionPlan small_plan() {
    return plan_raster(GeoBBox({35.16, -89.90}, {35.1543274919, -89.8920098802}),
                       120.0, CameraSpec{});
}

DownloadOptions options_for(const testutil::TempDir& tmp, const std::string& name) {
    DownloadOptions opt;
    opt.data_dir = tmp.path();
    opt.mission_name = name;
    opt.map_type = MapType::satellite;
    opt.vmargin = 0.2;
    opt.concurrency = 4;
    return opt;
}

struct CountingProvider : Provider {
    MockProvider inner{{2024, 0.5}};
    std::atomic<int> calls{0};

    ProviderResult capture(const CaptureSpec& spec) override {
        ++calls;
        return inner.capture(spec);
    }
};

std::string slurp(const std::filesystem::path& p) {
    const auto bytes = read_file(p);
    return std::string(bytes.begin(), bytes.end());
}

std::vector<MetaRecord> grid_records(int n_rows, int n_cols) {
    std::vector<MetaRecord> out;
    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < n_cols; ++c) {
            MetaRecord rec;
            rec.row = r;
            rec.col = c;
            rec.lat = 35.16 - 0.001 * r;
            rec.lon = -89.90 + 0.001 * c;
            rec.img_name = image_filename(r, c, rec.lat, rec.lon);
            rec.alt = 18;
            rec.entropy = 4.0 + 0.01 * (r * n_cols + c);
            out.push_back(rec);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("image file and folder naming", "[dataset]") {
    REQUIRE(image_filename(0, 0, 35.16, -89.90) == "0000_0000_35.160000_-89.900000.png");
    REQUIRE(image_filename(3, 17, 35.1571637459, -89.8960049401) ==
            "0003_0017_35.157164_-89.896005.png");
    REQUIRE(image_filename(41, 42, -33.8568, 151.2153) ==
            "0041_0042_-33.856800_151.215300.png");

    REQUIRE(maptype_dirname(MapType::satellite, 0.0) == "satellite_0");
    REQUIRE(maptype_dirname(MapType::roadmap, 0.25) == "roadmap_25");
    REQUIRE(maptype_dirname(MapType::terrain, 0.3) == "terrain_30");
    REQUIRE(mission_dir("data", "m1", MapType::satellite, 0.0) ==
            std::filesystem::path("data") / "m1" / "satellite_0");
}

TEST_CASE("meta CSV round-trips its records", "[dataset]") {
    testutil::TempDir tmp;
    std::vector<MetaRecord> recs = grid_records(2, 3);
    recs[0].entropy = 0.0;
    recs[1].entropy = 7.999999999999;
    recs[2].entropy = 2.0999999;
    const auto path = tmp.path() / kMetaCsvName;
    write_meta_csv(path, recs);

    // Header is the exact published contract.
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "img_names,columns,rows,Lat,Lon,Alt,entropy");

    const auto back = read_meta_csv(path);
    REQUIRE(back.size() == recs.size());
    for (size_t i = 0; i < recs.size(); ++i) {
        REQUIRE(back[i].img_name == recs[i].img_name);
        REQUIRE(back[i].col == recs[i].col);
        REQUIRE(back[i].row == recs[i].row);
        REQUIRE(back[i].alt == recs[i].alt);
        REQUIRE(back[i].lat == Approx(recs[i].lat).margin(5e-10));   // 9 decimals
        REQUIRE(back[i].lon == Approx(recs[i].lon).margin(5e-10));
        REQUIRE(back[i].entropy == Approx(recs[i].entropy).margin(1e-10));
    }
}

TEST_CASE("meta CSV rejects malformed input", "[dataset]") {
    testutil::TempDir tmp;
    const auto path = tmp.path() / "bad.csv";

    { std::ofstream out(path); out << "name,col,row\n"; }
    REQUIRE_THROWS_MATCHES(read_meta_csv(path), ParseError,
                           Catch::Matchers::MessageMatches(
                               ContainsSubstring("img_names,columns,rows")));

    {
        std::ofstream out(path);
        out << kMetaCsvHeader << "\n";
        out << "a.png,1,2,35.0,-89.0,18\n";  // six fields
    }
    REQUIRE_THROWS_MATCHES(read_meta_csv(path), ParseError,
                           Catch::Matchers::MessageMatches(
                               ContainsSubstring("(line 2)")));

    {
        std::ofstream out(path);
        out << kMetaCsvHeader << "\n";
        out << "a.png,1,2,35.0,-89.0,18,4.2\n";
        out << "b.png,1,2,oops,-89.0,18,4.2\n";
    }
    REQUIRE_THROWS_MATCHES(read_meta_csv(path), ParseError,
                           Catch::Matchers::MessageMatches(
                               ContainsSubstring("(line 3)")));

    { std::ofstream out(path); }
    REQUIRE_THROWS_AS(read_meta_csv(path), ParseError);

    REQUIRE_THROWS_AS(read_meta_csv(tmp.path() / "missing.csv"), IoError);
}

TEST_CASE("write_dataset fetches a plan into the published layout", "[dataset]") {
    testutil::TempDir tmp;
    const MissionPlan plan = small_plan();
    REQUIRE(plan.waypoints.size() == 20);

    CountingProvider provider;
    const DownloadReport report = write_dataset(plan, provider, options_for(tmp, "unit"));

    REQUIRE(report.dir == tmp.path() / "unit" / "satellite_0");
    REQUIRE(report.n_downloaded == 20);
    REQUIRE(report.n_skipped == 0);
    REQUIRE(provider.calls == 20);
    REQUIRE(report.records.size() == 20);

    for (size_t i = 0; i < report.records.size(); ++i) {
        const Waypoint& wp = plan.waypoints[i];
        const MetaRecord& rec = report.records[i];
        REQUIRE(rec.row == wp.row);
        REQUIRE(rec.col == wp.col);
        REQUIRE(rec.alt == wp.zoom);
        REQUIRE(rec.img_name == image_filename(wp.row, wp.col, wp.center.lat, wp.center.lon));

        const Image img = read_image_file(report.dir / rec.img_name);
        REQUIRE(img.width == 323);
        // 242 requested, margin-grown to 303, 30 rows trimmed per edge.
        REQUIRE(img.height == 243);
        // Stored pixels are the entropy-measured frame (no resize configured).
        REQUIRE(shannon_entropy(img).bits == rec.entropy);
    }

    // CSV mirrors the in-memory records in plan order.
    const auto csv = read_meta_csv(report.dir / kMetaCsvName);
    REQUIRE(csv.size() == 20);
    for (size_t i = 0; i < csv.size(); ++i) {
        REQUIRE(csv[i].img_name == report.records[i].img_name);
    }
}

TEST_CASE("write_dataset resumes instead of refetching", "[dataset]") {
    testutil::TempDir tmp;
    const MissionPlan plan = small_plan();
    CountingProvider provider;
    const DownloadOptions opt = options_for(tmp, "resume");

    const DownloadReport first = write_dataset(plan, provider, opt);
    const std::string csv_before = slurp(first.dir / kMetaCsvName);
    const std::string sample_name = first.records[7].img_name;
    const std::string sample_bytes = slurp(first.dir / sample_name);

    // Second run touches nothing.
    const DownloadReport second = write_dataset(plan, provider, opt);
    REQUIRE(second.n_downloaded == 0);
    REQUIRE(second.n_skipped == 20);
    REQUIRE(provider.calls == 20);
    REQUIRE(slurp(first.dir / kMetaCsvName) == csv_before);
    for (size_t i = 0; i < second.records.size(); ++i) {
        // Reused values pass through the CSV's 12 significant digits.
        REQUIRE(second.records[i].entropy ==
                Approx(first.records[i].entropy).margin(1e-9));
    }

    // Deleting one file refetches exactly that file, byte-identically.
    std::filesystem::remove(first.dir / sample_name);
    const DownloadReport third = write_dataset(plan, provider, opt);
    REQUIRE(third.n_downloaded == 1);
    REQUIRE(third.n_skipped == 19);
    REQUIRE(provider.calls == 21);
    REQUIRE(slurp(first.dir / sample_name) == sample_bytes);
    REQUIRE(slurp(first.dir / kMetaCsvName) == csv_before);
}

TEST_CASE("write_dataset output is independent of concurrency", "[dataset]") {
    testutil::TempDir tmp;
    const MissionPlan plan = small_plan();
    MockProvider provider({2024, 0.5});

    DownloadOptions serial = options_for(tmp, "serial");
    serial.concurrency = 1;
    DownloadOptions parallel = options_for(tmp, "parallel");
    parallel.concurrency = 4;

    const DownloadReport a = write_dataset(plan, provider, serial);
    const DownloadReport b = write_dataset(plan, provider, parallel);
    REQUIRE(slurp(a.dir / kMetaCsvName) == slurp(b.dir / kMetaCsvName));
    for (const auto& rec : a.records) {
        REQUIRE(slurp(a.dir / rec.img_name) == slurp(b.dir / rec.img_name));
    }
}

TEST_CASE("write_dataset applies the configured resize after entropy", "[dataset]") {
    testutil::TempDir tmp;
    MissionPlan plan = small_plan();
    plan.waypoints.resize(4);  // keep it quick
    MockProvider provider({2024, 0.5});

    DownloadOptions opt = options_for(tmp, "resized");
    opt.img_w = 100;
    opt.img_h = 100;
    opt.img_c = 1;
    const DownloadReport report = write_dataset(plan, provider, opt);

    for (const auto& rec : report.records) {
        const Image img = read_image_file(report.dir / rec.img_name);
        REQUIRE(img.width == 100);
        REQUIRE(img.height == 100);
        REQUIRE(img.channels == 1);
    }

    // The recorded entropy belongs to the cropped pre-resize frame.
    const Waypoint& wp = plan.waypoints[0];
    CaptureSpec cap{wp.center, wp.zoom, wp.res_x, wp.res_y, MapType::satellite, true};
    const Image native = crop_vmargin(mock_render(with_vertical_margin(cap, 0.2),
                                                  {2024, 0.5}),
                                      0.2);
    REQUIRE(report.records[0].entropy == shannon_entropy(native).bits);
}

TEST_CASE("write_dataset validates its inputs and propagates errors", "[dataset]") {
    testutil::TempDir tmp;
    MockProvider mock({2024, 0.5});
    const MissionPlan plan = small_plan();

    DownloadOptions opt = options_for(tmp, "bad");
    REQUIRE_THROWS_AS(write_dataset(MissionPlan{}, mock, opt), DomainError);

    opt.concurrency = 0;
    REQUIRE_THROWS_AS(write_dataset(plan, mock, opt), DomainError);
    opt.concurrency = 2;
    opt.img_w = 100;  // height missing
    REQUIRE_THROWS_AS(write_dataset(plan, mock, opt), DomainError);
    opt.img_w = 0;
    opt.mission_name.clear();
    REQUIRE_THROWS_AS(write_dataset(plan, mock, opt), DomainError);

    struct FailingProvider : Provider {
        ProviderResult capture(const CaptureSpec&) override {
            throw TransportError("no route to host", 0, 4);
        }
    } failing;
    REQUIRE_THROWS_AS(write_dataset(plan, failing, options_for(tmp, "fail")),
                      TransportError);
}

TEST_CASE("cleanup keeps records at or above the threshold", "[dataset]") {
    std::vector<MetaRecord> recs = grid_records(1, 4);
    recs[0].entropy = 0.0;
    recs[1].entropy = 2.0999;
    recs[2].entropy = 2.1;
    recs[3].entropy = 5.0;

    const CleanupResult result = cleanup_records(recs, 2.1);
    REQUIRE(result.kept.size() == 2);
    REQUIRE(result.discarded.size() == 2);
    REQUIRE(result.kept[0].img_name == recs[2].img_name);   // exactly 2.1 stays
    REQUIRE(result.kept[1].img_name == recs[3].img_name);
    REQUIRE(result.reference.empty());
    REQUIRE(result.warnings.empty());

    REQUIRE(cleanup_records(recs, 0.0).kept.size() == 4);
    REQUIRE(cleanup_records(recs, 8.0).kept.empty());
    REQUIRE_THROWS_AS(cleanup_records(recs, -0.1), DomainError);
    REQUIRE_THROWS_AS(cleanup_records(recs, 8.1), DomainError);
}

TEST_CASE("cleanup can judge by a roadmap counterpart", "[dataset]") {
    // Satellite frames look information-rich everywhere; the paired roadmap
    // frame tells which cells actually contain mapped detail.
    std::vector<MetaRecord> sat = grid_records(1, 3);
    for (auto& r : sat) r.entropy = 7.5;

    std::vector<MetaRecord> road = grid_records(1, 2);  // (0,2) missing
    road[0].entropy = 0.4;  // empty cell
    road[1].entropy = 3.2;  // busy cell

    const CleanupResult result = cleanup_records(sat, 2.1, &road, "roadmap_0");
    REQUIRE(result.reference == "roadmap_0");
    // (0,0) discarded by its reference, (0,1) kept by its reference,
    // (0,2) kept on its own entropy with a warning.
    REQUIRE(result.discarded.size() == 1);
    REQUIRE(result.discarded[0].col == 0);
    REQUIRE(result.kept.size() == 2);
    REQUIRE(result.warnings.size() == 1);
    REQUIRE_THAT(result.warnings[0], ContainsSubstring("(0, 2)"));
}

TEST_CASE("cleanup manifest serializes names and warnings", "[dataset]") {
    testutil::TempDir tmp;
    std::vector<MetaRecord> recs = grid_records(1, 2);
    recs[0].entropy = 1.0;
    recs[1].entropy = 3.0;
    const CleanupResult result = cleanup_records(recs, 2.1);
    const auto path = tmp.path() / "clean_manifest.json";
    write_cleanup_manifest(path, result);

    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    REQUIRE(j["threshold"] == 2.1);
    REQUIRE(j["reference"] == "");
    REQUIRE(j["kept"].size() == 1);
    REQUIRE(j["kept"][0] == recs[1].img_name);
    REQUIRE(j["discarded"].size() == 1);
    REQUIRE(j["discarded"][0] == recs[0].img_name);
    REQUIRE(j["warnings"].empty());
}

TEST_CASE("make_split sizes buckets by largest remainder", "[dataset]") {
    // n = 10: 8 / 1 / 1 exactly under the default 0.8/0.1/0.1 fractions.
    const auto m10 = make_split(grid_records(2, 5), SplitFractions{}, 2024);
    REQUIRE(m10.train.size() == 8);
    REQUIRE(m10.val.size() == 1);
    REQUIRE(m10.test.size() == 1);

    // n = 10 at 0.7/0.15/0.15: 7 / 1.5 / 1.5 -> 7/2/1 (earlier bucket wins the tie).
    const auto tie = make_split(grid_records(2, 5), {0.7, 0.15, 0.15}, 2024);
    REQUIRE(tie.train.size() == 7);
    REQUIRE(tie.val.size() == 2);
    REQUIRE(tie.test.size() == 1);

    // n = 7: 5.6 / 0.7 / 0.7 -> 5/1/1 (floors 5/0/0, remainders promote val and test).
    const auto m7 = make_split(grid_records(1, 7), SplitFractions{}, 2024);
    REQUIRE(m7.train.size() == 5);
    REQUIRE(m7.val.size() == 1);
    REQUIRE(m7.test.size() == 1);

    // Extreme fractions still cover every record.
    const auto all_train = make_split(grid_records(1, 5), {1.0, 0.0, 0.0}, 7);
    REQUIRE(all_train.train.size() == 5);
    REQUIRE(all_train.val.empty());
    REQUIRE(all_train.test.empty());

    REQUIRE_THROWS_AS(make_split({}, SplitFractions{}, 1), DomainError);
    REQUIRE_THROWS_AS(make_split(grid_records(1, 5), {0.5, 0.2, 0.2}, 1), DomainError);
    REQUIRE_THROWS_AS(make_split(grid_records(1, 5), {1.2, -0.1, -0.1}, 1), DomainError);
}

TEST_CASE("make_split is a deterministic partition", "[dataset]") {
    const auto recs = grid_records(6, 6);
    const SplitManifest a = make_split(recs, SplitFractions{}, 2024);
    const SplitManifest b = make_split(recs, SplitFractions{}, 2024);
    REQUIRE(a.train == b.train);
    REQUIRE(a.val == b.val);
    REQUIRE(a.test == b.test);
    REQUIRE(a.utm_zone == 16);

    const SplitManifest c = make_split(recs, SplitFractions{}, 99);
    REQUIRE(a.train != c.train);  // different shuffle

    // Disjoint union equals the input set.
    std::set<std::string> seen;
    for (const auto* bucket : {&a.train, &a.val, &a.test}) {
        for (const auto& name : *bucket) {
            REQUIRE(seen.insert(name).second);
        }
    }
    REQUIRE(seen.size() == recs.size());
    for (const auto& r : recs) REQUIRE(seen.count(r.img_name) == 1);
}

TEST_CASE("the split scaler standardizes the train labels", "[dataset]") {
    const auto recs = grid_records(8, 8);
    const SplitManifest m = make_split(recs, SplitFractions{}, 2024);

    std::unordered_map<std::string, const MetaRecord*> by_name;
    for (const auto& r : recs) by_name[r.img_name] = &r;

    double sum_e = 0.0, sum_n = 0.0, sq_e = 0.0, sq_n = 0.0;
    for (const auto& name : m.train) {
        const auto [e, n] = normalized_label(*by_name.at(name), m.utm_zone, m.stats);
        sum_e += e;
        sum_n += n;
        sq_e += e * e;
        sq_n += n * n;
    }
    const double tn = static_cast<double>(m.train.size());
    REQUIRE(sum_e / tn == Approx(0.0).margin(1e-6));
    REQUIRE(sum_n / tn == Approx(0.0).margin(1e-6));
    REQUIRE(std::sqrt(sq_e / tn) == Approx(1.0).margin(1e-6));
    REQUIRE(std::sqrt(sq_n / tn) == Approx(1.0).margin(1e-6));
}

TEST_CASE("a single-record split degrades gracefully", "[dataset]") {
    const auto one = grid_records(1, 1);
    const SplitManifest m = make_split(one, SplitFractions{}, 2024);
    REQUIRE(m.train.size() == 1);
    REQUIRE(m.val.empty());
    REQUIRE(m.test.empty());
    // Zero spread scales by 1, so the single label sits at the origin.
    REQUIRE(m.stats.std_easting == 1.0);
    REQUIRE(m.stats.std_northing == 1.0);
    const auto [e, n] = normalized_label(one[0], m.utm_zone, m.stats);
    REQUIRE(e == Approx(0.0).margin(1e-9));
    REQUIRE(n == Approx(0.0).margin(1e-9));
}

TEST_CASE("split manifest round-trips through JSON", "[dataset]") {
    testutil::TempDir tmp;
    const SplitManifest m = make_split(grid_records(4, 4), SplitFractions{}, 2024);
    const auto path = tmp.path() / "split_manifest.json";
    write_split_manifest(path, m);

    const SplitManifest back = read_split_manifest(path);
    REQUIRE(back.seed == m.seed);
    REQUIRE(back.fractions.train == m.fractions.train);
    REQUIRE(back.utm_zone == m.utm_zone);
    REQUIRE(back.stats.mean_easting == Approx(m.stats.mean_easting).epsilon(1e-12));
    REQUIRE(back.stats.std_northing == Approx(m.stats.std_northing).epsilon(1e-12));
    REQUIRE(back.train == m.train);
    REQUIRE(back.val == m.val);
    REQUIRE(back.test == m.test);

    // The on-disk shape is part of the contract.
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    REQUIRE(j.contains("seed"));
    REQUIRE(j["fractions"].contains("train"));
    REQUIRE(j.contains("utm_zone"));
    REQUIRE(j["label_stats"]["easting"].contains("mean"));
    REQUIRE(j["label_stats"]["northing"].contains("std"));
    REQUIRE(j["splits"].contains("train"));

    REQUIRE_THROWS_AS(read_split_manifest(tmp.path() / "none.json"), IoError);
    { std::ofstream bad(tmp.path() / "bad.json"); bad << "{\"seed\": 1}"; }
    REQUIRE_THROWS_AS(read_split_manifest(tmp.path() / "bad.json"), ParseError);
}

TEST_CASE("entropy statistics bin the range [0, 8] into 64 cells", "[dataset]") {
    std::vector<MetaRecord> recs = grid_records(1, 5);
    recs[0].entropy = 0.0;     // bin 0
    recs[1].entropy = 0.125;   // bin 1 (left-closed bins)
    recs[2].entropy = 2.1;     // bin 16
    recs[3].entropy = 3.0;     // bin 24
    recs[4].entropy = 8.0;     // top value folds into bin 63

    const EntropyStats s = entropy_stats(recs, 2.1);
    REQUIRE(s.total == 5);
    REQUIRE(s.bins[0] == 1);
    REQUIRE(s.bins[1] == 1);
    REQUIRE(s.bins[16] == 1);
    REQUIRE(s.bins[24] == 1);
    REQUIRE(s.bins[63] == 1);
    REQUIRE(s.min == 0.0);
    REQUIRE(s.max == 8.0);
    REQUIRE(s.mean == Approx((0.0 + 0.125 + 2.1 + 3.0 + 8.0) / 5.0).epsilon(1e-12));
    // Strictly below the threshold: 0.0 and 0.125 only.
    REQUIRE(s.below_threshold_fraction == Approx(0.4).epsilon(1e-12));

    recs[0].entropy = 8.2;
    REQUIRE_THROWS_AS(entropy_stats(recs, 2.1), DomainError);
    REQUIRE_THROWS_AS(entropy_stats({}, 2.1), DomainError);
}

TEST_CASE("entropy histogram CSV lists one row per bin", "[dataset]") {
    testutil::TempDir tmp;
    std::vector<MetaRecord> recs = grid_records(2, 4);
    const EntropyStats s = entropy_stats(recs, 2.1);
    const auto path = tmp.path() / "entropy_hist.csv";
    write_entropy_hist_csv(path, s);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "bin_lo,bin_hi,count");
    int rows = 0;
    uint64_t total = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split(line, ',');
        REQUIRE(fields.size() == 3);
        total += std::stoull(std::string(fields[2]));
        if (rows == 16) REQUIRE(line.rfind("2.000000,2.125000,", 0) == 0);
        ++rows;
    }
    REQUIRE(rows == 64);
    REQUIRE(total == recs.size());
}
