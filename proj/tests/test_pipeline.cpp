#include "creekline/pipeline.hpp"

#include "creekline/config.hpp"
#include "creekline/image_io.hpp"
#include "creekline/image_ops.hpp"
#include "creekline/synth.hpp"
#include "synthetic_fixture.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace creekline {
namespace {

TEST_CASE("combine averages within the tolerance") {
    CHECK(combine(118.0, 120.0).value() == doctest::Approx(119.0));
    CHECK(combine(120.0, 120.0).value() == doctest::Approx(120.0));
    CHECK(!combine(118.0, 122.5).has_value());
    CHECK(combine(118.0, 121.0).value() == doctest::Approx(119.5));  // gap exactly 3
}

TEST_CASE("combine is symmetric") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform01() * 50.0;
        const double b = a + rng.normal(0.0, 3.0);
        const auto ab = combine(a, b);
        const auto ba = combine(b, a);
        REQUIRE(ab.has_value() == ba.has_value());
        if (ab) CHECK(*ab == doctest::Approx(*ba).epsilon(1e-15));
    }
}

TEST_CASE("calibration maps rows to heights") {
    CalibrationModel cal;
    cal.h_r = 200.0;
    cal.reference_row = 150.0;
    cal.cm_per_pixel = 1.0;
    SUBCASE("reference row maps to h_r") {
        const auto [delta, height] = calibrate_height(150.0, cal);
        CHECK(delta == 0.0);
        CHECK(height == 200.0);
    }
    SUBCASE("higher water is a positive delta") {
        const auto [delta, height] = calibrate_height(140.0, cal);
        CHECK(delta == doctest::Approx(10.0));
        CHECK(height == doctest::Approx(210.0));
    }
    SUBCASE("scaled pixels") {
        cal.cm_per_pixel = 0.5;
        const auto [delta, height] = calibrate_height(165.0, cal);
        CHECK(delta == doctest::Approx(-7.5));
        CHECK(height == doctest::Approx(192.5));
    }
}

TEST_CASE("height rises strictly as the detected row falls") {
    CalibrationModel cal;
    cal.h_r = 120.0;
    cal.reference_row = 100.0;
    cal.cm_per_pixel = 0.7;
    double prev = -1e9;
    for (double row = 180.0; row >= 20.0; row -= 7.3) {
        const auto [delta, height] = calibrate_height(row, cal);
        CHECK(height > prev);
        CHECK(height == cal.h_r + delta);  // the identity as computed
        prev = height;
    }
}

TEST_CASE("timestamp tokens parse from stems") {
    CHECK(timestamp_from_stem("frame_20191003T001000").value() == "20191003T001000");
    CHECK(timestamp_from_stem("20191218T235950_cam2").value() == "20191218T235950");
    CHECK(!timestamp_from_stem("no_timestamp_here").has_value());
    CHECK(!timestamp_from_stem("201910030T01000").has_value());
}

TEST_CASE("timestamps map to epochs") {
    CHECK(epoch_from_timestamp("19700101T000000").value() == 0);
    CHECK(epoch_from_timestamp("19700102T000102").value() == 86400 + 62);
    // 2019-10-03 is day 18172 of the epoch
    CHECK(epoch_from_timestamp("20191003T000000").value() == 18172ll * 86400);
    CHECK(!epoch_from_timestamp("20191303T000000").has_value());
}

TEST_CASE("readings survive the csv round trip") {
    std::vector<ReadingRecord> records(3);
    records[0].timestamp = "20191003T000000";
    records[0].status = ReadingStatus::ok;
    records[0].pixel_row = 101.25;
    records[0].delta_h_cm = -1.25;
    records[0].height_cm = 198.75;
    records[0].match_score = 0.9321;
    records[0].detector_gap_px = 0.5;
    records[0].has_reading = records[0].has_match_score = records[0].has_detector_gap = true;
    records[1].timestamp = "20191003T001000";
    records[1].status = ReadingStatus::rejected_dark;
    records[2].timestamp = "20191003T002000";
    records[2].status = ReadingStatus::no_match;
    records[2].match_score = 0.41;
    records[2].has_match_score = true;

    const auto path = std::filesystem::temp_directory_path() / "creekline_readings.csv";
    write_readings_csv(path.string(), records);
    const auto loaded = read_readings_csv(path.string());
    REQUIRE(loaded.size() == 3);
    CHECK(loaded[0].pixel_row == 101.25);
    CHECK(loaded[0].height_cm == 198.75);
    CHECK(loaded[0].match_score == 0.9321);
    CHECK(loaded[1].status == ReadingStatus::rejected_dark);
    CHECK(!loaded[1].has_reading);
    CHECK(!loaded[1].has_match_score);
    CHECK(loaded[2].status == ReadingStatus::no_match);
    CHECK(loaded[2].match_score == 0.41);
    std::filesystem::remove(path);
}

TEST_CASE("calibration on a clean reference matches the construction") {
    const testing::SyntheticRig rig = testing::make_rig();
    // annotated row 63 image frame -> ROI row 43, cut starts at row 0
    CHECK(rig.tmpl.waterline_row_offset == 43);
    CHECK(rig.tmpl.origin_in_reference == Rect{140, 0, 100, 56});
    CHECK(rig.tmpl.reference_slope == doctest::Approx(0.05).epsilon(0.35));
    CHECK(rig.cal.reference_row == 63.0);
    CHECK(rig.cal.h_r == 200.0);
}

TEST_CASE("calibration rejects a dark reference") {
    const PipelineConfig cfg = testing::test_config();
    SceneSpec scene = testing::test_scene();
    scene.water_row = 60.0;
    scene.brightness_scale = 0.1;
    const RenderResult frame = render(scene);
    CHECK_THROWS_AS(
        static_cast<void>(calibrate_reference(frame.image, "ref", cfg, 63.0, 200.0)),
        CalibrationError);
}

TEST_CASE("calibration rejects an annotated row outside the cut") {
    const PipelineConfig cfg = testing::test_config();
    SceneSpec scene = testing::test_scene();
    scene.water_row = 60.0;
    const RenderResult frame = render(scene);
    CHECK_THROWS_AS(
        static_cast<void>(calibrate_reference(frame.image, "ref", cfg, 300.0, 200.0)),
        BoundsError);
}

TEST_CASE("the pipeline reads a clean synthetic scene to within a pixel") {
    const testing::SyntheticRig rig = testing::make_rig();
    SceneSpec scene = rig.scene;
    scene.water_row = 85.0;
    scene.seed = 12345;
    const RenderResult frame = render(scene);
    const ReadingRecord rec = run_pipeline(frame.image, "frame_20191005T120000", rig.cfg,
                                           rig.tmpl, rig.cal);
    REQUIRE(rec.status == ReadingStatus::ok);
    CHECK(rec.timestamp == "20191005T120000");
    CHECK(std::abs(rec.pixel_row - scene.true_row_at_center()) <= 1.5);
    CHECK(rec.height_cm - rec.delta_h_cm == rig.cal.h_r);
    CHECK(rec.match_score >= 0.8);
    CHECK(rec.detector_gap_px <= 3.0);
}

TEST_CASE("an all-black frame is rejected as dark") {
    const testing::SyntheticRig rig = testing::make_rig();
    const ColorImage black = ColorImage::constant(440, 440, 0, 0, 0);
    const ReadingRecord rec = run_pipeline(black, "frame_20191005T120000", rig.cfg, rig.tmpl,
                                           rig.cal);
    CHECK(rec.status == ReadingStatus::rejected_dark);
    CHECK(!rec.has_reading);
}

TEST_CASE("an upside-down frame finds no match") {
    const testing::SyntheticRig rig = testing::make_rig();
    SceneSpec scene = rig.scene;
    scene.water_row = 70.0;
    scene.seed = 5150;
    RenderResult frame = render(scene);
    ColorImage flipped;
    flipped.r = frame.image.r.colwise().reverse();
    flipped.g = frame.image.g.colwise().reverse();
    flipped.b = frame.image.b.colwise().reverse();
    const ReadingRecord rec =
        run_pipeline(flipped, "frame_20191005T120000", rig.cfg, rig.tmpl, rig.cal);
    CHECK(rec.status == ReadingStatus::no_match);
    CHECK(rec.match_score < 0.8);
}

TEST_CASE("debug records carry the detector diagnostics") {
    const testing::SyntheticRig rig = testing::make_rig();
    SceneSpec scene = rig.scene;
    scene.water_row = 75.0;
    scene.seed = 777;
    const RenderResult frame = render(scene);
    std::string debug;
    const ReadingRecord rec =
        run_pipeline(frame.image, "frame_20191005T120000", rig.cfg, rig.tmpl, rig.cal, &debug);
    REQUIRE(rec.status == ReadingStatus::ok);
    CHECK(debug.find("\"match\"") != std::string::npos);
    CHECK(debug.find("\"regression\"") != std::string::npos);
    CHECK(debug.find("\"profile\"") != std::string::npos);
    CHECK(debug.find("\"pixel_row\"") != std::string::npos);
}

TEST_CASE("a batch mixes readings and statuses in input order") {
    const testing::SyntheticRig rig = testing::make_rig();
    const auto dir = std::filesystem::temp_directory_path() / "creekline_batch_mixed";
    std::filesystem::remove_all(dir);

    std::vector<double> rows{70.0, 75.0, 80.0, 85.0};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4};
    std::vector<double> scales{1.0, 0.1, 1.0, 1.0};  // second frame dark
    render_batch(rig.scene, rows, seeds, dir.string(), "ppm", scales);
    {
        std::ofstream bad(dir / "frame_20191003T004000.ppm");
        bad << "not an image";
    }

    const auto inputs = list_batch_inputs(dir.string());
    REQUIRE(inputs.size() == 5);
    const auto records = run_batch(inputs, rig.cfg, rig.tmpl, rig.cal, BatchOptions{});
    REQUIRE(records.size() == 5);
    CHECK(records[0].status == ReadingStatus::ok);
    CHECK(records[1].status == ReadingStatus::rejected_dark);
    CHECK(records[2].status == ReadingStatus::ok);
    CHECK(records[3].status == ReadingStatus::ok);
    CHECK(records[4].status == ReadingStatus::io_error);
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        CHECK(records[i].timestamp < records[i + 1].timestamp);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("worker count does not change the batch output") {
    const testing::SyntheticRig rig = testing::make_rig();
    const auto dir = std::filesystem::temp_directory_path() / "creekline_batch_jobs";
    std::filesystem::remove_all(dir);
    std::vector<double> rows;
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < 8; ++i) {
        rows.push_back(65.0 + 4.0 * i);
        seeds.push_back(40 + i);
    }
    render_batch(rig.scene, rows, seeds, dir.string(), "ppm");
    const auto inputs = list_batch_inputs(dir.string());

    BatchOptions serial;
    serial.jobs = 1;
    BatchOptions parallel;
    parallel.jobs = 8;
    std::ostringstream a, b;
    write_readings_csv(a, run_batch(inputs, rig.cfg, rig.tmpl, rig.cal, serial));
    write_readings_csv(b, run_batch(inputs, rig.cfg, rig.tmpl, rig.cal, parallel));
    CHECK(a.str() == b.str());
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace creekline
