#include <doctest.h>

#include <fstream>

#include "cli_support.hpp"
#include "finepose/image_io.hpp"
#include "finepose/rasterizer.hpp"
#include "finepose/records.hpp"
#include "support.hpp"

using namespace finepose;
using testing::quoted;
using testing::run_cli;

namespace {

AnnotationRecord record_at(const PoseParams& pose) {
    AnnotationRecord r;
    r.image_id = "car01";
    r.image_width = 96;
    r.image_height = 72;
    r.category = "sedan";
    r.model_path = (testing::data_dir() / "car.obj").string();
    r.pose = pose;
    r.timestamp = UtcTimestamp::parse("2020-01-01T00:00:00Z");
    return r;
}

const PoseParams kPose{40.0, 10.0, 0.0, 1.9, 96.0, 48.0, 36.0};

}  // namespace

TEST_CASE("render writes the same silhouette as the library") {
    testing::TempDir dir("cli-render");
    const auto mesh = testing::data_dir() / "car.obj";
    const std::string pose = pose_to_json(kPose).dump();
    REQUIRE(run_cli("render --mesh " + quoted(mesh.string()) + " --pose " + quoted(pose) +
                    " --width 96 --height 72 --out " + quoted((dir / "m.png").string())) == 0);
    CHECK(read_mask_png(dir / "m.png") == render_silhouette(load_obj_file(mesh), kPose, 96, 72));

    save_record_file(dir / "r.json", record_at(kPose));
    REQUIRE(run_cli("render --mesh " + quoted(mesh.string()) + " --record " + quoted((dir / "r.json").string()) +
                    " --out " + quoted((dir / "m2.png").string())) == 0);
    CHECK(testing::slurp(dir / "m.png") == testing::slurp(dir / "m2.png"));
}

TEST_CASE("refine on a self-rendered reference keeps the pose") {
    testing::TempDir dir("cli-refine");
    const auto mesh = testing::data_dir() / "car.obj";
    save_record_file(dir / "in.json", record_at(kPose));
    write_mask_png(dir / "ref.png", render_silhouette(load_obj_file(mesh), kPose, 96, 72));
    const std::string args = "refine --mesh " + quoted(mesh.string()) + " --record " +
                             quoted((dir / "in.json").string()) + " --reference " +
                             quoted((dir / "ref.png").string()) + " --timestamp 2021-06-01T12:00:00Z --out ";
    REQUIRE(run_cli(args + quoted((dir / "out.json").string())) == 0);
    const AnnotationRecord out = load_record_file(dir / "out.json");
    CHECK(out.pose == kPose);
    CHECK(out.stage == Stage::Refined);
    CHECK(out.iou_vs_reference == 1.0);
    CHECK(out.timestamp.to_string() == "2021-06-01T12:00:00Z");
    CHECK(std::filesystem::exists(dir / "out.json.trajectory.json"));

    REQUIRE(run_cli(args + quoted((dir / "out2.json").string())) == 0);
    CHECK(testing::slurp(dir / "out.json") == testing::slurp(dir / "out2.json"));
}

TEST_CASE("refine exit codes") {
    testing::TempDir dir("cli-codes");
    const auto mesh = testing::data_dir() / "car.obj";
    PoseParams away = kPose;
    away.principal_u = 1.0e6;
    save_record_file(dir / "away.json", record_at(away));
    write_mask_png(dir / "ref.png", render_silhouette(load_obj_file(mesh), kPose, 96, 72));
    CHECK(run_cli("refine --mesh " + quoted(mesh.string()) + " --record " + quoted((dir / "away.json").string()) +
                  " --reference " + quoted((dir / "ref.png").string()) + " --out " +
                  quoted((dir / "o.json").string())) == 2);
    CHECK_FALSE(std::filesystem::exists(dir / "o.json"));

    write_mask_png(dir / "empty.png", BinaryMask(96, 72));
    save_record_file(dir / "in.json", record_at(kPose));
    CHECK(run_cli("refine --mesh " + quoted(mesh.string()) + " --record " + quoted((dir / "in.json").string()) +
                  " --reference " + quoted((dir / "empty.png").string()) + " --out " +
                  quoted((dir / "o.json").string())) == 2);

    CHECK(run_cli("refine --mesh " + quoted(mesh.string())) == 1);
    CHECK(run_cli("no-such-command") == 1);
    CHECK(run_cli("render --mesh /nonexistent.obj --pose '{}' --width 4 --height 4 --out " +
                  quoted((dir / "x.png").string())) == 1);
}

TEST_CASE("eval and stats") {
    testing::TempDir dir("cli-eval");
    const auto mesh = load_obj_file(testing::data_dir() / "car.obj");
    {
        std::ofstream out(dir / "records.jsonl");
        AnnotationRecord a = record_at(kPose);
        AnnotationRecord b = record_at(kPose);
        b.image_id = "car02";
        b.pose.principal_u += 5.0;
        save_records_jsonl(out, {a, b});
    }
    write_mask_png(dir / "car01.png", render_silhouette(mesh, kPose, 96, 72));
    write_mask_png(dir / "car02.png", render_silhouette(mesh, kPose, 96, 72));
    REQUIRE(run_cli("eval --records " + quoted((dir / "records.jsonl").string()) + " --out " +
                    quoted((dir / "report.json").string()) + " --csv " + quoted((dir / "r.csv").string())) == 0);
    const auto report = nlohmann::json::parse(testing::slurp(dir / "report.json"));
    CHECK(report["n"] == 2);
    CHECK(report["per_item"][0]["iou"] == 1.0);
    CHECK(report["per_item"][1]["iou"].get<double>() < 1.0);
    CHECK(testing::slurp(dir / "r.csv").rfind("image_id,iou\ncar01,1\n", 0) == 0);

    REQUIRE(run_cli("stats --records " + quoted((dir / "records.jsonl").string()) + " --param a --bins 36 --out " +
                    quoted((dir / "h.csv").string())) == 0);
    const std::string csv = testing::slurp(dir / "h.csv");
    CHECK(csv.rfind("bin_start,bin_end,count\n", 0) == 0);
    CHECK(csv.find("\n40,50,2\n") != std::string::npos);
    CHECK(run_cli("stats --records " + quoted((dir / "records.jsonl").string()) + " --param bogus") == 1);
}

TEST_CASE("synth output is byte-identical for a fixed seed") {
    testing::TempDir dir("cli-synth");
    const std::string base = "synth --trials 4 --seed 5 --width 96 --height 72 --out ";
    REQUIRE(run_cli(base + quoted((dir / "a.json").string())) == 0);
    REQUIRE(run_cli(base + quoted((dir / "b.json").string()) + " --workers 2") == 0);
    CHECK(testing::slurp(dir / "a.json") == testing::slurp(dir / "b.json"));
    const auto j = nlohmann::json::parse(testing::slurp(dir / "a.json"));
    CHECK(j["trials"].size() == 4);
}

TEST_CASE("split honours --train-count and --fraction") {
    testing::TempDir dir("cli-split");
    {
        std::ofstream ids(dir / "ids.txt");
        for (int i = 0; i < 5696; ++i) ids << "img" << i << "\n";
    }
    REQUIRE(run_cli("split --ids " + quoted((dir / "ids.txt").string()) + " --train-count 3798 --seed 1 --out " +
                    quoted((dir / "a.json").string())) == 0);
    const SplitManifest a = manifest_from_json(nlohmann::json::parse(testing::slurp(dir / "a.json")));
    CHECK(a.train.size() == 3798);
    CHECK(a.test.size() == 1898);

    REQUIRE(run_cli("split --ids " + quoted((dir / "ids.txt").string()) +
                    " --fraction 0.6666666666666666 --seed 1 --out " + quoted((dir / "b.json").string())) == 0);
    const SplitManifest b = manifest_from_json(nlohmann::json::parse(testing::slurp(dir / "b.json")));
    CHECK(b.train.size() == 3798);
    CHECK(b.train == a.train);
}
