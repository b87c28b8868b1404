// finepose command-line driver: render, refine, eval, stats, synth, split, serve.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "finepose/error.hpp"
#include "finepose/eval.hpp"
#include "finepose/image_io.hpp"
#include "finepose/json_io.hpp"
#include "finepose/rasterizer.hpp"
#include "finepose/records.hpp"
#include "finepose/refiner.hpp"
#include "finepose/segmentation.hpp"
#include "finepose/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace finepose;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDegenerate = 2;

json read_json_arg(const std::string& text_or_path) {
    const auto first = text_or_path.find_first_not_of(" \t\n");
    try {
        if (first != std::string::npos && text_or_path[first] == '{') return json::parse(text_or_path);
        std::ifstream in(text_or_path);
        if (!in) throw IoError("cannot open '" + text_or_path + "'");
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(text_or_path + ": " + e.what(), 0);
    }
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        std::cout.flush();
    } else {
        write_file_atomic(out_path, text);
    }
}

fs::path resolve_against(const fs::path& base_dir, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
}

// --- render -----------------------------------------------------------------

struct RenderArgs {
    std::string mesh, pose, record, out;
    int width = 0, height = 0;
};

int cmd_render(const RenderArgs& a) {
    PoseParams pose;
    int w = a.width, h = a.height;
    if (!a.record.empty()) {
        const AnnotationRecord rec = load_record_file(a.record);
        pose = rec.pose;
        if (w == 0) w = rec.image_width;
        if (h == 0) h = rec.image_height;
    } else {
        pose = pose_from_json(read_json_arg(a.pose));
    }
    if (w <= 0 || h <= 0) throw InvalidParameterError("--width and --height are required without --record");
    const TriangleMesh mesh = load_obj_file(a.mesh);
    write_mask_png(a.out, render_silhouette(mesh, pose, w, h));
    return kExitOk;
}

// --- refine -----------------------------------------------------------------

struct RefineArgs {
    std::string mesh, record, reference, instances, config, out, timestamp;
};

int cmd_refine(const RefineArgs& a) {
    const AnnotationRecord input = load_record_file(a.record);
    const TriangleMesh mesh = load_obj_file(a.mesh);

    ReferenceSet refs;
    if (!a.instances.empty()) refs = load_reference_set(a.instances);
    refs.semantic_mask = read_mask_png(a.reference);
    refs.validate();
    const BinaryMask& any = *refs.semantic_mask;

    RefinerConfig cfg = RefinerConfig::defaults_for(input.pose);
    if (!a.config.empty()) cfg = refiner_config_from_json(read_json_arg(a.config), cfg);

    const BinaryMask initial = render_silhouette(mesh, input.pose, any.width(), any.height());
    const BinaryMask& reference = select_reference(refs, initial);
    const RefineResult result = refine(mesh, input.pose, reference, cfg);

    AnnotationRecord out = input;
    out.pose = result.pose;
    out.stage = Stage::Refined;
    out.iou_vs_reference = result.iou_final;
    out.timestamp = a.timestamp.empty() ? UtcTimestamp::now() : UtcTimestamp::parse(a.timestamp);
    save_record_file(a.out, out);

    json sidecar = refine_result_to_json(result);
    sidecar["config"] = refiner_config_to_json(cfg);
    write_file_atomic(a.out + ".trajectory.json", sidecar.dump(2) + "\n");

    std::fprintf(stderr, "refined %s: IoU %.4f -> %.4f in %d sweeps%s\n", input.image_id.c_str(),
                 result.iou_initial, result.iou_final, result.sweeps, result.converged ? "" : " (not converged)");
    return kExitOk;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string records, out, references, csv, mesh;
};

int cmd_eval(const EvalArgs& a) {
    const auto records = load_records_any(a.records);
    const fs::path base = fs::path(a.records).parent_path();
    const fs::path ref_dir = a.references.empty() ? base : fs::path(a.references);

    std::map<std::string, TriangleMesh> meshes;
    std::vector<BinaryMask> refs;
    refs.reserve(records.size());
    std::vector<EvalItem> items;
    for (const auto& r : records) {
        const std::string mesh_key = a.mesh.empty() ? resolve_against(base, r.model_path).string() : a.mesh;
        auto it = meshes.find(mesh_key);
        if (it == meshes.end()) it = meshes.emplace(mesh_key, load_obj_file(mesh_key)).first;
        refs.push_back(read_mask_png(ref_dir / (r.image_id + ".png")));
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string mesh_key = a.mesh.empty() ? resolve_against(base, r.model_path).string() : a.mesh;
        items.push_back({r.image_id, &meshes.at(mesh_key), r.pose, &refs[i]});
    }

    const IoUReport report = iou_report(items);
    emit(a.out, report_to_json(report).dump(2) + "\n");
    if (!a.csv.empty()) {
        std::ostringstream csv;
        write_report_csv(csv, report);
        write_file_atomic(a.csv, csv.str());
    }
    std::fprintf(stderr, "mean IoU %s\n", format_report(report).c_str());
    return kExitOk;
}

// --- stats ------------------------------------------------------------------

struct StatsArgs {
    std::string records, param, out;
    int bins = 36;
};

int cmd_stats(const StatsArgs& a) {
    const auto records = load_records_any(a.records);
    const HistogramSpec h = histogram(records, param_from_name(a.param), a.bins);
    std::ostringstream csv;
    write_histogram_csv(csv, h);
    emit(a.out, csv.str());
    return kExitOk;
}

// --- synth ------------------------------------------------------------------

struct SynthArgs {
    std::string mesh, out, config;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    int width = 320, height = 240;
    unsigned workers = 1;
};

int cmd_synth(const SynthArgs& a) {
    const TriangleMesh mesh = a.mesh.empty() ? make_car_mesh() : load_obj_file(a.mesh);
    SyntheticConfig cfg;
    cfg.width = a.width;
    cfg.height = a.height;
    cfg.workers = a.workers;
    if (!a.config.empty()) cfg.refiner = refiner_config_from_json(read_json_arg(a.config), RefinerConfig{});
    const auto trials = run_synthetic_benchmark(mesh, a.trials, cfg, a.seed);
    const SyntheticSummary s = summarize_trials(trials);
    emit(a.out, trials_to_json(trials, s).dump(2) + "\n");
    std::fprintf(stderr, "synthetic: mean IoU %.4f -> %.4f, %zu/%zu trials >= %.2f, %.1f sweeps on average\n",
                 s.mean_initial, s.mean_final, s.recovered, s.n, s.recovery_threshold, s.mean_sweeps);
    return kExitOk;
}

// --- split ------------------------------------------------------------------

struct SplitArgs {
    std::string ids, out, name;
    double fraction = 2.0 / 3.0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> train_count;
};

int cmd_split(const SplitArgs& a) {
    std::ifstream in(a.ids);
    if (!in) throw IoError("cannot open ids '" + a.ids + "'");
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        ids.push_back(line.substr(b, e - b + 1));
    }
    const SplitManifest m = random_split(ids, a.fraction, a.seed, a.train_count, a.name);
    emit(a.out, manifest_to_json(m).dump(2) + "\n");
    std::fprintf(stderr, "split: %zu train / %zu test\n", m.train.size(), m.test.size());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monocular 3D pose annotation and silhouette-based refinement"};
    app.require_subcommand(1);

    RenderArgs render;
    auto* c_render = app.add_subcommand("render", "Rasterize a mesh silhouette to PNG");
    c_render->add_option("--mesh", render.mesh, "OBJ mesh")->required();
    auto* pose_opt = c_render->add_option("--pose", render.pose, "Pose as inline JSON or a JSON file");
    auto* rec_opt = c_render->add_option("--record", render.record, "Annotation record supplying pose and size");
    pose_opt->excludes(rec_opt);
    c_render->add_option("--width", render.width, "Mask width in pixels");
    c_render->add_option("--height", render.height, "Mask height in pixels");
    c_render->add_option("--out", render.out, "Output PNG")->required();

    RefineArgs refine_args;
    auto* c_refine = app.add_subcommand("refine", "Refine a record's pose against a segmentation reference");
    c_refine->add_option("--mesh", refine_args.mesh, "OBJ mesh")->required();
    c_refine->add_option("--record", refine_args.record, "Input annotation record")->required();
    c_refine->add_option("--reference", refine_args.reference, "Semantic reference mask PNG")->required();
    c_refine->add_option("--instances", refine_args.instances, "Instance-mask sidecar JSON");
    c_refine->add_option("--config", refine_args.config, "Refiner config (inline JSON or file)");
    c_refine->add_option("--out", refine_args.out, "Output record path")->required();
    c_refine->add_option("--timestamp", refine_args.timestamp, "UTC timestamp for the output record (default: now)");

    EvalArgs eval_args;
    auto* c_eval = app.add_subcommand("eval", "Mean +/- std IoU of records against reference masks");
    c_eval->add_option("--records", eval_args.records, "Records (JSON lines or a single record)")->required();
    c_eval->add_option("--out", eval_args.out, "Report JSON (default stdout)");
    c_eval->add_option("--references", eval_args.references,
                       "Directory with <image_id>.png masks (default: next to the records)");
    c_eval->add_option("--csv", eval_args.csv, "Also write image_id,iou rows here");
    c_eval->add_option("--mesh", eval_args.mesh, "Use this mesh instead of each record's model_path");

    StatsArgs stats;
    auto* c_stats = app.add_subcommand("stats", "Histogram of one pose parameter as CSV");
    c_stats->add_option("--records", stats.records, "Records (JSON lines or a single record)")->required();
    c_stats->add_option("--param", stats.param, "Parameter name (a, e, theta, d, f, u, v or field name)")->required();
    c_stats->add_option("--bins", stats.bins, "Number of bins")->check(CLI::PositiveNumber);
    c_stats->add_option("--out", stats.out, "Output CSV (default stdout)");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Seeded perturbation-recovery benchmark");
    c_synth->add_option("--mesh", synth.mesh, "OBJ mesh (default: built-in car)");
    c_synth->add_option("--trials", synth.trials, "Number of trials");
    c_synth->add_option("--seed", synth.seed, "Random seed");
    c_synth->add_option("--width", synth.width, "Image width")->check(CLI::PositiveNumber);
    c_synth->add_option("--height", synth.height, "Image height")->check(CLI::PositiveNumber);
    c_synth->add_option("--workers", synth.workers, "Worker threads")->check(CLI::PositiveNumber);
    c_synth->add_option("--config", synth.config, "Fixed refiner config (inline JSON or file)");
    c_synth->add_option("--out", synth.out, "Output JSON (default stdout)");

    SplitArgs split;
    auto* c_split = app.add_subcommand("split", "Seeded train/test split manifest");
    c_split->add_option("--ids", split.ids, "Text file, one image id per line")->required();
    auto* frac = c_split->add_option("--fraction", split.fraction, "Training fraction")->check(CLI::Range(0.0, 1.0));
    auto* count = c_split->add_option("--train-count", split.train_count, "Exact number of training items");
    frac->excludes(count);
    c_split->add_option("--seed", split.seed, "Random seed");
    c_split->add_option("--name", split.name, "dataset_name field");
    c_split->add_option("--out", split.out, "Output JSON (default stdout)");

    std::string host = "127.0.0.1";
    int port = kDefaultServicePort;
    ServiceOptions service_opts;
    std::string save_dir = ".";
    auto* c_serve = app.add_subcommand("serve", "Run the annotation session HTTP service");
    c_serve->add_option("--host", host, "Bind address");
    c_serve->add_option("--port", port, "Port");
    c_serve->add_option("--save-dir", save_dir, "Directory for saved records");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*c_render) {
            if (render.pose.empty() && render.record.empty()) {
                throw InvalidParameterError("render needs --pose or --record");
            }
            return cmd_render(render);
        }
        if (*c_refine) return cmd_refine(refine_args);
        if (*c_eval) return cmd_eval(eval_args);
        if (*c_stats) return cmd_stats(stats);
        if (*c_synth) return cmd_synth(synth);
        if (*c_split) return cmd_split(split);
        if (*c_serve) {
            service_opts.save_dir = save_dir;
            return run_service(host, port, service_opts);
        }
    } catch (const DegenerateInitializationError& e) {
        std::fprintf(stderr, "finepose: %s\n", e.what());
        return kExitDegenerate;
    } catch (const NoReferenceError& e) {
        std::fprintf(stderr, "finepose: %s\n", e.what());
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "finepose: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
