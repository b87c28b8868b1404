#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "finepose/camera.hpp"
#include "finepose/mask.hpp"
#include "finepose/mesh.hpp"
#include "finepose/records.hpp"
#include "finepose/refiner.hpp"

namespace finepose {

struct IoUReport {
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    std::vector<std::pair<std::string, double>> per_item;
};

/// Aggregates already-computed IoUs.
IoUReport summarize(std::vector<std::pair<std::string, double>> per_item);

struct EvalItem {
    std::string image_id;
    const TriangleMesh* mesh = nullptr;
    PoseParams pose;
    const BinaryMask* reference = nullptr;
};

/// Renders each item's pose at its reference's size and reports IoU statistics.
IoUReport iou_report(const std::vector<EvalItem>& items);

nlohmann::json report_to_json(const IoUReport& report);
/// "image_id,iou" rows after a header line.
void write_report_csv(std::ostream& out, const IoUReport& report);
/// e.g. "90.4% +/- 3.3% (n=50)".
std::string format_report(const IoUReport& report);

struct HistogramSpec {
    PoseParam parameter = PoseParam::Azimuth;
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
    bool polar = false;
};

bool is_polar(PoseParam p);

/// Equal-width bins. Rotation parameters use their full angular range
/// (azimuth [0, 360), elevation [-90, 90], in-plane [-180, 180)); the other
/// parameters span the observed min..max unless `range` is given. The last
/// bin is closed on the right.
HistogramSpec histogram(const std::vector<AnnotationRecord>& records, PoseParam parameter, int bins,
                        std::optional<std::pair<double, double>> range = std::nullopt);
HistogramSpec histogram_of_values(const std::vector<double>& values, PoseParam parameter, int bins,
                                  std::optional<std::pair<double, double>> range = std::nullopt);

/// "bin_start,bin_end,count" rows after a header line.
void write_histogram_csv(std::ostream& out, const HistogramSpec& h);

/// Half-widths of the perturbation applied to the true pose. Depth and focal
/// are relative (0.05 = 5%).
struct PerturbationRanges {
    double azimuth_deg = 5.0;
    double elevation_deg = 3.0;
    double inplane_deg = 3.0;
    double depth_rel = 0.05;
    double focal_rel = 0.05;
    double principal_u = 10.0;
    double principal_v = 10.0;

    static PerturbationRanges zero() { return {0, 0, 0, 0, 0, 0, 0}; }
};

/// Distribution of ground-truth poses. Focal is relative to the image width
/// and the principal point offset relative to the image center.
struct PoseSampling {
    std::pair<double, double> azimuth_deg{0.0, 360.0};
    std::pair<double, double> elevation_deg{0.0, 30.0};
    std::pair<double, double> inplane_deg{-10.0, 10.0};
    std::pair<double, double> depth{1.6, 2.2};
    std::pair<double, double> focal_per_width{0.9, 1.1};
    double center_jitter = 0.05;  // fraction of width/height
};

struct SyntheticConfig {
    int width = 320;
    int height = 240;
    PoseSampling sampling;
    PerturbationRanges ranges;
    /// When unset each trial uses RefinerConfig::defaults_for(initial pose).
    std::optional<RefinerConfig> refiner;
    unsigned workers = 1;
};

struct SyntheticTrial {
    std::uint64_t seed = 0;
    PoseParams true_pose;
    std::array<double, kPoseDims> perturbation{};
    double initial_iou = 0.0;
    double final_iou = 0.0;
    int sweeps = 0;
    bool converged = false;
};

/// Seed of trial `index`; trials are independent of scheduling.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t index);

/// Each perturbation component is drawn uniformly from [-range, range].
/// Trials run on up to `config.workers` threads and come back in index order.
std::vector<SyntheticTrial> run_synthetic_benchmark(const TriangleMesh& mesh, std::size_t n_trials,
                                                    const SyntheticConfig& config, std::uint64_t seed);

SyntheticTrial run_synthetic_trial(const TriangleMesh& mesh, const SyntheticConfig& config,
                                   std::uint64_t trial_seed);

struct SyntheticSummary {
    std::size_t n = 0;
    double mean_initial = 0.0;
    double mean_final = 0.0;
    std::size_t recovered = 0;  // final_iou >= recovery_threshold
    double recovery_threshold = 0.95;
    double mean_sweeps = 0.0;
};

SyntheticSummary summarize_trials(const std::vector<SyntheticTrial>& trials, double recovery_threshold = 0.95);

nlohmann::json trials_to_json(const std::vector<SyntheticTrial>& trials, const SyntheticSummary& summary);

}  // namespace finepose
