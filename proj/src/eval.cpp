#include "finepose/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "finepose/error.hpp"
#include "finepose/rasterizer.hpp"
#include "finepose/segmentation.hpp"

namespace finepose {

using nlohmann::json;

IoUReport summarize(std::vector<std::pair<std::string, double>> per_item) {
    IoUReport r;
    r.n = per_item.size();
    if (r.n > 0) {
        double sum = 0.0;
        for (const auto& [id, v] : per_item) sum += v;
        r.mean = sum / static_cast<double>(r.n);
        double sq = 0.0;
        for (const auto& [id, v] : per_item) sq += (v - r.mean) * (v - r.mean);
        r.std = std::sqrt(sq / static_cast<double>(r.n));
    }
    r.per_item = std::move(per_item);
    return r;
}

IoUReport iou_report(const std::vector<EvalItem>& items) {
    std::vector<std::pair<std::string, double>> per_item;
    per_item.reserve(items.size());
    for (const auto& item : items) {
        if (!item.mesh || !item.reference) throw InvalidParameterError("eval item lacks a mesh or reference");
        const BinaryMask s = render_silhouette(*item.mesh, item.pose, item.reference->width(),
                                               item.reference->height());
        per_item.emplace_back(item.image_id, iou(s, *item.reference));
    }
    return summarize(std::move(per_item));
}

json report_to_json(const IoUReport& report) {
    json items = json::array();
    for (const auto& [id, v] : report.per_item) items.push_back({{"image_id", id}, {"iou", v}});
    return {{"n", report.n}, {"mean", report.mean}, {"std", report.std}, {"per_item", items}};
}

void write_report_csv(std::ostream& out, const IoUReport& report) {
    out << "image_id,iou\n";
    char buf[64];
    for (const auto& [id, v] : report.per_item) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << id << ',' << buf << '\n';
    }
}

std::string format_report(const IoUReport& report) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.1f%% +/- %.1f%% (n=%zu)", 100.0 * report.mean, 100.0 * report.std,
                  report.n);
    return buf;
}

bool is_polar(PoseParam p) {
    return p == PoseParam::Azimuth || p == PoseParam::Elevation || p == PoseParam::Inplane;
}

HistogramSpec histogram_of_values(const std::vector<double>& values, PoseParam parameter, int bins,
                                  std::optional<std::pair<double, double>> range) {
    if (bins < 1) throw InvalidParameterError("histogram needs at least one bin");
    HistogramSpec h;
    h.parameter = parameter;
    h.polar = is_polar(parameter);

    double lo = 0.0;
    double hi = 1.0;
    if (range) {
        std::tie(lo, hi) = *range;
    } else if (parameter == PoseParam::Azimuth) {
        lo = 0.0, hi = 360.0;
    } else if (parameter == PoseParam::Elevation) {
        lo = -90.0, hi = 90.0;
    } else if (parameter == PoseParam::Inplane) {
        lo = -180.0, hi = 180.0;
    } else if (!values.empty()) {
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo = *mn;
        hi = *mx;
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    if (!(hi > lo)) throw InvalidParameterError("histogram range must be increasing");

    h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) h.bin_edges[i] = lo + (hi - lo) * i / bins;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        if (parameter == PoseParam::Azimuth && !range) v = wrap_azimuth(v);
        if (parameter == PoseParam::Inplane && !range) v = wrap_inplane(v);
        if (v < lo || v > hi) continue;
        auto idx = static_cast<long>(std::floor((v - lo) / (hi - lo) * bins));
        idx = std::clamp(idx, 0L, static_cast<long>(bins) - 1);
        ++h.counts[static_cast<std::size_t>(idx)];
    }
    return h;
}

HistogramSpec histogram(const std::vector<AnnotationRecord>& records, PoseParam parameter, int bins,
                        std::optional<std::pair<double, double>> range) {
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back(r.pose[parameter]);
    return histogram_of_values(values, parameter, bins, range);
}

void write_histogram_csv(std::ostream& out, const HistogramSpec& h) {
    out << "bin_start,bin_end,count\n";
    char buf[96];
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu", h.bin_edges[i], h.bin_edges[i + 1], h.counts[i]);
        out << buf << '\n';
    }
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t index) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

SyntheticTrial run_synthetic_trial(const TriangleMesh& mesh, const SyntheticConfig& config,
                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto& s = config.sampling;
    const double w = config.width;
    const double h = config.height;

    SyntheticTrial t;
    t.seed = seed;
    t.true_pose.azimuth_deg = wrap_azimuth(uniform(rng, s.azimuth_deg.first, s.azimuth_deg.second));
    t.true_pose.elevation_deg = uniform(rng, s.elevation_deg.first, s.elevation_deg.second);
    t.true_pose.inplane_deg = uniform(rng, s.inplane_deg.first, s.inplane_deg.second);
    t.true_pose.depth = uniform(rng, s.depth.first, s.depth.second);
    t.true_pose.focal = w * uniform(rng, s.focal_per_width.first, s.focal_per_width.second);
    t.true_pose.principal_u = w / 2 + w * uniform(rng, -s.center_jitter, s.center_jitter);
    t.true_pose.principal_v = h / 2 + h * uniform(rng, -s.center_jitter, s.center_jitter);

    const auto& r = config.ranges;
    const std::array<double, kPoseDims> half{r.azimuth_deg,
                                             r.elevation_deg,
                                             r.inplane_deg,
                                             r.depth_rel * t.true_pose.depth,
                                             r.focal_rel * t.true_pose.focal,
                                             r.principal_u,
                                             r.principal_v};
    PoseParams initial = t.true_pose;
    for (std::size_t i = 0; i < kPoseDims; ++i) {
        t.perturbation[i] = uniform(rng, -half[i], half[i]);
        initial[static_cast<PoseParam>(i)] += t.perturbation[i];
    }
    initial = normalize_pose(initial);

    const BinaryMask reference = render_silhouette(mesh, t.true_pose, config.width, config.height);
    const RefinerConfig rc = config.refiner ? *config.refiner : RefinerConfig::defaults_for(initial);
    const RefineResult res = refine(mesh, initial, reference, rc);
    t.initial_iou = res.iou_initial;
    t.final_iou = res.iou_final;
    t.sweeps = res.sweeps;
    t.converged = res.converged;
    return t;
}

std::vector<SyntheticTrial> run_synthetic_benchmark(const TriangleMesh& mesh, std::size_t n_trials,
                                                    const SyntheticConfig& config, std::uint64_t seed) {
    std::vector<SyntheticTrial> trials(n_trials);
    const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(n_trials)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_trials; ++i) trials[i] = run_synthetic_trial(mesh, config, trial_seed(seed, i));
        return trials;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < workers; ++k) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n_trials; i = next++) {
                try {
                    trials[i] = run_synthetic_trial(mesh, config, trial_seed(seed, i));
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return trials;
}

SyntheticSummary summarize_trials(const std::vector<SyntheticTrial>& trials, double recovery_threshold) {
    SyntheticSummary s;
    s.n = trials.size();
    s.recovery_threshold = recovery_threshold;
    if (trials.empty()) return s;
    for (const auto& t : trials) {
        s.mean_initial += t.initial_iou;
        s.mean_final += t.final_iou;
        s.mean_sweeps += t.sweeps;
        if (t.final_iou >= recovery_threshold) ++s.recovered;
    }
    const double n = static_cast<double>(s.n);
    s.mean_initial /= n;
    s.mean_final /= n;
    s.mean_sweeps /= n;
    return s;
}

json trials_to_json(const std::vector<SyntheticTrial>& trials, const SyntheticSummary& summary) {
    json items = json::array();
    for (const auto& t : trials) {
        items.push_back({{"seed", t.seed},
                         {"true_pose", pose_to_json(t.true_pose)},
                         {"perturbation", t.perturbation},
                         {"initial_iou", t.initial_iou},
                         {"final_iou", t.final_iou},
                         {"sweeps", t.sweeps},
                         {"converged", t.converged}});
    }
    return {{"summary",
             {{"n", summary.n},
              {"mean_initial_iou", summary.mean_initial},
              {"mean_final_iou", summary.mean_final},
              {"recovery_threshold", summary.recovery_threshold},
              {"recovered", summary.recovered},
              {"mean_sweeps", summary.mean_sweeps}}},
            {"trials", items}};
}

}  // namespace finepose
