#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "finepose/camera.hpp"

namespace finepose {

inline constexpr int kRecordSchemaVersion = 1;

enum class Stage { Human, Refined };

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);

/// Whole-second UTC instant, serialized as "YYYY-MM-DDTHH:MM:SSZ".
struct UtcTimestamp {
    std::chrono::sys_seconds time{};

    static UtcTimestamp now();
    static UtcTimestamp parse(const std::string& iso);
    std::string to_string() const;

    bool operator==(const UtcTimestamp&) const = default;
};

struct AnnotationRecord {
    std::string image_id;
    int image_width = 0;
    int image_height = 0;
    std::string category;
    std::string model_path;
    PoseParams pose;
    Stage stage = Stage::Human;
    std::optional<double> iou_vs_reference;
    UtcTimestamp timestamp;

    /// Throws InvalidParameterError on a violated invariant.
    void validate() const;

    bool operator==(const AnnotationRecord&) const = default;
};

nlohmann::json pose_to_json(const PoseParams& pose);
/// Missing fields are an error; the result is validated.
PoseParams pose_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const AnnotationRecord& record);
/// Checks schema_version and the record invariants.
AnnotationRecord record_from_json(const nlohmann::json& j);

/// Single-record JSON document.
std::string save_record(const AnnotationRecord& record);
AnnotationRecord load_record(std::istream& in);
AnnotationRecord load_record_file(const std::filesystem::path& path);
void save_record_file(const std::filesystem::path& path, const AnnotationRecord& record);

/// One compact record per line. Blank lines are skipped.
std::vector<AnnotationRecord> load_records_jsonl(std::istream& in);
std::vector<AnnotationRecord> load_records_jsonl_file(const std::filesystem::path& path);
void save_records_jsonl(std::ostream& out, const std::vector<AnnotationRecord>& records);

/// Reads either a JSON-lines corpus or a single-record document.
std::vector<AnnotationRecord> load_records_any(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct SplitManifest {
    std::string dataset_name;
    std::vector<std::string> train;
    std::vector<std::string> test;

    /// Throws InvalidParameterError on duplicates or overlap.
    void validate() const;
};

nlohmann::json manifest_to_json(const SplitManifest& m);
SplitManifest manifest_from_json(const nlohmann::json& j);

/// Number of training items for a fraction of n: ceil(fraction * n).
std::size_t train_size_for(double fraction, std::size_t n);

/// Shuffles `image_ids` with a seeded generator and takes the first
/// `train_count` (or train_size_for(fraction, n)) as training items. Both
/// lists keep input order. Duplicate ids are rejected.
SplitManifest random_split(const std::vector<std::string>& image_ids, double train_fraction,
                           std::uint64_t seed, std::optional<std::size_t> train_count = std::nullopt,
                           std::string dataset_name = "");

}  // namespace finepose
