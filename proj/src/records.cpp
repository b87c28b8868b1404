#include "finepose/records.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "finepose/error.hpp"

namespace finepose {

using nlohmann::json;

const char* stage_name(Stage s) { return s == Stage::Human ? "human" : "refined"; }

Stage stage_from_name(const std::string& name) {
    if (name == "human") return Stage::Human;
    if (name == "refined") return Stage::Refined;
    throw InvalidParameterError("unknown stage '" + name + "'");
}

UtcTimestamp UtcTimestamp::now() {
    return {std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now())};
}

UtcTimestamp UtcTimestamp::parse(const std::string& iso) {
    int y = 0;
    unsigned mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
    char tail = 0;
    int consumed = 0;
    if (std::sscanf(iso.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c%n", &y, &mo, &d, &hh, &mm, &ss, &tail, &consumed) != 7 ||
        tail != 'Z' || static_cast<std::size_t>(consumed) != iso.size()) {
        throw InvalidParameterError("timestamp '" + iso + "' is not YYYY-MM-DDTHH:MM:SSZ");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
        throw InvalidParameterError("timestamp '" + iso + "' is out of range");
    }
    return {std::chrono::sys_days{ymd} + std::chrono::hours{hh} + std::chrono::minutes{mm} +
            std::chrono::seconds{ss}};
}

std::string UtcTimestamp::to_string() const {
    const auto day = std::chrono::floor<std::chrono::days>(time);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{time - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

void AnnotationRecord::validate() const {
    if (image_id.empty()) throw InvalidParameterError("image_id must not be empty");
    if (image_width <= 0 || image_height <= 0) throw InvalidParameterError("image dimensions must be positive");
    finepose::validate(pose);
    if (iou_vs_reference && !(*iou_vs_reference >= 0.0 && *iou_vs_reference <= 1.0)) {
        throw InvalidParameterError("iou_vs_reference must lie in [0, 1]");
    }
}

json pose_to_json(const PoseParams& pose) {
    json j = json::object();
    for (std::size_t i = 0; i < kPoseDims; ++i) {
        const auto p = static_cast<PoseParam>(i);
        j[param_name(p)] = pose[p];
    }
    return j;
}

PoseParams pose_from_json(const json& j) {
    if (!j.is_object()) throw InvalidParameterError("pose must be a JSON object");
    PoseParams pose;
    for (std::size_t i = 0; i < kPoseDims; ++i) {
        const auto p = static_cast<PoseParam>(i);
        const auto it = j.find(param_name(p));
        if (it == j.end() || !it->is_number()) {
            throw InvalidParameterError(std::string("pose field '") + param_name(p) + "' missing or not a number");
        }
        pose[p] = it->get<double>();
    }
    validate(pose);
    return pose;
}

json record_to_json(const AnnotationRecord& r) {
    json j;
    j["schema_version"] = kRecordSchemaVersion;
    j["image_id"] = r.image_id;
    j["image_width"] = r.image_width;
    j["image_height"] = r.image_height;
    j["category"] = r.category;
    j["model_path"] = r.model_path;
    j["pose"] = pose_to_json(r.pose);
    j["stage"] = stage_name(r.stage);
    j["iou_vs_reference"] = r.iou_vs_reference ? json(*r.iou_vs_reference) : json(nullptr);
    j["timestamp"] = r.timestamp.to_string();
    return j;
}

AnnotationRecord record_from_json(const json& j) {
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kRecordSchemaVersion) {
            throw ParseError("unsupported schema_version " + std::to_string(version), 0);
        }
        AnnotationRecord r;
        r.image_id = j.at("image_id").get<std::string>();
        r.image_width = j.at("image_width").get<int>();
        r.image_height = j.at("image_height").get<int>();
        r.category = j.value("category", std::string());
        r.model_path = j.at("model_path").get<std::string>();
        r.pose = pose_from_json(j.at("pose"));
        r.stage = stage_from_name(j.at("stage").get<std::string>());
        if (j.contains("iou_vs_reference") && !j["iou_vs_reference"].is_null()) {
            r.iou_vs_reference = j["iou_vs_reference"].get<double>();
        }
        r.timestamp = UtcTimestamp::parse(j.at("timestamp").get<std::string>());
        r.validate();
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("record: ") + e.what(), 0);
    } catch (const InvalidParameterError& e) {
        throw ParseError(std::string("record: ") + e.what(), 0);
    }
}

std::string save_record(const AnnotationRecord& record) {
    record.validate();
    return record_to_json(record).dump(2) + "\n";
}

AnnotationRecord load_record(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(e.what(), 0);
    }
    return record_from_json(j);
}

AnnotationRecord load_record_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open record '" + path.string() + "'");
    return load_record(in);
}

void save_record_file(const std::filesystem::path& path, const AnnotationRecord& record) {
    write_file_atomic(path, save_record(record));
}

std::vector<AnnotationRecord> load_records_jsonl(std::istream& in) {
    std::vector<AnnotationRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(e.what(), line_no);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return out;
}

std::vector<AnnotationRecord> load_records_jsonl_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open records '" + path.string() + "'");
    return load_records_jsonl(in);
}

void save_records_jsonl(std::ostream& out, const std::vector<AnnotationRecord>& records) {
    for (const auto& r : records) {
        r.validate();
        out << record_to_json(r).dump() << '\n';
    }
}

std::vector<AnnotationRecord> load_records_any(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open records '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    // a pretty-printed single record spans lines; a corpus has one object per line
    try {
        const json doc = json::parse(text);
        if (doc.is_object()) return {record_from_json(doc)};
    } catch (const json::parse_error&) {
    }
    std::istringstream lines(text);
    return load_records_jsonl(lines);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

void SplitManifest::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& id : train) {
        if (!seen.insert(id).second) throw InvalidParameterError("duplicate id '" + id + "' in split");
    }
    for (const auto& id : test) {
        if (!seen.insert(id).second) throw InvalidParameterError("id '" + id + "' duplicated or in both lists");
    }
}

json manifest_to_json(const SplitManifest& m) {
    return json{{"dataset_name", m.dataset_name}, {"train", m.train}, {"test", m.test}};
}

SplitManifest manifest_from_json(const json& j) {
    SplitManifest m;
    try {
        m.dataset_name = j.value("dataset_name", std::string());
        m.train = j.at("train").get<std::vector<std::string>>();
        m.test = j.at("test").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("split manifest: ") + e.what(), 0);
    }
    m.validate();
    return m;
}

std::size_t train_size_for(double fraction, std::size_t n) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidParameterError("train fraction must lie in [0, 1]");
    // the epsilon keeps exact products such as 0.5 * 4 from rounding up
    const double exact = fraction * static_cast<double>(n);
    const auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    return std::min(k, n);
}

SplitManifest random_split(const std::vector<std::string>& image_ids, double train_fraction, std::uint64_t seed,
                           std::optional<std::size_t> train_count, std::string dataset_name) {
    const std::size_t n = image_ids.size();
    const std::size_t k = train_count ? *train_count : train_size_for(train_fraction, n);
    if (k > n) {
        throw InvalidParameterError("train count " + std::to_string(k) + " exceeds " + std::to_string(n) + " ids");
    }
    std::unordered_set<std::string> unique(image_ids.begin(), image_ids.end());
    if (unique.size() != n) throw InvalidParameterError("image ids contain duplicates");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<char> is_train(n, 0);
    for (std::size_t i = 0; i < k; ++i) is_train[order[i]] = 1;

    SplitManifest m;
    m.dataset_name = std::move(dataset_name);
    m.train.reserve(k);
    m.test.reserve(n - k);
    for (std::size_t i = 0; i < n; ++i) (is_train[i] ? m.train : m.test).push_back(image_ids[i]);
    return m;
}

}  // namespace finepose
