#include "finepose/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <random>

#include "finepose/error.hpp"
#include "finepose/json_io.hpp"
#include "finepose/rasterizer.hpp"
#include "finepose/refiner.hpp"

namespace finepose {

using nlohmann::json;

namespace {

// zlib level for overlay PNGs; favour latency over size
constexpr int kOverlayCompression = 1;

struct HttpError {
    int status;
    std::string message;
};

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) throw HttpError{400, "request body must be a JSON object"};
        return j;
    } catch (const json::exception& e) {
        throw HttpError{400, std::string("malformed JSON: ") + e.what()};
    }
}

PoseParams pose_or_422(const json& j) {
    try {
        return normalize_pose(pose_from_json(j));
    } catch (const InvalidParameterError& e) {
        throw HttpError{422, e.what()};
    }
}

json session_json(const Session& s) {
    return {{"session_id", s.session_id},
            {"image_id", s.image_id},
            {"image_path", s.image_path},
            {"mesh_path", s.mesh_path},
            {"category", s.category},
            {"image_width", s.image.width},
            {"image_height", s.image.height},
            {"pose", pose_to_json(s.current_pose)},
            {"stage", stage_name(s.stage)},
            {"has_reference", s.reference.has_value()},
            {"dirty", s.dirty}};
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const HttpError& e) {
            reply_json(res, e.status, {{"error", e.message}});
        } catch (const InvalidParameterError& e) {
            reply_json(res, 422, {{"error", e.what()}});
        } catch (const DegenerateInitializationError& e) {
            reply_json(res, 422, {{"error", e.what()}});
        } catch (const NoReferenceError& e) {
            reply_json(res, 409, {{"error", e.what()}});
        } catch (const Error& e) {
            reply_json(res, 400, {{"error", e.what()}});
        } catch (const std::exception& e) {
            reply_json(res, 500, {{"error", e.what()}});
        }
    };
}

}  // namespace

PoseParams default_session_pose(const TriangleMesh& mesh, int width, int height) {
    PoseParams p;
    const double ext = mesh.empty() ? 1.0 : extent(mesh);
    p.depth = 3.0 * (ext > 0.0 ? ext : 1.0);
    p.focal = std::max(width, height);
    p.principal_u = width / 2.0;
    p.principal_v = height / 2.0;
    return p;
}

AnnotationService::AnnotationService(ServiceOptions options)
    : options_(std::move(options)), id_salt_(std::random_device{}()) {}

std::size_t AnnotationService::session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

std::shared_ptr<Session> AnnotationService::find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw HttpError{404, "no session '" + id + "'"};
    return it->second;
}

std::string AnnotationService::next_id() {
    char buf[40];
    std::snprintf(buf, sizeof buf, "s%08llx%04llx", static_cast<unsigned long long>(id_salt_ & 0xffffffffULL),
                  static_cast<unsigned long long>(++counter_));
    return buf;
}

void AnnotationService::mount(httplib::Server& server) {
    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        if (!body.contains("image_path") || !body.contains("mesh_path")) {
            throw HttpError{400, "image_path and mesh_path are required"};
        }
        auto s = std::make_shared<Session>();
        s->image_path = body["image_path"].get<std::string>();
        s->mesh_path = body["mesh_path"].get<std::string>();
        s->category = body.value("category", std::string());
        s->image = read_rgb_png(s->image_path);
        s->mesh = std::make_shared<const TriangleMesh>(load_obj_file(s->mesh_path));
        s->image_id = body.value("image_id", std::filesystem::path(s->image_path).stem().string());

        if (body.contains("initial_pose") && !body["initial_pose"].is_null()) {
            s->current_pose = pose_or_422(body["initial_pose"]);
        } else {
            s->current_pose = default_session_pose(*s->mesh, s->image.width, s->image.height);
        }

        if (body.contains("instances_path")) {
            s->reference = load_reference_set(body["instances_path"].get<std::string>());
        }
        if (body.contains("reference_path")) {
            if (!s->reference) s->reference.emplace();
            s->reference->semantic_mask = read_mask_png(body["reference_path"].get<std::string>());
        }
        if (s->reference) {
            s->reference->validate();
            const BinaryMask& any = s->reference->semantic_mask ? *s->reference->semantic_mask
                                                                : s->reference->instance_masks.front().mask;
            if (any.width() != s->image.width || any.height() != s->image.height) {
                throw HttpError{422, "reference masks must match the image size"};
            }
        }

        {
            std::unique_lock lock(sessions_mutex_);
            s->session_id = next_id();
            sessions_.emplace(s->session_id, s);
        }
        reply_json(res, 201, {{"session_id", s->session_id},
                              {"image_width", s->image.width},
                              {"image_height", s->image.height},
                              {"pose", pose_to_json(s->current_pose)}});
    }));

    server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto s = find(req.matches[1]);
        std::lock_guard lock(s->mutex);
        reply_json(res, 200, session_json(*s));
    }));

    server.Get(R"(/sessions/([^/]+)/overlay)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto s = find(req.matches[1]);
        PoseParams pose;
        RgbImage canvas;
        std::shared_ptr<const TriangleMesh> mesh;
        {
            std::lock_guard lock(s->mutex);
            pose = s->current_pose;
            canvas = s->image;
            mesh = s->mesh;
        }
        if (req.has_param("pose")) {
            try {
                pose = pose_or_422(json::parse(req.get_param_value("pose")));
            } catch (const json::exception& e) {
                throw HttpError{400, std::string("pose query is not JSON: ") + e.what()};
            }
        }
        blend_overlay(canvas, render_silhouette(*mesh, pose, canvas.width, canvas.height));
        res.status = 200;
        res.set_content(encode_rgb_png(canvas, kOverlayCompression), "image/png");
    }));

    server.Put(R"(/sessions/([^/]+)/pose)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto s = find(req.matches[1]);
        const json body = parse_body(req);
        if (!body.contains("pose")) throw HttpError{400, "body needs a pose"};
        const PoseParams pose = pose_or_422(body["pose"]);
        std::lock_guard lock(s->mutex);
        s->current_pose = pose;
        s->stage = Stage::Human;
        s->dirty = true;
        reply_json(res, 200, {{"pose", pose_to_json(pose)}});
    }));

    server.Post(R"(/sessions/([^/]+)/refine)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto s = find(req.matches[1]);
        const json body = parse_body(req);
        std::lock_guard lock(s->mutex);
        if (!s->reference) throw HttpError{409, "session has no segmentation reference"};
        const PoseParams start = s->current_pose;
        RefinerConfig cfg = RefinerConfig::defaults_for(start);
        if (body.contains("config") && !body["config"].is_null()) {
            try {
                cfg = refiner_config_from_json(body["config"], cfg);
            } catch (const ParseError& e) {
                throw HttpError{422, e.what()};
            }
        }
        const BinaryMask initial = render_silhouette(*s->mesh, start, s->image.width, s->image.height);
        const BinaryMask& ref = select_reference(*s->reference, initial);
        const RefineResult result = refine(*s->mesh, start, ref, cfg);
        s->current_pose = result.pose;
        s->stage = Stage::Refined;
        s->dirty = true;
        reply_json(res, 200, refine_result_to_json(result));
    }));

    server.Post(R"(/sessions/([^/]+)/save)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto s = find(req.matches[1]);
        std::lock_guard lock(s->mutex);
        AnnotationRecord record;
        record.image_id = s->image_id;
        record.image_width = s->image.width;
        record.image_height = s->image.height;
        record.category = s->category;
        record.model_path = s->mesh_path;
        record.pose = s->current_pose;
        record.stage = s->stage;
        if (s->reference) {
            const BinaryMask render = render_silhouette(*s->mesh, s->current_pose, s->image.width, s->image.height);
            record.iou_vs_reference = iou(render, select_reference(*s->reference, render));
        }
        record.timestamp = UtcTimestamp::now();
        std::filesystem::create_directories(options_.save_dir);
        save_record_file(options_.save_dir / (record.image_id + ".json"), record);
        s->dirty = false;
        reply_json(res, 200, record_to_json(record));
    }));
}

int run_service(const std::string& host, int port, ServiceOptions options) {
    httplib::Server server;
    AnnotationService service(std::move(options));
    service.mount(server);
    std::fprintf(stderr, "finepose: listening on %s:%d\n", host.c_str(), port);
    return server.listen(host, port) ? 0 : 1;
}

}  // namespace finepose
