#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "finepose/camera.hpp"
#include "finepose/image_io.hpp"
#include "finepose/mesh.hpp"
#include "finepose/records.hpp"
#include "finepose/segmentation.hpp"

namespace httplib {
class Server;
}

namespace finepose {

inline constexpr int kDefaultServicePort = 8750;

/// Per-image annotation state held by the service.
struct Session {
    std::string session_id;
    std::string image_id;
    std::string image_path;
    std::string mesh_path;
    std::string category;
    RgbImage image;
    std::shared_ptr<const TriangleMesh> mesh;
    PoseParams current_pose;
    std::optional<ReferenceSet> reference;
    Stage stage = Stage::Human;
    bool dirty = false;

    /// Serializes all requests touching this session.
    mutable std::mutex mutex;
};

struct ServiceOptions {
    /// Directory receiving saved records (<image_id>.json).
    std::filesystem::path save_dir = ".";
};

/// Starting pose for a fresh session: looking straight at the model from
/// three model extents away, focal = max(width, height), centered.
PoseParams default_session_pose(const TriangleMesh& mesh, int width, int height);

/// HTTP+JSON annotation backend:
///   POST /sessions                 {image_path, mesh_path, initial_pose?, reference_path?,
///                                   instances_path?, category?, image_id?}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/overlay?pose={...}
///   PUT  /sessions/{id}/pose       {pose}
///   POST /sessions/{id}/refine     {config?}
///   POST /sessions/{id}/save
class AnnotationService {
public:
    explicit AnnotationService(ServiceOptions options);

    void mount(httplib::Server& server);

    std::size_t session_count() const;

private:
    std::shared_ptr<Session> find(const std::string& id) const;
    std::string next_id();

    ServiceOptions options_;
    mutable std::shared_mutex sessions_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t id_salt_;
    std::uint64_t counter_ = 0;
};

/// Blocks serving on host:port until the server is stopped.
int run_service(const std::string& host, int port, ServiceOptions options);

}  // namespace finepose
