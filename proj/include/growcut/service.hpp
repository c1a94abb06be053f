#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "json.hpp"

#include "growcut/engine.hpp"
#include "growcut/morphology.hpp"
#include "growcut/slice.hpp"
#include "growcut/volume.hpp"

namespace httplib {
class Server;
}

namespace growcut::service {

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;

    nlohmann::json json() const { return nlohmann::json::parse(body); }
};

struct ServiceOptions {
    GrowCutConfig engine{};
    std::chrono::milliseconds segment_timeout{120000};
};

/// Run-length encoding of one binary row: [[value, length], ...], starting
/// with the first pixel's value; lengths sum to the row width.
nlohmann::json encode_row_rle(const Label* row, int width);
Slice2D<Label> decode_mask_rle(const nlohmann::json& doc);

/// 64-bit FNV-1a over the mask bytes, as 16 hex digits.
std::string mask_checksum(const LabelVolume& mask);

/// Single-session state for the interactive loop: one image, its seeds, the
/// last segmentation and an optional reference mask. Handlers are plain
/// member functions so they can be driven without a socket; `bind` mounts
/// them on an HTTP server.
///
/// Reads may run concurrently with anything. Mutations are serialized, and a
/// running segmentation holds the mutation lock until it finishes.
class Service {
public:
    explicit Service(ServiceOptions options = {});

    void load_volume(ScalarVolume image);
    void load_truth(LabelVolume truth);

    Response get_volume() const;
    Response get_slice(const std::string& axis, const std::string& index, std::optional<std::string> window,
                       std::optional<std::string> level) const;
    Response post_seeds(const std::string& body);
    Response delete_seeds();
    Response post_segment(const std::string& body);
    Response get_mask_slice(const std::string& axis, const std::string& index) const;
    Response post_post(const std::string& body);
    Response get_metrics() const;

    /// Seed volume snapshot; empty optional when no volume is loaded.
    std::optional<LabelVolume> seeds() const;
    std::optional<LabelVolume> mask() const;

    void bind(httplib::Server& server);

private:
    struct Session {
        std::string session_id = "default";
        std::optional<ScalarVolume> image;
        float min_intensity = 0.0f;
        float max_intensity = 0.0f;
        std::optional<LabelVolume> seeds;
        std::optional<LabelVolume> mask;
        std::optional<SegmentationResult> last_result;
        std::optional<LabelVolume> truth;
    };

    std::optional<SlicePlane> parse_plane(const std::string& axis, const std::string& index, Response& error) const;
    nlohmann::json seed_counts_locked() const;

    ServiceOptions options_;
    Session session_;
    mutable std::shared_mutex data_mutex_;
    std::mutex mutation_mutex_;
    std::atomic<bool> segment_running_{false};
};

} // namespace growcut::service
