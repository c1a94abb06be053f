#include "growcut/service.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "httplib.h"

#include "growcut/metrics.hpp"
#include "growcut/png.hpp"
#include "growcut/strokes.hpp"

namespace growcut::service {
namespace {

Response json_response(int status, const nlohmann::json& body)
{
    return {status, "application/json", body.dump()};
}

Response error_response(int status, const std::string& message)
{
    return json_response(status, {{"error", message}});
}

std::optional<long> parse_long(const std::string& s)
{
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_double(const std::string& s)
{
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

nlohmann::json roi_json(const Roi& roi) { return {{"min", roi.min}, {"max", roi.max}}; }

// Clears a flag on scope exit.
struct FlagGuard {
    std::atomic<bool>& flag;
    ~FlagGuard() { flag.store(false); }
};

} // namespace

nlohmann::json encode_row_rle(const Label* row, int width)
{
    nlohmann::json runs = nlohmann::json::array();
    int u = 0;
    while (u < width) {
        const int value = row[u] == kForeground ? 1 : 0;
        int len = 0;
        while (u < width && (row[u] == kForeground ? 1 : 0) == value) {
            ++u;
            ++len;
        }
        runs.push_back({value, len});
    }
    return runs;
}

Slice2D<Label> decode_mask_rle(const nlohmann::json& doc)
{
    Slice2D<Label> out;
    out.width = doc.at("width").get<int>();
    out.height = doc.at("height").get<int>();
    out.values.reserve(static_cast<std::size_t>(out.width) * out.height);
    const auto& rows = doc.at("rows");
    if (!rows.is_array() || static_cast<int>(rows.size()) != out.height) {
        throw parse_error("rle: row count does not match height");
    }
    for (const auto& row : rows) {
        int filled = 0;
        for (const auto& run : row) {
            const int value = run.at(0).get<int>();
            const int len = run.at(1).get<int>();
            if (len < 0 || filled + len > out.width) throw parse_error("rle: row overflows width");
            out.values.insert(out.values.end(), static_cast<std::size_t>(len), static_cast<Label>(value));
            filled += len;
        }
        if (filled != out.width) throw parse_error("rle: row shorter than width");
    }
    return out;
}

std::string mask_checksum(const LabelVolume& mask)
{
    std::uint64_t h = 14695981039346656037ull;
    for (Label v : mask.data()) {
        h ^= v;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {}

void Service::load_volume(ScalarVolume image)
{
    std::lock_guard mutation(mutation_mutex_);
    std::unique_lock lock(data_mutex_);
    const auto d = image.data();
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    session_.min_intensity = *lo;
    session_.max_intensity = *hi;
    session_.seeds = LabelVolume(image.geometry());
    session_.mask.reset();
    session_.last_result.reset();
    if (session_.truth && session_.truth->dims() != image.dims()) session_.truth.reset();
    session_.image = std::move(image);
}

void Service::load_truth(LabelVolume truth)
{
    std::lock_guard mutation(mutation_mutex_);
    std::unique_lock lock(data_mutex_);
    if (session_.image) require_same_dims(session_.image->geometry(), truth.geometry(), "truth");
    session_.truth = std::move(truth);
}

std::optional<LabelVolume> Service::seeds() const
{
    std::shared_lock lock(data_mutex_);
    return session_.seeds;
}

std::optional<LabelVolume> Service::mask() const
{
    std::shared_lock lock(data_mutex_);
    return session_.mask;
}

Response Service::get_volume() const
{
    std::shared_lock lock(data_mutex_);
    if (!session_.image) return error_response(404, "no volume loaded");
    const Geometry& g = session_.image->geometry();
    return json_response(200, {{"session_id", session_.session_id},
                               {"dims", g.dims},
                               {"spacing", g.spacing},
                               {"origin", g.origin},
                               {"intensity_min", session_.min_intensity},
                               {"intensity_max", session_.max_intensity},
                               {"has_mask", session_.mask.has_value()},
                               {"has_truth", session_.truth.has_value()}});
}

std::optional<SlicePlane> Service::parse_plane(const std::string& axis, const std::string& index,
                                               Response& error) const
{
    const auto ax = parse_axis(axis);
    if (!ax) {
        error = error_response(400, "bad axis \"" + axis + "\"");
        return std::nullopt;
    }
    const auto idx = parse_long(index);
    const int limit = session_.image->dims()[fixed_grid_axis(*ax)];
    if (!idx || *idx < 0 || *idx >= limit) {
        error = error_response(400, "slice index \"" + index + "\" out of range [0, " + std::to_string(limit) + ")");
        return std::nullopt;
    }
    return SlicePlane{*ax, static_cast<int>(*idx)};
}

Response Service::get_slice(const std::string& axis, const std::string& index, std::optional<std::string> window,
                            std::optional<std::string> level) const
{
    std::shared_lock lock(data_mutex_);
    if (!session_.image) return error_response(404, "no volume loaded");
    Response err;
    const auto plane = parse_plane(axis, index, err);
    if (!plane) return err;

    const double lo = session_.min_intensity;
    const double hi = session_.max_intensity;
    double w = hi > lo ? hi - lo : 1.0;
    double l = (hi + lo) / 2.0;
    if (window && !window->empty()) {
        const auto v = parse_double(*window);
        if (!v || !(*v > 0.0)) return error_response(400, "window must be a number > 0");
        w = *v;
    }
    if (level && !level->empty()) {
        const auto v = parse_double(*level);
        if (!v) return error_response(400, "level must be a number");
        l = *v;
    }
    const auto slice = extract_slice(*session_.image, *plane);
    return {200, "image/png", png::encode_gray8(png::render_slice(slice, w, l))};
}

nlohmann::json Service::seed_counts_locked() const
{
    const std::size_t fg = session_.seeds ? count_label(*session_.seeds, kForeground) : 0;
    const std::size_t bg = session_.seeds ? count_label(*session_.seeds, kBackground) : 0;
    return {{"fg", fg}, {"bg", bg}, {"total", fg + bg}};
}

Response Service::post_seeds(const std::string& body)
{
    std::lock_guard mutation(mutation_mutex_);
    if (!session_.image) return error_response(404, "no volume loaded");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        return error_response(400, std::string("malformed JSON: ") + e.what());
    }
    try {
        const auto file = strokes::parse(doc);
        LabelVolume next = *session_.seeds;
        strokes::rasterize_into(next, file);
        std::unique_lock lock(data_mutex_);
        session_.seeds = std::move(next);
        return json_response(200, seed_counts_locked());
    } catch (const Error& e) {
        return error_response(422, e.what());
    }
}

Response Service::delete_seeds()
{
    std::lock_guard mutation(mutation_mutex_);
    if (!session_.image) return error_response(404, "no volume loaded");
    std::unique_lock lock(data_mutex_);
    session_.seeds = LabelVolume(session_.image->geometry());
    return json_response(200, seed_counts_locked());
}

Response Service::post_segment(const std::string& body)
{
    if (segment_running_.exchange(true)) {
        return error_response(409, "a segmentation is already running");
    }
    FlagGuard guard{segment_running_};
    std::lock_guard mutation(mutation_mutex_);
    if (!session_.image) return error_response(404, "no volume loaded");

    GrowCutConfig cfg = options_.engine;
    cfg.time_limit = options_.segment_timeout;
    if (!body.empty()) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            return error_response(400, std::string("malformed JSON: ") + e.what());
        }
        try {
            if (doc.contains("margin")) cfg.margin_fraction = doc["margin"].get<double>();
            if (doc.contains("connectivity")) cfg.connectivity = doc["connectivity"].get<int>();
            if (doc.contains("max_iterations")) cfg.max_iterations = doc["max_iterations"].get<int>();
            if (doc.contains("workers")) cfg.parallel_workers = doc["workers"].get<int>();
            if (doc.contains("track_saturation")) cfg.track_saturation = doc["track_saturation"].get<bool>();
        } catch (const nlohmann::json::exception& e) {
            return error_response(422, std::string("bad config override: ") + e.what());
        }
    }
    if (count_label(*session_.seeds, kForeground) == 0) {
        return error_response(422, "no foreground seeds");
    }
    SegmentationResult result;
    try {
        // Image and seeds only change under the mutation lock held here.
        result = run_growcut(*session_.image, *session_.seeds, cfg);
    } catch (const Error& e) {
        return error_response(422, e.what());
    }
    nlohmann::json out{{"iterations_run", result.iterations_run},
                       {"converged", result.converged},
                       {"timed_out", result.timed_out},
                       {"wall_time_ms", result.wall_time_ms},
                       {"changed_per_iteration", result.changed_per_iteration},
                       {"roi", roi_json(result.roi)},
                       {"mask_checksum", mask_checksum(result.mask)},
                       {"fg_voxels", count_label(result.mask, kForeground)},
                       {"bg_voxels", count_label(result.mask, kBackground)}};
    std::unique_lock lock(data_mutex_);
    session_.mask = result.mask;
    session_.last_result = std::move(result);
    return json_response(200, out);
}

Response Service::get_mask_slice(const std::string& axis, const std::string& index) const
{
    std::shared_lock lock(data_mutex_);
    if (!session_.image) return error_response(404, "no volume loaded");
    if (!session_.mask) return error_response(404, "no mask; run a segmentation first");
    Response err;
    const auto plane = parse_plane(axis, index, err);
    if (!plane) return err;
    const auto slice = extract_slice(*session_.mask, *plane);
    nlohmann::json rows = nlohmann::json::array();
    for (int v = 0; v < slice.height; ++v) {
        rows.push_back(encode_row_rle(slice.values.data() + static_cast<std::size_t>(v) * slice.width, slice.width));
    }
    return json_response(200, {{"axis", std::string(axis_name(plane->axis))},
                               {"index", plane->index},
                               {"width", slice.width},
                               {"height", slice.height},
                               {"rows", rows}});
}

Response Service::post_post(const std::string& body)
{
    std::lock_guard mutation(mutation_mutex_);
    if (!session_.mask) return error_response(404, "no mask; run a segmentation first");
    std::vector<morphology::PostOp> ops = morphology::default_post_ops();
    if (!body.empty()) {
        try {
            const auto doc = nlohmann::json::parse(body);
            if (doc.contains("ops")) {
                const auto& spec = doc["ops"];
                std::string joined;
                if (spec.is_array()) {
                    for (const auto& item : spec) {
                        if (!joined.empty()) joined += ',';
                        joined += item.get<std::string>();
                    }
                } else {
                    joined = spec.get<std::string>();
                }
                ops = morphology::parse_post_ops(joined);
            }
        } catch (const nlohmann::json::parse_error& e) {
            return error_response(400, std::string("malformed JSON: ") + e.what());
        } catch (const nlohmann::json::exception& e) {
            return error_response(422, std::string("bad ops: ") + e.what());
        } catch (const Error& e) {
            return error_response(422, e.what());
        }
    }
    LabelVolume edited = morphology::apply_post_ops(*session_.mask, ops, kForeground, options_.engine.parallel_workers);
    const auto components = morphology::connected_components(edited, 26);
    nlohmann::json out{{"voxels", count_label(edited, kForeground)},
                       {"components", components.count()},
                       {"mask_checksum", mask_checksum(edited)}};
    std::unique_lock lock(data_mutex_);
    session_.mask = std::move(edited);
    return json_response(200, out);
}

Response Service::get_metrics() const
{
    std::shared_lock lock(data_mutex_);
    if (!session_.mask) return error_response(404, "no mask; run a segmentation first");
    if (!session_.truth) return error_response(404, "no ground truth loaded");
    std::optional<double> wall;
    if (session_.last_result) wall = session_.last_result->wall_time_ms;
    try {
        const auto report = metrics::evaluate(*session_.mask, *session_.truth, session_.image->spacing(), wall);
        return json_response(200, report.to_json());
    } catch (const Error& e) {
        return error_response(422, e.what());
    }
}

void Service::bind(httplib::Server& server)
{
    auto send = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    auto query = [](const httplib::Request& req, const char* key) -> std::optional<std::string> {
        if (!req.has_param(key)) return std::nullopt;
        return req.get_param_value(key);
    };

    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/api/volume", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_volume()); });
    server.Get(R"(/api/slice/([^/]+)/([^/]+))", [this, send, query](const httplib::Request& req, httplib::Response& res) {
        send(res, get_slice(req.matches[1], req.matches[2], query(req, "window"), query(req, "level")));
    });
    server.Post("/api/seeds",
                [this, send](const httplib::Request& req, httplib::Response& res) { send(res, post_seeds(req.body)); });
    server.Delete("/api/seeds", [this, send](const httplib::Request&, httplib::Response& res) { send(res, delete_seeds()); });
    server.Post("/api/segment",
                [this, send](const httplib::Request& req, httplib::Response& res) { send(res, post_segment(req.body)); });
    server.Get(R"(/api/mask/slice/([^/]+)/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, get_mask_slice(req.matches[1], req.matches[2]));
    });
    server.Post("/api/post",
                [this, send](const httplib::Request& req, httplib::Response& res) { send(res, post_post(req.body)); });
    server.Get("/api/metrics", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_metrics()); });
}

} // namespace growcut::service
