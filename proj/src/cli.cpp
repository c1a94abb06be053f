#include "growcut/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "growcut/engine.hpp"
#include "growcut/metrics.hpp"
#include "growcut/morphology.hpp"
#include "growcut/nrrd.hpp"
#include "growcut/parallel.hpp"
#include "growcut/phantom.hpp"
#include "growcut/resample.hpp"
#include "growcut/strokes.hpp"

namespace growcut::cli {
namespace {

namespace fs = std::filesystem;

// Runs `f`, prefixing any library error with the pipeline stage.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("[") + name + "] " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("[") + name + "] " + e.what());
    }
}

int exit_code_for(Error::Kind kind)
{
    switch (kind) {
    case Error::Kind::Io:
    case Error::Kind::Parse:
    case Error::Kind::Truncation:
    case Error::Kind::UnsupportedGeometry: return kIo;
    default: return kValidation;
    }
}

nlohmann::json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw io_error("write failed: " + path.string());
}

bool is_json_path(const fs::path& p)
{
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".json";
}

struct SegmentOptions {
    std::string image, seeds, out, stats;
    double resample_mm = 0.0;
    GrowCutConfig engine;
    std::string post;
    bool strict = false;
};

int cmd_segment(const SegmentOptions& o, std::ostream& out, std::ostream& err)
{
    ScalarVolume image = stage("load", [&] { return nrrd::load_scalar(o.image); });
    if (o.resample_mm > 0.0) {
        image = stage("resample", [&] {
            return resample_isotropic(image, o.resample_mm, Interpolation::Trilinear, o.engine.parallel_workers);
        });
    }
    LabelVolume seeds = stage("seeds", [&] {
        if (is_json_path(o.seeds)) {
            return strokes::rasterize(strokes::parse(read_json(o.seeds)), image.geometry());
        }
        LabelVolume s = nrrd::load_labels(o.seeds);
        if (o.resample_mm > 0.0) s = resample_labels(s, o.resample_mm, o.engine.parallel_workers);
        require_same_dims(image.geometry(), s.geometry(), ("seeds " + o.seeds + " vs image " + o.image).c_str());
        return s;
    });
    SegmentationResult result = stage("segment", [&] { return run_growcut(image, seeds, o.engine); });
    LabelVolume mask = result.mask;
    if (!o.post.empty()) {
        mask = stage("post", [&] {
            const auto ops = o.post == "default" ? morphology::default_post_ops() : morphology::parse_post_ops(o.post);
            return morphology::apply_post_ops(mask, ops, kForeground, o.engine.parallel_workers);
        });
    }
    stage("save", [&] { nrrd::save(mask, o.out); });

    nlohmann::json stats{{"iterations_run", result.iterations_run},
                         {"converged", result.converged},
                         {"timed_out", result.timed_out},
                         {"wall_time_ms", result.wall_time_ms},
                         {"changed_per_iteration", result.changed_per_iteration},
                         {"roi", {{"min", result.roi.min}, {"max", result.roi.max}}},
                         {"seed_voxels", {{"fg", count_label(seeds, kForeground)}, {"bg", count_label(seeds, kBackground)}}},
                         {"mask_fg_voxels", count_label(mask, kForeground)},
                         {"post", o.post}};
    if (!o.stats.empty()) {
        stage("save", [&] { write_text(o.stats, stats.dump(2) + "\n"); });
    }
    out << stats.dump() << "\n";
    if (o.strict && !result.converged) {
        err << "error: [segment] not converged after " << result.iterations_run << " iterations\n";
        return kNotConverged;
    }
    return kOk;
}

struct EvaluateOptions {
    std::string a, r, manifest, json_out, csv_out, case_id = "case";
    int label = 1;
    int workers = 1;
};

metrics::EvaluationReport evaluate_pair(const std::string& a_path, const std::string& r_path, int label,
                                        std::optional<double> wall_ms)
{
    const LabelVolume a = stage("load", [&] { return nrrd::load_labels(a_path); });
    const LabelVolume r = stage("load", [&] { return nrrd::load_labels(r_path); });
    if (a.dims() != r.dims()) {
        throw shape_error("[evaluate] geometry mismatch between " + a_path + " and " + r_path);
    }
    return stage("evaluate",
                 [&] { return metrics::evaluate(a, r, r.spacing(), wall_ms, static_cast<Label>(label)); });
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out)
{
    if (o.manifest.empty()) {
        if (o.a.empty() || o.r.empty()) throw validation_error("evaluate needs two masks or --manifest");
        const auto report = evaluate_pair(o.a, o.r, o.label, std::nullopt);
        const std::vector<metrics::CaseRow> rows{metrics::to_row(o.case_id, report)};
        if (!o.json_out.empty()) stage("save", [&] { write_text(o.json_out, report.to_json().dump(2) + "\n"); });
        if (!o.csv_out.empty()) {
            stage("save", [&] { write_text(o.csv_out, metrics::to_csv(rows, metrics::summarize(rows))); });
        }
        out << report.to_json().dump() << "\n";
        return kOk;
    }

    const fs::path manifest_path(o.manifest);
    const nlohmann::json doc = stage("manifest", [&] { return read_json(manifest_path); });
    const nlohmann::json& cases = doc.is_array() ? doc : doc.at("cases");
    struct Case {
        std::string id, a, r;
        std::optional<double> time_min;
    };
    std::vector<Case> list;
    stage("manifest", [&] {
        const fs::path base = manifest_path.parent_path();
        for (const auto& c : cases) {
            Case item;
            item.id = c.at("case_id").get<std::string>();
            item.a = (base / c.at("algorithm").get<std::string>()).string();
            item.r = (base / c.at("manual").get<std::string>()).string();
            if (c.contains("time_min")) item.time_min = c["time_min"].get<double>();
            else if (c.contains("wall_time_ms")) item.time_min = c["wall_time_ms"].get<double>() / 60000.0;
            list.push_back(std::move(item));
        }
    });
    std::sort(list.begin(), list.end(), [](const Case& x, const Case& y) { return x.id < y.id; });

    std::vector<metrics::EvaluationReport> reports(list.size());
    WorkerPool pool(resolve_workers(o.workers));
    pool.run(list.size(), [&](std::size_t i) { reports[i] = evaluate_pair(list[i].a, list[i].r, o.label, std::nullopt); });

    std::vector<metrics::CaseRow> rows;
    nlohmann::json case_json = nlohmann::json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
        auto row = metrics::to_row(list[i].id, reports[i]);
        row.time_min = list[i].time_min;
        rows.push_back(row);
        auto j = reports[i].to_json();
        j["case_id"] = list[i].id;
        j["time_min"] = list[i].time_min ? nlohmann::json(*list[i].time_min) : nlohmann::json(nullptr);
        case_json.push_back(j);
    }
    const auto summary = metrics::summarize(rows);
    const std::string csv = metrics::to_csv(rows, summary);
    const nlohmann::json result{{"cases", case_json}, {"summary", summary.to_json()}};
    if (!o.csv_out.empty()) stage("save", [&] { write_text(o.csv_out, csv); });
    if (!o.json_out.empty()) stage("save", [&] { write_text(o.json_out, result.dump(2) + "\n"); });
    out << csv;
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"GrowCut volumetric segmentation toolkit", "growcut"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // segment
    SegmentOptions seg;
    auto* segment = app.add_subcommand("segment", "Segment an image from seed strokes or a seed label volume");
    segment->add_option("--image", seg.image, "Intensity NRRD")->required();
    segment->add_option("--seeds", seg.seeds, "Stroke JSON or seed label NRRD")->required();
    segment->add_option("--out", seg.out, "Output mask NRRD")->required();
    segment->add_option("--stats", seg.stats, "Write run statistics JSON here");
    segment->add_option("--resample", seg.resample_mm, "Resample to this isotropic spacing (mm) first");
    segment->add_option("--margin", seg.engine.margin_fraction, "ROI margin fraction")->capture_default_str();
    segment->add_option("--connectivity", seg.engine.connectivity, "6 or 26")->capture_default_str();
    segment->add_option("--max-iters", seg.engine.max_iterations, "Iteration cap")->capture_default_str();
    segment->add_option("--workers", seg.engine.parallel_workers, "Worker threads, 0 = auto")->capture_default_str();
    segment->add_option("--post", seg.post, "Post-edit ops, e.g. \"islands,dilate:1,erode:1\" or \"default\"");
    segment->add_flag("--strict", seg.strict, "Exit 4 when the automaton did not converge");

    // evaluate
    EvaluateOptions ev;
    auto* evaluate = app.add_subcommand("evaluate", "Compare masks (DSC, Hausdorff, volumes)");
    evaluate->add_option("mask_a", ev.a, "Algorithm mask");
    evaluate->add_option("mask_r", ev.r, "Reference mask");
    evaluate->add_option("--manifest", ev.manifest, "Batch manifest JSON");
    evaluate->add_option("--label", ev.label, "Label to compare")->capture_default_str();
    evaluate->add_option("--json", ev.json_out, "Write JSON report");
    evaluate->add_option("--csv", ev.csv_out, "Write CSV table");
    evaluate->add_option("--case-id", ev.case_id, "Case id for single-pair CSV")->capture_default_str();
    evaluate->add_option("--workers", ev.workers, "Parallel cases")->capture_default_str();

    // resample
    std::string rs_in, rs_out, rs_interp = "trilinear";
    double rs_target = 0.0;
    bool rs_labels = false;
    int rs_workers = 1;
    auto* resample = app.add_subcommand("resample", "Resample to isotropic spacing");
    resample->add_option("--in", rs_in)->required();
    resample->add_option("--out", rs_out)->required();
    resample->add_option("--target", rs_target, "Isotropic spacing in mm")->required();
    resample->add_option("--interp", rs_interp)->check(CLI::IsMember({"trilinear", "nearest"}))->capture_default_str();
    resample->add_flag("--labels", rs_labels, "Treat input as labels (nearest)");
    resample->add_option("--workers", rs_workers)->capture_default_str();

    // phantom
    EllipsoidPhantomSpec ph;
    std::vector<int> ph_dims{64, 64, 64};
    std::vector<double> ph_axes{20, 15, 15}, ph_center, ph_spacing{1, 1, 1};
    std::string ph_image, ph_truth;
    auto* phantom = app.add_subcommand("phantom", "Write a noisy ellipsoid image and its analytic mask");
    phantom->add_option("--dims", ph_dims)->expected(3)->capture_default_str();
    phantom->add_option("--axes", ph_axes, "Semi-axes in voxels")->expected(3)->capture_default_str();
    phantom->add_option("--center", ph_center, "Center voxel (default dims/2)")->expected(3);
    phantom->add_option("--spacing", ph_spacing)->expected(3)->capture_default_str();
    phantom->add_option("--inside", ph.inside)->capture_default_str();
    phantom->add_option("--outside", ph.outside)->capture_default_str();
    phantom->add_option("--noise", ph.noise_sigma, "Gaussian noise sigma")->capture_default_str();
    phantom->add_option("--seed", ph.rng_seed, "RNG seed")->capture_default_str();
    phantom->add_option("--image", ph_image)->required();
    phantom->add_option("--truth", ph_truth)->required();

    // post
    std::string post_in, post_out, post_ops = "islands,dilate:1,erode:1";
    int post_label = 1, post_workers = 1;
    auto* post = app.add_subcommand("post", "Morphological post-editing of a mask");
    post->add_option("--in", post_in)->required();
    post->add_option("--out", post_out)->required();
    post->add_option("--ops", post_ops)->capture_default_str();
    post->add_option("--label", post_label)->capture_default_str();
    post->add_option("--workers", post_workers)->capture_default_str();

    // sphere-seed
    std::string ss_like, ss_out;
    std::vector<int> ss_dims, ss_center;
    std::vector<double> ss_spacing{1, 1, 1};
    double r_fg = 0, r_in = 0, r_out = 0;
    auto* sphere = app.add_subcommand("sphere-seed", "Write a sphere-and-shell seed volume around one point");
    sphere->add_option("--like", ss_like, "Take geometry from this NRRD");
    sphere->add_option("--dims", ss_dims)->expected(3);
    sphere->add_option("--spacing", ss_spacing)->expected(3);
    sphere->add_option("--center", ss_center)->expected(3)->required();
    sphere->add_option("--r-fg", r_fg)->required();
    sphere->add_option("--r-bg-inner", r_in)->required();
    sphere->add_option("--r-bg-outer", r_out)->required();
    sphere->add_option("--out", ss_out)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (segment->parsed()) {
            return cmd_segment(seg, out, err);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(ev, out);
        }
        if (resample->parsed()) {
            auto any = stage("load", [&] { return nrrd::load(rs_in); });
            if (rs_labels || std::holds_alternative<LabelVolume>(any)) {
                LabelVolume labels = stage("load", [&] { return nrrd::load_labels(rs_in); });
                auto res = stage("resample", [&] { return resample_labels(labels, rs_target, rs_workers); });
                stage("save", [&] { nrrd::save(res, rs_out); });
            } else {
                const auto interp = rs_interp == "nearest" ? Interpolation::Nearest : Interpolation::Trilinear;
                auto res = stage("resample", [&] {
                    return resample_isotropic(std::get<ScalarVolume>(any), rs_target, interp, rs_workers);
                });
                stage("save", [&] { nrrd::save(res, rs_out); });
            }
            return kOk;
        }
        if (phantom->parsed()) {
            ph.dims = {ph_dims[0], ph_dims[1], ph_dims[2]};
            ph.semi_axes = {ph_axes[0], ph_axes[1], ph_axes[2]};
            ph.spacing = {ph_spacing[0], ph_spacing[1], ph_spacing[2]};
            if (!ph_center.empty()) ph.center = Vec3{ph_center[0], ph_center[1], ph_center[2]};
            const auto result = stage("phantom", [&] { return make_ellipsoid_phantom(ph); });
            stage("save", [&] {
                nrrd::save(result.image, ph_image);
                nrrd::save(result.truth, ph_truth);
            });
            out << nlohmann::json{{"truth_voxels", count_label(result.truth, kForeground)}}.dump() << "\n";
            return kOk;
        }
        if (post->parsed()) {
            const auto ops = stage("post", [&] { return morphology::parse_post_ops(post_ops); });
            const auto mask = stage("load", [&] { return nrrd::load_labels(post_in); });
            const auto edited = stage("post", [&] {
                return morphology::apply_post_ops(mask, ops, static_cast<Label>(post_label), post_workers);
            });
            stage("save", [&] { nrrd::save(edited, post_out); });
            out << nlohmann::json{{"voxels", count_label(edited, kForeground)}}.dump() << "\n";
            return kOk;
        }
        if (sphere->parsed()) {
            Geometry g;
            if (!ss_like.empty()) {
                g = stage("load", [&] {
                    auto any = nrrd::load(ss_like);
                    return std::visit([](const auto& v) { return v.geometry(); }, any);
                });
            } else if (ss_dims.size() == 3) {
                g.dims = {ss_dims[0], ss_dims[1], ss_dims[2]};
                g.spacing = {ss_spacing[0], ss_spacing[1], ss_spacing[2]};
            } else {
                throw validation_error("sphere-seed needs --like or --dims");
            }
            const auto seeds = stage("sphere-seed", [&] {
                return sphere_seed({ss_center[0], ss_center[1], ss_center[2]}, r_fg, r_in, r_out, g);
            });
            stage("save", [&] { nrrd::save(seeds, ss_out); });
            out << nlohmann::json{{"fg", count_label(seeds, kForeground)}, {"bg", count_label(seeds, kBackground)}}.dump()
                << "\n";
            return kOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    }
    return kFailure;
}

} // namespace growcut::cli
