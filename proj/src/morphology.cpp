#include "growcut/morphology.hpp"

#include <array>
#include <charconv>
#include <cstdlib>
#include <string>

#include "growcut/parallel.hpp"

namespace growcut::morphology {
namespace {

std::vector<Index3> stencil(int connectivity)
{
    std::vector<Index3> out;
    for (int dk = -1; dk <= 1; ++dk) {
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const int m = std::abs(di) + std::abs(dj) + std::abs(dk);
                if (m == 0) continue;
                if (connectivity == 6 && m != 1) continue;
                if (connectivity == 18 && m == 3) continue;
                out.push_back({di, dj, dk});
            }
        }
    }
    return out;
}

void check_connectivity(int c)
{
    if (c != 6 && c != 18 && c != 26) {
        throw parameter_error("connectivity must be 6, 18 or 26, got " + std::to_string(c));
    }
}

// One pass of dilation (grow = true) or erosion over a 0/1 mask.
LabelVolume pass(const LabelVolume& in, const std::vector<Index3>& offsets, bool grow, WorkerPool& pool)
{
    const Geometry& g = in.geometry();
    LabelVolume out(g);
    pool.run(static_cast<std::size_t>(g.dims[2]), [&](std::size_t kk) {
        const int k = static_cast<int>(kk);
        for (int j = 0; j < g.dims[1]; ++j) {
            for (int i = 0; i < g.dims[0]; ++i) {
                const bool self = in(i, j, k) != 0;
                bool v = self;
                if (grow ? !self : self) {
                    for (const Index3& d : offsets) {
                        const int x = i + d[0], y = j + d[1], z = k + d[2];
                        const bool inside = g.contains(x, y, z);
                        if (grow) {
                            if (inside && in(x, y, z)) {
                                v = true;
                                break;
                            }
                        } else if (!inside || !in(x, y, z)) {
                            v = false;
                            break;
                        }
                    }
                }
                out(i, j, k) = v ? 1 : 0;
            }
        }
    });
    return out;
}

LabelVolume repeat(const LabelVolume& mask, StructuringElement se, int iterations, Label label, int workers, bool grow)
{
    se.validate();
    if (iterations < 1) {
        throw parameter_error("morphology iterations must be >= 1");
    }
    const auto offsets = stencil(se.connectivity);
    WorkerPool pool(resolve_workers(workers));
    LabelVolume cur = binary_view(mask, label);
    for (int it = 0; it < iterations; ++it) {
        cur = pass(cur, offsets, grow, pool);
    }
    return cur;
}

int parse_int(std::string_view s, std::string_view item)
{
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw validation_error("bad number in post-edit op \"" + std::string(item) + "\"");
    }
    return v;
}

} // namespace

void StructuringElement::validate() const { check_connectivity(connectivity); }

LabelVolume dilate(const LabelVolume& mask, StructuringElement se, int iterations, Label label, int workers)
{
    return repeat(mask, se, iterations, label, workers, true);
}

LabelVolume erode(const LabelVolume& mask, StructuringElement se, int iterations, Label label, int workers)
{
    return repeat(mask, se, iterations, label, workers, false);
}

Components connected_components(const LabelVolume& mask, int connectivity, Label label)
{
    check_connectivity(connectivity);
    const Geometry& g = mask.geometry();
    const auto offsets = stencil(connectivity);
    Components c;
    c.ids.assign(mask.size(), 0);
    std::vector<std::size_t> queue;
    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (mask[start] != label || c.ids[start] != 0) continue;
        const auto id = static_cast<std::uint32_t>(c.sizes.size() + 1);
        c.ids[start] = id;
        queue.assign(1, start);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const Index3 p = g.index_of(queue[head]);
            for (const Index3& d : offsets) {
                const int x = p[0] + d[0], y = p[1] + d[1], z = p[2] + d[2];
                if (!g.contains(x, y, z)) continue;
                const std::size_t q = g.linear(x, y, z);
                if (mask[q] == label && c.ids[q] == 0) {
                    c.ids[q] = id;
                    queue.push_back(q);
                }
            }
        }
        c.sizes.push_back(queue.size());
    }
    return c;
}

LabelVolume remove_islands(const LabelVolume& mask, int connectivity, Label label)
{
    const Components c = connected_components(mask, connectivity, label);
    LabelVolume out(mask.geometry());
    if (c.count() == 0) return out;
    std::uint32_t keep = 1;
    for (std::uint32_t id = 2; id <= c.count(); ++id) {
        if (c.sizes[id - 1] > c.sizes[keep - 1]) keep = id;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = c.ids[i] == keep ? 1 : 0;
    }
    return out;
}

std::vector<PostOp> parse_post_ops(std::string_view spec)
{
    std::vector<PostOp> ops;
    if (spec.empty() || spec == "none") return ops;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto comma = spec.find(',', pos);
        std::string_view item = spec.substr(pos, comma == std::string_view::npos ? spec.npos : comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        std::array<std::string_view, 3> parts{};
        std::size_t nparts = 0;
        std::size_t p = 0;
        while (true) {
            const auto colon = item.find(':', p);
            if (nparts == parts.size()) throw validation_error("too many fields in post-edit op \"" + std::string(item) + "\"");
            parts[nparts++] = item.substr(p, colon == std::string_view::npos ? item.npos : colon - p);
            if (colon == std::string_view::npos) break;
            p = colon + 1;
        }
        PostOp op;
        if (parts[0] == "islands") {
            op.kind = PostOp::Kind::Islands;
            op.connectivity = nparts > 1 ? parse_int(parts[1], item) : 26;
            if (nparts > 2) throw validation_error("islands takes at most a connectivity: \"" + std::string(item) + "\"");
        } else if (parts[0] == "dilate" || parts[0] == "erode") {
            op.kind = parts[0] == "dilate" ? PostOp::Kind::Dilate : PostOp::Kind::Erode;
            op.iterations = nparts > 1 ? parse_int(parts[1], item) : 1;
            op.connectivity = nparts > 2 ? parse_int(parts[2], item) : 6;
            if (op.iterations < 1) throw validation_error("iterations must be >= 1 in \"" + std::string(item) + "\"");
        } else {
            throw validation_error("unknown post-edit op \"" + std::string(item) + "\"");
        }
        if (op.connectivity != 6 && op.connectivity != 18 && op.connectivity != 26) {
            throw validation_error("connectivity must be 6, 18 or 26 in \"" + std::string(item) + "\"");
        }
        ops.push_back(op);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return ops;
}

std::vector<PostOp> default_post_ops()
{
    return {{PostOp::Kind::Islands, 1, 26}, {PostOp::Kind::Dilate, 1, 6}, {PostOp::Kind::Erode, 1, 6}};
}

LabelVolume apply_post_ops(const LabelVolume& mask, const std::vector<PostOp>& ops, Label label, int workers)
{
    LabelVolume cur = binary_view(mask, label);
    for (const PostOp& op : ops) {
        switch (op.kind) {
        case PostOp::Kind::Islands: cur = remove_islands(cur, op.connectivity, 1); break;
        case PostOp::Kind::Dilate: cur = dilate(cur, {op.connectivity}, op.iterations, 1, workers); break;
        case PostOp::Kind::Erode: cur = erode(cur, {op.connectivity}, op.iterations, 1, workers); break;
        }
    }
    return cur;
}

} // namespace growcut::morphology
