#include "doctest.h"

#include <set>

#include <zlib.h>

#include "growcut/nrrd.hpp"
#include "growcut/resample.hpp"
#include "growcut/slice.hpp"
#include "support.hpp"

using namespace growcut;
using testsupport::TempDir;

namespace {

std::string int16_bytes(const std::vector<std::int16_t>& v, bool big_endian)
{
    std::string out;
    for (auto x : v) {
        const auto u = static_cast<std::uint16_t>(x);
        const char lo = static_cast<char>(u & 0xff), hi = static_cast<char>(u >> 8);
        out += big_endian ? std::string{hi, lo} : std::string{lo, hi};
    }
    return out;
}

std::string gzip(const std::string& raw)
{
    z_stream zs{};
    deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY);
    std::string out(deflateBound(&zs, raw.size()) + 32, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(raw.data()));
    zs.avail_in = static_cast<uInt>(raw.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

Error::Kind load_error_kind(const std::string& path)
{
    try {
        nrrd::load(path);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return Error::Kind::Io;
}

} // namespace

TEST_SUITE("volume") {

TEST_CASE("linear index is a bijection")
{
    const Geometry g{{3, 4, 5}, {1, 1, 1}, {0, 0, 0}};
    std::set<std::size_t> seen;
    for (int k = 0; k < 5; ++k)
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 3; ++i) {
                const auto p = g.linear(i, j, k);
                CHECK(p < g.voxel_count());
                CHECK(g.index_of(p) == Index3{i, j, k});
                seen.insert(p);
            }
    CHECK(seen.size() == 60);
}

TEST_CASE("geometry validation")
{
    CHECK_THROWS_AS(Geometry({{0, 1, 1}, {1, 1, 1}, {0, 0, 0}}).validate(), Error);
    CHECK_THROWS_AS(Geometry({{1, 1, 1}, {1, -1, 1}, {0, 0, 0}}).validate(), Error);
    CHECK_NOTHROW(Geometry({{1, 1, 1}, {0.5, 1, 1}, {0, 0, 0}}).validate());
}

TEST_CASE("raw int16 NRRD loads into a scalar volume")
{
    TempDir dir;
    const std::vector<std::int16_t> values{-3, 0, 7, 1000, -32768, 32767, 12, 5};
    const std::string path = dir.file("a.nrrd");
    testsupport::write_file(path, "NRRD0004\ntype: short\ndimension: 3\nsizes: 2 2 2\nspacings: 1 1 1\n"
                                  "endian: little\nencoding: raw\n\n" +
                                      int16_bytes(values, false));
    const auto v = nrrd::load_scalar(path);
    CHECK(v.dims() == Index3{2, 2, 2});
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(v[i] == static_cast<float>(values[i]));
}

TEST_CASE("big-endian and gzip payloads")
{
    TempDir dir;
    const std::vector<std::int16_t> values{1, -2, 300, 4, 5, 6, -700, 8};
    const std::string header = "NRRD0005\n# comment\ntype: int16\ndimension: 3\nsizes: 2 2 2\n"
                               "space directions: (0.5,0,0) (0,0.5,0) (0,0,2)\nspace origin: (1,2,3)\n"
                               "endian: big\n";
    testsupport::write_file(dir.file("b.nrrd"), header + "encoding: raw\n\n" + int16_bytes(values, true));
    testsupport::write_file(dir.file("g.nrrd"), header + "encoding: gzip\n\n" + gzip(int16_bytes(values, true)));
    for (const auto* name : {"b.nrrd", "g.nrrd"}) {
        const auto v = nrrd::load_scalar(dir.file(name));
        CHECK(v.spacing() == Vec3{0.5, 0.5, 2.0});
        CHECK(v.geometry().origin == Vec3{1, 2, 3});
        for (std::size_t i = 0; i < values.size(); ++i) CHECK(v[i] == static_cast<float>(values[i]));
    }
}

TEST_CASE("header with clinical dims and spacing")
{
    TempDir dir;
    const std::string path = dir.file("big.nrrd");
    const std::size_t n = 512ull * 512 * 113;
    testsupport::write_file(path, "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 512 512 113\n"
                                  "spacings: 0.63 0.63 0.63\nencoding: raw\n\n" +
                                      std::string(n, '\1'));
    const auto any = nrrd::load(path);
    const auto& v = std::get<LabelVolume>(any);
    CHECK(v.dims() == Index3{512, 512, 113});
    CHECK(v.spacing() == Vec3{0.63, 0.63, 0.63});
}

TEST_CASE("malformed files")
{
    TempDir dir;
    testsupport::write_file(dir.file("magic.nrrd"), "NotNRRD\n");
    CHECK(load_error_kind(dir.file("magic.nrrd")) == Error::Kind::Parse);

    testsupport::write_file(dir.file("oblique.nrrd"),
                            "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 1 1 1\n"
                            "space directions: (1,0.5,0) (0,1,0) (0,0,1)\nencoding: raw\n\n\1");
    CHECK(load_error_kind(dir.file("oblique.nrrd")) == Error::Kind::UnsupportedGeometry);

    testsupport::write_file(dir.file("short.nrrd"),
                            "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n\1\2\3");
    CHECK(load_error_kind(dir.file("short.nrrd")) == Error::Kind::Truncation);

    testsupport::write_file(dir.file("gzshort.nrrd"), "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\n"
                                                      "encoding: gzip\n\n" +
                                                          gzip(std::string(3, '\1')));
    CHECK(load_error_kind(dir.file("gzshort.nrrd")) == Error::Kind::Truncation);

    testsupport::write_file(dir.file("dim.nrrd"), "NRRD0004\ntype: uint8\ndimension: 2\nsizes: 2 2\n"
                                                  "encoding: raw\n\n\1\1\1\1");
    CHECK(load_error_kind(dir.file("dim.nrrd")) == Error::Kind::Parse);

    testsupport::write_file(dir.file("line.nrrd"), "NRRD0004\ntype: uint8\nthis is not a field\n");
    try {
        nrrd::load(dir.file("line.nrrd"));
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    CHECK(load_error_kind(dir.file("absent.nrrd")) == Error::Kind::Io);
}

TEST_CASE("scalar round trip is bit exact")
{
    TempDir dir;
    EllipsoidPhantomSpec spec;
    spec.dims = {20, 17, 13};
    spec.semi_axes = {6, 5, 4};
    spec.spacing = {0.63, 0.7, 4.0};
    spec.noise_sigma = 3.7;
    spec.rng_seed = 11;
    auto p = make_ellipsoid_phantom(spec);
    nrrd::save(p.image, dir.file("img.nrrd"));
    nrrd::save(p.truth, dir.file("truth.nrrd"));
    const auto img = nrrd::load_scalar(dir.file("img.nrrd"));
    CHECK(img == p.image);
    CHECK(nrrd::load_labels(dir.file("truth.nrrd")) == p.truth);
}

TEST_CASE("label round trip keeps the histogram")
{
    TempDir dir;
    std::mt19937_64 rng(5);
    LabelVolume m(testsupport::cube(9), 0);
    std::uniform_int_distribution<int> lab(0, 2);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<Label>(lab(rng));
    nrrd::save(m, dir.file("m.nrrd"));
    const auto back = nrrd::load_labels(dir.file("m.nrrd"));
    for (Label l = 0; l <= 2; ++l) CHECK(count_label(back, l) == count_label(m, l));
    CHECK(back == m);
}

TEST_CASE("written header carries the spacing verbatim")
{
    TempDir dir;
    ScalarVolume v(Geometry{{2, 2, 2}, {0.73, 0.73, 0.73}, {0, 0, 0}}, 1.0f);
    nrrd::save(v, dir.file("s.nrrd"));
    const auto text = testsupport::read_file(dir.file("s.nrrd"));
    CHECK(text.find("spacings: 0.73 0.73 0.73\n") != std::string::npos);
}

TEST_CASE("non-integer values are rejected as labels")
{
    TempDir dir;
    ScalarVolume v(testsupport::cube(2), 0.5f);
    nrrd::save(v, dir.file("f.nrrd"));
    CHECK_THROWS_AS(nrrd::load_labels(dir.file("f.nrrd")), Error);
}

TEST_CASE("resampling a constant volume stays constant")
{
    ScalarVolume v(Geometry{{7, 5, 3}, {0.63, 0.9, 4.0}, {0, 0, 0}}, 42.5f);
    for (double t : {0.3, 0.63, 1.0, 2.5}) {
        const auto r = resample_isotropic(v, t);
        for (float x : r.values()) CHECK(x == doctest::Approx(42.5f).epsilon(1e-6));
    }
}

TEST_CASE("anisotropic slab geometry")
{
    const Geometry src{{512, 512, 113}, {0.63, 0.63, 4.0}, {0, 0, 0}};
    const auto g = isotropic_geometry(src, 0.63);
    CHECK(g.dims[0] == 512);
    CHECK(g.dims[1] == 512);
    CHECK(g.dims[2] == static_cast<int>(std::lround(113 * 4.0 / 0.63)));
    CHECK(g.spacing == Vec3{0.63, 0.63, 0.63});
    CHECK_THROWS_AS(isotropic_geometry(src, 1000.0), Error);
    CHECK_THROWS_AS(isotropic_geometry(src, 0.0), Error);
}

TEST_CASE("resampling to the source spacing is the identity")
{
    std::mt19937_64 rng(3);
    ScalarVolume v(Geometry{{6, 7, 8}, {0.8, 0.8, 0.8}, {1, 2, 3}}, 0.0f);
    std::uniform_real_distribution<float> u(-100, 100);
    for (auto& x : v.data()) x = u(rng);
    const auto r = resample_isotropic(v, 0.8);
    REQUIRE(r.dims() == v.dims());
    CHECK(r.geometry().origin == v.geometry().origin);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(r[i] - v[i]) <= 1e-6);
}

TEST_CASE("label resampling never invents labels")
{
    std::mt19937_64 rng(17);
    for (int t = 0; t < 30; ++t) {
        LabelVolume m(Geometry{{8, 8, 8}, {0.5 + t * 0.05, 1.0, 1.7}, {0, 0, 0}}, 0);
        std::uniform_int_distribution<int> lab(0, 4);
        std::set<Label> in;
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] = static_cast<Label>(lab(rng) == 4 ? 7 : lab(rng) % 3);
            in.insert(m[i]);
        }
        const auto r = resample_labels(m, 0.6 + 0.1 * (t % 5));
        for (Label x : r.values()) CHECK(in.count(x) == 1);
    }
}

TEST_CASE("resampling is independent of the worker count")
{
    std::mt19937_64 rng(23);
    ScalarVolume v(Geometry{{9, 11, 6}, {0.63, 0.63, 2.0}, {0, 0, 0}}, 0.0f);
    std::uniform_real_distribution<float> u(0, 1000);
    for (auto& x : v.data()) x = u(rng);
    const auto a = resample_isotropic(v, 0.63, Interpolation::Trilinear, 1);
    const auto b = resample_isotropic(v, 0.63, Interpolation::Trilinear, 4);
    CHECK(a == b);
}

TEST_CASE("axial slice of an index-valued volume")
{
    ScalarVolume v(Geometry{{4, 3, 2}, {1, 1, 1}, {0, 0, 0}}, 0.0f);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i);
    const auto s = extract_slice(v, {Axis::Axial, 0});
    CHECK(s.width == 4);
    CHECK(s.height == 3);
    for (std::size_t i = 0; i < s.values.size(); ++i) CHECK(s.values[i] == static_cast<float>(i));
}

TEST_CASE("slice shapes and random probes")
{
    ScalarVolume v(Geometry{{4, 5, 6}, {1, 1, 1}, {0, 0, 0}}, 0.0f);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<float> u(0, 1);
    for (auto& x : v.data()) x = u(rng);
    const auto sag = extract_slice(v, {Axis::Sagittal, 2});
    CHECK(sag.width == 5);
    CHECK(sag.height == 6);
    const auto cor = extract_slice(v, {Axis::Coronal, 1});
    CHECK(cor.width == 4);
    CHECK(cor.height == 6);
    std::uniform_int_distribution<int> di(0, 3), dj(0, 4), dk(0, 5), ax(0, 2);
    for (int t = 0; t < 100; ++t) {
        const int i = di(rng), j = dj(rng), k = dk(rng);
        switch (ax(rng)) {
        case 0: CHECK(extract_slice(v, {Axis::Axial, k}).at(i, j) == v(i, j, k)); break;
        case 1: CHECK(extract_slice(v, {Axis::Sagittal, i}).at(j, k) == v(i, j, k)); break;
        default: CHECK(extract_slice(v, {Axis::Coronal, j}).at(i, k) == v(i, j, k)); break;
        }
    }
    CHECK_THROWS_AS(extract_slice(v, {Axis::Axial, 6}), Error);
    CHECK_THROWS_AS(extract_slice(v, {Axis::Sagittal, -1}), Error);
}

}
