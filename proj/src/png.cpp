#include "growcut/png.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <png.h>

namespace growcut::png {
namespace {

void on_png_warning(png_structp, png_const_charp) {}

void append_bytes(png_structp png, png_bytep data, png_size_t len)
{
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), len);
}

void flush_nothing(png_structp) {}

struct Reader {
    const std::string* bytes;
    std::size_t pos;
};

void read_bytes(png_structp png, png_bytep data, png_size_t len)
{
    auto* r = static_cast<Reader*>(png_get_io_ptr(png));
    if (r->pos + len > r->bytes->size()) png_error(png, "unexpected end of data");
    std::memcpy(data, r->bytes->data() + r->pos, len);
    r->pos += len;
}

} // namespace

std::string encode_gray8(const GrayImage& image)
{
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
        throw parameter_error("png: bad image shape");
    }
    std::string out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, on_png_warning);
    png_infop info = png_create_info_struct(png);
    // libpng reports errors by longjmp; nothing with a destructor is created past this point.
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("png: encoding failed");
    }
    {
        png_set_write_fn(png, &out, append_bytes, flush_nothing);
        png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                     PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_set_compression_level(png, 6);
        png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
        png_write_info(png, info);
        for (int y = 0; y < image.height; ++y) {
            png_write_row(png, image.pixels.data() + static_cast<std::size_t>(y) * image.width);
        }
        png_write_end(png, nullptr);
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

GrayImage decode_gray8(const std::string& bytes)
{
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
        throw parse_error("png: bad signature");
    }
    GrayImage img;
    Reader reader{&bytes, 0};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, on_png_warning);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw parse_error("png: decoding failed");
    }
    {
        png_set_read_fn(png, &reader, read_bytes);
        png_read_info(png, info);
        if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
            png_error(png, "expected 8-bit grayscale");
        }
        img.width = static_cast<int>(png_get_image_width(png, info));
        img.height = static_cast<int>(png_get_image_height(png, info));
        img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
        for (int y = 0; y < img.height; ++y) {
            png_read_row(png, img.pixels.data() + static_cast<std::size_t>(y) * img.width, nullptr);
        }
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

std::uint8_t window_level(double value, double window, double level) noexcept
{
    const double t = std::clamp((value - (level - window / 2.0)) / window, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::round(t * 255.0));
}

GrayImage render_slice(const Slice2D<float>& slice, double window, double level)
{
    if (!(window > 0.0)) throw parameter_error("window must be > 0");
    GrayImage img{slice.width, slice.height, std::vector<std::uint8_t>(slice.values.size())};
    for (std::size_t i = 0; i < slice.values.size(); ++i) {
        img.pixels[i] = window_level(slice.values[i], window, level);
    }
    return img;
}

} // namespace growcut::png
