#include "sbmri/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "io_util.hpp"

namespace sbmri {

namespace {
constexpr char kMagic[4] = {'S', 'B', 'I', 'M'};
constexpr std::uint32_t kVersion = 1;
} // namespace

void save_image(const std::string& path, const ComplexImage& x, std::uint64_t cfg_hash) {
    auto os = io::open_out(path);
    io::write_magic(os, kMagic);
    io::write_pod(os, kVersion);
    io::write_pod(os, static_cast<std::uint32_t>(x.height()));
    io::write_pod(os, static_cast<std::uint32_t>(x.width()));
    io::write_pod(os, cfg_hash);
    io::write_complex_f32(os, x);
    if (!os) throw FileFormatError("failed writing image: " + path);
}

ComplexImage load_image(const std::string& path, std::uint64_t* cfg_hash) {
    auto is = io::open_in(path);
    io::expect_magic(is, kMagic, "image file");
    io::expect_version(is, kVersion, "image file");
    const auto h = io::read_pod<std::uint32_t>(is);
    const auto w = io::read_pod<std::uint32_t>(is);
    const auto hash = io::read_pod<std::uint64_t>(is);
    if (cfg_hash) *cfg_hash = hash;
    return io::read_complex_f32(is, h, w);
}

void save_png(const std::string& path, const ComplexImage& x) {
    const std::size_t h = x.height(), w = x.width();
    double peak = 0;
    for (std::size_t i = 0; i < x.size(); ++i) peak = std::max(peak, std::abs(x[i]));
    const double scale = peak > 0 ? 255.0 / peak : 0.0;

    std::vector<unsigned char> pixels(h * w);
    for (std::size_t i = 0; i < x.size(); ++i)
        pixels[i] = static_cast<unsigned char>(
            std::clamp(std::lround(std::abs(x[i]) * scale), 0L, 255L));

    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw FileFormatError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw FileFormatError("libpng failure writing: " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < h; ++y)
        png_write_row(png, pixels.data() + y * w);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);

    // Display-transform provenance: the factor mapping magnitude to 8-bit.
    std::ofstream side(path + ".scale.txt");
    side << "peak_magnitude = " << peak << "\n"
         << "levels_per_unit = " << scale << "\n";
}

} // namespace sbmri
