#include "creekline/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace creekline {

namespace {

std::string lower_ext(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

// --- PNM (PGM/PPM) ---------------------------------------------------------

// Skips whitespace and '#' comment lines, then reads one ASCII integer.
int next_pnm_int(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) throw IngestError(path, "malformed PNM header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

struct PnmData {
    std::string magic;
    Index width = 0;
    Index height = 0;
    std::vector<std::uint8_t> bytes;  // interleaved for P6
};

PnmData read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError(path, "cannot open file");
    PnmData d;
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    d.magic = {m0, m1};
    if (d.magic != "P5" && d.magic != "P2" && d.magic != "P6") {
        throw IngestError(path, "unsupported PNM magic '" + d.magic + "'");
    }
    d.width = next_pnm_int(in, path);
    d.height = next_pnm_int(in, path);
    const int maxval = next_pnm_int(in, path);
    if (maxval != 255) throw IngestError(path, "only 8-bit PNM files are supported");
    if (d.width < 1 || d.height < 1) throw IngestError(path, "empty image");

    const std::size_t channels = d.magic == "P6" ? 3 : 1;
    const std::size_t count = static_cast<std::size_t>(d.width) * d.height * channels;
    d.bytes.resize(count);
    if (d.magic == "P2") {
        for (std::size_t i = 0; i < count; ++i) {
            const int v = next_pnm_int(in, path);
            if (v < 0 || v > 255) throw IngestError(path, "sample out of range");
            d.bytes[i] = static_cast<std::uint8_t>(v);
        }
    } else {
        // The single whitespace byte after maxval was already consumed by
        // next_pnm_int's final get(); raster starts here.
        in.read(reinterpret_cast<char*>(d.bytes.data()), static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) != count) {
            throw IngestError(path, "truncated PNM raster");
        }
    }
    return d;
}

void write_pnm(const std::string& path, const std::string& magic, Index width,
               Index height, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << magic << "\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

// --- PNG --------------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

// Decodes to 8-bit rows; `want_color` expands to RGB, otherwise the file
// must be grayscale.
std::vector<std::vector<std::uint8_t>> read_png_rows(const std::string& path,
                                                     bool want_color, Index& width,
                                                     Index& height) {
    PngReader r;
    r.fp = std::fopen(path.c_str(), "rb");
    if (!r.fp) throw IngestError(path, "cannot open file");
    png_byte header[8];
    if (std::fread(header, 1, 8, r.fp) != 8 || png_sig_cmp(header, 0, 8) != 0) {
        throw IngestError(path, "not a PNG file");
    }
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw IngestError(path, "libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw IngestError(path, "libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) throw IngestError(path, "PNG decode failed");

    png_init_io(r.png, r.fp);
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    width = static_cast<Index>(png_get_image_width(r.png, r.info));
    height = static_cast<Index>(png_get_image_height(r.png, r.info));
    const png_byte color_type = png_get_color_type(r.png, r.info);
    const png_byte bit_depth = png_get_bit_depth(r.png, r.info);

    if (bit_depth == 16) png_set_strip_16(r.png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(r.png);
    }
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_alpha(r.png);
    if (want_color &&
        (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)) {
        png_set_gray_to_rgb(r.png);
    }
    if (!want_color && (color_type == PNG_COLOR_TYPE_RGB ||
                        color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
                        color_type == PNG_COLOR_TYPE_PALETTE)) {
        throw IngestError(path, "expected an 8-bit grayscale image");
    }
    png_read_update_info(r.png, r.info);

    const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
    std::vector<std::vector<std::uint8_t>> rows(static_cast<std::size_t>(height));
    std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(height));
    for (Index y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)].resize(rowbytes);
        row_ptrs[static_cast<std::size_t>(y)] = rows[static_cast<std::size_t>(y)].data();
    }
    png_read_image(r.png, row_ptrs.data());
    png_read_end(r.png, nullptr);
    return rows;
}

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void write_png(const std::string& path, Index width, Index height, int color_type,
               const std::vector<std::uint8_t>& interleaved) {
    PngWriter w;
    w.fp = std::fopen(path.c_str(), "wb");
    if (!w.fp) throw IoError("cannot open for writing: " + path);
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw IoError("libpng init failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) throw IoError("PNG encode failed: " + path);

    png_init_io(w.png, w.fp);
    png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    const std::size_t channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    const std::size_t rowbytes = static_cast<std::size_t>(width) * channels;
    for (Index y = 0; y < height; ++y) {
        png_write_row(w.png, const_cast<png_bytep>(
                                 interleaved.data() + static_cast<std::size_t>(y) * rowbytes));
    }
    png_write_end(w.png, nullptr);
}

}  // namespace

std::uint8_t quantize8(double v) {
    const double clamped = std::min(1.0, std::max(0.0, v));
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

ColorImage read_color(const std::string& path) {
    const std::string ext = lower_ext(path);
    ColorImage img;
    if (ext == ".png") {
        Index w = 0, h = 0;
        auto rows = read_png_rows(path, /*want_color=*/true, w, h);
        img.r.resize(h, w);
        img.g.resize(h, w);
        img.b.resize(h, w);
        for (Index y = 0; y < h; ++y) {
            const auto& row = rows[static_cast<std::size_t>(y)];
            for (Index x = 0; x < w; ++x) {
                img.r(y, x) = row[static_cast<std::size_t>(3 * x)];
                img.g(y, x) = row[static_cast<std::size_t>(3 * x + 1)];
                img.b(y, x) = row[static_cast<std::size_t>(3 * x + 2)];
            }
        }
        return img;
    }
    const PnmData d = read_pnm(path);
    img.r.resize(d.height, d.width);
    img.g.resize(d.height, d.width);
    img.b.resize(d.height, d.width);
    for (Index y = 0; y < d.height; ++y) {
        for (Index x = 0; x < d.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y * d.width + x);
            if (d.magic == "P6") {
                img.r(y, x) = d.bytes[3 * i];
                img.g(y, x) = d.bytes[3 * i + 1];
                img.b(y, x) = d.bytes[3 * i + 2];
            } else {
                img.r(y, x) = img.g(y, x) = img.b(y, x) = d.bytes[i];
            }
        }
    }
    return img;
}

GrayImage read_gray8(const std::string& path) {
    const std::string ext = lower_ext(path);
    GrayImage gray;
    if (ext == ".png") {
        Index w = 0, h = 0;
        auto rows = read_png_rows(path, /*want_color=*/false, w, h);
        gray.resize(h, w);
        for (Index y = 0; y < h; ++y) {
            for (Index x = 0; x < w; ++x) {
                gray(y, x) = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] / 255.0;
            }
        }
        return gray;
    }
    const PnmData d = read_pnm(path);
    if (d.magic == "P6") throw IngestError(path, "expected an 8-bit grayscale image");
    gray.resize(d.height, d.width);
    for (Index y = 0; y < d.height; ++y) {
        for (Index x = 0; x < d.width; ++x) {
            gray(y, x) = d.bytes[static_cast<std::size_t>(y * d.width + x)] / 255.0;
        }
    }
    return gray;
}

void write_color(const std::string& path, const ColorImage& img) {
    const std::string ext = lower_ext(path);
    const Index w = img.width(), h = img.height();
    if (ext == ".png" || ext == ".ppm") {
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
        for (Index y = 0; y < h; ++y) {
            for (Index x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y * w + x) * 3;
                bytes[i] = img.r(y, x);
                bytes[i + 1] = img.g(y, x);
                bytes[i + 2] = img.b(y, x);
            }
        }
        if (ext == ".png") {
            write_png(path, w, h, PNG_COLOR_TYPE_RGB, bytes);
        } else {
            write_pnm(path, "P6", w, h, bytes);
        }
        return;
    }
    if (ext == ".pgm") {
        if ((img.r != img.g).any() || (img.r != img.b).any()) {
            throw IoError("PGM cannot hold a color image: " + path);
        }
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h);
        for (Index y = 0; y < h; ++y) {
            for (Index x = 0; x < w; ++x) {
                bytes[static_cast<std::size_t>(y * w + x)] = img.r(y, x);
            }
        }
        write_pnm(path, "P5", w, h, bytes);
        return;
    }
    throw IoError("unsupported image extension: " + path);
}

void write_gray8(const std::string& path, const GrayImage& img) {
    const std::string ext = lower_ext(path);
    const Index w = img.cols(), h = img.rows();
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h);
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            bytes[static_cast<std::size_t>(y * w + x)] = quantize8(img(y, x));
        }
    }
    if (ext == ".png") {
        write_png(path, w, h, PNG_COLOR_TYPE_GRAY, bytes);
    } else if (ext == ".pgm") {
        write_pnm(path, "P5", w, h, bytes);
    } else {
        throw IoError("unsupported image extension: " + path);
    }
}

}  // namespace creekline
