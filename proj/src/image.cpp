#include "bandsim/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bandsim {

const char* const kPipelineVersion = "bandsim-1.0.0";

const char* to_string(Domain d) {
    return d == Domain::SrgbNonlinear ? "srgb_nonlinear" : "raw_linear";
}

namespace {

void check_dims(int height, int width) {
    if (height < ImagePlanes::kMinDim || width < ImagePlanes::kMinDim)
        throw std::invalid_argument("image dimensions must be at least 8x8, got " +
                                    std::to_string(height) + "x" + std::to_string(width));
}

} // namespace

ImagePlanes::ImagePlanes(int height, int width, Domain domain)
    : height_(height), width_(width), domain_(domain),
      data_(static_cast<std::size_t>(kChannels) * height * width, 0.0f) {
    check_dims(height, width);
}

ImagePlanes::ImagePlanes(int height, int width, Domain domain, std::vector<float> data)
    : height_(height), width_(width), domain_(domain), data_(std::move(data)) {
    check_dims(height, width);
    if (data_.size() != static_cast<std::size_t>(kChannels) * height * width)
        throw std::invalid_argument("image data size does not match dimensions");
}

ImagePlanes ImagePlanes::with_domain(Domain d) const {
    ImagePlanes out = *this;
    out.domain_ = d;
    return out;
}

namespace {

struct PngRead {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngRead() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWrite {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWrite() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

bool host_is_little_endian() {
    const std::uint16_t probe = 1;
    return *reinterpret_cast<const unsigned char*>(&probe) == 1;
}

} // namespace

ImagePlanes load_image(const std::string& path) {
    PngRead ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw std::runtime_error("cannot open PNG for reading: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw std::runtime_error("not a PNG file: " + path);

    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw std::runtime_error("png_create_read_struct failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw std::runtime_error("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(ctx.png)))
        throw std::runtime_error("PNG decode error: " + path);

    png_init_io(ctx.png, ctx.fp);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    const int width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    const int height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    const int color_type = png_get_color_type(ctx.png, ctx.info);

    if (color_type != PNG_COLOR_TYPE_RGB)
        throw std::runtime_error("unsupported PNG (need 3-channel RGB): " + path);
    if (bit_depth != 8 && bit_depth != 16)
        throw std::runtime_error("unsupported PNG bit depth " + std::to_string(bit_depth) + ": " + path);

    if (bit_depth == 16 && host_is_little_endian())
        png_set_swap(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    const std::size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
    std::vector<unsigned char> buffer(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = buffer.data() + rowbytes * y;

    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);

    ImagePlanes img(height, width, Domain::SrgbNonlinear);
    // Exact quotients, so lattice values land on k/maxval bit-for-bit.
    if (bit_depth == 8) {
        for (int y = 0; y < height; ++y) {
            const unsigned char* row = rows[y];
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < 3; ++c)
                    img.at(c, y, x) = static_cast<float>(row[x * 3 + c]) / 255.0f;
        }
    } else {
        for (int y = 0; y < height; ++y) {
            const std::uint16_t* row = reinterpret_cast<const std::uint16_t*>(rows[y]);
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < 3; ++c)
                    img.at(c, y, x) = static_cast<float>(row[x * 3 + c]) / 65535.0f;
        }
    }
    return img;
}

void save_image(const ImagePlanes& img, const std::string& path, PngBitDepth depth) {
    PngWrite ctx;
    ctx.fp = std::fopen(path.c_str(), "wb");
    if (!ctx.fp) throw std::runtime_error("cannot open PNG for writing: " + path);

    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw std::runtime_error("png_create_write_struct failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw std::runtime_error("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(ctx.png)))
        throw std::runtime_error("PNG encode error: " + path);

    const int height = img.height();
    const int width = img.width();
    const int bits = static_cast<int>(depth);

    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, width, height, bits, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    if (bits == 16 && host_is_little_endian())
        png_set_swap(ctx.png);

    auto quantize = [](float v, float maxval) -> long {
        const float clamped = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
        return std::lround(static_cast<double>(clamped) * maxval);
    };

    if (bits == 8) {
        std::vector<unsigned char> row(static_cast<std::size_t>(width) * 3);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < 3; ++c)
                    row[x * 3 + c] = static_cast<unsigned char>(quantize(img.at(c, y, x), 255.0f));
            png_write_row(ctx.png, row.data());
        }
    } else {
        std::vector<std::uint16_t> row(static_cast<std::size_t>(width) * 3);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < 3; ++c)
                    row[x * 3 + c] = static_cast<std::uint16_t>(quantize(img.at(c, y, x), 65535.0f));
            png_write_row(ctx.png, reinterpret_cast<png_bytep>(row.data()));
        }
    }
    png_write_end(ctx.png, ctx.info);
}

namespace {

constexpr char kMfrgMagic[4] = {'M', 'F', 'R', 'G'};

void write_u32le(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32le(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void save_mfrg(const ImagePlanes& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open MFRG for writing: " + path);
    out.write(kMfrgMagic, 4);
    write_u32le(out, static_cast<std::uint32_t>(img.height()));
    write_u32le(out, static_cast<std::uint32_t>(img.width()));
    write_u32le(out, static_cast<std::uint32_t>(ImagePlanes::kChannels));
    out.write(reinterpret_cast<const char*>(img.data().data()),
              static_cast<std::streamsize>(img.size() * sizeof(float)));
    if (!out) throw std::runtime_error("short MFRG write: " + path);
}

ImagePlanes load_mfrg(const std::string& path, Domain domain) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open MFRG for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMfrgMagic, 4) != 0)
        throw std::runtime_error("bad MFRG magic: " + path);
    const std::uint32_t height = read_u32le(in);
    const std::uint32_t width = read_u32le(in);
    const std::uint32_t channels = read_u32le(in);
    if (!in || channels != ImagePlanes::kChannels)
        throw std::runtime_error("bad MFRG header: " + path);
    std::vector<float> data(static_cast<std::size_t>(channels) * height * width);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("short MFRG read: " + path);
    for (float v : data)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite sample in MFRG: " + path);
    return ImagePlanes(static_cast<int>(height), static_cast<int>(width), domain, std::move(data));
}

} // namespace bandsim
