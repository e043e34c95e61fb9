#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bandsim {

// Which light domain the pixel values live in. Operations that need linear
// light (banding gains) or display-referred values (PNG I/O, metrics) check
// this tag and refuse mismatched inputs.
enum class Domain { SrgbNonlinear, RawLinear };

const char* to_string(Domain d);

// 3-channel planar image, values nominally in [0,1]. Channel-major storage:
// data[c*H*W + y*W + x]. Image-producing operations (load, ISP, banding,
// recompose) keep values inside [0,1]; band-decomposition components are the
// documented exception since they carry signed frequency content.
class ImagePlanes {
public:
    static constexpr int kChannels = 3;
    static constexpr int kMinDim = 8; // band analysis and SSIM windows need this much

    ImagePlanes() = default;
    ImagePlanes(int height, int width, Domain domain);
    ImagePlanes(int height, int width, Domain domain, std::vector<float> data);

    int height() const { return height_; }
    int width() const { return width_; }
    Domain domain() const { return domain_; }
    ImagePlanes with_domain(Domain d) const;

    float at(int c, int y, int x) const { return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x]; }
    float& at(int c, int y, int x) { return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x]; }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }
    std::size_t size() const { return data_.size(); }

    bool same_shape(const ImagePlanes& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    Domain domain_ = Domain::SrgbNonlinear;
    std::vector<float> data_;
};

enum class PngBitDepth : int { Eight = 8, Sixteen = 16 };

// 8/16-bit RGB PNG in, values scaled to [0,1], tagged SRGB_NONLINEAR.
// Throws std::runtime_error for unreadable files, unsupported bit depths,
// or non-3-channel images.
ImagePlanes load_image(const std::string& path);

// Quantizes to the requested depth (round half away from zero) and writes an
// RGB PNG. Round-tripping costs at most half a quantization step per sample.
void save_image(const ImagePlanes& img, const std::string& path, PngBitDepth depth);

// Raw float dump: magic "MFRG", u32 height, u32 width, u32 channels
// (little-endian), then float32 planar data. Bit-exact, codec-free carrier
// for pseudo-RAW and band-component planes; values are not clamped.
void save_mfrg(const ImagePlanes& img, const std::string& path);
ImagePlanes load_mfrg(const std::string& path, Domain domain);

// One manifest line per synthesized pair; replaying (source, seed, spec,
// pipeline_version) reproduces the output byte for byte.
struct PairManifest {
    std::string source_path;
    std::string output_path;
    std::uint64_t seed = 0;
    std::string banding_spec_json; // nested BandingSpec object, serialized
    std::string pipeline_version;
};

extern const char* const kPipelineVersion;

} // namespace bandsim
