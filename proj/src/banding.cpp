#include "bandsim/banding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "bandsim/rng.hpp"

namespace bandsim {

namespace {

// Keyed-draw streams; all banding randomness flows from spec.seed through these.
constexpr std::uint64_t kEtaStream = 1;
constexpr std::uint64_t kCrackStream = 2;
constexpr std::uint64_t kRowPhaseStream = 3;

constexpr double kDiamondCrossDeg = 30.0;
constexpr double kComplexPhaseJitter = 0.15; // fraction of one period, per row

struct StripeFrame {
    double cos_t, sin_t; // stripe normal
    double period;
    double phase;
};

StripeFrame make_frame(double orientation_deg, double period, double phase) {
    const double rad = orientation_deg * std::numbers::pi / 180.0;
    return {std::cos(rad), std::sin(rad), period, phase};
}

// Normal coordinate: stripes repeat along this axis.
double normal_coord(const StripeFrame& f, int row, int col) {
    return row * f.cos_t + col * f.sin_t + f.phase;
}

// Along-stripe coordinate, orthogonal to the normal.
double tangent_coord(const StripeFrame& f, int row, int col) {
    return -row * f.sin_t + col * f.cos_t;
}

double smoothstep01(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// Mask value of one square-wave stripe field at normal coordinate s.
// feather = 0 gives the exact indicator of the dark phase (frac < duty);
// otherwise the edge ramps over feather_px centered on each boundary.
double stripe_value(double s, double period, double duty, double feather) {
    const double k = std::floor(s / period);
    const double s_px = s - k * period; // in [0, period)
    const double stripe_w = duty * period;
    if (feather <= 0.0)
        return s_px < stripe_w ? 1.0 : 0.0;
    // Signed distance into the stripe (negative outside, to the nearest edge).
    double d;
    if (s_px <= stripe_w)
        d = std::min(s_px, stripe_w - s_px);
    else
        d = -std::min(s_px - stripe_w, period - s_px);
    return smoothstep01(0.5 + d / feather);
}

std::int64_t stripe_k(double s, double period) {
    return static_cast<std::int64_t>(std::floor(s / period));
}

double complex_row_phase(const BandingSpec& spec, int row) {
    const double u = keyed_unit(spec.seed, kRowPhaseStream, row);
    return (2.0 * u - 1.0) * kComplexPhaseJitter * spec.period_px;
}

bool crack_kept(const BandingSpec& spec, std::int64_t k, std::int64_t cell) {
    return keyed_unit2(spec.seed, kCrackStream, k, cell) >= spec.crack_density;
}

// Frame of the field that drives stripe indexing; Diamond indexes along its
// leading crossed field.
StripeFrame primary_frame(const BandingSpec& spec) {
    const double orient = spec.pattern == BandPattern::Diamond
                              ? spec.orientation_deg + kDiamondCrossDeg
                              : spec.orientation_deg;
    return make_frame(orient, spec.period_px, spec.phase_px);
}

// Normal coordinate of the field that actually generated the visible stripe,
// so stripe indexing follows the drawn geometry.
double primary_coord(const BandingSpec& spec, const StripeFrame& primary, int row, int col) {
    switch (spec.pattern) {
        case BandPattern::Simple:
        case BandPattern::Cracked:
        case BandPattern::Diamond:
            return normal_coord(primary, row, col);
        case BandPattern::Curve: {
            const double a = tangent_coord(primary, row, col);
            return normal_coord(primary, row, col) +
                   spec.curve_amp_px * std::sin(2.0 * std::numbers::pi * a / spec.curve_wavelength_px);
        }
        case BandPattern::Complex:
            return normal_coord(primary, row, col) + complex_row_phase(spec, row);
    }
    return 0.0;
}

} // namespace

const char* to_string(BandPattern p) {
    switch (p) {
        case BandPattern::Simple: return "simple";
        case BandPattern::Diamond: return "diamond";
        case BandPattern::Curve: return "curve";
        case BandPattern::Cracked: return "cracked";
        case BandPattern::Complex: return "complex";
    }
    return "simple";
}

BandPattern band_pattern_from_string(const std::string& name) {
    if (name == "simple") return BandPattern::Simple;
    if (name == "diamond") return BandPattern::Diamond;
    if (name == "curve") return BandPattern::Curve;
    if (name == "cracked") return BandPattern::Cracked;
    if (name == "complex") return BandPattern::Complex;
    throw std::invalid_argument("unknown banding pattern: " + name);
}

void BandingSpec::validate() const {
    if (!(period_px >= 2.0)) throw std::invalid_argument("period_px must be >= 2");
    if (!(duty > 0.0 && duty < 1.0)) throw std::invalid_argument("duty must lie in (0,1)");
    if (!(feather_px >= 0.0 && feather_px <= period_px / 2.0))
        throw std::invalid_argument("feather_px must lie in [0, period_px/2]");
    if (!(darkness >= 0.0 && darkness < 1.0)) throw std::invalid_argument("darkness must lie in [0,1)");
    if (!(jitter_amp >= 0.0 && jitter_amp < 1.0)) throw std::invalid_argument("jitter_amp must lie in [0,1)");
    if (!(gain_floor > 0.0 && gain_floor < 1.0)) throw std::invalid_argument("gain_floor must lie in (0,1)");
    if (!(curve_amp_px >= 0.0)) throw std::invalid_argument("curve_amp_px must be non-negative");
    if (curve_amp_px > 0.0 && !(curve_wavelength_px > 0.0))
        throw std::invalid_argument("curve_wavelength_px must be positive when curve_amp_px > 0");
    if (!(crack_density >= 0.0 && crack_density <= 1.0))
        throw std::invalid_argument("crack_density must lie in [0,1]");
}

std::vector<float> generate_mask(const BandingSpec& spec, int height, int width) {
    spec.validate();
    if (height < ImagePlanes::kMinDim || width < ImagePlanes::kMinDim)
        throw std::invalid_argument("mask dimensions must be at least 8x8");

    std::vector<float> mask(static_cast<std::size_t>(height) * width, 0.0f);
    const StripeFrame base = make_frame(spec.orientation_deg, spec.period_px, spec.phase_px);

    switch (spec.pattern) {
        case BandPattern::Simple: {
            for (int r = 0; r < height; ++r)
                for (int c = 0; c < width; ++c) {
                    const double s = normal_coord(base, r, c);
                    mask[static_cast<std::size_t>(r) * width + c] =
                        static_cast<float>(stripe_value(s, spec.period_px, spec.duty, spec.feather_px));
                }
            break;
        }
        case BandPattern::Diamond: {
            const StripeFrame fa = make_frame(spec.orientation_deg + kDiamondCrossDeg, spec.period_px, spec.phase_px);
            const StripeFrame fb = make_frame(spec.orientation_deg - kDiamondCrossDeg, spec.period_px, spec.phase_px);
            for (int r = 0; r < height; ++r)
                for (int c = 0; c < width; ++c) {
                    const double va = stripe_value(normal_coord(fa, r, c), spec.period_px, spec.duty, spec.feather_px);
                    const double vb = stripe_value(normal_coord(fb, r, c), spec.period_px, spec.duty, spec.feather_px);
                    mask[static_cast<std::size_t>(r) * width + c] = static_cast<float>(std::max(va, vb));
                }
            break;
        }
        case BandPattern::Curve: {
            for (int r = 0; r < height; ++r)
                for (int c = 0; c < width; ++c) {
                    const double s = primary_coord(spec, base, r, c); // base == primary for Curve
                    mask[static_cast<std::size_t>(r) * width + c] =
                        static_cast<float>(stripe_value(s, spec.period_px, spec.duty, spec.feather_px));
                }
            break;
        }
        case BandPattern::Cracked: {
            for (int r = 0; r < height; ++r)
                for (int c = 0; c < width; ++c) {
                    const double s = normal_coord(base, r, c);
                    const double v = stripe_value(s, spec.period_px, spec.duty, spec.feather_px);
                    const std::int64_t k = stripe_k(s, spec.period_px);
                    const std::int64_t cell = stripe_k(tangent_coord(base, r, c), spec.period_px);
                    mask[static_cast<std::size_t>(r) * width + c] =
                        crack_kept(spec, k, cell) ? static_cast<float>(v) : 0.0f;
                }
            break;
        }
        case BandPattern::Complex: {
            for (int r = 0; r < height; ++r) {
                const double dphase = complex_row_phase(spec, r);
                for (int c = 0; c < width; ++c) {
                    const double s = normal_coord(base, r, c) + dphase;
                    const double v1 = stripe_value(s, spec.period_px, spec.duty, spec.feather_px);
                    // Second harmonic at half amplitude; feather shrinks with the period.
                    const double v2 = stripe_value(normal_coord(base, r, c), spec.period_px / 2.0, spec.duty,
                                                   std::min(spec.feather_px, spec.period_px / 4.0));
                    mask[static_cast<std::size_t>(r) * width + c] =
                        static_cast<float>(std::min(1.0, v1 + 0.5 * v2));
                }
            }
            break;
        }
    }
    return mask;
}

std::vector<std::int64_t> stripe_indices(const BandingSpec& spec, int height, int width) {
    spec.validate();
    std::vector<std::int64_t> idx(static_cast<std::size_t>(height) * width, 0);
    const StripeFrame primary = primary_frame(spec);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            idx[static_cast<std::size_t>(r) * width + c] =
                stripe_k(primary_coord(spec, primary, r, c), spec.period_px);
    return idx;
}

double gain_value(double mask, double darkness, double eta, double gain_floor) {
    return std::max(gain_floor, 1.0 - mask * (1.0 - darkness) * eta);
}

double stripe_eta(const BandingSpec& spec, std::int64_t stripe_index) {
    if (spec.jitter_amp <= 0.0) return 1.0;
    const double u = keyed_unit(spec.seed, kEtaStream, stripe_index);
    return 1.0 - spec.jitter_amp + 2.0 * spec.jitter_amp * u;
}

GainField mask_to_gain(const std::vector<float>& mask, int height, int width, const BandingSpec& spec) {
    spec.validate();
    if (mask.size() != static_cast<std::size_t>(height) * width)
        throw std::invalid_argument("mask size does not match dimensions");

    const std::vector<std::int64_t> idx = stripe_indices(spec, height, width);
    GainField gain;
    gain.height = height;
    gain.width = width;
    gain.values.resize(mask.size());
    const float floor_f = static_cast<float>(spec.gain_floor);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double eta = stripe_eta(spec, idx[i]);
        const double g = gain_value(static_cast<double>(mask[i]), spec.darkness, eta, spec.gain_floor);
        // Clamp in float space so the [gain_floor, 1] bound survives rounding.
        gain.values[i] = std::clamp(static_cast<float>(g), floor_f, 1.0f);
    }
    return gain;
}

ImagePlanes apply_banding(const ImagePlanes& img, const GainField& gain) {
    if (img.domain() != Domain::RawLinear)
        throw std::invalid_argument("apply_banding expects a linear pseudo-RAW image");
    if (gain.height != img.height() || gain.width != img.width())
        throw std::invalid_argument("gain field dimensions do not match image");

    ImagePlanes out(img.height(), img.width(), Domain::RawLinear);
    const int h = img.height(), w = img.width();
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(c, y, x) = img.at(c, y, x) * gain.at(y, x);
    return out;
}

std::pair<ImagePlanes, PairManifest> synthesize_pair(const ImagePlanes& clean_srgb,
                                                     const BandingSpec& spec,
                                                     const IspParams& isp) {
    if (clean_srgb.domain() != Domain::SrgbNonlinear)
        throw std::invalid_argument("synthesize_pair expects an sRGB clean image");
    spec.validate();

    const ImagePlanes raw = inverse_isp(clean_srgb, isp);
    const std::vector<float> mask = generate_mask(spec, raw.height(), raw.width());
    const GainField gain = mask_to_gain(mask, raw.height(), raw.width(), spec);
    const ImagePlanes banded = apply_banding(raw, gain);
    ImagePlanes degraded = forward_isp(banded, isp);

    PairManifest manifest;
    manifest.seed = spec.seed;
    manifest.banding_spec_json = banding_spec_to_json(spec);
    manifest.pipeline_version = kPipelineVersion;
    return {std::move(degraded), std::move(manifest)};
}

std::string banding_spec_to_json(const BandingSpec& spec) {
    nlohmann::json j{
        {"pattern", to_string(spec.pattern)},
        {"period_px", spec.period_px},
        {"duty", spec.duty},
        {"phase_px", spec.phase_px},
        {"orientation_deg", spec.orientation_deg},
        {"feather_px", spec.feather_px},
        {"darkness", spec.darkness},
        {"jitter_amp", spec.jitter_amp},
        {"gain_floor", spec.gain_floor},
        {"curve_amp_px", spec.curve_amp_px},
        {"curve_wavelength_px", spec.curve_wavelength_px},
        {"crack_density", spec.crack_density},
        {"seed", spec.seed},
    };
    return j.dump();
}

BandingSpec banding_spec_from_json(const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    BandingSpec spec;
    spec.pattern = band_pattern_from_string(j.at("pattern").get<std::string>());
    spec.period_px = j.at("period_px").get<double>();
    spec.duty = j.at("duty").get<double>();
    spec.phase_px = j.at("phase_px").get<double>();
    spec.orientation_deg = j.at("orientation_deg").get<double>();
    spec.feather_px = j.at("feather_px").get<double>();
    spec.darkness = j.at("darkness").get<double>();
    spec.jitter_amp = j.at("jitter_amp").get<double>();
    spec.gain_floor = j.at("gain_floor").get<double>();
    spec.curve_amp_px = j.at("curve_amp_px").get<double>();
    spec.curve_wavelength_px = j.at("curve_wavelength_px").get<double>();
    spec.crack_density = j.at("crack_density").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.validate();
    return spec;
}

} // namespace bandsim
