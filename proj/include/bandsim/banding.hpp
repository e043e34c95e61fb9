#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bandsim/image.hpp"
#include "bandsim/isp.hpp"

namespace bandsim {

// Flicker-banding synthesis: a parameterized stripe-mask generator covering
// five pattern families, a gain model that converts masks to multiplicative
// attenuation with per-stripe brightness jitter, and the end-to-end clean ->
// degraded pair pipeline through the linear pseudo-RAW domain.

enum class BandPattern { Simple, Diamond, Curve, Cracked, Complex };

const char* to_string(BandPattern p);
BandPattern band_pattern_from_string(const std::string& name);

struct BandingSpec {
    BandPattern pattern = BandPattern::Simple;
    double period_px = 48.0;       // stripe spacing along the stripe normal
    double duty = 0.5;             // dark-stripe fraction of one period
    double phase_px = 0.0;
    double orientation_deg = 0.0;  // stripe normal direction; 0 = horizontal stripes
    double feather_px = 0.0;       // smoothstep ramp radius at stripe edges
    double darkness = 0.4;         // baseline darkness D
    double jitter_amp = 0.0;       // half-width of per-stripe jitter eta_k
    double gain_floor = 0.05;      // G_min, prevents complete pixel extinction
    double curve_amp_px = 0.0;     // Curve family: sinusoidal stripe displacement
    double curve_wavelength_px = 64.0;
    double crack_density = 0.0;    // Cracked family: probability a cell is broken
    std::uint64_t seed = 0;

    void validate() const; // throws std::invalid_argument on violated invariants
};

// Per-pixel multiplicative attenuation, values in [gain_floor, 1].
struct GainField {
    int height = 0;
    int width = 0;
    std::vector<float> values; // row-major

    float at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Stripe mask in [0,1]; 1 = fully inside a dark stripe. Edges feathered with
// a smoothstep ramp of radius feather_px centered on the stripe boundary.
std::vector<float> generate_mask(const BandingSpec& spec, int height, int width);

// Stripe index of each pixel under the spec's geometry; pixels of one visible
// stripe share an index, which keys the per-stripe jitter draw.
std::vector<std::int64_t> stripe_indices(const BandingSpec& spec, int height, int width);

// Gain equation: G = max(gain_floor, 1 - mask * (1 - darkness) * eta).
double gain_value(double mask, double darkness, double eta, double gain_floor);

// Per-stripe jitter draw, uniform in [1 - jitter_amp, 1 + jitter_amp].
double stripe_eta(const BandingSpec& spec, std::int64_t stripe_index);

GainField mask_to_gain(const std::vector<float>& mask, int height, int width, const BandingSpec& spec);

// out(c,y,x) = img(c,y,x) * gain(y,x); RAW-linear in, RAW-linear out.
ImagePlanes apply_banding(const ImagePlanes& img, const GainField& gain);

// Full pipeline: inverse ISP -> mask -> gain -> attenuate -> forward ISP.
// The manifest records the seed and the exact spec; source/output paths are
// filled by the caller.
std::pair<ImagePlanes, PairManifest> synthesize_pair(const ImagePlanes& clean_srgb,
                                                     const BandingSpec& spec,
                                                     const IspParams& isp);

std::string banding_spec_to_json(const BandingSpec& spec);
BandingSpec banding_spec_from_json(const std::string& json_text);

} // namespace bandsim
