#pragma once

#include <array>
#include <cstdint>

#include "bandsim/image.hpp"

namespace bandsim {

// Analytic, exactly invertible camera pipeline between display sRGB and a
// linear pseudo-RAW domain. Forward: white balance -> color matrix -> transfer
// curve; inverse runs the exact algebraic inverse. Clipping to [0,1] is the
// only lossy step and is reported through IspStats.

enum class GammaMode { SrgbStandard, PurePower };

struct IspParams {
    std::array<double, 3> wb_gains{1.0, 1.0, 1.0};
    std::array<std::array<double, 3>, 3> ccm{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    GammaMode gamma_mode = GammaMode::SrgbStandard;
    double gamma_exponent = 2.2; // used when PurePower

    // Throws std::invalid_argument if wb gains leave [0.25, 4] or the ccm is
    // singular / has Frobenius condition number >= 1e4.
    void validate() const;
};

struct IspStats {
    std::int64_t clipped_low = 0;  // channel samples clamped up to 0
    std::int64_t clipped_high = 0; // channel samples clamped down to 1
    std::int64_t clipped() const { return clipped_low + clipped_high; }
};

// Standard sRGB transfer curve (piecewise linear/power form).
double srgb_to_linear(double encoded);
double linear_to_srgb(double linear);

// sRGB -> pseudo-RAW: clip(inv(ccm) . degamma(img) / wb, 0, 1).
ImagePlanes inverse_isp(const ImagePlanes& img, const IspParams& params, IspStats* stats = nullptr);

// pseudo-RAW -> sRGB: clip(gamma(ccm . (img * wb)), 0, 1).
ImagePlanes forward_isp(const ImagePlanes& img, const IspParams& params, IspStats* stats = nullptr);

// Device-diversity draw: wb gains uniform in [0.7, 1.4], ccm = I plus uniform
// +-0.1 off-diagonal perturbation with rows renormalized to sum 1.
IspParams random_isp_params(std::uint64_t seed);

} // namespace bandsim
