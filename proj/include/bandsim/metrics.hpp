#pragma once

#include <optional>

#include "bandsim/image.hpp"

namespace bandsim {

// Full-reference quality metrics. SSIM-family scores are computed on luma
// (0.299, 0.587, 0.114); all math runs on the [0,1] scale.

struct MetricReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
    double ms_ssim = 0.0;
    double gmsd = 0.0;
    // Slots for externally computed learned metrics; nothing here fills them.
    std::optional<double> lpips;
    std::optional<double> dists;
    std::optional<double> fsim;
};

// 10*log10(1/mse) over all channels, capped at 99 dB (identical images hit
// the cap). Throws on shape mismatch.
double psnr(const ImagePlanes& a, const ImagePlanes& b);

// Single-scale SSIM: 11x11 Gaussian window, sigma 1.5, K1=0.01, K2=0.03,
// valid-region mean. Needs min(H,W) >= 11.
double ssim(const ImagePlanes& a, const ImagePlanes& b);

// Multi-scale SSIM with the canonical 5-scale weights
// (0.0448, 0.2856, 0.3001, 0.2363, 0.1333); dyadic 2x2-average downsampling.
// Inputs smaller than 176 px on a side run with fewer scales (renormalized
// weights) and a notice on stderr.
double ms_ssim(const ImagePlanes& a, const ImagePlanes& b);

// Gradient-magnitude similarity deviation: Prewitt 1/3 gradients on the
// 2x-downsampled luma, c = 0.0026, population standard deviation of the
// similarity map.
double gmsd(const ImagePlanes& a, const ImagePlanes& b);

MetricReport evaluate_pair(const ImagePlanes& restored, const ImagePlanes& reference);

} // namespace bandsim
