#pragma once

#include <array>
#include <complex>
#include <vector>

#include "bandsim/image.hpp"

namespace bandsim {

// Three-band frequency decomposition built from Butterworth low-pass masks.
// The bands form a partition of unity by construction (mid and high are
// differences), so decomposition is lossless and weighted recomposition with
// unit weights is the identity.

struct BandWeights {
    double low = 1.0;
    double mid = 0.35;
    double high = 1.0;
    double max() const { return std::max(low, std::max(mid, high)); }
};

struct BandPartition {
    int height = 0;
    int width = 0;
    double rho1 = 0.08;
    double rho2 = 0.45;
    int order_n = 4;
    double eps = 1e-6;
    BandWeights weights;
    int ref_size_m0 = 512;

    // Cutoffs after the (m0/m)^(1/2) resolution-adaptive scaling, m = min(H,W).
    double rho1_eff = 0.0;
    double rho2_eff = 0.0;

    // H*W row-major masks over the unshifted FFT grid.
    std::vector<double> low, mid, high;

    double mask_at(int b, int v, int u) const {
        const std::size_t i = static_cast<std::size_t>(v) * width + u;
        return b == 0 ? low[i] : (b == 1 ? mid[i] : high[i]);
    }
};

// Butterworth low-pass response 1 / (1 + (d/(rho+eps))^(2n)).
double butterworth_lp(double d, double rho, int order_n, double eps);

// Radial frequency coordinate for FFT bin (u along width, v along height):
// per-axis frequency in cycles/pixel, d = sqrt(2)*|f|, so d = 1 at the corner
// Nyquist regardless of aspect ratio.
double radial_freq(int v, int u, int height, int width);

BandPartition build_partition(int height, int width, double rho1, double rho2, int order_n,
                              double eps, const BandWeights& weights, int ref_size_m0);

// Band components. They carry signed frequency content and are the documented
// exception to the [0,1] pixel range; low + mid + high reproduces the input.
struct BandComponents {
    ImagePlanes low, mid, high;
};

BandComponents decompose(const ImagePlanes& img, const BandPartition& partition);

// Re(IFFT(sum_b w_b * (FFT(img) . B_b))). Clips to [0,1] unless clip_output
// is false (analysis paths that need the raw reconstruction).
ImagePlanes recompose(const ImagePlanes& img, const BandPartition& partition, bool clip_output = true);

// Mean spectral power |X|^2/(H*W) per band (after masking), summed over
// channels, plus the unmasked total in index 3.
std::array<double, 4> band_energies(const ImagePlanes& img, const BandPartition& partition);

// Self-consistent DFT pair used by this module: forward unscaled, inverse
// scaled by 1/(H*W). Exposed so tests can probe spectra with the same
// convention.
void fft2d(std::vector<std::complex<double>>& data, int height, int width);
void ifft2d(std::vector<std::complex<double>>& data, int height, int width);

// Spectrum of one channel (unshifted layout, forward convention above).
std::vector<std::complex<double>> channel_spectrum(const ImagePlanes& img, int channel);

} // namespace bandsim
