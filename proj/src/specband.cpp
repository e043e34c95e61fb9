#include "bandsim/specband.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace bandsim {

namespace {

// FFTW plan creation/destruction is not thread-safe; plan execution is.
std::mutex g_fftw_mutex;

void run_fftw(std::vector<std::complex<double>>& data, int height, int width, int sign) {
    if (data.size() != static_cast<std::size_t>(height) * width)
        throw std::invalid_argument("fft buffer size does not match dimensions");
    fftw_complex* raw = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        plan = fftw_plan_dft_2d(height, width, raw, raw, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fftw_plan_dft_2d failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(plan);
    }
}

void check_partition_size(const ImagePlanes& img, const BandPartition& p) {
    if (img.height() != p.height || img.width() != p.width)
        throw std::invalid_argument("partition was built for a different image size");
}

} // namespace

void fft2d(std::vector<std::complex<double>>& data, int height, int width) {
    run_fftw(data, height, width, FFTW_FORWARD);
}

void ifft2d(std::vector<std::complex<double>>& data, int height, int width) {
    run_fftw(data, height, width, FFTW_BACKWARD);
    const double scale = 1.0 / (static_cast<double>(height) * width);
    for (auto& v : data) v *= scale;
}

std::vector<std::complex<double>> channel_spectrum(const ImagePlanes& img, int channel) {
    const int h = img.height(), w = img.width();
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            spec[static_cast<std::size_t>(y) * w + x] = static_cast<double>(img.at(channel, y, x));
    fft2d(spec, h, w);
    return spec;
}

double butterworth_lp(double d, double rho, int order_n, double eps) {
    const double ratio = d / (rho + eps);
    return 1.0 / (1.0 + std::pow(ratio, 2.0 * order_n));
}

double radial_freq(int v, int u, int height, int width) {
    const int iu = u <= width / 2 ? u : u - width;
    const int iv = v <= height / 2 ? v : v - height;
    const double fu = static_cast<double>(iu) / width;
    const double fv = static_cast<double>(iv) / height;
    return std::sqrt(2.0 * (fu * fu + fv * fv));
}

BandPartition build_partition(int height, int width, double rho1, double rho2, int order_n,
                              double eps, const BandWeights& weights, int ref_size_m0) {
    if (!(rho1 > 0.0 && rho1 < rho2 && rho2 <= 1.0))
        throw std::invalid_argument("cutoffs must satisfy 0 < rho1 < rho2 <= 1");
    if (order_n < 1) throw std::invalid_argument("order_n must be positive");
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be non-negative");
    if (ref_size_m0 < 1) throw std::invalid_argument("ref_size_m0 must be positive");
    if (height < ImagePlanes::kMinDim || width < ImagePlanes::kMinDim)
        throw std::invalid_argument("partition dimensions must be at least 8x8");
    if (weights.low < 0.0 || weights.mid < 0.0 || weights.high < 0.0)
        throw std::invalid_argument("band weights must be non-negative");

    BandPartition p;
    p.height = height;
    p.width = width;
    p.rho1 = rho1;
    p.rho2 = rho2;
    p.order_n = order_n;
    p.eps = eps;
    p.weights = weights;
    p.ref_size_m0 = ref_size_m0;

    const int m = std::min(height, width);
    const double scale = std::sqrt(static_cast<double>(ref_size_m0) / static_cast<double>(m));
    p.rho1_eff = rho1 * scale;
    p.rho2_eff = rho2 * scale;

    const std::size_t n = static_cast<std::size_t>(height) * width;
    p.low.resize(n);
    p.mid.resize(n);
    p.high.resize(n);
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            const std::size_t i = static_cast<std::size_t>(v) * width + u;
            const double d = radial_freq(v, u, height, width);
            const double lp1 = butterworth_lp(d, p.rho1_eff, order_n, eps);
            const double lp2 = butterworth_lp(d, p.rho2_eff, order_n, eps);
            p.low[i] = lp1;
            p.mid[i] = lp2 - lp1;
            p.high[i] = 1.0 - lp2;
        }
    }
    return p;
}

BandComponents decompose(const ImagePlanes& img, const BandPartition& partition) {
    check_partition_size(img, partition);
    const int h = img.height(), w = img.width();
    const std::size_t n = static_cast<std::size_t>(h) * w;

    BandComponents out{ImagePlanes(h, w, img.domain()), ImagePlanes(h, w, img.domain()),
                       ImagePlanes(h, w, img.domain())};
    ImagePlanes* planes[3] = {&out.low, &out.mid, &out.high};
    const std::vector<double>* masks[3] = {&partition.low, &partition.mid, &partition.high};

    std::vector<std::complex<double>> band(n);
    for (int c = 0; c < 3; ++c) {
        const std::vector<std::complex<double>> spec = channel_spectrum(img, c);
        for (int b = 0; b < 3; ++b) {
            const std::vector<double>& mask = *masks[b];
            for (std::size_t i = 0; i < n; ++i) band[i] = spec[i] * mask[i];
            ifft2d(band, h, w);
            ImagePlanes& plane = *planes[b];
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    plane.at(c, y, x) = static_cast<float>(band[static_cast<std::size_t>(y) * w + x].real());
        }
    }
    return out;
}

ImagePlanes recompose(const ImagePlanes& img, const BandPartition& partition, bool clip_output) {
    check_partition_size(img, partition);
    const int h = img.height(), w = img.width();
    const std::size_t n = static_cast<std::size_t>(h) * w;

    // Composite spectrum: X . (w_l B_l + w_m B_m + w_h B_h).
    std::vector<double> combined(n);
    for (std::size_t i = 0; i < n; ++i)
        combined[i] = partition.weights.low * partition.low[i] +
                      partition.weights.mid * partition.mid[i] +
                      partition.weights.high * partition.high[i];

    ImagePlanes out(h, w, img.domain());
    for (int c = 0; c < 3; ++c) {
        std::vector<std::complex<double>> spec = channel_spectrum(img, c);
        for (std::size_t i = 0; i < n; ++i) spec[i] *= combined[i];
        ifft2d(spec, h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double v = spec[static_cast<std::size_t>(y) * w + x].real();
                if (clip_output) v = std::clamp(v, 0.0, 1.0);
                out.at(c, y, x) = static_cast<float>(v);
            }
    }
    return out;
}

std::array<double, 4> band_energies(const ImagePlanes& img, const BandPartition& partition) {
    check_partition_size(img, partition);
    const int h = img.height(), w = img.width();
    const std::size_t n = static_cast<std::size_t>(h) * w;
    const double norm = 1.0 / static_cast<double>(n);

    std::array<double, 4> energies{0.0, 0.0, 0.0, 0.0};
    const std::vector<double>* masks[3] = {&partition.low, &partition.mid, &partition.high};
    for (int c = 0; c < 3; ++c) {
        const std::vector<std::complex<double>> spec = channel_spectrum(img, c);
        for (std::size_t i = 0; i < n; ++i) {
            const double power = std::norm(spec[i]) * norm;
            for (int b = 0; b < 3; ++b) {
                const double m = (*masks[b])[i];
                energies[b] += power * m * m;
            }
            energies[3] += power;
        }
    }
    return energies;
}

} // namespace bandsim
