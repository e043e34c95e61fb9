#include "bandsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace bandsim {

namespace {

constexpr double kC1 = 0.01 * 0.01; // (K1*L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;
constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kMsWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
constexpr double kGmsdC = 0.0026;

struct Gray {
    int h = 0, w = 0;
    std::vector<double> v;
    double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
    double& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
};

void check_shapes(const ImagePlanes& a, const ImagePlanes& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("metric inputs have different shapes");
}

Gray luma(const ImagePlanes& img) {
    Gray g;
    g.h = img.height();
    g.w = img.width();
    g.v.resize(static_cast<std::size_t>(g.h) * g.w);
    for (int y = 0; y < g.h; ++y)
        for (int x = 0; x < g.w; ++x)
            g.at(y, x) = 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) + 0.114 * img.at(2, y, x);
    return g;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const double mid = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - mid;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable valid-mode filtering: output (h-size+1) x (w-size+1).
Gray filter_valid(const Gray& in, const std::vector<double>& k) {
    const int size = static_cast<int>(k.size());
    Gray rows;
    rows.h = in.h;
    rows.w = in.w - size + 1;
    rows.v.resize(static_cast<std::size_t>(rows.h) * rows.w);
    for (int y = 0; y < rows.h; ++y)
        for (int x = 0; x < rows.w; ++x) {
            double s = 0.0;
            for (int i = 0; i < size; ++i) s += k[i] * in.at(y, x + i);
            rows.at(y, x) = s;
        }
    Gray out;
    out.h = in.h - size + 1;
    out.w = rows.w;
    out.v.resize(static_cast<std::size_t>(out.h) * out.w);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double s = 0.0;
            for (int i = 0; i < size; ++i) s += k[i] * rows.at(y + i, x);
            out.at(y, x) = s;
        }
    return out;
}

Gray multiply(const Gray& a, const Gray& b) {
    Gray out = a;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.v[i];
    return out;
}

Gray downsample2(const Gray& in) {
    Gray out;
    out.h = in.h / 2;
    out.w = in.w / 2;
    out.v.resize(static_cast<std::size_t>(out.h) * out.w);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out.at(y, x) = 0.25 * (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) +
                                   in.at(2 * y + 1, 2 * x) + in.at(2 * y + 1, 2 * x + 1));
    return out;
}

struct SsimTerms {
    double mean_ssim = 0.0; // luminance * contrast-structure
    double mean_cs = 0.0;   // contrast-structure only
};

SsimTerms ssim_terms(const Gray& x, const Gray& y) {
    static const std::vector<double> kernel = gaussian_kernel(kWin, kSigma);
    const Gray mu1 = filter_valid(x, kernel);
    const Gray mu2 = filter_valid(y, kernel);
    const Gray xx = filter_valid(multiply(x, x), kernel);
    const Gray yy = filter_valid(multiply(y, y), kernel);
    const Gray xy = filter_valid(multiply(x, y), kernel);

    double sum_ssim = 0.0, sum_cs = 0.0;
    for (std::size_t i = 0; i < mu1.v.size(); ++i) {
        const double m1 = mu1.v[i], m2 = mu2.v[i];
        const double s1 = xx.v[i] - m1 * m1;
        const double s2 = yy.v[i] - m2 * m2;
        const double s12 = xy.v[i] - m1 * m2;
        const double cs = (2.0 * s12 + kC2) / (s1 + s2 + kC2);
        const double lum = (2.0 * m1 * m2 + kC1) / (m1 * m1 + m2 * m2 + kC1);
        sum_cs += cs;
        sum_ssim += lum * cs;
    }
    const double count = static_cast<double>(mu1.v.size());
    return {sum_ssim / count, sum_cs / count};
}

// Prewitt [1 0 -1; 1 0 -1; 1 0 -1]/3 gradients with reflect-101 borders.
Gray gradient_magnitude(const Gray& in) {
    auto reflect = [](int i, int n) {
        if (i < 0) return -i;
        if (i >= n) return 2 * n - 2 - i;
        return i;
    };
    Gray out;
    out.h = in.h;
    out.w = in.w;
    out.v.resize(in.v.size());
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x) {
            double gx = 0.0, gy = 0.0;
            for (int i = -1; i <= 1; ++i) {
                const int yy = reflect(y + i, in.h);
                const int xx = reflect(x + i, in.w);
                gx += in.at(yy, reflect(x - 1, in.w)) - in.at(yy, reflect(x + 1, in.w));
                gy += in.at(reflect(y - 1, in.h), xx) - in.at(reflect(y + 1, in.h), xx);
            }
            gx /= 3.0;
            gy /= 3.0;
            out.at(y, x) = std::sqrt(gx * gx + gy * gy);
        }
    return out;
}

} // namespace

double psnr(const ImagePlanes& a, const ImagePlanes& b) {
    check_shapes(a, b);
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data()[i]) - b.data()[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const ImagePlanes& a, const ImagePlanes& b) {
    check_shapes(a, b);
    if (std::min(a.height(), a.width()) < kWin)
        throw std::invalid_argument("image too small for an 11x11 SSIM window");
    return ssim_terms(luma(a), luma(b)).mean_ssim;
}

double ms_ssim(const ImagePlanes& a, const ImagePlanes& b) {
    check_shapes(a, b);
    const int min_dim = std::min(a.height(), a.width());
    if (min_dim < kWin)
        throw std::invalid_argument("image too small for an 11x11 SSIM window");

    int scales = 1;
    while (scales < 5 && (min_dim >> scales) >= kWin) ++scales;
    if (scales < 5)
        std::cerr << "[bandsim] ms_ssim: input " << a.height() << "x" << a.width()
                  << " supports only " << scales << " scales; weights renormalized\n";

    double weight_sum = 0.0;
    for (int s = 0; s < scales; ++s) weight_sum += kMsWeights[s];

    Gray x = luma(a), y = luma(b);
    double score = 1.0;
    for (int s = 0; s < scales; ++s) {
        const SsimTerms terms = ssim_terms(x, y);
        const double weight = kMsWeights[s] / weight_sum;
        // Clamp to zero before the power; rare negative cs values would
        // otherwise produce NaN.
        const double term = s + 1 == scales ? std::max(terms.mean_ssim, 0.0)
                                            : std::max(terms.mean_cs, 0.0);
        score *= std::pow(term, weight);
        if (s + 1 < scales) {
            x = downsample2(x);
            y = downsample2(y);
        }
    }
    return score;
}

double gmsd(const ImagePlanes& a, const ImagePlanes& b) {
    check_shapes(a, b);
    const Gray ga = gradient_magnitude(downsample2(luma(a)));
    const Gray gb = gradient_magnitude(downsample2(luma(b)));

    std::vector<double> gms(ga.v.size());
    for (std::size_t i = 0; i < gms.size(); ++i)
        gms[i] = (2.0 * ga.v[i] * gb.v[i] + kGmsdC) / (ga.v[i] * ga.v[i] + gb.v[i] * gb.v[i] + kGmsdC);

    double mean = 0.0;
    for (double v : gms) mean += v;
    mean /= static_cast<double>(gms.size());
    double var = 0.0;
    for (double v : gms) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(gms.size()));
}

MetricReport evaluate_pair(const ImagePlanes& restored, const ImagePlanes& reference) {
    MetricReport report;
    report.psnr_db = psnr(restored, reference);
    report.ssim = ssim(restored, reference);
    report.ms_ssim = ms_ssim(restored, reference);
    report.gmsd = gmsd(restored, reference);
    return report;
}

} // namespace bandsim
