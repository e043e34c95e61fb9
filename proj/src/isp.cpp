#include "bandsim/isp.hpp"

#include <cmath>
#include <stdexcept>

#include "bandsim/rng.hpp"

namespace bandsim {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

double det3(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 invert3(const Mat3& m) {
    const double det = det3(m);
    if (std::abs(det) < 1e-12)
        throw std::invalid_argument("ccm is singular");
    const double inv_det = 1.0 / det;
    Mat3 r;
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    return r;
}

double frobenius(const Mat3& m) {
    double s = 0.0;
    for (const auto& row : m)
        for (double v : row) s += v * v;
    return std::sqrt(s);
}

double clip_unit(double v, IspStats* stats) {
    if (v < 0.0) {
        if (stats) ++stats->clipped_low;
        return 0.0;
    }
    if (v > 1.0) {
        if (stats) ++stats->clipped_high;
        return 1.0;
    }
    return v;
}

} // namespace

void IspParams::validate() const {
    for (double g : wb_gains)
        if (!(g >= 0.25 && g <= 4.0))
            throw std::invalid_argument("wb gain outside [0.25, 4]");
    const Mat3 inv = invert3(ccm); // throws if singular
    if (frobenius(ccm) * frobenius(inv) >= 1e4)
        throw std::invalid_argument("ccm condition number too large");
    if (gamma_mode == GammaMode::PurePower && !(gamma_exponent > 0.0))
        throw std::invalid_argument("gamma exponent must be positive");
}

double srgb_to_linear(double encoded) {
    return encoded <= 0.04045 ? encoded / 12.92
                              : std::pow((encoded + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double linear) {
    return linear <= 0.0031308 ? linear * 12.92
                               : 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

namespace {

double degamma(double v, const IspParams& p) {
    if (p.gamma_mode == GammaMode::SrgbStandard) return srgb_to_linear(v);
    return std::pow(v, p.gamma_exponent);
}

double engamma(double v, const IspParams& p) {
    if (p.gamma_mode == GammaMode::SrgbStandard) return linear_to_srgb(v);
    return std::pow(v, 1.0 / p.gamma_exponent);
}

} // namespace

ImagePlanes inverse_isp(const ImagePlanes& img, const IspParams& params, IspStats* stats) {
    if (img.domain() != Domain::SrgbNonlinear)
        throw std::invalid_argument("inverse_isp expects an sRGB image");
    params.validate();
    const Mat3 inv_ccm = invert3(params.ccm);

    ImagePlanes out(img.height(), img.width(), Domain::RawLinear);
    const int h = img.height(), w = img.width();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double lin[3];
            for (int c = 0; c < 3; ++c)
                lin[c] = degamma(static_cast<double>(img.at(c, y, x)), params);
            for (int c = 0; c < 3; ++c) {
                const double mixed = inv_ccm[c][0] * lin[0] + inv_ccm[c][1] * lin[1] + inv_ccm[c][2] * lin[2];
                out.at(c, y, x) = static_cast<float>(clip_unit(mixed / params.wb_gains[c], stats));
            }
        }
    }
    return out;
}

ImagePlanes forward_isp(const ImagePlanes& img, const IspParams& params, IspStats* stats) {
    if (img.domain() != Domain::RawLinear)
        throw std::invalid_argument("forward_isp expects a linear pseudo-RAW image");
    params.validate();

    ImagePlanes out(img.height(), img.width(), Domain::SrgbNonlinear);
    const int h = img.height(), w = img.width();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double balanced[3];
            for (int c = 0; c < 3; ++c)
                balanced[c] = static_cast<double>(img.at(c, y, x)) * params.wb_gains[c];
            for (int c = 0; c < 3; ++c) {
                const double mixed = params.ccm[c][0] * balanced[0] + params.ccm[c][1] * balanced[1] +
                                     params.ccm[c][2] * balanced[2];
                // The transfer curve is monotone on [0,1], so clipping before it
                // equals the contractual post-gamma clip and keeps pow() real.
                out.at(c, y, x) = static_cast<float>(engamma(clip_unit(mixed, stats), params));
            }
        }
    }
    return out;
}

IspParams random_isp_params(std::uint64_t seed) {
    SeededRng rng(hash_combine(seed, 0x1597u));
    IspParams p;
    for (int c = 0; c < 3; ++c) p.wb_gains[c] = rng.uniform(0.7, 1.4);
    for (int r = 0; r < 3; ++r) {
        double row_sum = 1.0;
        for (int c = 0; c < 3; ++c) {
            if (r == c) continue;
            p.ccm[r][c] = rng.uniform(-0.1, 0.1);
            row_sum += p.ccm[r][c];
        }
        for (int c = 0; c < 3; ++c) p.ccm[r][c] /= row_sum;
    }
    p.gamma_mode = GammaMode::SrgbStandard;
    return p;
}

} // namespace bandsim
