#include "bandsim/traj.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace bandsim {

FeatureStack::FeatureStack(int n_, int c_, int h_, int w_, std::string layer, int t)
    : n(n_), c(c_), h(h_), w(w_), layer_id(std::move(layer)), timestep(t),
      data(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0f) {
    if (n_ < 1 || c_ < 1 || h_ < 1 || w_ < 1)
        throw std::invalid_argument("feature stack dimensions must be >= 1");
}

void TAConfig::validate() const {
    if (global_gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    bool any_positive = false;
    for (const auto& [layer, weight] : layer_weights) {
        if (weight < 0.0) throw std::invalid_argument("layer weight must be non-negative: " + layer);
        any_positive = any_positive || weight > 0.0;
    }
    if (!any_positive) throw std::invalid_argument("at least one layer weight must be positive");
}

namespace {

void check_pair(const FeatureStack& a, const FeatureStack& b) {
    if (a.n != b.n || a.c != b.c || a.h != b.h || a.w != b.w)
        throw std::invalid_argument("feature stack shapes differ");
    if (a.layer_id != b.layer_id)
        throw std::invalid_argument("feature stacks come from different layers");
    if (a.timestep != b.timestep)
        throw std::invalid_argument("feature stacks come from different timesteps");
}

double row_norm(const float* row, std::size_t len) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += static_cast<double>(row[i]) * row[i];
    return std::sqrt(s);
}

double row_dot(const float* a, const double* b, std::size_t len) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

} // namespace

std::vector<double> normalize_channels(const FeatureStack& f, double eps) {
    const std::size_t rows = f.rows(), len = f.row_len();
    std::vector<double> out(rows * len);
    for (std::size_t r = 0; r < rows; ++r) {
        const float* row = f.data.data() + r * len;
        const double inv = 1.0 / (row_norm(row, len) + eps);
        double* dst = out.data() + r * len;
        for (std::size_t i = 0; i < len; ++i) dst[i] = static_cast<double>(row[i]) * inv;
    }
    return out;
}

double layer_ta_loss(const FeatureStack& f_lq, const FeatureStack& f_gt, double eps) {
    check_pair(f_lq, f_gt);
    const std::size_t rows = f_lq.rows(), len = f_lq.row_len();
    const std::vector<double> lq_hat = normalize_channels(f_lq, eps);
    const std::vector<double> gt_hat = normalize_channels(f_gt, eps);

    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* a = lq_hat.data() + r * len;
        const double* b = gt_hat.data() + r * len;
        double dot = 0.0;
        for (std::size_t i = 0; i < len; ++i) dot += a[i] * b[i];
        total += 1.0 - dot;
    }
    return total / static_cast<double>(rows);
}

double total_ta_loss(std::span<const FeatureStack> stacks_lq, std::span<const FeatureStack> stacks_gt,
                     const TAConfig& cfg) {
    cfg.validate();
    if (stacks_lq.size() != stacks_gt.size())
        throw std::invalid_argument("layer sets differ in size");

    double total = 0.0;
    for (const FeatureStack& lq : stacks_lq) {
        const FeatureStack* gt = nullptr;
        for (const FeatureStack& candidate : stacks_gt)
            if (candidate.layer_id == lq.layer_id) {
                gt = &candidate;
                break;
            }
        if (!gt) throw std::invalid_argument("layer present on one side only: " + lq.layer_id);
        const auto weight = cfg.layer_weights.find(lq.layer_id);
        if (weight == cfg.layer_weights.end())
            throw std::invalid_argument("no weight configured for layer: " + lq.layer_id);
        if (lq.timestep != stacks_lq.front().timestep)
            throw std::invalid_argument("stacks span multiple timesteps");
        total += weight->second * layer_ta_loss(lq, *gt, cfg.eps);
    }
    return cfg.global_gamma * total;
}

std::vector<double> ta_loss_grad(const FeatureStack& f_lq, const FeatureStack& f_gt, double eps) {
    check_pair(f_lq, f_gt);
    const std::size_t rows = f_lq.rows(), len = f_lq.row_len();
    const std::vector<double> gt_hat = normalize_channels(f_gt, eps);
    const double inv_rows = 1.0 / static_cast<double>(rows);

    std::vector<double> grad(rows * len);
    for (std::size_t r = 0; r < rows; ++r) {
        const float* u = f_lq.data.data() + r * len;
        const double* ghat = gt_hat.data() + r * len;
        const double rad = row_norm(u, len) + eps;
        const double proj = row_dot(u, ghat, len); // u . g_hat
        const double inv_r = 1.0 / rad;
        const double inv_r3 = inv_r * inv_r * inv_r;
        double* dst = grad.data() + r * len;
        for (std::size_t i = 0; i < len; ++i)
            dst[i] = -(ghat[i] * inv_r - static_cast<double>(u[i]) * proj * inv_r3) * inv_rows;
    }
    return grad;
}

double mse_loss(const FeatureStack& a, const FeatureStack& b) {
    if (a.n != b.n || a.c != b.c || a.h != b.h || a.w != b.w)
        throw std::invalid_argument("feature stack shapes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        s += d * d;
    }
    return s / static_cast<double>(a.data.size());
}

double total_objective(double ta, std::optional<double> perceptual, double mse, double lambda_ta,
                       double lambda_perceptual, double lambda_mse) {
    if (lambda_ta < 0.0 || lambda_perceptual < 0.0 || lambda_mse < 0.0)
        throw std::invalid_argument("objective weights must be non-negative");
    if (!perceptual.has_value() && lambda_perceptual > 0.0)
        std::cerr << "[bandsim] no perceptual score supplied; term contributes 0\n";
    return lambda_ta * ta + lambda_perceptual * perceptual.value_or(0.0) + lambda_mse * mse;
}

namespace {

constexpr char kMfg4Magic[4] = {'M', 'F', 'G', '4'};

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

void save_mfg4(const FeatureStack& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open MFG4 for writing: " + path);
    out.write(kMfg4Magic, 4);
    write_u32le(out, static_cast<std::uint32_t>(f.n));
    write_u32le(out, static_cast<std::uint32_t>(f.c));
    write_u32le(out, static_cast<std::uint32_t>(f.h));
    write_u32le(out, static_cast<std::uint32_t>(f.w));
    out.write(reinterpret_cast<const char*>(f.data.data()),
              static_cast<std::streamsize>(f.data.size() * sizeof(float)));
    if (!out) throw std::runtime_error("short MFG4 write: " + path);
}

FeatureStack load_mfg4(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open MFG4 for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMfg4Magic, 4) != 0)
        throw std::runtime_error("bad MFG4 magic: " + path);
    const std::uint32_t n = read_u32le(in);
    const std::uint32_t c = read_u32le(in);
    const std::uint32_t h = read_u32le(in);
    const std::uint32_t w = read_u32le(in);
    if (!in || n < 1 || c < 1 || h < 1 || w < 1)
        throw std::runtime_error("bad MFG4 header: " + path);
    FeatureStack f(static_cast<int>(n), static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
    in.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("short MFG4 read: " + path);
    for (float v : f.data)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite sample in MFG4: " + path);
    return f;
}

} // namespace bandsim
