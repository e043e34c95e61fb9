#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandsim/image.hpp"

namespace bandsim {

// Trajectory-alignment loss: per-channel cosine distance between spatially
// vectorized activations of degraded and clean inputs at the same timestep,
// aggregated across layers with configurable weights. The module consumes
// 4-D stacks from any producer; no network lives here.

struct FeatureStack {
    int n = 0, c = 0, h = 0, w = 0;
    std::string layer_id;
    int timestep = 0;
    std::vector<float> data; // n*c*h*w, row-major

    FeatureStack() = default;
    FeatureStack(int n_, int c_, int h_, int w_, std::string layer = {}, int t = 0);

    std::size_t row_len() const { return static_cast<std::size_t>(h) * w; }
    std::size_t rows() const { return static_cast<std::size_t>(n) * c; }
    float at(int in, int ic, int iy, int ix) const {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
    }
    float& at(int in, int ic, int iy, int ix) {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
    }
};

struct TAConfig {
    std::map<std::string, double> layer_weights; // lambda_l per layer id
    double global_gamma = 1.0;
    double eps = 1e-8;

    void validate() const; // at least one positive weight, non-negatives
};

// Each (n,c) spatial vector divided by (its L2 norm + eps); a zero row stays
// zero. Output layout: rows() x row_len().
std::vector<double> normalize_channels(const FeatureStack& f, double eps);

// Mean over (n,c) of 1 - cosine(lq row, gt row); range [0,2]. Throws on
// shape, layer_id, or timestep mismatch.
double layer_ta_loss(const FeatureStack& f_lq, const FeatureStack& f_gt, double eps = 1e-8);

// gamma * sum_l lambda_l * layer loss. Stacks are matched by layer_id; a
// layer present on one side only (or missing a weight) is an error.
double total_ta_loss(std::span<const FeatureStack> stacks_lq, std::span<const FeatureStack> stacks_gt,
                     const TAConfig& cfg);

// Analytic d(loss)/d(f_lq), same element count/layout as f_lq.data. Per row
// with u = lq row, g_hat = normalized gt row, r = |u| + eps:
//   grad = -(g_hat / r - u * (u . g_hat) / r^3) / (N*C).
std::vector<double> ta_loss_grad(const FeatureStack& f_lq, const FeatureStack& f_gt, double eps = 1e-8);

// Pixel-reconstruction term: mean squared error over all elements.
double mse_loss(const FeatureStack& a, const FeatureStack& b);

// lambda_ta * ta + lambda_perceptual * perceptual + lambda_mse * mse.
// An absent perceptual value contributes 0 and logs a notice; negative
// weights throw.
double total_objective(double ta, std::optional<double> perceptual, double mse, double lambda_ta,
                       double lambda_perceptual, double lambda_mse);

// Pluggable perceptual metric (image pair -> scalar). No implementation
// ships; callers supply one backed by whatever scorer they have.
using PerceptualMetric = std::function<double(const ImagePlanes&, const ImagePlanes&)>;

// Fixture format: magic "MFG4", u32 N, C, H, W (little-endian), float32 data.
void save_mfg4(const FeatureStack& f, const std::string& path);
FeatureStack load_mfg4(const std::string& path);

} // namespace bandsim
