#include <doctest.h>

#include <cmath>

#include "bandsim/isp.hpp"
#include "testutil.hpp"

using namespace bandsim;

namespace {

// Independent transfer-curve oracle, evaluated straight from the piecewise
// definition.
double oracle_srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double oracle_linear_to_srgb(double v) {
    return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

ImagePlanes constant_image(int h, int w, float value, Domain domain) {
    ImagePlanes img(h, w, domain);
    for (float& v : img.data()) v = value;
    return img;
}

} // namespace

TEST_SUITE("isp") {

TEST_CASE("transfer curve matches the piecewise oracle and fixes the endpoints") {
    CHECK(srgb_to_linear(0.0) == 0.0);
    CHECK(std::abs(srgb_to_linear(1.0) - 1.0) < 1e-12);
    CHECK(std::abs(linear_to_srgb(1.0) - 1.0) < 1e-12);
    CHECK(std::abs(srgb_to_linear(0.5) - 0.21404114048223255) < 1e-12);
    for (double c : {0.01, 0.04045, 0.0405, 0.25, 0.5, 0.75, 0.99}) {
        CHECK(std::abs(srgb_to_linear(c) - oracle_srgb_to_linear(c)) < 1e-15);
        // The standard's branch constants meet with a ~3e-8 seam at 0.04045,
        // so the curve round-trips to 1e-7, not machine precision.
        CHECK(std::abs(linear_to_srgb(srgb_to_linear(c)) - c) < 1e-7);
    }
}

TEST_CASE("inverse isp with identity params is the transfer curve") {
    const IspParams identity;
    const ImagePlanes zeros = constant_image(16, 16, 0.0f, Domain::SrgbNonlinear);
    const ImagePlanes raw_zeros = inverse_isp(zeros, identity);
    for (float v : raw_zeros.data()) CHECK(v == 0.0f);

    const ImagePlanes ones = constant_image(16, 16, 1.0f, Domain::SrgbNonlinear);
    const ImagePlanes raw_ones = inverse_isp(ones, identity);
    for (float v : raw_ones.data()) CHECK(std::abs(v - 1.0f) < 1e-6f);

    const ImagePlanes half = constant_image(16, 16, 0.5f, Domain::SrgbNonlinear);
    const ImagePlanes raw = inverse_isp(half, identity);
    CHECK(raw.domain() == Domain::RawLinear);
    for (float v : raw.data()) CHECK(std::abs(v - 0.21404114f) < 1e-5f);
}

TEST_CASE("forward isp reproduces direct matrix arithmetic") {
    IspParams p;
    p.wb_gains = {2.0, 1.0, 1.0};
    const ImagePlanes gray = constant_image(16, 16, 0.25f, Domain::RawLinear);
    const ImagePlanes out = forward_isp(gray, p);
    CHECK(out.domain() == Domain::SrgbNonlinear);
    // Identity ccm row 0 applied to (0.5, 0.25, 0.25) keeps 0.5.
    const double expected_red = oracle_linear_to_srgb(0.5);
    const double expected_green = oracle_linear_to_srgb(0.25);
    CHECK(std::abs(out.at(0, 3, 3) - expected_red) < 1e-6);
    CHECK(std::abs(out.at(1, 3, 3) - expected_green) < 1e-6);
    CHECK(std::abs(out.at(2, 3, 3) - expected_green) < 1e-6);
}

TEST_CASE("round trip is exact to 1e-5 when nothing clips") {
    for (int trial = 0; trial < 20; ++trial) {
        IspParams p;
        ImagePlanes img(24, 24, Domain::SrgbNonlinear);
        if (trial % 2 == 0) {
            img = testutil::random_image(24, 24, 100 + trial); // identity params: never clips
        } else {
            SeededRng rng(200 + trial);
            for (int c = 0; c < 3; ++c) p.wb_gains[c] = rng.uniform(0.7, 1.4);
            if (trial % 4 == 1) {
                p.gamma_mode = GammaMode::PurePower;
                p.gamma_exponent = rng.uniform(1.8, 2.6);
            }
            // degamma(0.85)/0.7 < 1, so wb division cannot clip.
            img = testutil::random_image(24, 24, 300 + trial, 0.05f, 0.85f);
        }
        IspStats inv_stats, fwd_stats;
        const ImagePlanes raw = inverse_isp(img, p, &inv_stats);
        const ImagePlanes back = forward_isp(raw, p, &fwd_stats);
        CHECK(inv_stats.clipped() == 0);
        CHECK(fwd_stats.clipped() == 0);
        double max_err = 0.0;
        for (std::size_t i = 0; i < img.size(); ++i)
            max_err = std::max(max_err, std::abs(static_cast<double>(img.data()[i]) - back.data()[i]));
        CHECK(max_err < 1e-5);
    }
}

TEST_CASE("round trip with randomized params holds on gray images") {
    // Rows of the randomized ccm sum to 1, so gray inputs stay gray and the
    // whole pipeline stays inside [0,1].
    for (int trial = 0; trial < 10; ++trial) {
        const IspParams p = random_isp_params(900 + trial);
        const ImagePlanes img = testutil::random_gray_image(16, 16, 40 + trial, 0.05f, 0.85f);
        IspStats stats;
        const ImagePlanes back = forward_isp(inverse_isp(img, p, &stats), p, &stats);
        CHECK(stats.clipped() == 0);
        for (std::size_t i = 0; i < img.size(); ++i)
            CHECK(std::abs(static_cast<double>(img.data()[i]) - back.data()[i]) < 1e-5);
    }
}

TEST_CASE("channel mappings are strictly increasing under identity params") {
    const IspParams identity;
    ImagePlanes ramp(8, 256, Domain::SrgbNonlinear);
    for (int x = 0; x < 256; ++x)
        for (int y = 0; y < 8; ++y)
            for (int c = 0; c < 3; ++c) ramp.at(c, y, x) = static_cast<float>(x) / 255.0f;
    const ImagePlanes raw = inverse_isp(ramp, identity);
    const ImagePlanes back = forward_isp(raw, identity);
    for (int x = 1; x < 256; ++x) {
        CHECK(raw.at(0, 0, x) > raw.at(0, 0, x - 1));
        CHECK(back.at(0, 0, x) > back.at(0, 0, x - 1));
    }
}

TEST_CASE("clipping is counted") {
    IspParams p;
    p.wb_gains = {0.5, 1.0, 1.0}; // inverse divides red by 0.5: bright reds clip
    const ImagePlanes bright = constant_image(8, 8, 1.0f, Domain::SrgbNonlinear);
    IspStats stats;
    const ImagePlanes raw = inverse_isp(bright, p, &stats);
    CHECK(stats.clipped_high == 8 * 8);
    for (int y = 0; y < 8; ++y) CHECK(raw.at(0, y, 0) == 1.0f);
}

TEST_CASE("domain and parameter violations are rejected") {
    const IspParams identity;
    const ImagePlanes raw = constant_image(8, 8, 0.5f, Domain::RawLinear);
    const ImagePlanes srgb = constant_image(8, 8, 0.5f, Domain::SrgbNonlinear);
    CHECK_THROWS_AS(inverse_isp(raw, identity), std::invalid_argument);
    CHECK_THROWS_AS(forward_isp(srgb, identity), std::invalid_argument);

    IspParams bad_wb;
    bad_wb.wb_gains = {0.1, 1.0, 1.0};
    CHECK_THROWS_AS(inverse_isp(srgb, bad_wb), std::invalid_argument);

    IspParams singular;
    singular.ccm = {{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}};
    CHECK_THROWS_AS(inverse_isp(srgb, singular), std::invalid_argument);
}

TEST_CASE("randomized params satisfy their own constraints") {
    for (int trial = 0; trial < 50; ++trial) {
        const IspParams p = random_isp_params(trial);
        p.validate();
        for (double g : p.wb_gains) CHECK((g >= 0.7 && g <= 1.4));
        for (int r = 0; r < 3; ++r) {
            double sum = 0.0;
            for (int c = 0; c < 3; ++c) sum += p.ccm[r][c];
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

} // TEST_SUITE
