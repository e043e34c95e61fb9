#include <doctest.h>

#include <cmath>
#include <set>

#include "bandsim/banding.hpp"
#include "testutil.hpp"

using namespace bandsim;

namespace {

BandingSpec shared_geometry(BandPattern pattern) {
    BandingSpec spec;
    spec.pattern = pattern;
    spec.period_px = 32.0;
    spec.duty = 0.5;
    spec.phase_px = 0.0;
    spec.orientation_deg = 10.0;
    spec.feather_px = 2.0;
    spec.darkness = 0.4;
    spec.jitter_amp = 0.0;
    spec.gain_floor = 0.05;
    spec.curve_amp_px = 8.0;
    spec.curve_wavelength_px = 64.0;
    spec.crack_density = 0.5;
    spec.seed = 42;
    return spec;
}

double mask_l1(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(static_cast<double>(a[i]) - b[i]);
    return s;
}

} // namespace

TEST_SUITE("banding") {

TEST_CASE("simple mask with zero feather is an exact square wave over rows") {
    BandingSpec spec;
    spec.pattern = BandPattern::Simple;
    spec.period_px = 8.0;
    spec.duty = 0.5;
    spec.feather_px = 0.0;
    spec.orientation_deg = 0.0;
    spec.phase_px = 0.0;
    const int h = 32, w = 16;
    const std::vector<float> mask = generate_mask(spec, h, w);
    for (int r = 0; r < h; ++r) {
        const float expected = (r % 8) < 4 ? 1.0f : 0.0f;
        for (int c = 0; c < w; ++c) CHECK(mask[static_cast<std::size_t>(r) * w + c] == expected);
    }
}

TEST_CASE("simple mask mean tracks the duty cycle") {
    BandingSpec spec;
    spec.pattern = BandPattern::Simple;
    spec.period_px = 7.3;
    spec.duty = 0.37;
    spec.feather_px = 0.0;
    spec.orientation_deg = 0.0;
    spec.phase_px = 0.0;
    const int h = 240, w = 12;
    const std::vector<float> mask = generate_mask(spec, h, w);

    // Analytic oracle: count rows whose fractional period position is inside
    // the dark phase.
    int dark_rows = 0;
    for (int r = 0; r < h; ++r) {
        const double f = r / spec.period_px - std::floor(r / spec.period_px);
        if (f < spec.duty) ++dark_rows;
    }
    double mean = 0.0;
    for (float v : mask) mean += v;
    mean /= static_cast<double>(mask.size());
    CHECK(std::abs(mean - static_cast<double>(dark_rows) / h) < 1e-12);
    CHECK(std::abs(mean - spec.duty) < 2.0 / spec.period_px);
}

TEST_CASE("diamond is the pointwise max of the two crossed simple fields") {
    BandingSpec diamond = shared_geometry(BandPattern::Diamond);
    diamond.feather_px = 0.0;
    const int h = 96, w = 96;
    const std::vector<float> mask = generate_mask(diamond, h, w);

    BandingSpec a = diamond, b = diamond;
    a.pattern = BandPattern::Simple;
    a.orientation_deg = diamond.orientation_deg + 30.0;
    b.pattern = BandPattern::Simple;
    b.orientation_deg = diamond.orientation_deg - 30.0;
    const std::vector<float> fa = generate_mask(a, h, w);
    const std::vector<float> fb = generate_mask(b, h, w);

    bool saw_intersection = false;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        CHECK(mask[i] == std::max(fa[i], fb[i]));
        if (fa[i] == 1.0f && fb[i] == 1.0f) {
            saw_intersection = true;
            CHECK(mask[i] == 1.0f);
        }
    }
    CHECK(saw_intersection);
}

TEST_CASE("curve bends stripes while cracked and complex modify them") {
    const int h = 128, w = 128;
    const std::vector<float> simple = generate_mask(shared_geometry(BandPattern::Simple), h, w);

    const std::vector<float> curve = generate_mask(shared_geometry(BandPattern::Curve), h, w);
    CHECK(mask_l1(simple, curve) > 1.0);

    BandingSpec no_cracks = shared_geometry(BandPattern::Cracked);
    no_cracks.crack_density = 0.0;
    CHECK(mask_l1(generate_mask(no_cracks, h, w), simple) == 0.0);

    BandingSpec all_cracks = shared_geometry(BandPattern::Cracked);
    all_cracks.crack_density = 1.0;
    for (float v : generate_mask(all_cracks, h, w)) CHECK(v == 0.0f);

    for (float v : generate_mask(shared_geometry(BandPattern::Complex), h, w)) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("the five families are pairwise distinct under shared geometry") {
    const int h = 512, w = 512;
    const BandPattern all[] = {BandPattern::Simple, BandPattern::Diamond, BandPattern::Curve,
                               BandPattern::Cracked, BandPattern::Complex};
    std::vector<std::vector<float>> masks;
    for (BandPattern p : all) masks.push_back(generate_mask(shared_geometry(p), h, w));
    const double threshold = 0.01 * h * w;
    for (std::size_t i = 0; i < masks.size(); ++i)
        for (std::size_t j = i + 1; j < masks.size(); ++j)
            CHECK(mask_l1(masks[i], masks[j]) > threshold);
}

TEST_CASE("masks are deterministic in the seed") {
    BandingSpec spec = shared_geometry(BandPattern::Complex);
    spec.jitter_amp = 0.3;
    const std::vector<float> a = generate_mask(spec, 64, 64);
    const std::vector<float> b = generate_mask(spec, 64, 64);
    CHECK(a == b);
    spec.seed = 43;
    CHECK(generate_mask(spec, 64, 64) != a);
}

TEST_CASE("gain equation reproduces the substitution cases") {
    CHECK(gain_value(0.0, 0.7, 1.3, 0.05) == 1.0);
    CHECK(std::abs(gain_value(1.0, 0.3, 1.0, 0.05) - 0.3) < 1e-9);
    CHECK(std::abs(gain_value(1.0, 0.0, 1.5, 0.05) - 0.05) < 1e-9);
}

TEST_CASE("mask_to_gain applies the gain equation per pixel") {
    BandingSpec spec;
    spec.darkness = 0.3;
    spec.jitter_amp = 0.0;
    spec.gain_floor = 0.05;
    const int h = 16, w = 16;

    const std::vector<float> zeros(static_cast<std::size_t>(h) * w, 0.0f);
    for (float v : mask_to_gain(zeros, h, w, spec).values) CHECK(v == 1.0f);

    const std::vector<float> ones(static_cast<std::size_t>(h) * w, 1.0f);
    for (float v : mask_to_gain(ones, h, w, spec).values) CHECK(std::abs(v - 0.3f) < 1e-7f);
}

TEST_CASE("jitter is constant within a stripe and varies across stripes") {
    BandingSpec spec;
    spec.pattern = BandPattern::Simple;
    spec.period_px = 16.0;
    spec.duty = 0.75;
    spec.feather_px = 0.0;
    spec.orientation_deg = 0.0;
    spec.darkness = 0.4;
    spec.jitter_amp = 0.3;
    spec.gain_floor = 0.05;
    spec.seed = 99;

    const int h = 160, w = 24;
    const std::vector<float> mask = generate_mask(spec, h, w);
    const GainField gain = mask_to_gain(mask, h, w, spec);
    const std::vector<std::int64_t> idx = stripe_indices(spec, h, w);

    // Fully dark rows (mask exactly 1) of one stripe share one eta, hence one gain.
    std::set<float> gains_per_stripe[10];
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            if (mask[i] == 1.0f) {
                const std::int64_t k = idx[i];
                REQUIRE(k >= 0);
                REQUIRE(k < 10);
                gains_per_stripe[k].insert(gain.values[i]);
            }
        }
    std::set<float> distinct_across;
    for (const auto& s : gains_per_stripe) {
        if (s.empty()) continue;
        CHECK(s.size() == 1);
        distinct_across.insert(*s.begin());
    }
    CHECK(distinct_across.size() > 1);

    // eta draws follow Uniform[1 - amp, 1 + amp] and depend on the seed.
    for (std::int64_t k = 0; k < 50; ++k) {
        const double eta = stripe_eta(spec, k);
        CHECK(eta >= 1.0 - spec.jitter_amp);
        CHECK(eta <= 1.0 + spec.jitter_amp);
    }
    BandingSpec other = spec;
    other.seed = 100;
    bool seed_matters = false;
    for (std::int64_t k = 0; k < 50 && !seed_matters; ++k)
        seed_matters = stripe_eta(spec, k) != stripe_eta(other, k);
    CHECK(seed_matters);
}

TEST_CASE("gain values stay inside [gain_floor, 1] across random parameterizations") {
    SeededRng rng(2024);
    for (int trial = 0; trial < 400; ++trial) {
        BandingSpec spec;
        spec.pattern = static_cast<BandPattern>(trial % 5);
        spec.period_px = rng.uniform(2.0, 96.0);
        spec.duty = rng.uniform(0.05, 0.95);
        spec.phase_px = rng.uniform(-50.0, 50.0);
        spec.orientation_deg = rng.uniform(-90.0, 90.0);
        spec.feather_px = rng.uniform(0.0, spec.period_px / 2.0);
        spec.darkness = rng.uniform(0.0, 0.999);
        spec.jitter_amp = rng.uniform(0.0, 0.999);
        spec.gain_floor = rng.uniform(0.001, 0.999);
        spec.curve_amp_px = rng.uniform(0.0, 10.0);
        spec.curve_wavelength_px = rng.uniform(8.0, 128.0);
        spec.crack_density = rng.uniform(0.0, 1.0);
        spec.seed = rng.next_u64();

        const int h = 16, w = 16;
        const std::vector<float> mask = generate_mask(spec, h, w);
        const GainField gain = mask_to_gain(mask, h, w, spec);
        for (float v : gain.values) {
            CHECK(v >= static_cast<float>(spec.gain_floor));
            CHECK(v <= 1.0f);
        }
    }
}

TEST_CASE("apply_banding multiplies every channel by the gain") {
    const ImagePlanes img = testutil::random_image(24, 24, 17, 0.0f, 1.0f, Domain::RawLinear);

    GainField unit;
    unit.height = 24;
    unit.width = 24;
    unit.values.assign(24 * 24, 1.0f);
    const ImagePlanes same = apply_banding(img, unit);
    CHECK(same.data() == img.data());

    ImagePlanes uniform(16, 16, Domain::RawLinear);
    for (float& v : uniform.data()) v = 0.8f;
    GainField half;
    half.height = 16;
    half.width = 16;
    half.values.assign(16 * 16, 0.5f);
    const ImagePlanes halved = apply_banding(uniform, half);
    for (float v : halved.data()) CHECK(std::abs(v - 0.4f) < 1e-7f);

    // Brute-force mean oracle.
    GainField random_gain;
    random_gain.height = 24;
    random_gain.width = 24;
    random_gain.values.resize(24 * 24);
    SeededRng rng(5);
    for (float& v : random_gain.values) v = static_cast<float>(rng.uniform(0.05, 1.0));
    const ImagePlanes banded = apply_banding(img, random_gain);
    double expected = 0.0, actual = 0.0;
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x) {
                expected += static_cast<double>(img.at(c, y, x)) * random_gain.at(y, x);
                actual += banded.at(c, y, x);
                CHECK(banded.at(c, y, x) <= img.at(c, y, x)); // gains never brighten
            }
    CHECK(std::abs(expected - actual) / (3.0 * 24 * 24) < 1e-6);

    GainField wrong;
    wrong.height = 8;
    wrong.width = 8;
    wrong.values.assign(64, 1.0f);
    CHECK_THROWS_AS(apply_banding(img, wrong), std::invalid_argument);
    CHECK_THROWS_AS(apply_banding(img.with_domain(Domain::SrgbNonlinear), unit), std::invalid_argument);
}

TEST_CASE("an empty mask makes synthesize_pair the bare isp round trip") {
    // Fully cracked stripes leave no mask, so the gain field is exactly 1 and
    // the pipeline degenerates to forward_isp(inverse_isp(clean)).
    BandingSpec spec;
    spec.pattern = BandPattern::Cracked;
    spec.crack_density = 1.0;
    spec.jitter_amp = 0.0;
    const ImagePlanes clean = testutil::natural_image(64, 64, 8);
    const auto [degraded, manifest] = synthesize_pair(clean, spec, IspParams{});
    for (std::size_t i = 0; i < clean.size(); ++i)
        CHECK(std::abs(static_cast<double>(clean.data()[i]) - degraded.data()[i]) < 1e-5);
    CHECK(manifest.pipeline_version == kPipelineVersion);
    CHECK(manifest.seed == spec.seed);
}

TEST_CASE("darkness sets the brightness floor of a fully dark stripe") {
    // g = 1 - M(1-D)eta: a solid stripe attenuates to exactly D.
    BandingSpec spec;
    spec.pattern = BandPattern::Simple;
    spec.period_px = 8.0;
    spec.duty = 0.5;
    spec.feather_px = 0.0;
    spec.orientation_deg = 0.0;
    spec.darkness = 0.4;
    spec.jitter_amp = 0.0;
    const int h = 16, w = 8;
    const GainField gain = mask_to_gain(generate_mask(spec, h, w), h, w, spec);
    for (int r = 0; r < h; ++r) {
        const float expected = (r % 8) < 4 ? 0.4f : 1.0f;
        for (int c = 0; c < w; ++c) CHECK(std::abs(gain.at(r, c) - expected) < 1e-7f);
    }
}

TEST_CASE("simple banding leaves a periodic row-luminance signature") {
    BandingSpec spec;
    spec.pattern = BandPattern::Simple;
    spec.period_px = 24.0;
    spec.duty = 0.45;
    spec.feather_px = 2.0;
    spec.orientation_deg = 0.0;
    spec.darkness = 0.4;
    spec.seed = 31;

    ImagePlanes gray(192, 96, Domain::SrgbNonlinear);
    for (float& v : gray.data()) v = 0.6f;
    const auto [degraded, manifest] = synthesize_pair(gray, spec, IspParams{});
    const int lag = testutil::autocorr_peak_lag(testutil::row_luma_profile(degraded));
    CHECK(std::abs(lag - 24) <= 1);
}

TEST_CASE("synthesis is bit-exactly repeatable") {
    BandingSpec spec = shared_geometry(BandPattern::Cracked);
    spec.jitter_amp = 0.25;
    const ImagePlanes clean = testutil::natural_image(64, 64, 77);
    const auto [first, m1] = synthesize_pair(clean, spec, IspParams{});
    const auto [second, m2] = synthesize_pair(clean, spec, IspParams{});
    CHECK(first.data() == second.data());
    CHECK(m1.banding_spec_json == m2.banding_spec_json);
}

TEST_CASE("spec json round trips") {
    BandingSpec spec = shared_geometry(BandPattern::Curve);
    spec.jitter_amp = 0.125;
    spec.seed = 0xdeadbeefull;
    const BandingSpec back = banding_spec_from_json(banding_spec_to_json(spec));
    CHECK(back.pattern == spec.pattern);
    CHECK(back.period_px == spec.period_px);
    CHECK(back.duty == spec.duty);
    CHECK(back.phase_px == spec.phase_px);
    CHECK(back.orientation_deg == spec.orientation_deg);
    CHECK(back.feather_px == spec.feather_px);
    CHECK(back.darkness == spec.darkness);
    CHECK(back.jitter_amp == spec.jitter_amp);
    CHECK(back.gain_floor == spec.gain_floor);
    CHECK(back.curve_amp_px == spec.curve_amp_px);
    CHECK(back.curve_wavelength_px == spec.curve_wavelength_px);
    CHECK(back.crack_density == spec.crack_density);
    CHECK(back.seed == spec.seed);
}

TEST_CASE("invalid specs are rejected") {
    auto reject = [](auto mutate) {
        BandingSpec spec;
        mutate(spec);
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    };
    reject([](BandingSpec& s) { s.period_px = 1.5; });
    reject([](BandingSpec& s) { s.duty = 0.0; });
    reject([](BandingSpec& s) { s.duty = 1.0; });
    reject([](BandingSpec& s) { s.feather_px = s.period_px; });
    reject([](BandingSpec& s) { s.darkness = 1.0; });
    reject([](BandingSpec& s) { s.jitter_amp = 1.0; });
    reject([](BandingSpec& s) { s.gain_floor = 0.0; });
    reject([](BandingSpec& s) { s.gain_floor = 1.0; });
    reject([](BandingSpec& s) { s.crack_density = 1.5; });
    reject([](BandingSpec& s) {
        s.curve_amp_px = 3.0;
        s.curve_wavelength_px = 0.0;
    });
    CHECK_THROWS_AS(generate_mask(BandingSpec{}, 4, 64), std::invalid_argument);
}

} // TEST_SUITE
