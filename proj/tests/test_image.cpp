#include <doctest.h>

#include <cmath>
#include <fstream>

#include "bandsim/image.hpp"
#include "testutil.hpp"

using namespace bandsim;

TEST_SUITE("image") {

TEST_CASE("zero image survives an 8-bit png round trip") {
    testutil::TempDir tmp("img_zero");
    const ImagePlanes zeros(16, 16, Domain::SrgbNonlinear);
    const std::string path = tmp.str() + "/zero.png";
    save_image(zeros, path, PngBitDepth::Eight);
    const ImagePlanes back = load_image(path);
    CHECK(back.domain() == Domain::SrgbNonlinear);
    for (float v : back.data()) CHECK(v == 0.0f);
}

TEST_CASE("full scale maps to exactly one") {
    testutil::TempDir tmp("img_one");
    ImagePlanes ones(16, 16, Domain::SrgbNonlinear);
    for (float& v : ones.data()) v = 1.0f;
    for (PngBitDepth depth : {PngBitDepth::Eight, PngBitDepth::Sixteen}) {
        const std::string path = tmp.str() + "/one.png";
        save_image(ones, path, depth);
        const ImagePlanes back = load_image(path);
        for (float v : back.data()) CHECK(v == 1.0f);
    }
}

TEST_CASE("16-bit quantization hits the expected lattice value") {
    testutil::TempDir tmp("img_16");
    ImagePlanes img(16, 16, Domain::SrgbNonlinear);
    for (float& v : img.data()) v = 0.5f;
    const std::string path = tmp.str() + "/half.png";
    save_image(img, path, PngBitDepth::Sixteen);
    // lround(0.5 * 65535) = 32768, so every sample is 32768/65535.
    const double expected = 32768.0 / 65535.0;
    const ImagePlanes back = load_image(path);
    for (float v : back.data())
        CHECK(std::abs(static_cast<double>(v) - expected) < 1e-9);
}

TEST_CASE("16-bit round trip stays within half a quantization step") {
    testutil::TempDir tmp("img_rt16");
    const ImagePlanes img = testutil::random_image(24, 31, 7);
    const std::string path = tmp.str() + "/rt.png";
    save_image(img, path, PngBitDepth::Sixteen);
    const ImagePlanes back = load_image(path);
    double max_err = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i)
        max_err = std::max(max_err, std::abs(static_cast<double>(img.data()[i]) - back.data()[i]));
    CHECK(max_err <= 0.5 / 65535.0 + 1e-12);
}

TEST_CASE("8-bit rounding of a mid-gray image lands on the adjacent codes") {
    testutil::TempDir tmp("img_half8");
    ImagePlanes img(16, 16, Domain::SrgbNonlinear);
    for (float& v : img.data()) v = 0.5f;
    const std::string path = tmp.str() + "/half8.png";
    save_image(img, path, PngBitDepth::Eight);
    const ImagePlanes back = load_image(path);
    for (float v : back.data()) {
        const bool ok = std::abs(v - 127.0f / 255.0f) < 1e-7f || std::abs(v - 128.0f / 255.0f) < 1e-7f;
        CHECK(ok);
    }
}

TEST_CASE("png round trip is the identity on lattice values and idempotent off it") {
    testutil::TempDir tmp("img_lattice");
    // Exact 8-bit lattice values round-trip bit-exactly.
    ImagePlanes lattice(16, 16, Domain::SrgbNonlinear);
    {
        SeededRng rng(3);
        for (float& v : lattice.data())
            v = static_cast<float>(static_cast<int>(rng.uniform(0.0, 255.999))) / 255.0f;
    }
    const std::string p1 = tmp.str() + "/lat.png";
    save_image(lattice, p1, PngBitDepth::Eight);
    const ImagePlanes once = load_image(p1);
    for (std::size_t i = 0; i < lattice.size(); ++i) CHECK(once.data()[i] == lattice.data()[i]);

    // Applying save-load twice equals applying it once (contraction onto the lattice).
    const ImagePlanes arbitrary = testutil::random_image(16, 16, 11);
    const std::string p2 = tmp.str() + "/a.png", p3 = tmp.str() + "/b.png";
    save_image(arbitrary, p2, PngBitDepth::Eight);
    const ImagePlanes first = load_image(p2);
    save_image(first, p3, PngBitDepth::Eight);
    const ImagePlanes second = load_image(p3);
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(second.data()[i] == first.data()[i]);
}

TEST_CASE("unreadable and malformed files are rejected") {
    testutil::TempDir tmp("img_err");
    CHECK_THROWS_AS(load_image(tmp.str() + "/missing.png"), std::runtime_error);
    const std::string garbage = tmp.str() + "/garbage.png";
    std::ofstream(garbage) << "this is not a png";
    CHECK_THROWS_AS(load_image(garbage), std::runtime_error);
    const ImagePlanes img(16, 16, Domain::SrgbNonlinear);
    CHECK_THROWS_AS(save_image(img, tmp.str() + "/no_dir/x.png", PngBitDepth::Eight), std::runtime_error);
}

TEST_CASE("dimension invariants are enforced") {
    CHECK_THROWS_AS(ImagePlanes(7, 16, Domain::SrgbNonlinear), std::invalid_argument);
    CHECK_THROWS_AS(ImagePlanes(16, 7, Domain::SrgbNonlinear), std::invalid_argument);
    CHECK_THROWS_AS(ImagePlanes(16, 16, Domain::SrgbNonlinear, std::vector<float>(10)), std::invalid_argument);
}

TEST_CASE("mfrg dump round trips bit-exactly and validates its header") {
    testutil::TempDir tmp("img_mfrg");
    const ImagePlanes img = testutil::random_image(13, 21, 5, 0.0f, 1.0f, Domain::RawLinear);
    const std::string path = tmp.str() + "/img.mfrg";
    save_mfrg(img, path);
    const ImagePlanes back = load_mfrg(path, Domain::RawLinear);
    CHECK(back.height() == 13);
    CHECK(back.width() == 21);
    CHECK(back.domain() == Domain::RawLinear);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == img.data()[i]);

    const std::string bad = tmp.str() + "/bad.mfrg";
    std::ofstream(bad) << "XXXXgarbage";
    CHECK_THROWS_AS(load_mfrg(bad, Domain::RawLinear), std::runtime_error);
}

} // TEST_SUITE
