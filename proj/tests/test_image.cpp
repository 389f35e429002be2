#include <catch2/catch_amalgamated.hpp>

#include "aric/image.hpp"
#include "support/synth.hpp"

using namespace aric;

namespace {

std::vector<uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("read_ppm parses a 1x1 black P6", "[image]") {
    auto data = bytes_of("P6 1 1 255 ");
    data.insert(data.end(), {0, 0, 0});
    Image img = read_ppm(data);
    CHECK(img.width == 1);
    CHECK(img.height == 1);
    CHECK(img.channels == 3);
    CHECK(img.at(0, 0, 0) == 0.0);
    CHECK(img.at(0, 0, 1) == 0.0);
    CHECK(img.at(0, 0, 2) == 0.0);
}

TEST_CASE("read_ppm maps extremes to 0 and 1", "[image]") {
    auto data = bytes_of("P6\n2 1\n255\n");
    data.insert(data.end(), {255, 255, 255, 0, 0, 0});
    Image img = read_ppm(data);
    CHECK(img.at(0, 0, 0) == 1.0);
    CHECK(img.at(0, 0, 1) == 1.0);
    CHECK(img.at(0, 0, 2) == 1.0);
    CHECK(img.at(1, 0, 0) == 0.0);
}

TEST_CASE("read_ppm handles comments and P5", "[image]") {
    auto data = bytes_of("P5 # gray\n# another comment\n 2 #w\n1\n255\n");
    data.insert(data.end(), {128, 64});
    Image img = read_ppm(data);
    CHECK(img.channels == 1);
    CHECK(img.at(0, 0, 0) == 128.0 / 255.0);
    CHECK(img.at(1, 0, 0) == 64.0 / 255.0);
}

TEST_CASE("read_ppm rejects malformed input with typed errors", "[image]") {
    CHECK_THROWS_MATCHES(read_ppm(bytes_of("P4 1 1 255 ")), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("magic at byte 0")));
    CHECK_THROWS_AS(read_ppm(bytes_of("P6 1 1 254 x")), Error);
    auto truncated = bytes_of("P6 2 2 255 ");
    truncated.insert(truncated.end(), {1, 2, 3});
    CHECK_THROWS_AS(read_ppm(truncated), Error);
    try {
        read_ppm(truncated);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.code() == Err::Format);
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("write_ppm emits the canonical gray form", "[image]") {
    Image img = Image::blank(1, 1, 1);
    auto out = write_ppm(img);
    auto expected = bytes_of("P5\n1 1\n255\n");
    expected.push_back(0x00);
    CHECK(out == expected);
}

TEST_CASE("write_ppm rounds ties away from zero", "[image]") {
    Image img = Image::blank(1, 1, 1);
    img.at(0, 0, 0) = 0.5;  // 127.5 -> 128
    auto out = write_ppm(img);
    CHECK(out.back() == 128);
}

TEST_CASE("write/read round trip is byte-exact on random images", "[image]") {
    for (uint64_t seed = 1; seed <= 8; ++seed) {
        int w = 1 + static_cast<int>(seed * 7 % 40);
        int h = 1 + static_cast<int>(seed * 13 % 30);
        int ch = seed % 2 ? 3 : 1;
        Image img = synth::noise_image(w, h, ch, seed);
        auto bytes = write_ppm(img);
        Image again = read_ppm(bytes);
        REQUIRE(again.pixels == img.pixels);
        CHECK(write_ppm(again) == bytes);
    }
}

TEST_CASE("read_ppm canonicalizes messy but valid headers", "[image]") {
    Image img = synth::noise_image(5, 4, 3, 99);
    auto canonical = write_ppm(img);
    auto messy = bytes_of("P6  # comment\n\t5   4\n# another\n255\n");
    messy.insert(messy.end(), canonical.end() - 5 * 4 * 3, canonical.end());
    CHECK(write_ppm(read_ppm(messy)) == canonical);
}

TEST_CASE("center_crop offsets follow the floor formula", "[image]") {
    Image img = synth::noise_image(4, 4, 1, 5);
    SECTION("full-size crop is the identity") {
        Image c = center_crop(img, 4, 4);
        CHECK(c.pixels == img.pixels);
    }
    SECTION("2x2 from 4x4 keeps rows and cols 1..2") {
        Image c = center_crop(img, 2, 2);
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x) CHECK(c.at(x, y, 0) == img.at(x + 1, y + 1, 0));
    }
    SECTION("3x3 from 6x4 uses offsets (1, 0)") {
        Image wide = synth::noise_image(6, 4, 1, 6);
        Image c = center_crop(wide, 3, 3);
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) CHECK(c.at(x, y, 0) == wide.at(x + 1, y, 0));
    }
    SECTION("oversize crop fails") {
        CHECK_THROWS_AS(center_crop(img, 5, 2), Error);
    }
}

TEST_CASE("center_crop preserves values exactly", "[image]") {
    Image img = synth::natural_image(32, 24, 3, 11);
    Image c = center_crop(img, 15, 10);
    int ox = (32 - 15) / 2, oy = (24 - 10) / 2;
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 15; ++x)
            for (int ch = 0; ch < 3; ++ch) CHECK(c.at(x, y, ch) == img.at(x + ox, y + oy, ch));
}
