#include <cmath>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "dtmon/core.hpp"
#include "oracles.hpp"

using namespace dtmon;

namespace {
const std::vector<double> kLanes{-2, -1, 0, 1, 2};
}

TEST_SUITE("core") {

TEST_CASE("coincident agents give zero offsets") {
    const AttributeVector a = compute_attributes({0, 0, 0, 0.6}, {0, 0, 0, 1.0}, std::nullopt, 0.1, kLanes);
    CHECK(a[kDx] == 0.0);
    CHECK(a[kDy] == 0.0);
    CHECK(a[kDist] == 0.0);
    CHECK(a[kTheta] == 0.0);
}

TEST_CASE("3-4-5 triangle distance and rate") {
    const AttributeVector a = compute_attributes({0, 0, 0, 0.6}, {3, 4, 0, 1.0}, 5.1, 0.1, kLanes);
    CHECK(a[kDist] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(a[kDprime] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(a[kVh] == 1.0);
    CHECK(a[kVr] == 0.6);
    CHECK(a[kLane] == 0.0);
}

TEST_CASE("first observation has zero distance rate") {
    const AttributeVector a = compute_attributes({0, 0, 0, 0.6}, {2, 1, 1, 1.0}, std::nullopt, 0.1, kLanes);
    CHECK(a[kDprime] == 0.0);
}

TEST_CASE("worked-example vector is well formed within rounding") {
    const AttributeVector a{{1.43, -4.71, -81, 4.93, -0.43, 1.0, 0.6, 0}};
    CHECK(well_formed(a, 0.02, kLanes));
    CHECK_FALSE(well_formed(a, 1e-9, kLanes));
}

TEST_CASE("theta is reported in degrees within (-180, 180]") {
    const AttributeVector a =
        compute_attributes({0, 0, 0, 0.6}, {1, 1, std::numbers::pi, 1.0}, std::nullopt, 0.1, kLanes);
    CHECK(a[kTheta] == doctest::Approx(180.0));
    CHECK(wrap_degrees(-180.0) == 180.0);
    CHECK(wrap_degrees(540.0) == 180.0);
    CHECK(wrap_radians(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(compute_attributes({}, {}, std::nullopt, 0.0, kLanes), InvalidInput);
    CHECK_THROWS_AS(compute_attributes({}, {}, std::nullopt, 0.1, {}), InvalidInput);
    CHECK_THROWS_AS(compute_attributes({NAN, 0, 0, 0}, {}, std::nullopt, 0.1, kLanes), InvalidInput);
}

TEST_CASE("lane ties go to the smaller lane") {
    CHECK(lane_of(0.5, kLanes) == 0.0);
    CHECK(lane_of(-0.5, kLanes) == -1.0);
    CHECK(lane_of(7.0, kLanes) == 2.0);
    CHECK(lane_of(-1.49, kLanes) == -1.0);
}

TEST_CASE("property: attributes are well formed for random states") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(-20, 20), ang(-10, 10), spd(0, 2);
    for (int i = 0; i < 2000; ++i) {
        const AgentState r{pos(rng), pos(rng), ang(rng), spd(rng)};
        const AgentState h{pos(rng), pos(rng), ang(rng), spd(rng)};
        const AttributeVector a = compute_attributes(r, h, spd(rng) * 10, 0.1, kLanes);
        REQUIRE(well_formed(a, 1e-9, kLanes));
        CHECK(std::abs(a[kDist] * a[kDist] - (a[kDx] * a[kDx] + a[kDy] * a[kDy])) <=
              1e-9 * std::max(1.0, a[kDist] * a[kDist]));
    }
}

TEST_CASE("property: approaching gives negative distance rate, retreating positive") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> pos(-10, 10), step(0.01, 0.2);
    for (int i = 0; i < 500; ++i) {
        const AgentState r{0, 0, 0, 0.6};
        AgentState h{pos(rng), pos(rng), 0, 1.0};
        const double d0 = std::hypot(h.x, h.y);
        if (d0 < 0.5) continue;
        const double s = step(rng);
        AgentState closer = h, farther = h;
        closer.x -= s * h.x / d0;
        closer.y -= s * h.y / d0;
        farther.x += s * h.x / d0;
        farther.y += s * h.y / d0;
        CHECK(compute_attributes(r, closer, d0, 0.1, kLanes)[kDprime] < 0.0);
        CHECK(compute_attributes(r, farther, d0, 0.1, kLanes)[kDprime] > 0.0);
    }
}

TEST_CASE("property: lane assignment is idempotent") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> y(-6, 6);
    for (int i = 0; i < 1000; ++i) {
        const double l = lane_of(y(rng), kLanes);
        CHECK(lane_of(l, kLanes) == l);
    }
}

TEST_CASE("dataset bounds track the per-dimension extrema") {
    std::mt19937_64 rng(14);
    Dataset d;
    CHECK_FALSE(d.bounds().has_value());
    for (int i = 0; i < 300; ++i) {
        d.append({oracle::random_vector(rng), Label::NotInterfere});
        const auto e = oracle::extrema(d);
        REQUIRE(d.bounds().has_value());
        CHECK(d.bounds()->min == e.min);
        CHECK(d.bounds()->max == e.max);
    }
}

TEST_CASE("CSV: header-only text is an empty dataset") {
    CHECK(parse_dataset(std::string(kCsvHeader) + "\n").empty());
}

TEST_CASE("CSV: worked-example row parses as interfering") {
    const Dataset d = parse_dataset(std::string(kCsvHeader) + "\n1.43,-4.71,-81,4.93,-0.43,1.0,0.6,0,1\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].label == Label::Interfere);
    CHECK(d[0].attributes[kTheta] == -81.0);
}

TEST_CASE("CSV: malformed rows raise ParseError with the row number") {
    const std::string h = std::string(kCsvHeader) + "\n";
    CHECK_THROWS_AS(parse_dataset(h + "1,2,3\n"), ParseError);
    CHECK_THROWS_AS(parse_dataset(h + "1,2,3,4,5,6,7,8,9,10\n"), ParseError);
    CHECK_THROWS_AS(parse_dataset(h + "1,2,x,4,5,6,7,8,1\n"), ParseError);
    CHECK_THROWS_AS(parse_dataset(h + "1,2,3,4,5,6,7,8,2\n"), ParseError);
    try {
        parse_dataset(h + "1,2,3,4,5,6,7,8,1\n1,2\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 3);
    }
}

TEST_CASE("CSV: save then load 1000 random samples is lossless") {
    std::mt19937_64 rng(15);
    std::vector<LabeledSample> v(1000);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (auto& s : v) {
        for (auto& x : s.attributes.values) x = u(rng) / 7.0;
        s.label = u(rng) > 0 ? Label::Interfere : Label::NotInterfere;
    }
    const Dataset d(v);
    const auto path = std::filesystem::temp_directory_path() / "dtmon_roundtrip.csv";
    save_dataset(d, path);
    const Dataset back = load_dataset(path);
    std::filesystem::remove(path);
    CHECK(back == d);
    CHECK(parse_dataset(format_dataset(d)) == d);
}

} // TEST_SUITE
