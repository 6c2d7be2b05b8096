#include <cmath>
#include <random>

#include <doctest.h>

#include "dtmon/validation.hpp"
#include "oracles.hpp"

using namespace dtmon;

namespace {

const std::vector<double> kLanes{-2, -1, 0, 1, 2};

// Robot parked at the origin, one human walking along y = offset at 1 m/s,
// from x = -5 to x = 5.
Trajectory pass_by(double offset) {
    Trajectory t;
    t.tick = 0.1;
    t.humans.resize(1);
    t.intended.resize(1);
    for (int k = 0; k <= 100; ++k) {
        t.times.push_back(0.1 * k);
        t.robot.push_back({0, 0, 0, 0});
        const AgentState h{-5 + 0.1 * k, offset, 0, 1};
        t.humans[0].push_back(h);
        t.intended[0].push_back(h.position());
    }
    return t;
}

UpdateParams params(double horizon, double delta_th) {
    UpdateParams p;
    p.labeling_horizon = horizon;
    p.delta_th = delta_th;
    p.lanes = kLanes;
    p.run_id = "t";
    return p;
}

} // namespace

TEST_SUITE("validation") {

TEST_CASE("hull bounds of a single sample and of box corners") {
    Dataset one;
    AttributeVector a;
    a.values = {1, 2, 3, 4, 5, 6, 7, 8};
    one.append({a, Label::Interfere});
    const HullBounds b = hull_bounds(one);
    CHECK(b.min == a.values);
    CHECK(b.max == a.values);
    CHECK_FALSE(case2_out_of_bounds(a, b));
    AttributeVector c = a;
    c[3] += 1e-9;
    CHECK(case2_out_of_bounds(c, b));

    Dataset box;
    for (int m = 0; m < 4; ++m) {
        AttributeVector v;
        v[0] = (m & 1) ? 1 : -1;
        v[1] = (m & 2) ? 2 : -2;
        box.append({v, Label::NotInterfere});
    }
    const HullBounds bb = hull_bounds(box);
    CHECK(bb.min[0] == -1);
    CHECK(bb.max[1] == 2);
    CHECK_THROWS_AS(hull_bounds(Dataset{}), InvalidInput);
}

TEST_CASE("oracle: hull bounds and Case 2 agree with a per-dimension scan") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 500; ++trial) {
        const Dataset d = oracle::random_dataset(rng, 1 + trial % 40);
        const oracle::Extrema e = oracle::extrema(d);
        const HullBounds b = hull_bounds(d);
        CHECK(b.min == e.min);
        CHECK(b.max == e.max);
        const AttributeVector q = oracle::random_vector(rng, -1.5, 2.5);
        CHECK(case2_out_of_bounds(q, b) == oracle::outside(q, e));
        for (const auto& s : d) CHECK_FALSE(case2_out_of_bounds(s.attributes, b));
    }
}

TEST_CASE("property: enlarging the local set never raises Case 2") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        Dataset d = oracle::random_dataset(rng, 10);
        const AttributeVector q = oracle::random_vector(rng, -1.0, 2.0);
        const bool before = case2_out_of_bounds(q, hull_bounds(d));
        for (const auto& s : oracle::random_dataset(rng, 10)) d.append(s);
        if (!before) CHECK_FALSE(case2_out_of_bounds(q, hull_bounds(d)));
    }
}

TEST_CASE("Case 1 flags exactly the ticks below the threshold") {
    CHECK(case1_violation(pass_by(2.09), 1.0).empty());
    const auto hits = case1_violation(pass_by(0.91), 1.0);
    // x^2 < 1 - 0.91^2 holds for x in {-0.4, ..., 0.4}.
    REQUIRE(hits.size() == 9);
    for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i] == Case1Hit{46 + i, 0});
}

TEST_CASE("updates: nothing flagged leaves the dataset unchanged") {
    std::mt19937_64 rng(3);
    const Dataset d = oracle::random_dataset(rng, 50);
    const UpdateResult r = apply_updates(d, pass_by(3), {}, {}, params(3, 1));
    CHECK(r.dataset == d);
    CHECK(r.log.empty());
}

TEST_CASE("updates: a Case 1 window adds its horizon-extended ticks as Interfere") {
    const Trajectory t = pass_by(0.91);
    const auto hits = case1_violation(t, 1.0);
    const UpdateResult r = apply_updates(Dataset{}, t, hits, {}, params(2.0, 1.0));
    // Ticks 26..54: 20 ticks of horizon before the first hit, through the last.
    REQUIRE(r.dataset.size() == 29);
    CHECK(r.dataset.size() <= 30);
    for (std::size_t i = 0; i < r.log.size(); ++i) {
        CHECK(r.log[i].source == UpdateSource::Case1);
        CHECK(r.log[i].tick == 26 + i);
        CHECK(r.dataset[i].label == Label::Interfere);
        CHECK(r.dataset[i].attributes[kDx] == doctest::Approx(t.humans[0][26 + i].x));
        CHECK(r.dataset[i].attributes[kDist] == doctest::Approx(std::hypot(t.humans[0][26 + i].x, 0.91)));
    }
}

TEST_CASE("updates: applying the same evidence twice adds nothing") {
    const Trajectory t = pass_by(0.5);
    const auto hits = case1_violation(t, 1.0);
    const std::vector<Case2Observation> obs{{10, 0, {}}, {70, 0, {}}};
    const UpdateResult once = apply_updates(Dataset{}, t, hits, obs, params(3.0, 1.0));
    const UpdateResult twice = apply_updates(once.dataset, t, hits, obs, params(3.0, 1.0));
    CHECK(twice.dataset == once.dataset);
    CHECK(twice.log.empty());
    CHECK(once.dataset.size() <= t.ticks() * t.humans.size() + obs.size());
}

TEST_CASE("updates: Case 2 observations follow the future-distance rule") {
    const Trajectory t = pass_by(0.5);
    Case2Observation early{20, 0, {}}, late{70, 0, {}}, far{0, 0, {}};
    early.attributes[kDx] = 1; // distinct keys so nothing is deduplicated
    late.attributes[kDx] = 2;
    far.attributes[kDx] = 3;
    const UpdateResult r = apply_updates(Dataset{}, t, {}, {early, late, far}, params(3.0, 1.0));
    REQUIRE(r.dataset.size() == 3);
    CHECK(r.dataset[0].label == Label::Interfere);    // reaches x = 0 at t = 5, within 3 s of t = 2
    CHECK(r.dataset[1].label == Label::NotInterfere); // walking away
    CHECK(r.dataset[2].label == Label::NotInterfere); // closest approach 5 s away
    for (const auto& e : r.log) CHECK(e.source == UpdateSource::Case2);
}

TEST_CASE("3-D hull of a cube with interior points") {
    Dataset d;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int m = 0; m < 8; ++m) {
        AttributeVector v;
        v[0] = m & 1;
        v[1] = (m >> 1) & 1;
        v[2] = (m >> 2) & 1;
        d.append({v, Label::Interfere});
    }
    for (int i = 0; i < 200; ++i) {
        AttributeVector v;
        v[0] = u(rng);
        v[1] = u(rng);
        v[2] = u(rng);
        d.append({v, Label::NotInterfere});
    }
    const Hull3 h = hull3(d, {0, 1, 2});
    CHECK(h.vertices.size() == 8);
    CHECK(h.faces.size() == 12);
    for (const auto& f : h.faces) {
        const auto& a = h.vertices[f[0]];
        const auto& b = h.vertices[f[1]];
        const auto& c = h.vertices[f[2]];
        const std::array<double, 3> e1{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
        const std::array<double, 3> e2{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
        const std::array<double, 3> n{e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                                      e1[0] * e2[1] - e1[1] * e2[0]};
        int above = 0, below = 0;
        for (const auto& s : d) {
            const double side = n[0] * (s.attributes[0] - a[0]) + n[1] * (s.attributes[1] - a[1]) +
                                n[2] * (s.attributes[2] - a[2]);
            above += side > 1e-9;
            below += side < -1e-9;
        }
        CHECK((above == 0 || below == 0));
    }
}

TEST_CASE("3-D hull of degenerate inputs") {
    Dataset d;
    for (int i = 0; i < 5; ++i) {
        AttributeVector v;
        v[0] = i;
        d.append({v, Label::Interfere});
    }
    CHECK(hull3(d, {0, 1, 2}).faces.empty());
    CHECK(hull3(Dataset{}, {0, 1, 2}).vertices.empty());
}

} // TEST_SUITE
