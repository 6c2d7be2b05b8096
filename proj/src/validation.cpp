#include "dtmon/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace dtmon {

namespace {

using Key = std::array<long long, kNumAttributes>;

Key rounded_key(const AttributeVector& a) {
    Key k;
    for (std::size_t i = 0; i < kNumAttributes; ++i) k[i] = std::llround(a[i] * 1e6);
    return k;
}

// Labels a tick the way training data is labeled: interfere iff the
// human-robot distance reaches delta_th within the horizon.
Label future_label(const Trajectory& traj, std::size_t tick, std::size_t human, double horizon,
                   double delta_th) {
    const auto steps = static_cast<std::size_t>(std::llround(horizon / traj.tick));
    const std::size_t last = std::min(traj.ticks() - 1, tick + steps);
    for (std::size_t k = tick; k <= last; ++k) {
        const AgentState& r = traj.robot[k];
        const AgentState& h = traj.humans[human][k];
        if (std::hypot(h.x - r.x, h.y - r.y) <= delta_th) return Label::Interfere;
    }
    return Label::NotInterfere;
}

AttributeVector recorded_attributes(const Trajectory& traj, std::size_t tick, std::size_t human,
                                    std::span<const double> lanes) {
    std::optional<double> prev;
    if (tick > 0) {
        const AgentState& r = traj.robot[tick - 1];
        const AgentState& h = traj.humans[human][tick - 1];
        prev = std::hypot(h.x - r.x, h.y - r.y);
    }
    return compute_attributes(traj.robot[tick], traj.humans[human][tick], prev, traj.tick, lanes);
}

} // namespace

HullBounds hull_bounds(const Dataset& local) {
    if (local.empty()) throw InvalidInput("hull bounds of an empty dataset");
    const AttributeBounds& b = *local.bounds();
    return {b.min, b.max};
}

bool case2_out_of_bounds(const AttributeVector& a, const HullBounds& bounds) {
    for (std::size_t i = 0; i < kNumAttributes; ++i)
        if (a[i] < bounds.min[i] || a[i] > bounds.max[i]) return true;
    return false;
}

std::vector<Case1Hit> case1_violation(const Trajectory& traj, double delta_th) {
    std::vector<Case1Hit> hits;
    for (std::size_t k = 0; k < traj.ticks(); ++k) {
        const AgentState& r = traj.robot[k];
        for (std::size_t h = 0; h < traj.humans.size(); ++h) {
            const AgentState& p = traj.humans[h][k];
            if (std::hypot(p.x - r.x, p.y - r.y) < delta_th) hits.push_back({k, h});
        }
    }
    return hits;
}

UpdateResult apply_updates(const Dataset& global, const Trajectory& traj,
                           const std::vector<Case1Hit>& case1,
                           const std::vector<Case2Observation>& case2, const UpdateParams& params) {
    UpdateResult out{global, {}};
    if (case1.empty() && case2.empty()) return out;

    std::set<Key> seen;
    for (const auto& s : global) seen.insert(rounded_key(s.attributes));

    auto add = [&](const LabeledSample& s, UpdateSource src, std::size_t tick, std::size_t human) {
        if (!seen.insert(rounded_key(s.attributes)).second) return;
        out.dataset.append(s);
        out.log.push_back({s, src, params.run_id, tick, human});
    };

    // Group hits into contiguous violation runs per human.
    std::map<std::size_t, std::vector<std::size_t>> ticks_by_human;
    for (const auto& h : case1) ticks_by_human[h.human].push_back(h.tick);
    const auto back = static_cast<std::size_t>(std::llround(params.labeling_horizon / traj.tick));
    for (auto& [human, ticks] : ticks_by_human) {
        std::sort(ticks.begin(), ticks.end());
        ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
        std::size_t i = 0;
        while (i < ticks.size()) {
            std::size_t j = i;
            while (j + 1 < ticks.size() && ticks[j + 1] == ticks[j] + 1) ++j;
            const std::size_t first = ticks[i] >= back ? ticks[i] - back : 0;
            for (std::size_t k = first; k <= ticks[j]; ++k)
                add({recorded_attributes(traj, k, human, params.lanes), Label::Interfere},
                    UpdateSource::Case1, k, human);
            i = j + 1;
        }
    }

    for (const auto& obs : case2)
        add({obs.attributes,
             future_label(traj, obs.tick, obs.human, params.labeling_horizon, params.delta_th)},
            UpdateSource::Case2, obs.tick, obs.human);
    return out;
}

nlohmann::json to_json(const UpdateLogEntry& e) {
    return {{"provenance", e.source == UpdateSource::Case1 ? "case1" : "case2"},
            {"run_id", e.run_id},
            {"tick", e.tick},
            {"human", e.human},
            {"attributes", e.sample.attributes.values},
            {"label", static_cast<int>(e.sample.label)}};
}

// --- 3-D hull for plotting ----------------------------------------------------

namespace {

using P3 = std::array<double, 3>;

P3 sub(const P3& a, const P3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
P3 cross(const P3& a, const P3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const P3& a, const P3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double len(const P3& a) { return std::sqrt(dot(a, a)); }

struct Face {
    std::array<std::size_t, 3> v;
    P3 normal;
    double offset;
};

Face make_face(const std::vector<P3>& pts, std::size_t a, std::size_t b, std::size_t c) {
    const P3 n = cross(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
    const double l = len(n);
    const P3 u = l > 0 ? P3{n[0] / l, n[1] / l, n[2] / l} : P3{0, 0, 0};
    return {{a, b, c}, u, dot(u, pts[a])};
}

} // namespace

// Incremental (beneath-beyond) construction; adequate at plotting sizes.
Hull3 hull3(const Dataset& data, std::array<std::size_t, 3> attributes) {
    std::vector<P3> pts;
    {
        std::set<P3> uniq;
        for (const auto& s : data)
            uniq.insert({s.attributes[attributes[0]], s.attributes[attributes[1]],
                         s.attributes[attributes[2]]});
        pts.assign(uniq.begin(), uniq.end());
    }
    Hull3 out;
    if (pts.size() < 4) {
        out.vertices = pts;
        return out;
    }

    double scale = 0.0;
    for (const auto& p : pts) scale = std::max({scale, std::abs(p[0]), std::abs(p[1]), std::abs(p[2])});
    const double eps = 1e-9 * std::max(1.0, scale);

    // Initial tetrahedron from extreme points.
    std::size_t i0 = 0;
    std::size_t i1 = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (len(sub(pts[i], pts[i0])) > len(sub(pts[i1], pts[i0]))) i1 = i;
    std::size_t i2 = i0;
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = len(cross(sub(pts[i1], pts[i0]), sub(pts[i], pts[i0])));
        if (d > best) { best = d; i2 = i; }
    }
    if (best <= eps) {
        out.vertices = {pts[i0], pts[i1]};
        return out;
    }
    const Face base = make_face(pts, i0, i1, i2);
    std::size_t i3 = i0;
    best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = std::abs(dot(base.normal, pts[i]) - base.offset);
        if (d > best) { best = d; i3 = i; }
    }
    if (best <= eps) {
        out.vertices = {pts[i0], pts[i1], pts[i2]};
        return out;
    }

    std::vector<Face> faces;
    auto add_oriented = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t inside) {
        Face f = make_face(pts, a, b, c);
        if (dot(f.normal, pts[inside]) - f.offset > 0) f = make_face(pts, a, c, b);
        faces.push_back(f);
    };
    add_oriented(i0, i1, i2, i3);
    add_oriented(i0, i1, i3, i2);
    add_oriented(i0, i2, i3, i1);
    add_oriented(i1, i2, i3, i0);

    for (std::size_t p = 0; p < pts.size(); ++p) {
        if (p == i0 || p == i1 || p == i2 || p == i3) continue;
        std::vector<bool> visible(faces.size());
        bool any = false;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            visible[f] = dot(faces[f].normal, pts[p]) - faces[f].offset > eps;
            any = any || visible[f];
        }
        if (!any) continue;
        std::set<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (!visible[f]) continue;
            const auto& v = faces[f].v;
            for (int e = 0; e < 3; ++e) edges.insert({v[e], v[(e + 1) % 3]});
        }
        std::vector<Face> kept;
        for (std::size_t f = 0; f < faces.size(); ++f)
            if (!visible[f]) kept.push_back(faces[f]);
        for (const auto& [a, b] : edges)
            if (!edges.count({b, a})) kept.push_back(make_face(pts, a, b, p));
        faces = std::move(kept);
    }

    std::map<std::size_t, std::size_t> remap;
    for (const auto& f : faces)
        for (std::size_t v : f.v)
            if (!remap.count(v)) {
                remap[v] = out.vertices.size();
                out.vertices.push_back(pts[v]);
            }
    for (const auto& f : faces) out.faces.push_back({remap[f.v[0]], remap[f.v[1]], remap[f.v[2]]});
    return out;
}

nlohmann::json to_json(const Hull3& h, std::array<std::size_t, 3> attributes) {
    nlohmann::json names = nlohmann::json::array();
    for (std::size_t a : attributes) names.push_back(attribute_name(a));
    return {{"attributes", names}, {"vertices", h.vertices}, {"faces", h.faces}};
}

} // namespace dtmon
