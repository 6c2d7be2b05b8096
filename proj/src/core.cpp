#include "dtmon/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace dtmon {

namespace {

constexpr std::array<std::string_view, kNumAttributes> kNames = {
    "d_x", "d_y", "theta", "d", "d'", "v_h", "v_r", "lane"};

bool finite(const AgentState& s) {
    return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.heading) &&
           std::isfinite(s.speed);
}

} // namespace

std::string_view attribute_name(std::size_t index) {
    return index < kNumAttributes ? kNames[index] : std::string_view{"?"};
}

std::string_view label_name(Label l) {
    return l == Label::Interfere ? "Interfering" : "Not Interfering";
}

ParseError::ParseError(std::size_t row, const std::string& what)
    : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

double wrap_radians(double angle) {
    double a = std::remainder(angle, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

double wrap_degrees(double angle) {
    double a = std::remainder(angle, 360.0);
    if (a <= -180.0) a += 360.0;
    return a;
}

bool well_formed(const AttributeVector& a, double distance_tol, std::span<const double> lanes) {
    for (double v : a.values)
        if (!std::isfinite(v)) return false;
    if (a[kDist] < 0.0) return false;
    if (a[kTheta] <= -180.0 || a[kTheta] > 180.0) return false;
    if (a[kVh] < 0.0 || a[kVr] < 0.0) return false;
    const double h = std::hypot(a[kDx], a[kDy]);
    if (std::abs(a[kDist] - h) > distance_tol * std::max(1.0, a[kDist])) return false;
    if (!lanes.empty()) {
        const bool on_lane = std::any_of(lanes.begin(), lanes.end(),
                                         [&](double l) { return std::abs(l - a[kLane]) < 1e-9; });
        if (!on_lane) return false;
    }
    return true;
}

Dataset::Dataset(std::vector<LabeledSample> samples) {
    samples_.reserve(samples.size());
    for (const auto& s : samples) append(s);
}

void Dataset::append(const LabeledSample& s) {
    if (!bounds_) {
        bounds_ = AttributeBounds{s.attributes.values, s.attributes.values};
    } else {
        for (std::size_t i = 0; i < kNumAttributes; ++i) {
            bounds_->min[i] = std::min(bounds_->min[i], s.attributes[i]);
            bounds_->max[i] = std::max(bounds_->max[i], s.attributes[i]);
        }
    }
    samples_.push_back(s);
}

std::size_t Dataset::count(Label l) const {
    return static_cast<std::size_t>(std::count_if(
        samples_.begin(), samples_.end(), [l](const LabeledSample& s) { return s.label == l; }));
}

double lane_of(double y, std::span<const double> lanes) {
    if (lanes.empty()) throw InvalidInput("lane set is empty");
    double best = lanes.front();
    double best_gap = std::abs(y - best);
    for (double l : lanes.subspan(1)) {
        const double gap = std::abs(y - l);
        if (gap < best_gap || (gap == best_gap && l < best)) {
            best = l;
            best_gap = gap;
        }
    }
    return best;
}

AttributeVector compute_attributes(const AgentState& robot, const AgentState& human,
                                   std::optional<double> prev_d, double dt,
                                   std::span<const double> lanes) {
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    if (lanes.empty()) throw InvalidInput("lane set is empty");
    if (!finite(robot) || !finite(human)) throw InvalidInput("non-finite agent state");
    if (prev_d && !std::isfinite(*prev_d)) throw InvalidInput("non-finite previous distance");

    AttributeVector a;
    a[kDx] = human.x - robot.x;
    a[kDy] = human.y - robot.y;
    a[kTheta] = wrap_degrees((human.heading - robot.heading) * 180.0 / std::numbers::pi);
    a[kDist] = std::hypot(a[kDx], a[kDy]);
    a[kDprime] = prev_d ? (a[kDist] - *prev_d) / dt : 0.0;
    a[kVh] = human.speed;
    a[kVr] = robot.speed;
    a[kLane] = lane_of(robot.y, lanes);
    return a;
}

// --- CSV -------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t row) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty())
        throw ParseError(row, "non-numeric field '" + std::string(field) + "'");
    if (!std::isfinite(value)) throw ParseError(row, "non-finite value");
    return value;
}

} // namespace

Dataset parse_dataset(std::string_view text) {
    Dataset out;
    std::size_t row = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line == kCsvHeader) continue;
            if (line.starts_with("dx")) throw ParseError(row, "unexpected header");
        }

        std::array<std::string_view, kNumAttributes + 1> fields;
        std::size_t n = 0;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            if (n == fields.size()) throw ParseError(row, "too many columns");
            fields[n++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (n != fields.size())
            throw ParseError(row, "expected 9 columns, got " + std::to_string(n));

        LabeledSample s;
        for (std::size_t i = 0; i < kNumAttributes; ++i) s.attributes[i] = parse_number(fields[i], row);
        const auto lab = trim(fields[kNumAttributes]);
        if (lab == "1")
            s.label = Label::Interfere;
        else if (lab == "0")
            s.label = Label::NotInterfere;
        else
            throw ParseError(row, "unknown label '" + std::string(lab) + "'");
        out.append(s);
    }
    return out;
}

std::string format_dataset(const Dataset& dataset) {
    std::string out(kCsvHeader);
    out += '\n';
    char buf[32];
    for (const auto& s : dataset) {
        for (std::size_t i = 0; i < kNumAttributes; ++i) {
            // %.17g round-trips every double exactly.
            std::snprintf(buf, sizeof buf, "%.17g,", s.attributes[i]);
            out += buf;
        }
        out += s.label == Label::Interfere ? "1\n" : "0\n";
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset '" + path.string() + "'");
    out << format_dataset(dataset);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace dtmon
