#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dtmon {

inline constexpr std::size_t kNumAttributes = 8;

// Column order of the joint human-robot attribute vector.
enum Attr : std::size_t {
    kDx = 0,     // human.x - robot.x [m]
    kDy = 1,     // human.y - robot.y [m]
    kTheta = 2,  // relative heading [deg], (-180, 180]
    kDist = 3,   // Euclidean distance [m]
    kDprime = 4, // distance rate [m/s]
    kVh = 5,     // human speed [m/s]
    kVr = 6,     // robot speed [m/s]
    kLane = 7,   // discretized robot y [m]
};

// Attributes the robot cannot change by itself.
inline constexpr std::size_t kNumHumanAttributes = 6;

std::string_view attribute_name(std::size_t index);

class InvalidInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t row, const std::string& what);
    std::size_t row() const { return row_; }

  private:
    std::size_t row_;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

double norm(Vec2 v);

struct AgentState {
    double x = 0.0;       // [m]
    double y = 0.0;       // [m]
    double heading = 0.0; // [rad], (-pi, pi]
    double speed = 0.0;   // [m/s], >= 0

    Vec2 position() const { return {x, y}; }
    friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Wraps an angle in radians into (-pi, pi].
double wrap_radians(double angle);
/// Wraps an angle in degrees into (-180, 180].
double wrap_degrees(double angle);

struct AttributeVector {
    std::array<double, kNumAttributes> values{};

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    friend bool operator==(const AttributeVector&, const AttributeVector&) = default;
};

/// Checks the structural invariants of an attribute vector: finite fields,
/// d >= 0, theta in (-180, 180], and d matching hypot(d_x, d_y) within
/// `distance_tol` (relative, floored at 1 m). When `lanes` is non-empty the
/// lane must be one of them.
bool well_formed(const AttributeVector& a, double distance_tol = 1e-9,
                 std::span<const double> lanes = {});

/// Controllable robot action: target speed and lane.
struct ControlAction {
    double v_r = 0.0;  // [m/s]
    double lane = 0.0; // [m]
    friend bool operator==(const ControlAction&, const ControlAction&) = default;
};

enum class Label : int { NotInterfere = 0, Interfere = 1 };

inline Label opposite(Label l) {
    return l == Label::Interfere ? Label::NotInterfere : Label::Interfere;
}
std::string_view label_name(Label l);

struct LabeledSample {
    AttributeVector attributes;
    Label label = Label::NotInterfere;

    friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct AttributeBounds {
    std::array<double, kNumAttributes> min{};
    std::array<double, kNumAttributes> max{};
};

// Ordered sample collection. The per-dimension extrema are kept in sync with
// every append so range queries never need a rescan.
class Dataset {
  public:
    Dataset() = default;
    explicit Dataset(std::vector<LabeledSample> samples);

    void append(const LabeledSample& s);
    void reserve(std::size_t n) { samples_.reserve(n); }

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
    const std::vector<LabeledSample>& samples() const { return samples_; }
    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

    /// Per-dimension extrema; nullopt for an empty dataset.
    const std::optional<AttributeBounds>& bounds() const { return bounds_; }

    std::size_t count(Label l) const;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.samples_ == b.samples_;
    }

  private:
    std::vector<LabeledSample> samples_;
    std::optional<AttributeBounds> bounds_;
};

/// Nearest lane to `y`; ties go to the smaller lane value.
double lane_of(double y, std::span<const double> lanes);

AttributeVector compute_attributes(const AgentState& robot, const AgentState& human,
                                   std::optional<double> prev_d, double dt,
                                   std::span<const double> lanes);

// CSV: header `dx,dy,theta,d,dprime,vh,vr,lane,label`, theta in degrees,
// label 1 = interfere, 0 = not interfere.
inline constexpr std::string_view kCsvHeader = "dx,dy,theta,d,dprime,vh,vr,lane,label";

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset parse_dataset(std::string_view text);
std::string format_dataset(const Dataset& dataset);

} // namespace dtmon
