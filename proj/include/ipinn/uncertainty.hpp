#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ipinn/expression.hpp"

namespace ipinn {

/// Closed interval [lower, upper] with lower <= upper.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  /// Checked construction; throws InvalidBoundsError when upper < lower.
  static Interval make(double lower, double upper);

  double width() const { return upper - lower; }
  double midpoint() const { return 0.5 * (lower + upper); }
  bool contains(double v) const { return lower <= v && v <= upper; }
  bool contains(const Interval& other, double tol = 0.0) const {
    return lower <= other.lower + tol && other.upper <= upper + tol;
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Equidistant samples of [lower, upper], endpoints included.
std::vector<double> linspace(Interval range, int count);

/// Pointwise bounds P^L(x,t) <= P(x,t) <= P^U(x,t).
class IntervalField {
 public:
  IntervalField(FieldFunction lower, FieldFunction upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {}

  /// Registers a field and checks P^L <= P^U on a `samples`-point grid per
  /// axis of the domain.
  static IntervalField checked(FieldFunction lower, FieldFunction upper, Interval space,
                               std::optional<Interval> time, int samples = 512);

  const FieldFunction& lower() const { return lower_; }
  const FieldFunction& upper() const { return upper_; }
  Interval at(double x, double t = 0.0) const;

  /// Throws InvalidBoundsError naming the first sample where upper < lower.
  void validate(Interval space, std::optional<Interval> time, int samples = 512) const;

 private:
  FieldFunction lower_;
  FieldFunction upper_;
};

enum class MembershipKind { Triangular, Trapezoidal, Gaussian };

/// Convex fuzzy number. Shape parameters by kind:
///   triangular  {left, peak, right}
///   trapezoidal {left, plateau_left, plateau_right, right}
///   gaussian    {mean, width, truncation}; support is mean +/- truncation*width
class FuzzyNumber {
 public:
  static FuzzyNumber triangular(double left, double peak, double right);
  static FuzzyNumber trapezoidal(double left, double plateau_left, double plateau_right,
                                 double right);
  static FuzzyNumber gaussian(double mean, double width, double truncation = 3.0);

  MembershipKind kind() const { return kind_; }
  std::span<const double> parameters() const;
  /// Support closure (the alpha = 0 cut).
  Interval support() const;
  /// A point where the membership is 1.
  double peak() const;

 private:
  FuzzyNumber(MembershipKind kind, std::array<double, 4> params, int count)
      : kind_(kind), params_(params), count_(count) {}

  MembershipKind kind_;
  std::array<double, 4> params_;
  int count_;
};

double membership(const FuzzyNumber& f, double x);

/// {x : mu(x) >= alpha}; alpha = 0 yields the closed support.
Interval alpha_cut(const FuzzyNumber& f, double alpha);

/// Fuzzy field: every alpha-cut is an IntervalField and cuts are nested.
class FuzzyField {
 public:
  using CutFunction = std::function<IntervalField(double alpha)>;

  explicit FuzzyField(CutFunction cut) : cut_(std::move(cut)) {}

  /// Field equal to the same fuzzy number everywhere.
  static FuzzyField uniform(const FuzzyNumber& number);
  /// Tabulated cuts at increasing alpha levels; intermediate levels are
  /// interpolated linearly between neighbouring bound functions.
  static FuzzyField tabulated(std::vector<std::pair<double, IntervalField>> cuts);

  IntervalField cut(double alpha) const;

  /// Samples nested-ness of the cuts at the given levels; returns false on
  /// the first level pair where cut(a2) is not inside cut(a1).
  bool nested(std::span<const double> levels, Interval space, std::optional<Interval> time,
              int samples = 64) const;

 private:
  CutFunction cut_;
};

using ScalarObjective = std::function<double(std::span<const double>)>;

struct Extremum {
  double value = 0.0;
  std::vector<double> point;
};

struct AlphaLevelResult {
  double alpha = 0.0;
  Interval output;
  Extremum minimum;
  Extremum maximum;
};

/// Brute-force min and max of f over the Cartesian grid of the inputs'
/// alpha-cuts, for every level. `grid` points per input (>= 2).
std::vector<AlphaLevelResult> alpha_level_optimize(const ScalarObjective& f,
                                                   std::span<const FuzzyNumber> inputs,
                                                   std::span<const double> levels,
                                                   int grid = 1001);

}  // namespace ipinn
