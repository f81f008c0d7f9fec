#include "ipinn/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ipinn/error.hpp"

namespace ipinn {

Interval Interval::make(double lower, double upper) {
  if (!(lower <= upper)) {
    std::ostringstream os;
    os << "interval upper bound " << upper << " is below lower bound " << lower;
    throw InvalidBoundsError(os.str());
  }
  return Interval{lower, upper};
}

std::vector<double> linspace(Interval range, int count) {
  if (count < 1) {
    throw ContractError("linspace needs at least one point");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = range.lower;
    return out;
  }
  const double span = range.upper - range.lower;
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = range.lower + span * static_cast<double>(i) / (count - 1);
  }
  out.back() = range.upper;
  return out;
}

// ---------------------------------------------------------------------------

IntervalField IntervalField::checked(FieldFunction lower, FieldFunction upper, Interval space,
                                     std::optional<Interval> time, int samples) {
  IntervalField field(std::move(lower), std::move(upper));
  field.validate(space, time, samples);
  return field;
}

Interval IntervalField::at(double x, double t) const {
  return Interval::make(lower_(x, t), upper_(x, t));
}

void IntervalField::validate(Interval space, std::optional<Interval> time, int samples) const {
  const std::vector<double> xs = linspace(space, samples);
  const std::vector<double> ts = time ? linspace(*time, samples) : std::vector<double>{0.0};
  Eigen::ArrayXd x(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = xs[i];
  }
  for (double t : ts) {
    const Eigen::ArrayXd tv = Eigen::ArrayXd::Constant(x.size(), t);
    const Eigen::ArrayXd lo = lower_.jet(x, tv).value;
    const Eigen::ArrayXd hi = upper_.jet(x, tv).value;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!(lo(i) <= hi(i))) {
        std::ostringstream os;
        os << "interval field upper bound '" << upper_.expression() << "' = " << hi(i)
           << " is below lower bound '" << lower_.expression() << "' = " << lo(i) << " at x=" << x(i)
           << ", t=" << t;
        throw InvalidBoundsError(os.str());
      }
    }
  }
}

// ---------------------------------------------------------------------------

FuzzyNumber FuzzyNumber::triangular(double left, double peak, double right) {
  if (!(left <= peak && peak <= right)) {
    throw ContractError("triangular fuzzy number requires left <= peak <= right");
  }
  return FuzzyNumber(MembershipKind::Triangular, {left, peak, right, 0.0}, 3);
}

FuzzyNumber FuzzyNumber::trapezoidal(double left, double plateau_left, double plateau_right,
                                     double right) {
  if (!(left <= plateau_left && plateau_left <= plateau_right && plateau_right <= right)) {
    throw ContractError("trapezoidal fuzzy number requires ordered parameters");
  }
  return FuzzyNumber(MembershipKind::Trapezoidal, {left, plateau_left, plateau_right, right}, 4);
}

FuzzyNumber FuzzyNumber::gaussian(double mean, double width, double truncation) {
  if (!(width > 0.0) || !(truncation > 0.0)) {
    throw ContractError("gaussian fuzzy number requires positive width and truncation");
  }
  return FuzzyNumber(MembershipKind::Gaussian, {mean, width, truncation, 0.0}, 3);
}

std::span<const double> FuzzyNumber::parameters() const {
  return std::span<const double>(params_.data(), static_cast<std::size_t>(count_));
}

Interval FuzzyNumber::support() const { return alpha_cut(*this, 0.0); }

double FuzzyNumber::peak() const {
  switch (kind_) {
    case MembershipKind::Triangular: return params_[1];
    case MembershipKind::Trapezoidal: return 0.5 * (params_[1] + params_[2]);
    case MembershipKind::Gaussian: return params_[0];
  }
  return params_[0];
}

double membership(const FuzzyNumber& f, double x) {
  const auto p = f.parameters();
  // Rising edge a..b, falling edge c..d, plateau b..c.
  auto trapezoid = [x](double a, double b, double c, double d) {
    if (x < a || x > d) return 0.0;
    if (x >= b && x <= c) return 1.0;
    if (x < b) return (x - a) / (b - a);
    return (d - x) / (d - c);
  };
  switch (f.kind()) {
    case MembershipKind::Triangular: return trapezoid(p[0], p[1], p[1], p[2]);
    case MembershipKind::Trapezoidal: return trapezoid(p[0], p[1], p[2], p[3]);
    case MembershipKind::Gaussian: {
      const double z = (x - p[0]) / p[1];
      if (std::abs(z) > p[2]) return 0.0;
      return std::exp(-0.5 * z * z);
    }
  }
  return 0.0;
}

Interval alpha_cut(const FuzzyNumber& f, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractError("alpha must lie in [0, 1]");
  }
  const auto p = f.parameters();
  switch (f.kind()) {
    case MembershipKind::Triangular:
      return Interval::make(p[0] + alpha * (p[1] - p[0]), p[2] - alpha * (p[2] - p[1]));
    case MembershipKind::Trapezoidal:
      return Interval::make(p[0] + alpha * (p[1] - p[0]), p[3] - alpha * (p[3] - p[2]));
    case MembershipKind::Gaussian: {
      double half = p[2] * p[1];
      if (alpha > 0.0) {
        half = std::min(half, p[1] * std::sqrt(-2.0 * std::log(alpha)));
      }
      return Interval::make(p[0] - half, p[0] + half);
    }
  }
  throw Error("alpha_cut: unknown membership kind");
}

// ---------------------------------------------------------------------------

FuzzyField FuzzyField::uniform(const FuzzyNumber& number) {
  return FuzzyField([number](double alpha) {
    const Interval cut = alpha_cut(number, alpha);
    return IntervalField(FieldFunction(cut.lower), FieldFunction(cut.upper));
  });
}

FuzzyField FuzzyField::tabulated(std::vector<std::pair<double, IntervalField>> cuts) {
  if (cuts.empty()) {
    throw ContractError("tabulated fuzzy field needs at least one cut");
  }
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    if (!(cuts[i - 1].first < cuts[i].first)) {
      throw ContractError("tabulated fuzzy field levels must be strictly increasing");
    }
  }
  return FuzzyField([cuts = std::move(cuts)](double alpha) -> IntervalField {
    if (alpha <= cuts.front().first) return cuts.front().second;
    if (alpha >= cuts.back().first) return cuts.back().second;
    std::size_t hi = 1;
    while (cuts[hi].first < alpha) ++hi;
    const auto& [a0, f0] = cuts[hi - 1];
    const auto& [a1, f1] = cuts[hi];
    if (alpha == a1) return f1;
    const double w = (alpha - a0) / (a1 - a0);
    auto blend = [w](const FieldFunction& p, const FieldFunction& q) {
      std::ostringstream os;
      os.precision(17);
      os << "(" << (1.0 - w) << ")*(" << p.expression() << ")+(" << w << ")*(" << q.expression()
         << ")";
      return FieldFunction(os.str());
    };
    return IntervalField(blend(f0.lower(), f1.lower()), blend(f0.upper(), f1.upper()));
  });
}

IntervalField FuzzyField::cut(double alpha) const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractError("alpha must lie in [0, 1]");
  }
  return cut_(alpha);
}

bool FuzzyField::nested(std::span<const double> levels, Interval space,
                        std::optional<Interval> time, int samples) const {
  const std::vector<double> xs = linspace(space, samples);
  const std::vector<double> ts = time ? linspace(*time, samples) : std::vector<double>{0.0};
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const IntervalField outer = cut(levels[i - 1]);
    const IntervalField inner = cut(levels[i]);
    for (double t : ts) {
      for (double x : xs) {
        const Interval o{outer.lower()(x, t), outer.upper()(x, t)};
        const Interval n{inner.lower()(x, t), inner.upper()(x, t)};
        if (!o.contains(n, 1e-12)) {
          return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

std::vector<AlphaLevelResult> alpha_level_optimize(const ScalarObjective& f,
                                                   std::span<const FuzzyNumber> inputs,
                                                   std::span<const double> levels, int grid) {
  if (grid < 2) {
    throw ContractError("alpha_level_optimize needs at least 2 grid points per input");
  }
  if (inputs.empty()) {
    throw ContractError("alpha_level_optimize needs at least one fuzzy input");
  }
  std::vector<AlphaLevelResult> results;
  results.reserve(levels.size());
  const std::size_t dims = inputs.size();
  for (double alpha : levels) {
    std::vector<std::vector<double>> axes;
    axes.reserve(dims);
    for (const FuzzyNumber& in : inputs) {
      axes.push_back(linspace(alpha_cut(in, alpha), grid));
    }
    std::vector<std::size_t> index(dims, 0);
    std::vector<double> point(dims);
    AlphaLevelResult r;
    r.alpha = alpha;
    bool first = true;
    for (;;) {
      for (std::size_t d = 0; d < dims; ++d) {
        point[d] = axes[d][index[d]];
      }
      const double v = f(point);
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "objective is non-finite at (";
        for (std::size_t d = 0; d < dims; ++d) {
          os << (d ? ", " : "") << point[d];
        }
        os << ") for alpha=" << alpha;
        throw NonFiniteError(os.str());
      }
      if (first || v < r.minimum.value) {
        r.minimum = Extremum{v, point};
      }
      if (first || v > r.maximum.value) {
        r.maximum = Extremum{v, point};
      }
      first = false;
      // Odometer increment, first input fastest.
      std::size_t d = 0;
      for (; d < dims; ++d) {
        if (++index[d] < axes[d].size()) break;
        index[d] = 0;
      }
      if (d == dims) break;
    }
    r.output = Interval{r.minimum.value, r.maximum.value};
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace ipinn
