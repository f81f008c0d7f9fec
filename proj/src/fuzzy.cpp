#include "ipinn/fuzzy.hpp"

#include <atomic>
#include <random>
#include <sstream>
#include <thread>

namespace ipinn {

void validate_schedule(const std::vector<double>& levels) {
  if (levels.empty()) throw ConfigError("alpha schedule is empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] >= 0.0 && levels[i] <= 1.0)) {
      throw ConfigError("alpha level " + std::to_string(levels[i]) + " outside [0, 1]");
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw ConfigError("alpha schedule must be strictly increasing");
    }
  }
}

std::uint64_t cut_seed(std::uint64_t base, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

bool FuzzySolution::complete() const {
  for (const CutResult& c : cuts) {
    if (!c.bundle) return false;
  }
  return true;
}

std::vector<std::array<double, 3>> FuzzySolution::intervals(Eigen::Index point, int component) const {
  std::vector<std::array<double, 3>> out;
  for (const CutResult& c : cuts) {
    if (!c.bundle) continue;
    const SolutionBundle& b = *c.bundle;
    if (point < 0 || point >= b.u.cols() || component < 0 || 2 * component + 1 >= b.u.rows()) {
      throw ContractError("point or component out of range");
    }
    out.push_back({c.alpha, b.u(2 * component, point), b.u(2 * component + 1, point)});
  }
  return out;
}

FuzzySolution run_fpinn(const FuzzyProblem& problem, const std::vector<double>& schedule,
                        const TrainingConfig& config, int jobs) {
  validate_schedule(schedule);
  FuzzySolution sol;
  sol.problem = problem.base.name;
  sol.cuts.resize(schedule.size());
  std::vector<ProblemDefinition> cuts;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    sol.cuts[i].alpha = schedule[i];
    sol.cuts[i].seed = cut_seed(config.seed, i);
    cuts.push_back(problem.at(schedule[i]));
    config.validate(cuts.back());
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cuts.size(); i = next++) {
      CutResult& r = sol.cuts[i];
      TrainingConfig c = config;
      c.seed = r.seed;
      try {
        r.bundle = train(cuts[i], c);
      } catch (const TrainingDiverged& e) {
        r.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cuts.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  return sol;
}

double Membership::operator()(double y) const {
  const std::size_t m = alpha.size();
  if (y < lower.front() || y > upper.front()) return 0.0;
  // Highest cut containing y, then interpolate toward the next one.
  for (std::size_t i = m; i-- > 0;) {
    if (y >= lower[i] && y <= upper[i]) {
      if (i + 1 == m) return alpha[i];
      const double a = alpha[i];
      const double b = alpha[i + 1];
      if (y < lower[i + 1]) {
        const double span = lower[i + 1] - lower[i];
        return span > 0.0 ? a + (b - a) * (y - lower[i]) / span : b;
      }
      if (y > upper[i + 1]) {
        const double span = upper[i] - upper[i + 1];
        return span > 0.0 ? a + (b - a) * (upper[i] - y) / span : b;
      }
      return b;
    }
  }
  return 0.0;
}

Membership assemble_membership(const std::vector<std::array<double, 3>>& intervals,
                               double tolerance) {
  if (intervals.size() < 2) throw ContractError("membership assembly needs at least two cuts");
  Membership m;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& [a, lo, hi] = intervals[i];
    if (i > 0 && !(a > m.alpha.back())) throw ContractError("cut levels must be strictly increasing");
    m.alpha.push_back(a);
    m.lower.push_back(lo);
    m.upper.push_back(hi);
    if (i == 0) continue;
    const double lo_prev = m.lower[i - 1];
    const double hi_prev = m.upper[i - 1];
    if (lo < lo_prev - tolerance || hi > hi_prev + tolerance || lo > hi + tolerance) {
      std::ostringstream os;
      os << "cut alpha=" << a << " [" << lo << ", " << hi << "] is not nested in alpha="
         << m.alpha[i - 1] << " [" << lo_prev << ", " << hi_prev << "]";
      m.warnings.push_back(os.str());
      m.nested = false;
    }
  }
  return m;
}

}  // namespace ipinn
