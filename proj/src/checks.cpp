#include "ipinn/checks.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "ipinn/autodiff.hpp"
#include "ipinn/oracle.hpp"

namespace ipinn::checks {

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Random smooth expression over x and t. Divisions, powers and exponentials
// are shaped so the graph stays finite and well conditioned on the box.
class RandomGraph {
 public:
  explicit RandomGraph(std::uint64_t seed) : rng_(seed) {}

  ad::Expr build(ad::Graph& g, ad::Expr x, ad::Expr t, int depth) {
    std::uniform_int_distribution<int> leaf(0, 2);
    if (depth == 0) {
      switch (leaf(rng_)) {
        case 0: return x;
        case 1: return t;
        default: return g.constant(coef());
      }
    }
    std::uniform_int_distribution<int> op(0, 10);
    const ad::Expr a = build(g, x, t, depth - 1);
    switch (op(rng_)) {
      case 0: return a + build(g, x, t, depth - 1);
      case 1: return a - build(g, x, t, depth - 1);
      case 2: return a * build(g, x, t, depth - 1);
      case 3: return a / (1.5 + ad::square(build(g, x, t, depth - 1)));
      case 4: return ad::tanh(coef() * a);
      case 5: return ad::sigmoid(a);
      case 6: return ad::sin(a);
      case 7: return ad::cos(a);
      case 8: return ad::exp(ad::tanh(a));
      case 9: {
        static constexpr double exponents[] = {2.0, 3.0, 0.5, 1.5, -1.0};
        std::uniform_int_distribution<int> k(0, 4);
        return ad::pow(1.2 + ad::square(a), exponents[k(rng_)]);
      }
      default: return coef() * a + build(g, x, t, depth - 1);
    }
  }

  double coef() { return std::uniform_real_distribution<double>(-1.5, 1.5)(rng_); }
  double in(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int depth() { return std::uniform_int_distribution<int>(2, 5)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

std::vector<CheckResult> autodiff_suite(const AutodiffOptions& options) {
  const auto t0 = Clock::now();
  CheckResult first{.suite = "autodiff first derivatives", .threshold = 1e-6};
  CheckResult second{.suite = "autodiff second derivatives", .threshold = 1e-5};
  const double bug = options.inject_gradient_bug ? 1.0 + 1e-3 : 1.0;
  RandomGraph gen(options.seed);

  int draws = 0;
  int rejected = 0;
  while (first.cases < 2 * options.graphs && draws < 20 * options.graphs) {
    const int k = draws++;
    ad::Graph g;
    const double x0 = gen.in(-2.0, 2.0);
    const double t0v = gen.in(-2.0, 2.0);
    ad::Expr x = g.variable("x", x0);
    ad::Expr t = g.variable("t", t0v);
    const int depth = gen.depth();
    const std::uint64_t graph_seed = static_cast<std::uint64_t>(gen.coef() * 1e9) ^ (k * 7919u);
    RandomGraph body(graph_seed);
    ad::Expr root = body.build(g, x, t, depth);
    const std::vector<ad::Jet> jets = ad::input_jet(g, std::span<const ad::Expr>(&root, 1), x, t);

    auto f = [&](double xv, double tv) {
      g.set(x, xv);
      g.set(t, tv);
      return g.evaluate(root);
    };
    auto fx = [&](double xv, double tv) {
      g.set(x, xv);
      g.set(t, tv);
      return ad::value_of(g, jets[0].dx);
    };
    const auto dx = [&](double h) { return (f(x0 + h, t0v) - f(x0 - h, t0v)) / (2 * h); };
    const auto dt = [&](double h) { return (f(x0, t0v + h) - f(x0, t0v - h)) / (2 * h); };
    const auto dxx = [&](double h) {
      return (f(x0 + h, t0v) - 2 * f(x0, t0v) + f(x0 - h, t0v)) / (h * h);
    };
    const auto dxt = [&](double h) { return (fx(x0, t0v + h) - fx(x0, t0v - h)) / (2 * h); };
    // Richardson-extrapolated central differences (h and h/2), fourth order.
    const auto richardson = [](auto&& d, double h) { return (4 * d(h / 2) - d(h)) / 3; };

    // The finite-difference oracle has to be resolved before it can judge:
    // graphs whose estimates move by more than a tenth of the tolerance
    // between step sizes are redrawn. Only differences enter this filter.
    const double h1 = 1e-5;
    const double h2 = 1e-3;
    const double fdx = dx(h1), fdt = dt(h1);
    const double fdxx = richardson(dxx, h2), fdxt = richardson(dxt, h2);
    const bool resolved = relative_error(fdx, dx(h1 / 4)) < 0.1 * first.threshold &&
                          relative_error(fdt, dt(h1 / 4)) < 0.1 * first.threshold &&
                          relative_error(fdxx, richardson(dxx, h2 / 4)) < 0.1 * second.threshold &&
                          relative_error(fdxt, richardson(dxt, h2 / 4)) < 0.1 * second.threshold;
    if (!resolved) {
      ++rejected;
      continue;
    }

    g.set(x, x0);
    g.set(t, t0v);
    g.evaluate(root);
    const ad::Expr wrt[] = {x, t};
    const ad::GradientMap grad = g.gradient(root, wrt);
    first.max_error = std::max({first.max_error, relative_error(grad.at("x") * bug, fdx),
                                relative_error(grad.at("t") * bug, fdt)});
    first.cases += 2;

    g.set(x, x0);
    g.set(t, t0v);
    const double axx = ad::value_of(g, jets[0].dxx) * bug;
    double axt = 0.0;
    if (jets[0].dx.valid()) {
      g.set(x, x0);
      g.set(t, t0v);
      g.evaluate(jets[0].dx);
      axt = g.gradient(jets[0].dx, wrt).at("t") * bug;
    }
    second.max_error =
        std::max({second.max_error, relative_error(axx, fdxx), relative_error(axt, fdxt)});
    second.cases += 2;
  }
  first.rejected = second.rejected = rejected;
  first.pass = first.cases == 2 * options.graphs && first.max_error < first.threshold;
  second.pass = second.cases == 2 * options.graphs && second.max_error < second.threshold;
  first.seconds = second.seconds = since(t0);
  return {first, second};
}

CheckResult fem_convergence() {
  const auto t0 = Clock::now();
  constexpr double pi = std::numbers::pi;
  auto error = [&](int elements) {
    const oracle::FemMesh m = oracle::FemMesh::uniform(2.0, elements);
    const auto one = [](double) { return 1.0; };
    const auto n = [](double x) { return (pi / 4) * (pi / 4) * std::sin(pi * x / 4); };
    const auto u = oracle::fem_solve_bar(one, one, n, (pi / 4) * std::cos(pi / 2), m);
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      e = std::max(e, std::abs(u[i] - std::sin(pi * m.nodes[i] / 4)));
    }
    return e;
  };
  CheckResult r{.suite = "fem convergence ratio 100/200", .cases = 2, .threshold = 4.8};
  r.floor = 3.2;
  r.max_error = error(100) / error(200);
  r.pass = r.max_error >= 3.2 && r.max_error <= 4.8;
  r.seconds = since(t0);
  return r;
}

}  // namespace ipinn::checks
