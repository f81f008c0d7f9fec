#include "ipinn/oracle.hpp"

#include <cmath>
#include <sstream>

#include "ipinn/error.hpp"

namespace ipinn::oracle {

FemMesh FemMesh::uniform(double length, int elements) {
  if (elements < 1 || !(length > 0.0)) {
    throw ContractError("FEM mesh needs at least one element on a positive length");
  }
  FemMesh m;
  m.nodes = linspace({0.0, length}, elements + 1);
  return m;
}

void FemMesh::validate() const {
  if (nodes.size() < 2 || nodes.front() != 0.0) {
    throw ContractError("FEM mesh must start at 0 and have at least one element");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw ContractError("FEM mesh nodes must be strictly increasing");
  }
}

namespace {

// Thomas algorithm for a symmetric tridiagonal system.
std::vector<double> solve_tridiagonal(std::vector<double> diag, const std::vector<double>& off,
                                      std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = off[i - 1] / diag[i - 1];
    diag[i] -= w * off[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
  }
  return x;
}

}  // namespace

std::vector<double> fem_solve_bar(const Function1& E, const Function1& A, const Function1& load,
                                  double end_load, const FemMesh& mesh, Quadrature rule) {
  mesh.validate();
  const std::size_t ne = mesh.nodes.size() - 1;
  // Unknowns are nodes 1..ne (u(0) = 0 eliminated).
  std::vector<double> diag(ne, 0.0), off(ne > 1 ? ne - 1 : 0, 0.0), rhs(ne, 0.0);
  static const double g = 1.0 / std::sqrt(3.0);
  for (std::size_t e = 0; e < ne; ++e) {
    const double a = mesh.nodes[e];
    const double b = mesh.nodes[e + 1];
    const double h = b - a;
    double k = 0.0;   // integral of E A over the element
    double f0 = 0.0;  // load against the left shape function
    double f1 = 0.0;
    auto sample = [&](double xi, double w) {  // xi in [-1, 1], weight on [-1, 1]
      const double x = 0.5 * (a + b) + 0.5 * h * xi;
      const double ea = E(x) * A(x);
      if (!(ea > 0.0)) {
        std::ostringstream os;
        os << "singular bar stiffness: E*A = " << ea << " at x=" << x;
        throw ContractError(os.str());
      }
      const double n = load(x);
      k += 0.5 * h * w * ea;
      f0 += 0.5 * h * w * n * 0.5 * (1.0 - xi);
      f1 += 0.5 * h * w * n * 0.5 * (1.0 + xi);
    };
    if (rule == Quadrature::Midpoint) {
      sample(0.0, 2.0);
    } else {
      sample(-g, 1.0);
      sample(g, 1.0);
    }
    const double s = k / (h * h);
    // Global node e maps to unknown e-1.
    if (e > 0) {
      diag[e - 1] += s;
      off[e - 1] -= s;
      rhs[e - 1] += f0;
    }
    diag[e] += s;
    rhs[e] += f1;
  }
  rhs[ne - 1] += end_load;
  std::vector<double> u = solve_tridiagonal(std::move(diag), off, std::move(rhs));
  u.insert(u.begin(), 0.0);
  return u;
}

BarLoad bar_benchmark_load() {
  return BarLoad{[](double x) { return x * std::cos(3.0 * x); }, 0.1};
}

std::vector<FieldPair> endpoint_combinations(const ProblemDefinition& problem) {
  if (problem.field_count() != 2) {
    throw ContractError("endpoint combinations need exactly two interval fields");
  }
  const IntervalField& e = problem.fields[0].bounds;
  const IntervalField& a = problem.fields[1].bounds;
  return {{"E^L-A^L", e.lower(), a.lower()},
          {"E^U-A^L", e.upper(), a.lower()},
          {"E^L-A^U", e.lower(), a.upper()},
          {"E^U-A^U", e.upper(), a.upper()}};
}

Function1 at_time_zero(const FieldFunction& f) {
  return [f](double x) { return f(x, 0.0); };
}

// ---------------------------------------------------------------------------

FdGrid FdGrid::make(int count, double end_time, double u_max_estimate) {
  if (count < 3) throw ContractError("FD grid needs at least 3 nodes");
  const double dx = 2.0 / (count - 1);
  return with_step(count, 0.4 * dx * dx / (0.01 * u_max_estimate), end_time, u_max_estimate);
}

FdGrid FdGrid::with_step(int count, double dt, double end_time, double u_max_estimate) {
  if (count < 3) throw ContractError("FD grid needs at least 3 nodes");
  if (!(dt > 0.0) || !(end_time > 0.0)) throw ContractError("FD step and end time must be positive");
  FdGrid g;
  g.nodes = linspace({-1.0, 1.0}, count);
  g.end_time = end_time;
  g.u_max_estimate = u_max_estimate;
  g.dt = end_time / static_cast<double>(std::ceil(end_time / dt - 1e-9));
  g.check_stability();
  return g;
}

long FdGrid::steps() const { return std::lround(end_time / dt); }

void FdGrid::check_stability() const {
  const double r = 0.01 * u_max_estimate * dt / (dx() * dx());
  if (r > 0.5) {
    std::ostringstream os;
    os << "FD step violates the stability bound: 0.01*u_max*dt/dx^2 = " << r << " > 0.5";
    throw ContractError(os.str());
  }
}

SpaceTimeField from_field(const FieldFunction& f) {
  return [f](const Eigen::ArrayXd& x, double t) {
    return f.jet(x, Eigen::ArrayXd::Constant(x.size(), t)).value;
  };
}

Eigen::ArrayXd FdSolution::at(double t) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  }
  return u.row(static_cast<Eigen::Index>(best)).transpose().array();
}

Eigen::ArrayXd fd_rhs(const Eigen::ArrayXd& u, const Eigen::ArrayXd& k, double dx) {
  const Eigen::Index n = u.size();
  Eigen::ArrayXd r = Eigen::ArrayXd::Zero(n);
  const Eigen::Index m = n - 2;
  const Eigen::ArrayXd uxx = (u.head(m) - 2.0 * u.segment(1, m) + u.tail(m)) / (dx * dx);
  const auto ui = u.segment(1, m);
  const auto ki = k.segment(1, m);
  r.segment(1, m) = 0.01 * ui * uxx - ki * ui.cube() + ki.cube();
  return r;
}

FdSolution fd_solve_nonlinear(const SpaceTimeField& k, const FdGrid& grid) {
  grid.check_stability();
  const auto n = static_cast<Eigen::Index>(grid.nodes.size());
  FdSolution s;
  s.x = Eigen::Map<const Eigen::ArrayXd>(grid.nodes.data(), n);
  const long steps = grid.steps();
  const double dt = grid.dt;
  const double dx = grid.dx();
  s.u.resize(steps + 1, n);
  s.times.resize(static_cast<std::size_t>(steps + 1));

  Eigen::ArrayXd u = 1.0 - s.x.square();
  u(0) = 0.0;
  u(n - 1) = 0.0;
  s.u.row(0) = u.matrix().transpose();
  s.times[0] = 0.0;
  for (long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    const Eigen::ArrayXd k0 = k(s.x, t);
    const Eigen::ArrayXd kh = k(s.x, t + 0.5 * dt);
    const Eigen::ArrayXd k1 = k(s.x, t + dt);
    const Eigen::ArrayXd a = fd_rhs(u, k0, dx);
    const Eigen::ArrayXd b = fd_rhs(u + 0.5 * dt * a, kh, dx);
    const Eigen::ArrayXd c = fd_rhs(u + 0.5 * dt * b, kh, dx);
    const Eigen::ArrayXd d = fd_rhs(u + dt * c, k1, dx);
    u += dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    const double tn = static_cast<double>(i + 1) * dt;
    if (!u.isFinite().all() || u.abs().maxCoeff() > 1e6) {
      std::ostringstream os;
      os << "FD solution blew up at t=" << tn;
      throw NonFiniteError(os.str());
    }
    s.u.row(i + 1) = u.matrix().transpose();
    s.times[static_cast<std::size_t>(i + 1)] = tn;
  }
  return s;
}

// ---------------------------------------------------------------------------

Extrema grid_search_extrema(const Function1& f, Interval range, int resolution) {
  if (resolution < 2) throw ContractError("grid search needs at least 2 points");
  const std::vector<double> xs = linspace(range, resolution);
  Extrema e;
  e.min = e.max = f(xs[0]);
  e.argmin = e.argmax = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double v = f(xs[i]);
    if (v < e.min) {
      e.min = v;
      e.argmin = xs[i];
    }
    if (v > e.max) {
      e.max = v;
      e.argmax = xs[i];
    }
  }
  return e;
}

}  // namespace ipinn::oracle
