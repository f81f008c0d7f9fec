#include "ipinn/training.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ipinn {

TrainingConfig TrainingConfig::defaults_for(const ProblemDefinition& problem) {
  const ProblemDefaults& d = problem.defaults;
  TrainingConfig c;
  c.solution_net = d.solution_net;
  c.field_net = d.field_net;
  c.w_g = d.w_g;
  c.w_mm = d.w_mm;
  c.w_0 = d.w_0;
  c.w_u = d.w_u;
  c.learning_rate = d.learning_rate;
  c.epochs = d.epochs;
  c.space_points = d.space_points;
  c.time_points = d.time_points;
  return c;
}

void TrainingConfig::validate(const ProblemDefinition& problem) const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  for (const auto& [name, w] : {std::pair{"w_g", w_g}, {"w_mm", w_mm}, {"w_0", w_0}, {"w_u", w_u}}) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(std::string(name) + " must be a finite non-negative weight");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
  if (epochs < 0) fail("epochs must be non-negative");
  if (space_points < 1) fail("space_points must be at least 1");
  if (time_points < 1) fail("time_points must be at least 1");
  if (!problem.time && time_points != 1) fail("time_points must be 1 for a problem without time");
  if (log_every < 1) fail("log_every must be at least 1");
  if (snapshot_every < 0) fail("snapshot_every must be non-negative");
  for (const NetworkShape& s : {solution_net, field_net}) {
    if (s.hidden_layers < 1 || s.width < 1) fail("networks need at least one hidden layer of width >= 1");
  }
  if (problem.field_count() < 1) fail("problem '" + problem.name + "' has no interval fields");
}

// ---------------------------------------------------------------------------

CollocationGrids collocation_grids(const ProblemDefinition& problem, const TrainingConfig& config) {
  config.validate(problem);
  CollocationGrids g;
  g.space = linspace(problem.space, config.space_points);
  g.time = problem.time ? linspace(*problem.time, config.time_points) : std::vector<double>{0.0};
  const auto nx = static_cast<Eigen::Index>(g.space.size());
  const auto nt = static_cast<Eigen::Index>(g.time.size());

  g.interior_x.resize(nx * nt);
  g.interior_t.resize(nx * nt);
  for (Eigen::Index j = 0; j < nt; ++j) {
    for (Eigen::Index i = 0; i < nx; ++i) {
      g.interior_x(j * nx + i) = g.space[static_cast<std::size_t>(i)];
      g.interior_t(j * nx + i) = g.time[static_cast<std::size_t>(j)];
    }
  }

  const auto nb = static_cast<Eigen::Index>(problem.boundary.size());
  g.boundary_x.resize(nb * nt);
  g.boundary_t.resize(nb * nt);
  for (Eigen::Index k = 0; k < nb; ++k) {
    for (Eigen::Index j = 0; j < nt; ++j) {
      g.boundary_x(k * nt + j) = problem.boundary[static_cast<std::size_t>(k)].location;
      g.boundary_t(k * nt + j) = g.time[static_cast<std::size_t>(j)];
      g.boundary_condition.push_back(static_cast<int>(k));
    }
  }

  if (!problem.initial.empty()) {
    g.initial_x = Eigen::Map<const Eigen::ArrayXd>(g.space.data(), nx);
    g.initial_t = Eigen::ArrayXd::Constant(nx, g.time.front());
  }
  return g;
}

Eigen::MatrixXd network_inputs(const ProblemDefinition& problem, const Eigen::ArrayXd& x,
                               const Eigen::ArrayXd& t) {
  if (problem.constant_input) return Eigen::MatrixXd::Ones(1, x.size());
  Eigen::MatrixXd in(problem.input_width(), x.size());
  in.row(0) = x.matrix().transpose();
  if (problem.time) in.row(1) = t.matrix().transpose();
  return in;
}

std::vector<nn::LayerSpec> solution_layers(const ProblemDefinition& problem, NetworkShape shape) {
  return nn::mlp(problem.input_width(), shape.hidden_layers, shape.width, 2 * problem.components,
                 nn::Activation::Identity);
}

std::vector<nn::LayerSpec> field_layers(const ProblemDefinition& problem, NetworkShape shape) {
  return nn::mlp(problem.input_width(), shape.hidden_layers, shape.width, 2 * problem.field_count(),
                 nn::Activation::Sigmoid);
}

// ---------------------------------------------------------------------------

namespace {

std::string component_symbol(const ProblemDefinition& problem, int c) {
  return problem.components == 1 ? std::string("u") : "u" + std::to_string(c + 1);
}

Eigen::ArrayXd concat(std::initializer_list<const Eigen::ArrayXd*> parts) {
  Eigen::Index n = 0;
  for (const auto* p : parts) n += p->size();
  Eigen::ArrayXd out(n);
  Eigen::Index at = 0;
  for (const auto* p : parts) {
    out.segment(at, p->size()) = *p;
    at += p->size();
  }
  return out;
}

bool empty(const Eigen::MatrixXd& m) { return m.size() == 0; }

}  // namespace

LossEvaluator::LossEvaluator(const ProblemDefinition& problem, CollocationGrids grids,
                             const TrainingConfig& config)
    : problem_(problem), config_(config), grids_(std::move(grids)), needs_(problem.needs()) {
  config_.validate(problem_);
  x_ = concat({&grids_.interior_x, &grids_.boundary_x, &grids_.initial_x});
  t_ = concat({&grids_.interior_t, &grids_.boundary_t, &grids_.initial_t});
  n_interior_ = grids_.interior_x.size();
  inputs_ = network_inputs(problem_, x_, t_);

  std::vector<IntervalField> fields;
  for (const FieldSpec& f : problem_.fields) fields.push_back(f.bounds);
  bounds_ = nn::evaluate_bounds(fields, x_, t_);

  u_request_ = {needs_.u_x || needs_.u_xx, needs_.u_xx, needs_.u_t};
  p_request_ = {needs_.field_x, false, needs_.field_t};

  const auto n_points = static_cast<double>(n_interior_);
  terms_.push_back({SquaredTerms(problem_, problem_.residual, "residual"), 0, n_interior_,
                    config_.w_g / n_points});

  const auto nt = static_cast<Eigen::Index>(grids_.time.size());
  const auto n_boundary = static_cast<double>(grids_.boundary_x.size());
  Eigen::Index offset = n_interior_;
  for (std::size_t k = 0; k < problem_.boundary.size(); ++k) {
    const BoundaryCondition& bc = problem_.boundary[k];
    std::string lhs = component_symbol(problem_, bc.component);
    if (bc.kind == BoundaryKind::Derivative) lhs += "_x";
    std::ostringstream label;
    label << "boundary condition " << k + 1 << " at x=" << bc.location;
    terms_.push_back({SquaredTerms(problem_, {lhs + " - (" + bc.target + ")"}, label.str()), offset,
                      nt, config_.w_u / n_boundary});
    offset += nt;
  }
  n_boundary_terms_ = problem_.boundary.size();

  const Eigen::Index n_initial = grids_.initial_x.size();
  for (std::size_t k = 0; k < problem_.initial.size(); ++k) {
    const InitialCondition& ic = problem_.initial[k];
    const std::string src = component_symbol(problem_, ic.component) + " - (" + ic.value + ")";
    terms_.push_back({SquaredTerms(problem_, {src}, "initial condition " + std::to_string(k + 1)),
                      offset, n_initial, config_.w_0 / static_cast<double>(n_initial)});
  }

  umm_scale_ = config_.normalize_umm ? 1.0 / n_points : 1.0;
}

void LossEvaluator::fill_inputs(const Term& term, const nn::Jets& u, const nn::Jets& p,
                                Eigen::ArrayXXd& in) const {
  const SymbolLayout& L = term.terms.layout();
  const Eigen::Index n = term.count;
  const Eigen::Index off = term.offset;
  in.resize(2 * n, L.size());
  auto put = [&](int slot, const Eigen::MatrixXd& m, Eigen::Index row_min, const char* what) {
    if (!term.terms.uses(slot)) return;
    if (empty(m)) throw ContractError(std::string("missing ") + what + " jets for the loss terms");
    in.col(slot).head(n) = m.row(row_min).segment(off, n).transpose().array();
    in.col(slot).tail(n) = m.row(row_min + 1).segment(off, n).transpose().array();
  };
  in.col(SymbolLayout::x()).head(n) = x_.segment(off, n);
  in.col(SymbolLayout::x()).tail(n) = x_.segment(off, n);
  in.col(SymbolLayout::t()).head(n) = t_.segment(off, n);
  in.col(SymbolLayout::t()).tail(n) = t_.segment(off, n);
  for (int c = 0; c < L.components(); ++c) {
    put(L.u(c), u.value, 2 * c, "solution");
    put(L.u_x(c), u.dx, 2 * c, "solution d/dx");
    put(L.u_xx(c), u.dxx, 2 * c, "solution d2/dx2");
    put(L.u_t(c), u.dt, 2 * c, "solution d/dt");
  }
  for (int i = 0; i < L.fields(); ++i) {
    put(L.field(i), p.value, 2 * i, "field");
    put(L.field_x(i), p.dx, 2 * i, "field d/dx");
    put(L.field_t(i), p.dt, 2 * i, "field d/dt");
  }
}

void LossEvaluator::scatter(const Term& term, const Eigen::ArrayXXd& adj, nn::Jets& ua,
                            nn::Jets& pa) const {
  const SymbolLayout& L = term.terms.layout();
  const Eigen::Index n = term.count;
  const Eigen::Index off = term.offset;
  auto add = [&](int slot, Eigen::MatrixXd& m, Eigen::Index row_min) {
    if (!term.terms.uses(slot)) return;
    m.row(row_min).segment(off, n) += adj.col(slot).head(n).matrix().transpose();
    m.row(row_min + 1).segment(off, n) += adj.col(slot).tail(n).matrix().transpose();
  };
  for (int c = 0; c < L.components(); ++c) {
    add(L.u(c), ua.value, 2 * c);
    add(L.u_x(c), ua.dx, 2 * c);
    add(L.u_xx(c), ua.dxx, 2 * c);
    add(L.u_t(c), ua.dt, 2 * c);
  }
  for (int i = 0; i < L.fields(); ++i) {
    add(L.field(i), pa.value, 2 * i);
    add(L.field_x(i), pa.dx, 2 * i);
    add(L.field_t(i), pa.dt, 2 * i);
  }
}

LossBreakdown LossEvaluator::assemble(const nn::Jets& u, const nn::Jets& p, nn::Jets* u_adjoint,
                                      nn::Jets* p_adjoint) {
  const Eigen::Index n_all = x_.size();
  if (u.value.rows() != 2 * problem_.components || u.value.cols() != n_all) {
    throw ShapeError("solution jets do not match 2 x components by batch points");
  }
  if (p.value.rows() != 2 * problem_.field_count() || p.value.cols() != n_all) {
    throw ShapeError("field jets do not match 2 x fields by batch points");
  }
  const bool grad = u_adjoint != nullptr || p_adjoint != nullptr;
  nn::Jets ua_local, pa_local;
  nn::Jets& ua = u_adjoint ? *u_adjoint : ua_local;
  nn::Jets& pa = p_adjoint ? *p_adjoint : pa_local;
  if (grad) {
    ua = nn::Jets::zeros_like(u);
    pa = nn::Jets::zeros_like(p);
  }

  LossBreakdown out;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    Term& term = terms_[k];
    if (term.count == 0) continue;
    fill_inputs(term, u, p, scratch_);
    const double sum = term.terms.forward(scratch_).sum();
    const double mean = sum / static_cast<double>(term.count);
    if (k == 0) {
      out.mse_g = mean;
    } else if (k <= n_boundary_terms_) {
      out.mse_u += sum;
    } else {
      out.mse_0 += mean;
    }
    if (grad) {
      const Eigen::ArrayXXd& adj =
          term.terms.backward(Eigen::ArrayXd::Constant(2 * term.count, term.scale));
      scatter(term, adj, ua, pa);
    }
  }
  if (grids_.boundary_x.size() > 0) out.mse_u /= static_cast<double>(grids_.boundary_x.size());

  for (int c = 0; c < problem_.components; ++c) {
    out.u_mm_min += u.value.row(2 * c).head(n_interior_).sum();
    out.u_mm_max += u.value.row(2 * c + 1).head(n_interior_).sum();
    if (grad) {
      ua.value.row(2 * c).head(n_interior_).array() += config_.w_mm * umm_scale_;
      ua.value.row(2 * c + 1).head(n_interior_).array() -= config_.w_mm * umm_scale_;
    }
  }
  out.u_mm_min *= umm_scale_;
  out.u_mm_max *= umm_scale_;

  out.total = config_.w_g * out.mse_g + config_.w_mm * out.u_mm() + config_.w_0 * out.mse_0 +
              config_.w_u * out.mse_u;
  return out;
}

void LossEvaluator::run_networks(const nn::NetworkParams& u, const nn::NetworkParams& p) {
  u_fwd_.run(u, inputs_, problem_.input_layout(), u_request_);
  p_fwd_.run(p, inputs_, problem_.input_layout(), p_request_);
  const nn::Jets& z = p_fwd_.outputs();
  z_.value = nn::clamp_open_unit(z.value);
  z_.dx = z.dx;
  z_.dt = z.dt;
  p_ = nn::scale_fields(z_, bounds_);
  box_violations_ = 0;
  for (Eigen::Index r = 0; r < p_.value.rows(); ++r) {
    const Eigen::Index i = r / 2;
    box_violations_ += ((p_.value.row(r).array() < bounds_.lower.row(i).array()) ||
                        (p_.value.row(r).array() > bounds_.upper.row(i).array()))
                           .count();
  }
}

LossBreakdown LossEvaluator::evaluate(const nn::NetworkParams& u, const nn::NetworkParams& p) {
  run_networks(u, p);
  return assemble(u_fwd_.outputs(), p_);
}

LossBreakdown LossEvaluator::evaluate(const nn::NetworkParams& u, const nn::NetworkParams& p,
                                      Eigen::Ref<Eigen::VectorXd> grad_u,
                                      Eigen::Ref<Eigen::VectorXd> grad_p) {
  if (grad_u.size() != u.size() || grad_p.size() != p.size()) {
    throw ShapeError("gradient buffers do not match the parameter counts");
  }
  run_networks(u, p);
  const LossBreakdown out = assemble(u_fwd_.outputs(), p_, &u_adj_, &p_adj_);
  u_fwd_.backward(u_adj_, grad_u);
  p_fwd_.backward(nn::scale_fields_backward(z_, bounds_, p_adj_), grad_p);
  return out;
}

LossBreakdown loss(const ProblemDefinition& problem, const nn::NetworkParams& u,
                   const nn::NetworkParams& p, const CollocationGrids& grids,
                   const TrainingConfig& config) {
  LossEvaluator ev(problem, grids, config);
  return ev.evaluate(u, p);
}

// ---------------------------------------------------------------------------

void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
               AdamState& state, double lr) {
  if (grad.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("Adam state, gradient and parameters differ in size");
  }
  if (!grad.allFinite()) {
    throw NonFiniteError("gradient is non-finite");
  }
  ++state.step;
  const auto t = static_cast<double>(state.step);
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  params.array() -=
      lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.epsilon);
}

// ---------------------------------------------------------------------------

Evaluation evaluate_networks(const ProblemDefinition& problem, const nn::NetworkParams& u,
                             const nn::NetworkParams& p, const Eigen::ArrayXd& x,
                             const Eigen::ArrayXd& t) {
  const Eigen::MatrixXd in = network_inputs(problem, x, t);
  Evaluation out;
  out.u = nn::JetForward(u, in, {}, {}).outputs().value;
  std::vector<IntervalField> fields;
  for (const FieldSpec& f : problem.fields) fields.push_back(f.bounds);
  nn::Jets z;
  z.value = nn::clamp_open_unit(nn::JetForward(p, in, {}, {}).outputs().value);
  out.fields = nn::scale_fields(z, nn::evaluate_bounds(fields, x, t)).value;
  return out;
}

Eigen::ArrayXd realized_field(const ProblemDefinition& problem, const nn::NetworkParams& p,
                              int index, Branch branch, const Eigen::ArrayXd& x,
                              const Eigen::ArrayXd& t) {
  if (index < 0 || index >= problem.field_count()) {
    throw ContractError("field index " + std::to_string(index) + " out of range");
  }
  const Eigen::MatrixXd in = network_inputs(problem, x, t);
  nn::Jets z;
  z.value = nn::clamp_open_unit(nn::JetForward(p, in, {}, {}).outputs().value.middleRows(2 * index, 2));
  const std::vector<IntervalField> field{problem.fields[static_cast<std::size_t>(index)].bounds};
  const Eigen::MatrixXd v = nn::scale_fields(z, nn::evaluate_bounds(field, x, t)).value;
  return v.row(branch == Branch::Max ? 1 : 0).transpose().array();
}

// ---------------------------------------------------------------------------

std::pair<nn::NetworkParams, nn::NetworkParams> initial_params(const ProblemDefinition& problem,
                                                               const TrainingConfig& config) {
  std::mt19937_64 rng(config.seed);
  const std::uint64_t su = rng();
  const std::uint64_t sp = rng();
  return {nn::init_params(solution_layers(problem, config.solution_net), su),
          nn::init_params(field_layers(problem, config.field_net), sp)};
}

SolutionBundle train(const ProblemDefinition& problem, const TrainingConfig& config,
                     const TrainingHooks& hooks) {
  config.validate(problem);
  auto [u, p] = initial_params(problem, config);
  LossEvaluator ev(problem, collocation_grids(problem, config), config);

  const Eigen::Index nu = u.size();
  const Eigen::Index np = p.size();
  Eigen::VectorXd theta(nu + np);
  Eigen::VectorXd grad(nu + np);
  AdamState adam(nu + np);
  SolutionBundle bundle;
  bundle.problem = problem.name;

  nn::NetworkParams good_u = u;
  nn::NetworkParams good_p = p;
  auto diverged = [&](long epoch, const std::string& why) {
    std::ostringstream os;
    os << "training diverged at epoch " << epoch << ": " << why;
    return TrainingDiverged(os.str(), epoch, good_u, good_p, bundle.history);
  };
  auto log = [&](long epoch, const LossBreakdown& l) {
    const LogEntry e{epoch, l, ev.box_violations()};
    bundle.history.push_back(e);
    bundle.box_violations += e.box_violations;
    if (hooks.on_log) hooks.on_log(e);
  };

  for (long epoch = 0; epoch < config.epochs; ++epoch) {
    grad.setZero();
    LossBreakdown l;
    try {
      l = ev.evaluate(u, p, grad.head(nu), grad.tail(np));
    } catch (const NonFiniteError& e) {
      throw diverged(epoch, e.what());
    }
    if (!std::isfinite(l.total)) throw diverged(epoch, "loss is non-finite");
    if (!grad.allFinite()) throw diverged(epoch, "gradient is non-finite");
    good_u.values() = u.values();
    good_p.values() = p.values();
    if (epoch % config.log_every == 0) log(epoch, l);
    if (config.snapshot_every > 0 && epoch > 0 && epoch % config.snapshot_every == 0 &&
        hooks.on_snapshot) {
      hooks.on_snapshot(epoch, u, p);
    }
    theta.head(nu) = u.values();
    theta.tail(np) = p.values();
    adam_step(theta, grad, adam, config.learning_rate);
    u.values() = theta.head(nu);
    p.values() = theta.tail(np);
  }

  LossBreakdown final_loss;
  try {
    final_loss = ev.evaluate(u, p);
  } catch (const NonFiniteError& e) {
    throw diverged(config.epochs, e.what());
  }
  if (!std::isfinite(final_loss.total)) throw diverged(config.epochs, "loss is non-finite");
  log(config.epochs, final_loss);

  const Eigen::Index n = ev.interior_count();
  bundle.x = ev.points_x().head(n);
  bundle.t = ev.points_t().head(n);
  bundle.u = ev.solution().value.leftCols(n);
  bundle.fields = ev.fields().value.leftCols(n);
  bundle.solution_params = std::move(u);
  bundle.field_params = std::move(p);
  bundle.epochs = config.epochs;
  return bundle;
}

}  // namespace ipinn
