#include "ipinn/neural.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <utility>

#include "ipinn/error.hpp"

namespace ipinn::nn {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw ShapeError("unknown activation '" + std::string(name) + "'");
}

std::vector<LayerSpec> mlp(int inputs, int hidden_layers, int width, int outputs, Activation head) {
  std::vector<LayerSpec> layers;
  int prev = inputs;
  for (int i = 0; i < hidden_layers; ++i) {
    layers.push_back({prev, width, Activation::Tanh});
    prev = width;
  }
  layers.push_back({prev, outputs, head});
  validate(layers);
  return layers;
}

void validate(std::span<const LayerSpec> layers) {
  if (layers.empty()) {
    throw ShapeError("network needs at least one layer");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].inputs < 1 || layers[k].outputs < 1) {
      throw ShapeError("layer " + std::to_string(k) + " has a width below 1");
    }
    if (k > 0 && layers[k].inputs != layers[k - 1].outputs) {
      throw ShapeError("layer " + std::to_string(k) + " expects " +
                       std::to_string(layers[k].inputs) + " inputs but layer " +
                       std::to_string(k - 1) + " produces " + std::to_string(layers[k - 1].outputs));
    }
  }
}

// ---------------------------------------------------------------------------

NetworkParams::NetworkParams(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  validate(layers_);
  std::size_t offset = 0;
  for (const LayerSpec& l : layers_) {
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(l.inputs * l.outputs + l.outputs);
  }
  values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

Eigen::Map<NetworkParams::Matrix> NetworkParams::weights(std::size_t layer) {
  const LayerSpec& l = layers_[layer];
  return {values_.data() + offsets_[layer], l.outputs, l.inputs};
}

Eigen::Map<const NetworkParams::Matrix> NetworkParams::weights(std::size_t layer) const {
  const LayerSpec& l = layers_[layer];
  return {values_.data() + offsets_[layer], l.outputs, l.inputs};
}

Eigen::Map<Eigen::VectorXd> NetworkParams::bias(std::size_t layer) {
  const LayerSpec& l = layers_[layer];
  return {values_.data() + offsets_[layer] + l.inputs * l.outputs, l.outputs};
}

Eigen::Map<const Eigen::VectorXd> NetworkParams::bias(std::size_t layer) const {
  const LayerSpec& l = layers_[layer];
  return {values_.data() + offsets_[layer] + l.inputs * l.outputs, l.outputs};
}

NetworkParams init_params(std::span<const LayerSpec> layers, std::uint64_t seed) {
  NetworkParams params(std::vector<LayerSpec>(layers.begin(), layers.end()));
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const double limit = std::sqrt(6.0 / (layers[k].inputs + layers[k].outputs));
    auto w = params.weights(k);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        // 53 random bits -> [0, 1); independent of the standard library's
        // distribution implementation.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        w(r, c) = limit * (2.0 * u - 1.0);
      }
    }
  }
  return params;
}

// ---------------------------------------------------------------------------

std::vector<ad::Expr> parameter_variables(ad::Graph& graph, const NetworkParams& params,
                                          const std::string& prefix) {
  std::vector<ad::Expr> vars;
  vars.reserve(static_cast<std::size_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    vars.push_back(graph.variable(prefix + std::to_string(i), params.values()(i)));
  }
  return vars;
}

std::vector<ad::Expr> forward_graph(ad::Graph& graph, const NetworkParams& params,
                                    std::span<const ad::Expr> inputs,
                                    std::span<const ad::Expr> parameter_vars) {
  if (static_cast<int>(inputs.size()) != params.input_width()) {
    throw ShapeError("network expects " + std::to_string(params.input_width()) + " inputs, got " +
                     std::to_string(inputs.size()));
  }
  if (!parameter_vars.empty() && static_cast<Eigen::Index>(parameter_vars.size()) != params.size()) {
    throw ShapeError("parameter variable count does not match the network");
  }
  auto param = [&](std::size_t index) -> ad::Expr {
    if (parameter_vars.empty()) {
      return graph.constant(params.values()(static_cast<Eigen::Index>(index)));
    }
    return parameter_vars[index];
  };
  std::vector<ad::Expr> act(inputs.begin(), inputs.end());
  for (std::size_t k = 0; k < params.layers().size(); ++k) {
    const LayerSpec& l = params.layers()[k];
    const std::size_t w0 = params.weight_offset(k);
    const std::size_t b0 = w0 + static_cast<std::size_t>(l.inputs * l.outputs);
    std::vector<ad::Expr> next;
    next.reserve(static_cast<std::size_t>(l.outputs));
    for (int r = 0; r < l.outputs; ++r) {
      ad::Expr z = param(b0 + static_cast<std::size_t>(r));
      for (int c = 0; c < l.inputs; ++c) {
        z = z + param(w0 + static_cast<std::size_t>(r * l.inputs + c)) * act[static_cast<std::size_t>(c)];
      }
      switch (l.activation) {
        case Activation::Tanh: z = ad::tanh(z); break;
        case Activation::Sigmoid: z = ad::sigmoid(z); break;
        case Activation::Identity: break;
      }
      next.push_back(z);
    }
    act = std::move(next);
  }
  return act;
}

// ---------------------------------------------------------------------------

Jets Jets::zeros_like(const Jets& shape) {
  auto z = [](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  };
  return Jets{z(shape.value), z(shape.dx), z(shape.dxx), z(shape.dt)};
}

namespace {

namespace ei = Eigen::internal;

// Cephes rational form below 0.625, 1 - 2/(e^{2|x|}+1) above; within 1 ulp
// of std::tanh but vectorized through Eigen's packet exp.
constexpr double kTanhP[] = {-9.64399179425052238628e-1, -9.92877231001918586564e1,
                             -1.61468768441708447952e3};
constexpr double kTanhQ[] = {1.12811678491632931402e2, 2.23548839060100448583e3,
                             4.84406305325125486048e3};

double tanh_scalar(double x) {
  const double a = std::abs(x);
  if (!(a >= 0.625)) {
    if (std::isnan(x)) return x;
    const double z = x * x;
    const double p = (kTanhP[0] * z + kTanhP[1]) * z + kTanhP[2];
    const double q = ((z + kTanhQ[0]) * z + kTanhQ[1]) * z + kTanhQ[2];
    return x + x * z * p / q;
  }
  const double r = 1.0 - 2.0 / (std::exp(2.0 * std::min(a, 40.0)) + 1.0);
  return x < 0.0 ? -r : r;
}

void tanh_inplace(double* d, Eigen::Index n) {
  using P = ei::packet_traits<double>::type;
  constexpr Eigen::Index width = ei::unpacket_traits<P>::size;
  const P p0 = ei::pset1<P>(kTanhP[0]), p1 = ei::pset1<P>(kTanhP[1]), p2 = ei::pset1<P>(kTanhP[2]);
  const P q0 = ei::pset1<P>(kTanhQ[0]), q1 = ei::pset1<P>(kTanhQ[1]), q2 = ei::pset1<P>(kTanhQ[2]);
  const P one = ei::pset1<P>(1.0), two = ei::pset1<P>(2.0), cut = ei::pset1<P>(0.625);
  const P cap = ei::pset1<P>(40.0), zero = ei::pset1<P>(0.0);
  Eigen::Index i = 0;
  for (; i + width <= n; i += width) {
    const P x = ei::ploadu<P>(d + i);
    const P a = ei::pabs(x);
    const P z = ei::pmul(x, x);
    const P p = ei::pmadd(ei::pmadd(p0, z, p1), z, p2);
    const P q = ei::pmadd(ei::pmadd(ei::padd(z, q0), z, q1), z, q2);
    const P small = ei::pmadd(ei::pmul(x, z), ei::pdiv(p, q), x);
    const P e = ei::pexp(ei::pmul(two, ei::pmin(a, cap)));
    P big = ei::psub(one, ei::pdiv(two, ei::padd(e, one)));
    big = ei::pselect(ei::pcmp_lt(x, zero), ei::pnegate(big), big);
    P r = ei::pselect(ei::pcmp_lt(a, cut), small, big);
    r = ei::pselect(ei::pcmp_eq(x, x), r, x);  // NaN in, NaN out
    ei::pstoreu(d + i, r);
  }
  for (; i < n; ++i) d[i] = tanh_scalar(d[i]);
}

using ColBlock = Eigen::Block<Eigen::MatrixXd, Eigen::Dynamic, Eigen::Dynamic, true>;
using ConstColBlock = Eigen::Block<const Eigen::MatrixXd, Eigen::Dynamic, Eigen::Dynamic, true>;

// Points are processed in column blocks small enough that a block's whole
// layer stack stays in cache. The block size is fixed, so sums over points
// always happen in the same order.
constexpr Eigen::Index kBlock = 128;

struct Slopes {
  Eigen::ArrayXXd s1, s2, s3;
};

// First three derivatives of the activation, expressed through its output.
Slopes slopes(Activation act, const ConstColBlock& out, bool second, bool third) {
  Slopes s;
  const auto h = out.array();
  switch (act) {
    case Activation::Tanh:
      s.s1 = 1.0 - h.square();
      if (second || third) s.s2 = -2.0 * h * s.s1;
      if (third) s.s3 = -2.0 * s.s1.square() + 4.0 * h.square() * s.s1;
      break;
    case Activation::Sigmoid:
      s.s1 = h * (1.0 - h);
      if (second || third) s.s2 = s.s1 * (1.0 - 2.0 * h);
      if (third) s.s3 = s.s2 * (1.0 - 2.0 * h) - 2.0 * s.s1.square();
      break;
    case Activation::Identity:
      break;
  }
  return s;
}

bool empty(const Eigen::MatrixXd& m) { return m.size() == 0; }

ConstColBlock cols(const Eigen::MatrixXd& m, Eigen::Index c0, Eigen::Index nb) {
  return ConstColBlock(m, 0, c0, m.rows(), nb);
}
ColBlock cols(Eigen::MatrixXd& m, Eigen::Index c0, Eigen::Index nb) {
  return ColBlock(m, 0, c0, m.rows(), nb);
}

}  // namespace

JetForward::JetForward(const NetworkParams& params, const Eigen::MatrixXd& inputs,
                       InputLayout layout, JetRequest request) {
  run(params, inputs, layout, request);
}

void JetForward::run(const NetworkParams& params, const Eigen::MatrixXd& inputs,
                     InputLayout layout, JetRequest request) {
  params_ = &params;
  const Eigen::Index width = params.input_width();
  if (inputs.rows() != width) {
    throw ShapeError("network expects " + std::to_string(width) + " input rows, got " +
                     std::to_string(inputs.rows()));
  }
  if (layout.x_row >= width || layout.t_row >= width) {
    throw ShapeError("input layout refers to a row outside the network input");
  }
  const Eigen::Index n = inputs.cols();
  carry_x_ = (request.dx || request.dxx) && layout.x_row >= 0;
  carry_xx_ = request.dxx && layout.x_row >= 0;
  carry_t_ = request.dt && layout.t_row >= 0;

  // Buffers keep their storage between runs of the same shape.
  auto shape = [](Eigen::MatrixXd& m, bool on, Eigen::Index r, Eigen::Index c) {
    if (on) {
      m.resize(r, c);
    } else {
      m.resize(0, 0);
    }
  };
  input_.value = inputs;
  shape(input_.dx, carry_x_, width, n);
  shape(input_.dxx, carry_xx_, width, n);
  shape(input_.dt, carry_t_, width, n);
  if (carry_x_) {
    input_.dx.setZero();
    input_.dx.row(layout.x_row).setOnes();
  }
  if (carry_xx_) input_.dxx.setZero();
  if (carry_t_) {
    input_.dt.setZero();
    input_.dt.row(layout.t_row).setOnes();
  }

  layers_.resize(params.layers().size());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Eigen::Index rows = params.layers()[k].outputs;
    Layer& layer = layers_[k];
    layer.out.value.resize(rows, n);
    shape(layer.out.dx, carry_x_, rows, n);
    shape(layer.zx, carry_x_, rows, n);
    shape(layer.out.dxx, carry_xx_, rows, n);
    shape(layer.zxx, carry_xx_, rows, n);
    shape(layer.out.dt, carry_t_, rows, n);
    shape(layer.zt, carry_t_, rows, n);
  }

  for (Eigen::Index c0 = 0; c0 < n; c0 += kBlock) {
    const Eigen::Index nb = std::min(kBlock, n - c0);
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const Jets& a = k == 0 ? input_ : layers_[k - 1].out;
      const auto w = params.weights(k);
      const auto b = params.bias(k);
      const Activation act = params.layers()[k].activation;
      Layer& layer = layers_[k];

      ColBlock z = cols(layer.out.value, c0, nb);
      z.noalias() = w * cols(a.value, c0, nb);
      z.colwise() += b;
      if (carry_x_) cols(layer.zx, c0, nb).noalias() = w * cols(a.dx, c0, nb);
      if (carry_xx_) cols(layer.zxx, c0, nb).noalias() = w * cols(a.dxx, c0, nb);
      if (carry_t_) cols(layer.zt, c0, nb).noalias() = w * cols(a.dt, c0, nb);

      switch (act) {
        case Activation::Tanh: tanh_inplace(z.data(), z.size()); break;
        case Activation::Sigmoid: z = (1.0 / (1.0 + (-z.array()).exp())).matrix(); break;
        case Activation::Identity: break;
      }
      if (act == Activation::Identity) {
        if (carry_x_) cols(layer.out.dx, c0, nb) = cols(layer.zx, c0, nb);
        if (carry_xx_) cols(layer.out.dxx, c0, nb) = cols(layer.zxx, c0, nb);
        if (carry_t_) cols(layer.out.dt, c0, nb) = cols(layer.zt, c0, nb);
        continue;
      }
      const Slopes s = slopes(act, cols(std::as_const(layer.out.value), c0, nb), carry_xx_, false);
      if (carry_x_) {
        cols(layer.out.dx, c0, nb) = (s.s1 * cols(std::as_const(layer.zx), c0, nb).array()).matrix();
      }
      if (carry_xx_) {
        cols(layer.out.dxx, c0, nb) =
            (s.s1 * cols(std::as_const(layer.zxx), c0, nb).array() +
             s.s2 * cols(std::as_const(layer.zx), c0, nb).array().square())
                .matrix();
      }
      if (carry_t_) {
        cols(layer.out.dt, c0, nb) = (s.s1 * cols(std::as_const(layer.zt), c0, nb).array()).matrix();
      }
    }
  }

  Jets& out = layers_.back().out;
  if (!out.value.allFinite()) {
    throw NonFiniteError("network output is non-finite");
  }
  const Eigen::Index rows = out.value.rows();
  // Requested derivatives of coordinates the network does not see are zero.
  if (request.dx && !carry_x_) out.dx = Eigen::MatrixXd::Zero(rows, n);
  if (request.dxx && !carry_xx_) out.dxx = Eigen::MatrixXd::Zero(rows, n);
  if (request.dt && !carry_t_) out.dt = Eigen::MatrixXd::Zero(rows, n);
  if (!request.dx && !request.dxx) out.dx.resize(0, 0);
}

void JetForward::backward(const Jets& adjoint, Eigen::Ref<Eigen::VectorXd> grad) const {
  const NetworkParams& params = *params_;
  if (grad.size() != params.size()) {
    throw ShapeError("gradient buffer does not match the network");
  }
  const Eigen::Index rows = layers_.back().out.value.rows();
  const Eigen::Index n = layers_.back().out.value.cols();
  auto check = [&](const Eigen::MatrixXd& m) {
    if (!empty(m) && (m.rows() != rows || m.cols() != n)) {
      throw ShapeError("adjoint shape does not match network output");
    }
  };
  check(adjoint.value);
  check(adjoint.dx);
  check(adjoint.dxx);
  check(adjoint.dt);
  // Adjoint block, or zeros where the caller left a component empty.
  auto seed = [&](const Eigen::MatrixXd& m, Eigen::Index c0, Eigen::Index nb) -> Eigen::MatrixXd {
    if (empty(m)) return Eigen::MatrixXd::Zero(rows, nb);
    return cols(m, c0, nb);
  };

  for (Eigen::Index c0 = 0; c0 < n; c0 += kBlock) {
    const Eigen::Index nb = std::min(kBlock, n - c0);
    Jets hb;
    hb.value = seed(adjoint.value, c0, nb);
    if (carry_x_) hb.dx = seed(adjoint.dx, c0, nb);
    if (carry_xx_) hb.dxx = seed(adjoint.dxx, c0, nb);
    if (carry_t_) hb.dt = seed(adjoint.dt, c0, nb);

    for (std::size_t k = layers_.size(); k-- > 0;) {
      const Layer& layer = layers_[k];
      const Jets& a = k == 0 ? input_ : layers_[k - 1].out;
      const Activation act = params.layers()[k].activation;
      const LayerSpec& spec = params.layers()[k];

      Jets zb;
      if (act == Activation::Identity) {
        zb = std::move(hb);
      } else {
        const Slopes s =
            slopes(act, cols(layer.out.value, c0, nb), carry_x_ || carry_t_, carry_xx_);
        Eigen::ArrayXXd v = hb.value.array() * s.s1;
        if (carry_x_) v += hb.dx.array() * s.s2 * cols(layer.zx, c0, nb).array();
        if (carry_t_) v += hb.dt.array() * s.s2 * cols(layer.zt, c0, nb).array();
        if (carry_xx_) {
          v += hb.dxx.array() * (s.s2 * cols(layer.zxx, c0, nb).array() +
                                 s.s3 * cols(layer.zx, c0, nb).array().square());
        }
        zb.value = v.matrix();
        if (carry_x_) {
          Eigen::ArrayXXd dx = hb.dx.array() * s.s1;
          if (carry_xx_) dx += 2.0 * hb.dxx.array() * s.s2 * cols(layer.zx, c0, nb).array();
          zb.dx = dx.matrix();
        }
        if (carry_xx_) zb.dxx = (hb.dxx.array() * s.s1).matrix();
        if (carry_t_) zb.dt = (hb.dt.array() * s.s1).matrix();
      }

      const std::size_t w0 = params.weight_offset(k);
      Eigen::Map<NetworkParams::Matrix> gw(grad.data() + w0, spec.outputs, spec.inputs);
      Eigen::Map<Eigen::VectorXd> gb(grad.data() + w0 + spec.inputs * spec.outputs, spec.outputs);
      gw.noalias() += zb.value * cols(a.value, c0, nb).transpose();
      if (carry_x_) gw.noalias() += zb.dx * cols(a.dx, c0, nb).transpose();
      if (carry_xx_) gw.noalias() += zb.dxx * cols(a.dxx, c0, nb).transpose();
      if (carry_t_) gw.noalias() += zb.dt * cols(a.dt, c0, nb).transpose();
      gb += zb.value.rowwise().sum();

      if (k > 0) {
        const auto w = params.weights(k);
        hb.value.noalias() = w.transpose() * zb.value;
        if (carry_x_) hb.dx.noalias() = w.transpose() * zb.dx;
        if (carry_xx_) hb.dxx.noalias() = w.transpose() * zb.dxx;
        if (carry_t_) hb.dt.noalias() = w.transpose() * zb.dt;
      }
    }
  }
}

// ---------------------------------------------------------------------------

BoundJets evaluate_bounds(std::span<const IntervalField> fields, const Eigen::ArrayXd& x,
                          const Eigen::ArrayXd& t) {
  const auto s = static_cast<Eigen::Index>(fields.size());
  const Eigen::Index n = x.size();
  BoundJets b;
  for (Eigen::MatrixXd* m : {&b.lower, &b.upper, &b.lower_dx, &b.upper_dx, &b.lower_dt, &b.upper_dt}) {
    m->resize(s, n);
  }
  for (Eigen::Index i = 0; i < s; ++i) {
    const IntervalField& f = fields[static_cast<std::size_t>(i)];
    const FieldFunction::BatchJet lo = f.lower().jet(x, t);
    const FieldFunction::BatchJet hi = f.upper().jet(x, t);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(lo.value(j) <= hi.value(j))) {
        std::ostringstream os;
        os << "field " << i + 1 << ": upper bound " << hi.value(j) << " below lower bound "
           << lo.value(j) << " at x=" << x(j) << ", t=" << t(j);
        throw InvalidBoundsError(os.str());
      }
    }
    b.lower.row(i) = lo.value.matrix().transpose();
    b.upper.row(i) = hi.value.matrix().transpose();
    b.lower_dx.row(i) = lo.dx.matrix().transpose();
    b.upper_dx.row(i) = hi.dx.matrix().transpose();
    b.lower_dt.row(i) = lo.dt.matrix().transpose();
    b.upper_dt.row(i) = hi.dt.matrix().transpose();
  }
  return b;
}

Jets scale_fields(const Jets& z, const BoundJets& bounds) {
  const Eigen::Index s = bounds.lower.rows();
  if (z.value.rows() != 2 * s || z.value.cols() != bounds.lower.cols()) {
    throw ShapeError("field network output does not match 2 x number of interval fields");
  }
  Jets p;
  p.value.resize(z.value.rows(), z.value.cols());
  if (!empty(z.dx)) p.dx.resize(z.value.rows(), z.value.cols());
  if (!empty(z.dt)) p.dt.resize(z.value.rows(), z.value.cols());
  for (Eigen::Index r = 0; r < 2 * s; ++r) {
    const Eigen::Index i = r / 2;
    const auto lo = bounds.lower.row(i).array();
    const auto hi = bounds.upper.row(i).array();
    const Eigen::ArrayXXd delta = hi - lo;
    p.value.row(r) = (lo + delta * z.value.row(r).array()).max(lo).min(hi).matrix();
    if (!empty(z.dx)) {
      const auto dlo = bounds.lower_dx.row(i).array();
      const auto ddelta = bounds.upper_dx.row(i).array() - dlo;
      p.dx.row(r) = (dlo + ddelta * z.value.row(r).array() + delta * z.dx.row(r).array()).matrix();
    }
    if (!empty(z.dt)) {
      const auto dlo = bounds.lower_dt.row(i).array();
      const auto ddelta = bounds.upper_dt.row(i).array() - dlo;
      p.dt.row(r) = (dlo + ddelta * z.value.row(r).array() + delta * z.dt.row(r).array()).matrix();
    }
  }
  return p;
}

Jets scale_fields_backward(const Jets& z, const BoundJets& bounds, const Jets& p_adjoint) {
  const Eigen::Index s = bounds.lower.rows();
  Jets zb;
  zb.value = Eigen::MatrixXd::Zero(z.value.rows(), z.value.cols());
  const bool has_dx = !empty(z.dx) && !empty(p_adjoint.dx);
  const bool has_dt = !empty(z.dt) && !empty(p_adjoint.dt);
  if (has_dx) zb.dx.resize(z.value.rows(), z.value.cols());
  if (has_dt) zb.dt.resize(z.value.rows(), z.value.cols());
  for (Eigen::Index r = 0; r < 2 * s; ++r) {
    const Eigen::Index i = r / 2;
    const Eigen::ArrayXXd delta = (bounds.upper.row(i) - bounds.lower.row(i)).array();
    Eigen::ArrayXXd v = delta * p_adjoint.value.row(r).array();
    if (has_dx) {
      const auto ddelta = (bounds.upper_dx.row(i) - bounds.lower_dx.row(i)).array();
      v += ddelta * p_adjoint.dx.row(r).array();
      zb.dx.row(r) = (delta * p_adjoint.dx.row(r).array()).matrix();
    }
    if (has_dt) {
      const auto ddelta = (bounds.upper_dt.row(i) - bounds.lower_dt.row(i)).array();
      v += ddelta * p_adjoint.dt.row(r).array();
      zb.dt.row(r) = (delta * p_adjoint.dt.row(r).array()).matrix();
    }
    zb.value.row(r) = v.matrix();
  }
  return zb;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd network_input(int width, double x, double t) {
  if (width == 1) {
    return Eigen::VectorXd::Constant(1, x);
  }
  if (width == 2) {
    Eigen::VectorXd v(2);
    v << x, t;
    return v;
  }
  throw ShapeError("network input width must be 1 or 2, got " + std::to_string(width));
}

Eigen::MatrixXd clamp_open_unit(const Eigen::MatrixXd& z) {
  constexpr double lo = 0x1.0p-1022;
  constexpr double hi = 1.0 - 0x1.0p-53;
  return z.array().max(lo).min(hi).matrix();
}

SolutionHead forward_u(const NetworkParams& params, double x, double t) {
  const Eigen::MatrixXd in = network_input(params.input_width(), x, t);
  JetForward f(params, in, {}, {});
  const auto& v = f.outputs().value;
  return SolutionHead{std::vector<double>(v.data(), v.data() + v.size())};
}

FieldHead forward_field(const NetworkParams& params, double x, double t,
                        std::span<const IntervalField> bounds) {
  if (params.layers().back().activation != Activation::Sigmoid) {
    throw ShapeError("field network must end in a sigmoid layer");
  }
  const Eigen::MatrixXd in = network_input(params.input_width(), x, t);
  JetForward f(params, in, {}, {});
  Jets z;
  z.value = clamp_open_unit(f.outputs().value);
  const BoundJets b = evaluate_bounds(bounds, Eigen::ArrayXd::Constant(1, x),
                                      Eigen::ArrayXd::Constant(1, t));
  const Jets p = scale_fields(z, b);
  FieldHead head;
  head.z.assign(z.value.data(), z.value.data() + z.value.size());
  head.scaled.assign(p.value.data(), p.value.data() + p.value.size());
  return head;
}

// ---------------------------------------------------------------------------

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, end - buf);
}

double get(std::istream& is) {
  std::string token;
  if (!(is >> token)) {
    throw ShapeError("parameter snapshot ended early");
  }
  double v = 0.0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw ShapeError("malformed number '" + token + "' in parameter snapshot");
  }
  return v;
}

void expect(std::istream& is, const std::string& word) {
  std::string token;
  if (!(is >> token) || token != word) {
    throw ShapeError("parameter snapshot: expected '" + word + "', found '" + token + "'");
  }
}

}  // namespace

void write_params(std::ostream& os, const NetworkParams& params) {
  os << "ipinn-params 1\n";
  os << "layers " << params.layers().size() << '\n';
  for (const LayerSpec& l : params.layers()) {
    os << "layer " << l.inputs << ' ' << l.outputs << ' ' << activation_name(l.activation) << '\n';
  }
  for (std::size_t k = 0; k < params.layers().size(); ++k) {
    const auto w = params.weights(k);
    os << 'W';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        os << ' ';
        put(os, w(r, c));
      }
    }
    os << "\nb";
    const auto b = params.bias(k);
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      os << ' ';
      put(os, b(r));
    }
    os << '\n';
  }
}

NetworkParams read_params(std::istream& is) {
  expect(is, "ipinn-params");
  int version = 0;
  if (!(is >> version) || version != 1) {
    throw ShapeError("unsupported parameter snapshot version");
  }
  expect(is, "layers");
  std::size_t count = 0;
  is >> count;
  std::vector<LayerSpec> layers;
  for (std::size_t k = 0; k < count; ++k) {
    expect(is, "layer");
    LayerSpec l;
    std::string act;
    if (!(is >> l.inputs >> l.outputs >> act)) {
      throw ShapeError("malformed layer line in parameter snapshot");
    }
    l.activation = parse_activation(act);
    layers.push_back(l);
  }
  NetworkParams params(std::move(layers));
  for (std::size_t k = 0; k < count; ++k) {
    expect(is, "W");
    auto w = params.weights(k);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = get(is);
      }
    }
    expect(is, "b");
    auto b = params.bias(k);
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      b(r) = get(is);
    }
  }
  if (!params.values().allFinite()) {
    throw NonFiniteError("parameter snapshot contains non-finite values");
  }
  return params;
}

}  // namespace ipinn::nn
