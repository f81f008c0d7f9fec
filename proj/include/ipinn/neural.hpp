#pragma once

// Feedforward networks for the solution bounds (N_u) and the realized input
// fields (N_P).
//
// Two evaluation routes exist. forward_graph() records a network on an
// autodiff tape, one scalar node per multiply-add; it is exact and general
// but slow. JetForward evaluates a whole batch of collocation points with
// dense matrix products and carries the input derivatives d/dx, d2/dx2 and
// d/dt through every layer (truncated Taylor propagation); its backward()
// is the matching hand-written reverse pass. Training uses JetForward; the
// tests hold the two routes against each other.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ipinn/autodiff.hpp"
#include "ipinn/uncertainty.hpp"

namespace ipinn::nn {

enum class Activation { Tanh, Sigmoid, Identity };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

struct LayerSpec {
  int inputs = 1;
  int outputs = 1;
  Activation activation = Activation::Tanh;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// `hidden_layers` tanh layers of `width` neurons followed by a head layer.
std::vector<LayerSpec> mlp(int inputs, int hidden_layers, int width, int outputs, Activation head);

/// Throws ShapeError unless the layers chain and all widths are >= 1.
void validate(std::span<const LayerSpec> layers);

class NetworkParams {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  NetworkParams() = default;
  /// Zero weights and biases.
  explicit NetworkParams(std::vector<LayerSpec> layers);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  int input_width() const { return layers_.front().inputs; }
  int output_width() const { return layers_.back().outputs; }
  Eigen::Index size() const { return values_.size(); }

  /// Row-major W^k (outputs x inputs) and b^k views into the flat buffer.
  Eigen::Map<Matrix> weights(std::size_t layer);
  Eigen::Map<const Matrix> weights(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

  /// All parameters, layer by layer: W^k row-major then b^k.
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  friend bool operator==(const NetworkParams& a, const NetworkParams& b) {
    return a.layers_ == b.layers_ && a.values_ == b.values_;
  }

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd values_;
};

/// Glorot-uniform weights, zero biases, reproducible from `seed`.
NetworkParams init_params(std::span<const LayerSpec> layers, std::uint64_t seed);

/// Records the network on a tape. `inputs` has input_width() entries. When
/// `parameter_vars` is empty the parameters enter as constants; otherwise it
/// must hold one variable per parameter in values() order.
std::vector<ad::Expr> forward_graph(ad::Graph& graph, const NetworkParams& params,
                                    std::span<const ad::Expr> inputs,
                                    std::span<const ad::Expr> parameter_vars = {});

/// One tape variable per parameter, named `<prefix><index>`, holding the
/// current values.
std::vector<ad::Expr> parameter_variables(ad::Graph& graph, const NetworkParams& params,
                                          const std::string& prefix);

// ---------------------------------------------------------------------------
// Batched jets

struct JetRequest {
  bool dx = false;
  bool dxx = false;
  bool dt = false;
};

/// Which rows of the input matrix are the differentiated coordinates; -1 for
/// none (time-independent problems, constant-input problems).
struct InputLayout {
  int x_row = -1;
  int t_row = -1;
};

/// Per-output values and input derivatives; rows are outputs, columns are
/// points. Components that were not requested are empty matrices and read as
/// zero.
struct Jets {
  Eigen::MatrixXd value;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dxx;
  Eigen::MatrixXd dt;

  static Jets zeros_like(const Jets& shape);
};

class JetForward {
 public:
  JetForward() = default;
  JetForward(const NetworkParams& params, const Eigen::MatrixXd& inputs, InputLayout layout,
             JetRequest request);

  /// Re-evaluates in place, reusing buffers from the previous run. `params`
  /// must outlive the next backward().
  void run(const NetworkParams& params, const Eigen::MatrixXd& inputs, InputLayout layout,
           JetRequest request);

  const Jets& outputs() const { return layers_.back().out; }

  /// Pulls output adjoints back to the parameters, accumulating into `grad`
  /// (same layout as NetworkParams::values()).
  void backward(const Jets& adjoint, Eigen::Ref<Eigen::VectorXd> grad) const;

 private:
  struct Layer {
    Jets out;  // post-activation
    Eigen::MatrixXd zx, zxx, zt;  // pre-activation derivatives
  };

  const NetworkParams* params_ = nullptr;
  Jets input_;
  std::vector<Layer> layers_;
  bool carry_x_ = false;
  bool carry_xx_ = false;
  bool carry_t_ = false;
};

// ---------------------------------------------------------------------------
// Heads

/// Bound values and derivatives of s interval fields at n points (s x n).
struct BoundJets {
  Eigen::MatrixXd lower, upper;
  Eigen::MatrixXd lower_dx, upper_dx;
  Eigen::MatrixXd lower_dt, upper_dt;
};

/// Evaluates every field's bounds at the points; rows of `points` follow the
/// problem's coordinate convention (x, t). Throws InvalidBoundsError where
/// upper < lower.
BoundJets evaluate_bounds(std::span<const IntervalField> fields, const Eigen::ArrayXd& x,
                          const Eigen::ArrayXd& t);

/// Scaled field head: P = P^L + (P^U - P^L) * z for the sigmoid outputs z,
/// each bound row repeated twice (one copy per min/max branch). Rows of the
/// result are [P1_min, P1_max, ..., Ps_min, Ps_max]. Only value, dx and dt are
/// produced. Values are clamped into [P^L, P^U] so rounding cannot leave the box.
Jets scale_fields(const Jets& z, const BoundJets& bounds);

/// Keeps sigmoid outputs strictly inside (0, 1) when exp() saturates.
Eigen::MatrixXd clamp_open_unit(const Eigen::MatrixXd& z);

/// Adjoint of scale_fields: maps P adjoints to z adjoints.
Jets scale_fields_backward(const Jets& z, const BoundJets& bounds, const Jets& p_adjoint);

/// Solution head at one point: [u1_min, u1_max, ..., uh_min, uh_max].
struct SolutionHead {
  std::vector<double> values;
};

/// Field head at one point: raw sigmoid outputs and scaled fields.
struct FieldHead {
  std::vector<double> z;
  std::vector<double> scaled;
};

/// Builds the network input column for a point given the input width:
/// width 1 -> x, width 2 -> (x, t).
Eigen::VectorXd network_input(int width, double x, double t);

SolutionHead forward_u(const NetworkParams& params, double x, double t);
FieldHead forward_field(const NetworkParams& params, double x, double t,
                        std::span<const IntervalField> bounds);

// ---------------------------------------------------------------------------
// Snapshots
//
// Versioned text format:
//   ipinn-params 1
//   layers <count>
//   layer <inputs> <outputs> <activation>     (one line per layer)
//   W <outputs*inputs row-major values>        (one line per layer, after the
//   b <outputs values>                          shape lines, in layer order)
// Numbers use shortest round-trip formatting.

void write_params(std::ostream& os, const NetworkParams& params);
NetworkParams read_params(std::istream& is);

}  // namespace ipinn::nn
