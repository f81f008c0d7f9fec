#pragma once

// iPINN training: collocation grids, the four-term loss
//
//   J = W_G MSE_G + W_mm U_mm + W_0 MSE_0 + W_u MSE_u
//
// with both solution branches (min, max) evaluated at every point, and a
// joint Adam optimizer over the parameters of N_u and N_P.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ipinn/error.hpp"
#include "ipinn/neural.hpp"
#include "ipinn/problem.hpp"

namespace ipinn {

struct TrainingConfig {
  NetworkShape solution_net;
  NetworkShape field_net;
  double w_g = 1.0;
  double w_mm = 1.0;
  double w_0 = 1.0;
  double w_u = 1.0;
  double learning_rate = 1e-3;
  long epochs = 1000;
  int space_points = 100;  // N_R
  int time_points = 1;     // N_t
  std::uint64_t seed = 0;
  long log_every = 100;
  long snapshot_every = 0;  // 0: no intermediate snapshots
  /// Divide U_mm by N_R N_t. Off by default.
  bool normalize_umm = false;

  /// The problem's published settings.
  static TrainingConfig defaults_for(const ProblemDefinition& problem);
  /// Throws ConfigError on negative weights, non-positive counts or rates.
  void validate(const ProblemDefinition& problem) const;
};

struct LossBreakdown {
  double total = 0.0;
  double mse_g = 0.0;
  double u_mm_min = 0.0;  // sum of min-branch outputs over interior points
  double u_mm_max = 0.0;  // sum of max-branch outputs
  double mse_0 = 0.0;
  double mse_u = 0.0;

  double u_mm() const { return u_mm_min - u_mm_max; }
};

struct LogEntry {
  long epoch = 0;
  LossBreakdown loss;
  long box_violations = 0;
};

/// Point sets. Interior points form the full space x time grid, x fastest.
/// Boundary points are each condition's location at every grid time, in
/// condition order; initial points are the space grid at the first time.
struct CollocationGrids {
  std::vector<double> space;
  std::vector<double> time;
  Eigen::ArrayXd interior_x, interior_t;
  Eigen::ArrayXd boundary_x, boundary_t;
  std::vector<int> boundary_condition;  // condition index per boundary point
  Eigen::ArrayXd initial_x, initial_t;
};

CollocationGrids collocation_grids(const ProblemDefinition& problem, const TrainingConfig& config);

/// Network input matrix for a batch of points (constant 1.0, x, or (x, t)).
Eigen::MatrixXd network_inputs(const ProblemDefinition& problem, const Eigen::ArrayXd& x,
                               const Eigen::ArrayXd& t);

std::vector<nn::LayerSpec> solution_layers(const ProblemDefinition& problem, NetworkShape shape);
std::vector<nn::LayerSpec> field_layers(const ProblemDefinition& problem, NetworkShape shape);

/// Loss and gradient over fixed grids. Holds compiled terms and workspaces so
/// repeated evaluation during training does not reallocate.
class LossEvaluator {
 public:
  LossEvaluator(const ProblemDefinition& problem, CollocationGrids grids, const TrainingConfig& config);

  /// Network outputs at every point of the batch: interior points first,
  /// then boundary, then initial points.
  const Eigen::ArrayXd& points_x() const { return x_; }
  const Eigen::ArrayXd& points_t() const { return t_; }
  Eigen::Index interior_count() const { return n_interior_; }

  LossBreakdown evaluate(const nn::NetworkParams& u, const nn::NetworkParams& p);
  /// Same, accumulating dJ/dparams into the two gradient buffers.
  LossBreakdown evaluate(const nn::NetworkParams& u, const nn::NetworkParams& p,
                         Eigen::Ref<Eigen::VectorXd> grad_u, Eigen::Ref<Eigen::VectorXd> grad_p);

  /// Loss from given jets at the batch points: solution rows
  /// [u1_min, u1_max, ...] and realized field rows [P1_min, P1_max, ...].
  /// When `u_adjoint`/`p_adjoint` are non-null they receive dJ/d(jets).
  LossBreakdown assemble(const nn::Jets& u, const nn::Jets& p, nn::Jets* u_adjoint = nullptr,
                         nn::Jets* p_adjoint = nullptr);

  /// Solution and realized field jets of the last evaluate().
  const nn::Jets& solution() const { return u_fwd_.outputs(); }
  const nn::Jets& fields() const { return p_; }
  /// Realized field values outside [P^L, P^U] in the last evaluate().
  long box_violations() const { return box_violations_; }

  const ProblemDefinition& problem() const { return problem_; }
  const TrainingConfig& config() const { return config_; }

 private:
  struct Term {
    SquaredTerms terms;
    Eigen::Index offset;  // first batch column
    Eigen::Index count;   // points
    double scale;         // weight / normalization
  };

  void run_networks(const nn::NetworkParams& u, const nn::NetworkParams& p);
  void fill_inputs(const Term& term, const nn::Jets& u, const nn::Jets& p, Eigen::ArrayXXd& in) const;
  void scatter(const Term& term, const Eigen::ArrayXXd& adj, nn::Jets& ua, nn::Jets& pa) const;

  ProblemDefinition problem_;
  TrainingConfig config_;
  CollocationGrids grids_;
  DerivativeNeeds needs_;
  Eigen::ArrayXd x_, t_;
  Eigen::Index n_interior_ = 0;
  Eigen::MatrixXd inputs_;
  nn::BoundJets bounds_;
  nn::JetRequest u_request_, p_request_;

  std::vector<Term> terms_;  // residual, then boundary conditions, then initial conditions
  std::size_t n_boundary_terms_ = 0;
  double umm_scale_ = 1.0;

  nn::JetForward u_fwd_, p_fwd_;
  nn::Jets z_, p_;
  nn::Jets u_adj_, p_adj_;
  Eigen::ArrayXXd scratch_;
  long box_violations_ = 0;
};

/// Convenience single evaluation.
LossBreakdown loss(const ProblemDefinition& problem, const nn::NetworkParams& u,
                   const nn::NetworkParams& p, const CollocationGrids& grids,
                   const TrainingConfig& config);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;

  explicit AdamState(Eigen::Index size = 0)
      : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}
};

/// One bias-corrected Adam update. Throws NonFiniteError on a non-finite
/// gradient and ShapeError on size mismatch.
void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
               AdamState& state, double lr);

/// Network outputs at arbitrary points.
struct Evaluation {
  Eigen::MatrixXd u;       // 2h x n
  Eigen::MatrixXd fields;  // 2s x n, realized values
};

Evaluation evaluate_networks(const ProblemDefinition& problem, const nn::NetworkParams& u,
                             const nn::NetworkParams& p, const Eigen::ArrayXd& x,
                             const Eigen::ArrayXd& t);

/// Realized values of field `index` on the given branch.
Eigen::ArrayXd realized_field(const ProblemDefinition& problem, const nn::NetworkParams& p,
                              int index, Branch branch, const Eigen::ArrayXd& x,
                              const Eigen::ArrayXd& t);

struct SolutionBundle {
  std::string problem;
  Eigen::ArrayXd x, t;     // interior grid
  Eigen::MatrixXd u;       // 2h x n
  Eigen::MatrixXd fields;  // 2s x n
  std::vector<LogEntry> history;
  nn::NetworkParams solution_params;
  nn::NetworkParams field_params;
  long epochs = 0;
  long box_violations = 0;  // summed over logged epochs
};

struct TrainingHooks {
  std::function<void(const LogEntry&)> on_log;
  std::function<void(long epoch, const nn::NetworkParams& u, const nn::NetworkParams& p)> on_snapshot;
};

/// Raised when the loss turns non-finite. Carries the last parameters that
/// produced a finite loss.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, long epoch, nn::NetworkParams u, nn::NetworkParams p,
                   std::vector<LogEntry> history)
      : Error(what), epoch_(epoch), u_(std::move(u)), p_(std::move(p)), history_(std::move(history)) {}

  long epoch() const { return epoch_; }
  const nn::NetworkParams& solution_params() const { return u_; }
  const nn::NetworkParams& field_params() const { return p_; }
  const std::vector<LogEntry>& history() const { return history_; }

 private:
  long epoch_;
  nn::NetworkParams u_;
  nn::NetworkParams p_;
  std::vector<LogEntry> history_;
};

/// Initial parameters of both networks from the config seed.
std::pair<nn::NetworkParams, nn::NetworkParams> initial_params(const ProblemDefinition& problem,
                                                               const TrainingConfig& config);

SolutionBundle train(const ProblemDefinition& problem, const TrainingConfig& config,
                     const TrainingHooks& hooks = {});

}  // namespace ipinn
