#ifndef CBSLICE_SLICING_HPP
#define CBSLICE_SLICING_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cbslice/filter.hpp"
#include "cbslice/matrix.hpp"
#include "cbslice/model.hpp"
#include "cbslice/rng.hpp"

namespace cbslice {

// Diagonal Gaussian mixture over concept-logit features. Variances are kept
// in log space; mixture weights are a softmax over weight_logits.
struct GmmParams {
  Matrix means;                       // t_g x k_err
  Matrix log_vars;                    // t_g x k_err
  std::vector<double> weight_logits;  // t_g

  std::size_t components() const { return means.rows(); }
  std::size_t dims() const { return means.cols(); }
};

// Dense affine map, out = weights * in + bias.
struct LinearMap {
  Matrix weights;
  std::vector<double> bias;
};

// Auxiliary heads that decode per-concept error patterns from a sample's
// slice posterior: one against the true concepts, one against the
// model-predicted concepts.
struct AuxHeads {
  LinearMap true_head;  // t_g -> k_err
  LinearMap pred_head;  // t_g -> k_err
};

enum class SliceVariant { gmm, linear };

// All trainable state for one slicer variant. The gmm block is live when
// variant == gmm, the slicer map (k_err -> t_g logits) when variant == linear;
// the aux heads are shared by both.
struct SliceParams {
  SliceVariant variant = SliceVariant::gmm;
  GmmParams gmm;
  LinearMap slicer;
  AuxHeads aux;
};

struct SliceGradients {
  Matrix d_means;
  Matrix d_log_vars;
  std::vector<double> d_weight_logits;
  LinearMap d_slicer;
  LinearMap d_true_head;
  LinearMap d_pred_head;
};

struct TrainConfig {
  int t_g = 15;
  double lambda = 15.0;
  int epochs = 200;
  double lr = 0.1;
  double lr_decay_factor = 0.5;
  int lr_decay_every = 30;
  int batch_size = 8;
  std::uint64_t seed = 0;
  double variance_floor = 1e-4;
  bool enable_gmm_loss = true;
  bool enable_true_loss = true;
  bool enable_pred_loss = true;

  void validate() const;
};

// End-of-epoch diagnostics, always measured on the full feature set.
// l_gmm is NaN for the linear variant, which has no density.
struct EpochStats {
  double l_gmm;
  double l_true;
  double l_pred;
  double acc_true;
  double acc_pred;
  double lr;
};

struct SliceModel {
  SliceParams params;
  std::vector<std::size_t> c_err;
  TrainConfig config;
  std::vector<EpochStats> history;

  std::size_t t_g() const {
    return params.variant == SliceVariant::gmm ? params.gmm.components()
                                               : params.slicer.weights.rows();
  }
  std::size_t k_err() const { return c_err.size(); }
};

// Feature rows: concept logits of the mispredicted samples restricted to the
// selected concept columns. Row n corresponds to errs.indices[n].
Matrix logit_features(const EvalDump& dump, const ErrorSet& errs,
                      const std::vector<std::size_t>& c_err);

// Posterior slice memberships, one row per feature row; rows sum to 1.
Matrix responsibilities(const GmmParams& gmm, const Matrix& features);
Matrix responsibilities(const SliceParams& params, const Matrix& features);
std::vector<double> responsibilities_row(const SliceParams& params,
                                         std::span<const double> h);

// Log of responsibilities_row. Stays finite for finite inputs even where the
// plain posterior underflows to zero.
std::vector<double> log_responsibilities_row(const SliceParams& params,
                                             std::span<const double> h);

// Negative log likelihood of the mixture, summed over rows.
double gmm_nll(const GmmParams& gmm, const Matrix& features);

// Mean element-wise BCE (on logits) and bit accuracy of both aux heads, for
// the given posteriors and 0/1 targets.
struct AuxEval {
  double loss_true;
  double loss_pred;
  double acc_true;
  double acc_pred;
};
AuxEval aux_eval(const AuxHeads& aux, const Matrix& posteriors,
                 const Matrix& target_true, const Matrix& target_pred);

// Training objective on one batch. For the gmm variant this is
// NLL + lambda * (BCE_true + BCE_pred) with each term gated by its enable
// flag; the linear variant uses the ungated sum of enabled BCE terms.
double total_loss(const SliceParams& params, const Matrix& features,
                  const Matrix& target_true, const Matrix& target_pred,
                  const TrainConfig& config);

// Analytic gradient of total_loss with respect to every trainable parameter.
SliceGradients loss_gradients(const SliceParams& params, const Matrix& features,
                              const Matrix& target_true, const Matrix& target_pred,
                              const TrainConfig& config);

// Parameter vector in a fixed documented order:
//   gmm variant:    means, log_vars, weight_logits, true_head (weights, bias),
//                   pred_head (weights, bias)
//   linear variant: slicer (weights, bias), true_head, pred_head
// Matrices flatten row-major. flatten_gradients uses the identical order.
std::vector<double> flatten_params(const SliceParams& params);
void unflatten_params(std::span<const double> values, SliceParams& params);
std::vector<double> flatten_gradients(const SliceGradients& grads,
                                      const SliceParams& params);

// Deterministic initialisation from the rng stream. Mixture means start at
// farthest-point rows of the features, log variances at the per-dimension
// empirical variance (floored), mixture logits at zero. Linear maps draw
// weights from U(-0.1, 0.1) with zero bias; aux biases are zero.
SliceParams init_params(const Matrix& features, int t_g, SliceVariant variant,
                        Rng& rng, double variance_floor);

// Fit the slicer on the dump's mispredicted samples with plain SGD.
SliceModel fit_slices(const EvalDump& dump, const ErrorSet& errs,
                      const ConceptFilter& filter, const TrainConfig& config);

// Ablation baseline: a single linear map produces the slice logits.
SliceModel fit_slices_linear(const EvalDump& dump, const ErrorSet& errs,
                             const ConceptFilter& filter, const TrainConfig& config);

}  // namespace cbslice

#endif
