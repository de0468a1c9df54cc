#include "cbslice/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cbslice/errors.hpp"
#include "cbslice/numerics.hpp"

namespace cbslice {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::vector<double> log_mixture_weights(const GmmParams& gmm) {
  const double lse = log_sum_exp(gmm.weight_logits);
  std::vector<double> out(gmm.weight_logits.size());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = gmm.weight_logits[j] - lse;
  return out;
}

double log_component_density(const GmmParams& gmm, std::size_t j,
                             std::span<const double> h) {
  double sum = 0.0;
  for (std::size_t d = 0; d < gmm.dims(); ++d) {
    const double lv = gmm.log_vars(j, d);
    const double diff = h[d] - gmm.means(j, d);
    sum += kLog2Pi + lv + diff * diff * std::exp(-lv);
  }
  return -0.5 * sum;
}

// Unnormalised per-component log posteriors for one row.
std::vector<double> component_scores(const GmmParams& gmm,
                                     const std::vector<double>& log_weights,
                                     std::span<const double> h) {
  std::vector<double> a(gmm.components());
  for (std::size_t j = 0; j < a.size(); ++j)
    a[j] = log_weights[j] + log_component_density(gmm, j, h);
  return a;
}

std::vector<double> linear_scores(const LinearMap& map, std::span<const double> h) {
  std::vector<double> s(map.weights.rows());
  for (std::size_t j = 0; j < s.size(); ++j) {
    double acc = map.bias[j];
    const auto row = map.weights.row(j);
    for (std::size_t d = 0; d < h.size(); ++d)
      acc += row[d] * h[d];
    s[j] = acc;
  }
  return s;
}

void check_feature_shape(const SliceParams& params, const Matrix& features) {
  const std::size_t dims = params.variant == SliceVariant::gmm
                               ? params.gmm.dims()
                               : params.slicer.weights.cols();
  if (features.cols() != dims)
    throw PreconditionError("slicing: feature dimension does not match parameters");
  if (features.rows() == 0)
    throw PreconditionError("slicing: empty feature matrix");
}

void check_targets(const Matrix& features, const Matrix& target_true,
                   const Matrix& target_pred) {
  if (target_true.rows() != features.rows() || target_pred.rows() != features.rows())
    throw PreconditionError("slicing: target row count does not match features");
  if (target_true.cols() != target_pred.cols())
    throw PreconditionError("slicing: target widths differ");
}

// Shared backward pass. Accumulates head gradients scaled by `scale` and the
// loss gradient with respect to the posteriors into g_r.
void aux_backward(const LinearMap& head, const Matrix& posteriors,
                  const Matrix& target, double scale, LinearMap& d_head,
                  Matrix& g_r) {
  const std::size_t n_rows = posteriors.rows();
  const std::size_t n_out = head.weights.rows();
  const std::size_t n_in = head.weights.cols();
  const double coef = scale / static_cast<double>(n_rows * n_out);
  for (std::size_t n = 0; n < n_rows; ++n) {
    for (std::size_t d = 0; d < n_out; ++d) {
      double u = head.bias[d];
      for (std::size_t m = 0; m < n_in; ++m)
        u += head.weights(d, m) * posteriors(n, m);
      const double s = coef * (sigmoid(u) - target(n, d));
      d_head.bias[d] += s;
      for (std::size_t m = 0; m < n_in; ++m) {
        d_head.weights(d, m) += s * posteriors(n, m);
        g_r(n, m) += s * head.weights(d, m);
      }
    }
  }
}

// Pull a posterior-space gradient back through the row-wise softmax.
Matrix softmax_backward(const Matrix& posteriors, const Matrix& g_r) {
  Matrix g_a(posteriors.rows(), posteriors.cols());
  for (std::size_t n = 0; n < posteriors.rows(); ++n) {
    double inner = 0.0;
    for (std::size_t j = 0; j < posteriors.cols(); ++j)
      inner += g_r(n, j) * posteriors(n, j);
    for (std::size_t j = 0; j < posteriors.cols(); ++j)
      g_a(n, j) = posteriors(n, j) * (g_r(n, j) - inner);
  }
  return g_a;
}

void append_matrix(std::vector<double>& out, const Matrix& m) {
  out.insert(out.end(), m.data().begin(), m.data().end());
}

void append_vector(std::vector<double>& out, const std::vector<double>& v) {
  out.insert(out.end(), v.begin(), v.end());
}

std::size_t take_matrix(std::span<const double> values, std::size_t pos, Matrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = values[pos + i];
  return pos + m.size();
}

std::size_t take_vector(std::span<const double> values, std::size_t pos,
                        std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = values[pos + i];
  return pos + v.size();
}

}  // namespace

void TrainConfig::validate() const {
  if (t_g < 1)
    throw ConfigError("t_g must be at least 1");
  if (lambda < 0.0)
    throw ConfigError("lambda must be non-negative");
  if (epochs < 1)
    throw ConfigError("epochs must be at least 1");
  if (!(lr > 0.0))
    throw ConfigError("lr must be positive");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0))
    throw ConfigError("lr_decay_factor must be in (0, 1]");
  if (lr_decay_every < 1)
    throw ConfigError("lr_decay_every must be at least 1");
  if (batch_size < 1)
    throw ConfigError("batch_size must be at least 1");
  if (!(variance_floor > 0.0))
    throw ConfigError("variance_floor must be positive");
}

Matrix logit_features(const EvalDump& dump, const ErrorSet& errs,
                      const std::vector<std::size_t>& c_err) {
  if (errs.indices.empty())
    throw PreconditionError("logit_features: empty error set");
  if (c_err.empty())
    throw PreconditionError("logit_features: empty concept selection");
  for (std::size_t c : c_err)
    if (c >= dump.n_concepts)
      throw PreconditionError("logit_features: concept index out of range");

  Matrix out(errs.indices.size(), c_err.size());
  for (std::size_t n = 0; n < errs.indices.size(); ++n) {
    const std::size_t row = errs.indices[n];
    if (row >= dump.n_samples)
      throw PreconditionError("logit_features: sample index out of range");
    for (std::size_t i = 0; i < c_err.size(); ++i)
      out(n, i) = dump.concept_logits(row, c_err[i]);
  }
  return out;
}

Matrix responsibilities(const GmmParams& gmm, const Matrix& features) {
  if (features.cols() != gmm.dims())
    throw PreconditionError("responsibilities: feature dimension mismatch");
  const std::vector<double> lw = log_mixture_weights(gmm);
  Matrix out(features.rows(), gmm.components());
  for (std::size_t n = 0; n < features.rows(); ++n) {
    const std::vector<double> a = component_scores(gmm, lw, features.row(n));
    const double lse = log_sum_exp(a);
    for (std::size_t j = 0; j < a.size(); ++j)
      out(n, j) = std::exp(a[j] - lse);
  }
  return out;
}

Matrix responsibilities(const SliceParams& params, const Matrix& features) {
  check_feature_shape(params, features);
  if (params.variant == SliceVariant::gmm)
    return responsibilities(params.gmm, features);
  Matrix out(features.rows(), params.slicer.weights.rows());
  for (std::size_t n = 0; n < features.rows(); ++n) {
    const std::vector<double> r = softmax(linear_scores(params.slicer, features.row(n)));
    for (std::size_t j = 0; j < r.size(); ++j)
      out(n, j) = r[j];
  }
  return out;
}

std::vector<double> responsibilities_row(const SliceParams& params,
                                         std::span<const double> h) {
  if (params.variant == SliceVariant::linear)
    return softmax(linear_scores(params.slicer, h));
  const std::vector<double> lw = log_mixture_weights(params.gmm);
  return softmax(component_scores(params.gmm, lw, h));
}

std::vector<double> log_responsibilities_row(const SliceParams& params,
                                             std::span<const double> h) {
  std::vector<double> scores;
  if (params.variant == SliceVariant::linear) {
    scores = linear_scores(params.slicer, h);
  } else {
    const std::vector<double> lw = log_mixture_weights(params.gmm);
    scores = component_scores(params.gmm, lw, h);
  }
  const double lse = log_sum_exp(scores);
  for (double& s : scores)
    s -= lse;
  return scores;
}

double gmm_nll(const GmmParams& gmm, const Matrix& features) {
  if (features.cols() != gmm.dims())
    throw PreconditionError("gmm_nll: feature dimension mismatch");
  const std::vector<double> lw = log_mixture_weights(gmm);
  double nll = 0.0;
  for (std::size_t n = 0; n < features.rows(); ++n)
    nll -= log_sum_exp(component_scores(gmm, lw, features.row(n)));
  return nll;
}

AuxEval aux_eval(const AuxHeads& aux, const Matrix& posteriors,
                 const Matrix& target_true, const Matrix& target_pred) {
  check_targets(posteriors, target_true, target_pred);
  const std::size_t n_rows = posteriors.rows();
  const std::size_t n_out = aux.true_head.weights.rows();
  AuxEval ev{0.0, 0.0, 0.0, 0.0};
  for (std::size_t n = 0; n < n_rows; ++n) {
    for (std::size_t d = 0; d < n_out; ++d) {
      double u_true = aux.true_head.bias[d];
      double u_pred = aux.pred_head.bias[d];
      for (std::size_t m = 0; m < posteriors.cols(); ++m) {
        u_true += aux.true_head.weights(d, m) * posteriors(n, m);
        u_pred += aux.pred_head.weights(d, m) * posteriors(n, m);
      }
      ev.loss_true += softplus(u_true) - target_true(n, d) * u_true;
      ev.loss_pred += softplus(u_pred) - target_pred(n, d) * u_pred;
      ev.acc_true += (u_true >= 0.0) == (target_true(n, d) == 1.0) ? 1.0 : 0.0;
      ev.acc_pred += (u_pred >= 0.0) == (target_pred(n, d) == 1.0) ? 1.0 : 0.0;
    }
  }
  const double inv = 1.0 / static_cast<double>(n_rows * n_out);
  ev.loss_true *= inv;
  ev.loss_pred *= inv;
  ev.acc_true *= inv;
  ev.acc_pred *= inv;
  return ev;
}

double total_loss(const SliceParams& params, const Matrix& features,
                  const Matrix& target_true, const Matrix& target_pred,
                  const TrainConfig& config) {
  check_feature_shape(params, features);
  check_targets(features, target_true, target_pred);

  const Matrix r = responsibilities(params, features);
  const AuxEval ev = aux_eval(params.aux, r, target_true, target_pred);
  double aux_part = 0.0;
  if (config.enable_true_loss)
    aux_part += ev.loss_true;
  if (config.enable_pred_loss)
    aux_part += ev.loss_pred;

  if (params.variant == SliceVariant::linear) {
    if (!config.enable_true_loss && !config.enable_pred_loss)
      throw ConfigError("linear variant needs at least one aux loss enabled");
    return aux_part;
  }
  if (!config.enable_gmm_loss && !config.enable_true_loss && !config.enable_pred_loss)
    throw ConfigError("at least one loss term must be enabled");
  double loss = config.lambda * aux_part;
  if (config.enable_gmm_loss)
    loss += gmm_nll(params.gmm, features);
  return loss;
}

SliceGradients loss_gradients(const SliceParams& params, const Matrix& features,
                              const Matrix& target_true, const Matrix& target_pred,
                              const TrainConfig& config) {
  check_feature_shape(params, features);
  check_targets(features, target_true, target_pred);

  const bool is_gmm = params.variant == SliceVariant::gmm;
  if (is_gmm) {
    if (!config.enable_gmm_loss && !config.enable_true_loss && !config.enable_pred_loss)
      throw ConfigError("at least one loss term must be enabled");
  } else if (!config.enable_true_loss && !config.enable_pred_loss) {
    throw ConfigError("linear variant needs at least one aux loss enabled");
  }

  const std::size_t n_rows = features.rows();
  const std::size_t n_comp = is_gmm ? params.gmm.components()
                                    : params.slicer.weights.rows();
  const std::size_t n_out = params.aux.true_head.weights.rows();

  SliceGradients grads;
  grads.d_true_head.weights = Matrix(n_out, n_comp);
  grads.d_true_head.bias.assign(n_out, 0.0);
  grads.d_pred_head.weights = Matrix(n_out, n_comp);
  grads.d_pred_head.bias.assign(n_out, 0.0);
  if (is_gmm) {
    grads.d_means = Matrix(n_comp, params.gmm.dims());
    grads.d_log_vars = Matrix(n_comp, params.gmm.dims());
    grads.d_weight_logits.assign(n_comp, 0.0);
  } else {
    grads.d_slicer.weights = Matrix(n_comp, params.slicer.weights.cols());
    grads.d_slicer.bias.assign(n_comp, 0.0);
  }

  const Matrix r = responsibilities(params, features);

  // Aux losses reach the slicing parameters only through the posteriors.
  Matrix g_r(n_rows, n_comp);
  const double aux_scale = is_gmm ? config.lambda : 1.0;
  if (config.enable_true_loss && aux_scale != 0.0)
    aux_backward(params.aux.true_head, r, target_true, aux_scale,
                 grads.d_true_head, g_r);
  if (config.enable_pred_loss && aux_scale != 0.0)
    aux_backward(params.aux.pred_head, r, target_pred, aux_scale,
                 grads.d_pred_head, g_r);
  Matrix g_a = softmax_backward(r, g_r);

  if (!is_gmm) {
    for (std::size_t n = 0; n < n_rows; ++n)
      for (std::size_t j = 0; j < n_comp; ++j) {
        const double g = g_a(n, j);
        grads.d_slicer.bias[j] += g;
        for (std::size_t d = 0; d < params.slicer.weights.cols(); ++d)
          grads.d_slicer.weights(j, d) += g * features(n, d);
      }
    return grads;
  }

  // The mixture NLL contributes -r directly to the gradient of the
  // unnormalised log posteriors.
  if (config.enable_gmm_loss)
    for (std::size_t n = 0; n < n_rows; ++n)
      for (std::size_t j = 0; j < n_comp; ++j)
        g_a(n, j) -= r(n, j);

  std::vector<double> alpha = softmax(params.gmm.weight_logits);
  for (std::size_t n = 0; n < n_rows; ++n) {
    double g_a_sum = 0.0;
    for (std::size_t j = 0; j < n_comp; ++j)
      g_a_sum += g_a(n, j);
    for (std::size_t j = 0; j < n_comp; ++j) {
      const double g = g_a(n, j);
      grads.d_weight_logits[j] += g - alpha[j] * g_a_sum;
      for (std::size_t d = 0; d < params.gmm.dims(); ++d) {
        const double inv_var = std::exp(-params.gmm.log_vars(j, d));
        const double diff = features(n, d) - params.gmm.means(j, d);
        grads.d_means(j, d) += g * diff * inv_var;
        grads.d_log_vars(j, d) += g * 0.5 * (diff * diff * inv_var - 1.0);
      }
    }
  }
  return grads;
}

std::vector<double> flatten_params(const SliceParams& params) {
  std::vector<double> out;
  if (params.variant == SliceVariant::gmm) {
    append_matrix(out, params.gmm.means);
    append_matrix(out, params.gmm.log_vars);
    append_vector(out, params.gmm.weight_logits);
  } else {
    append_matrix(out, params.slicer.weights);
    append_vector(out, params.slicer.bias);
  }
  append_matrix(out, params.aux.true_head.weights);
  append_vector(out, params.aux.true_head.bias);
  append_matrix(out, params.aux.pred_head.weights);
  append_vector(out, params.aux.pred_head.bias);
  return out;
}

void unflatten_params(std::span<const double> values, SliceParams& params) {
  std::size_t pos = 0;
  if (params.variant == SliceVariant::gmm) {
    pos = take_matrix(values, pos, params.gmm.means);
    pos = take_matrix(values, pos, params.gmm.log_vars);
    pos = take_vector(values, pos, params.gmm.weight_logits);
  } else {
    pos = take_matrix(values, pos, params.slicer.weights);
    pos = take_vector(values, pos, params.slicer.bias);
  }
  pos = take_matrix(values, pos, params.aux.true_head.weights);
  pos = take_vector(values, pos, params.aux.true_head.bias);
  pos = take_matrix(values, pos, params.aux.pred_head.weights);
  pos = take_vector(values, pos, params.aux.pred_head.bias);
  if (pos != values.size())
    throw std::invalid_argument("unflatten_params: length mismatch");
}

std::vector<double> flatten_gradients(const SliceGradients& grads,
                                      const SliceParams& params) {
  std::vector<double> out;
  if (params.variant == SliceVariant::gmm) {
    append_matrix(out, grads.d_means);
    append_matrix(out, grads.d_log_vars);
    append_vector(out, grads.d_weight_logits);
  } else {
    append_matrix(out, grads.d_slicer.weights);
    append_vector(out, grads.d_slicer.bias);
  }
  append_matrix(out, grads.d_true_head.weights);
  append_vector(out, grads.d_true_head.bias);
  append_matrix(out, grads.d_pred_head.weights);
  append_vector(out, grads.d_pred_head.bias);
  return out;
}

SliceParams init_params(const Matrix& features, int t_g, SliceVariant variant,
                        Rng& rng, double variance_floor) {
  if (t_g < 1)
    throw std::invalid_argument("init_params: t_g must be at least 1");
  const std::size_t n = features.rows();
  const std::size_t dims = features.cols();
  if (n == 0 || dims == 0)
    throw PreconditionError("init_params: empty feature matrix");
  if (static_cast<std::size_t>(t_g) > n)
    throw PreconditionError("init_params: t_g exceeds the number of samples");

  SliceParams params;
  params.variant = variant;
  const std::size_t g = static_cast<std::size_t>(t_g);

  if (variant == SliceVariant::gmm) {
    // Farthest-point seeding: a random first row, then each next mean is the
    // unchosen row with the largest distance to its nearest chosen row.
    // Distance ties resolve to the lowest index.
    std::vector<std::size_t> chosen;
    std::vector<bool> is_chosen(n, false);
    std::vector<double> min_dist(n, INFINITY);
    std::size_t current = static_cast<std::size_t>(rng.uniform_int(n));
    chosen.push_back(current);
    is_chosen[current] = true;
    while (chosen.size() < g) {
      const auto last = features.row(current);
      std::size_t best = 0;
      double best_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        double dist = 0.0;
        const auto row = features.row(i);
        for (std::size_t d = 0; d < dims; ++d) {
          const double diff = row[d] - last[d];
          dist += diff * diff;
        }
        if (dist < min_dist[i])
          min_dist[i] = dist;
        if (!is_chosen[i] && min_dist[i] > best_dist) {
          best_dist = min_dist[i];
          best = i;
        }
      }
      current = best;
      chosen.push_back(current);
      is_chosen[current] = true;
    }

    params.gmm.means = Matrix(g, dims);
    for (std::size_t j = 0; j < g; ++j)
      for (std::size_t d = 0; d < dims; ++d)
        params.gmm.means(j, d) = features(chosen[j], d);

    params.gmm.log_vars = Matrix(g, dims);
    for (std::size_t d = 0; d < dims; ++d) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        mean += features(i, d);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = features(i, d) - mean;
        var += diff * diff;
      }
      var /= static_cast<double>(n);
      const double lv = std::log(std::max(var, variance_floor));
      for (std::size_t j = 0; j < g; ++j)
        params.gmm.log_vars(j, d) = lv;
    }
    params.gmm.weight_logits.assign(g, 0.0);
  } else {
    params.slicer.weights = Matrix(g, dims);
    for (double& w : params.slicer.weights.data())
      w = rng.uniform(-0.1, 0.1);
    params.slicer.bias.assign(g, 0.0);
  }

  params.aux.true_head.weights = Matrix(dims, g);
  for (double& w : params.aux.true_head.weights.data())
    w = rng.uniform(-0.1, 0.1);
  params.aux.true_head.bias.assign(dims, 0.0);
  params.aux.pred_head.weights = Matrix(dims, g);
  for (double& w : params.aux.pred_head.weights.data())
    w = rng.uniform(-0.1, 0.1);
  params.aux.pred_head.bias.assign(dims, 0.0);
  return params;
}

namespace {

SliceModel fit_impl(const EvalDump& dump, const ErrorSet& errs,
                    const ConceptFilter& filter, const TrainConfig& config,
                    SliceVariant variant) {
  config.validate();
  if (errs.indices.empty())
    throw PreconditionError("fit_slices: empty error set");

  const Matrix features = logit_features(dump, errs, filter.c_err);
  const std::size_t n = features.rows();
  const std::size_t k = filter.c_err.size();
  if (static_cast<std::size_t>(config.t_g) > n)
    throw PreconditionError("fit_slices: t_g exceeds the number of error samples");

  // Targets: per-concept error-set patterns of the true and the hardened
  // predicted concepts.
  const Matrix hard = harden(concept_probs(dump));
  Matrix target_true(n, k);
  Matrix target_pred(n, k);
  for (std::size_t row = 0; row < n; ++row) {
    const std::size_t sample = errs.indices[row];
    for (std::size_t i = 0; i < k; ++i) {
      target_true(row, i) = dump.concepts_true(sample, filter.c_err[i]);
      target_pred(row, i) = hard(sample, filter.c_err[i]);
    }
  }

  Rng rng(config.seed);
  SliceParams params = init_params(features, config.t_g, variant, rng,
                                   config.variance_floor);

  // Fail fast if the enabled-loss combination is unusable for this variant.
  (void)total_loss(params, features, target_true, target_pred, config);

  const double log_floor = std::log(config.variance_floor);
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<EpochStats> history;
  history.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.lr *
        std::pow(config.lr_decay_factor, epoch / config.lr_decay_every);
    rng.shuffle(order);

    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      const std::size_t rows = stop - start;
      Matrix fb(rows, k), tb(rows, k), pb(rows, k);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t src = order[start + r];
        for (std::size_t i = 0; i < k; ++i) {
          fb(r, i) = features(src, i);
          tb(r, i) = target_true(src, i);
          pb(r, i) = target_pred(src, i);
        }
      }
      const SliceGradients g = loss_gradients(params, fb, tb, pb, config);
      if (variant == SliceVariant::gmm) {
        for (std::size_t i = 0; i < params.gmm.means.size(); ++i) {
          params.gmm.means.data()[i] -= lr * g.d_means.data()[i];
          params.gmm.log_vars.data()[i] -= lr * g.d_log_vars.data()[i];
          if (params.gmm.log_vars.data()[i] < log_floor)
            params.gmm.log_vars.data()[i] = log_floor;
        }
        for (std::size_t j = 0; j < params.gmm.weight_logits.size(); ++j)
          params.gmm.weight_logits[j] -= lr * g.d_weight_logits[j];
      } else {
        for (std::size_t i = 0; i < params.slicer.weights.size(); ++i)
          params.slicer.weights.data()[i] -= lr * g.d_slicer.weights.data()[i];
        for (std::size_t j = 0; j < params.slicer.bias.size(); ++j)
          params.slicer.bias[j] -= lr * g.d_slicer.bias[j];
      }
      for (std::size_t i = 0; i < params.aux.true_head.weights.size(); ++i) {
        params.aux.true_head.weights.data()[i] -= lr * g.d_true_head.weights.data()[i];
        params.aux.pred_head.weights.data()[i] -= lr * g.d_pred_head.weights.data()[i];
      }
      for (std::size_t d = 0; d < params.aux.true_head.bias.size(); ++d) {
        params.aux.true_head.bias[d] -= lr * g.d_true_head.bias[d];
        params.aux.pred_head.bias[d] -= lr * g.d_pred_head.bias[d];
      }
    }

    const Matrix r_full = responsibilities(params, features);
    const AuxEval ev = aux_eval(params.aux, r_full, target_true, target_pred);
    const double l_gmm = variant == SliceVariant::gmm
                             ? gmm_nll(params.gmm, features)
                             : std::numeric_limits<double>::quiet_NaN();
    history.push_back({l_gmm, ev.loss_true, ev.loss_pred, ev.acc_true,
                       ev.acc_pred, lr});
  }

  SliceModel model;
  model.params = std::move(params);
  model.c_err = filter.c_err;
  model.config = config;
  model.history = std::move(history);
  return model;
}

}  // namespace

SliceModel fit_slices(const EvalDump& dump, const ErrorSet& errs,
                      const ConceptFilter& filter, const TrainConfig& config) {
  return fit_impl(dump, errs, filter, config, SliceVariant::gmm);
}

SliceModel fit_slices_linear(const EvalDump& dump, const ErrorSet& errs,
                             const ConceptFilter& filter, const TrainConfig& config) {
  return fit_impl(dump, errs, filter, config, SliceVariant::linear);
}

}  // namespace cbslice
