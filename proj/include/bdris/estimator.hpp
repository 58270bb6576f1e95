#pragma once

// Single-layer quadratic network: real embedding of TRPs, loss and gradient,
// cosine-annealed gradient descent with validation-based weight selection,
// and recovery of the autocorrelation matrix from the trained weights.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bdris/channel.hpp"
#include "bdris/common.hpp"
#include "bdris/model.hpp"
#include "bdris/trp_select.hpp"

namespace bdris {

/// x = [Re v̄; Im v̄].
struct RealInput {
  RVector entries;
};

struct WeightMatrix {
  RMatrix entries;  // (2n) x 2
};

/// [[Re h̄, Im h̄], [Im h̄, -Re h̄]].
struct RealChannelMatrix {
  RMatrix entries;

  WeightMatrix as_weights() const { return {entries}; }
};

enum class Normalization { mean_power, none };

struct TrainConfig {
  double train_fraction = 0.8;
  int max_iterations = 5000;
  double lr_max = 0.1;
  double lr_min = 1e-4;
  int cosine_period = 1000;
  int batch_size = 32;
  double init_scale = 0.01;
  Normalization normalization = Normalization::mean_power;
  std::uint64_t seed = 1;
  int validation_every = 1;

  void validate() const {
    detail::require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must be in (0,1)");
    detail::require(max_iterations > 0, "max_iterations must be positive");
    detail::require(lr_max > 0.0, "lr_max must be positive");
    detail::require(lr_min >= 0.0 && lr_min <= lr_max, "lr_min must be in [0, lr_max]");
    detail::require(cosine_period > 0, "cosine_period must be positive");
    detail::require(batch_size > 0, "batch_size must be positive");
    detail::require(init_scale > 0.0, "init_scale must be positive");
    detail::require(validation_every > 0, "validation_every must be positive");
  }
};

struct HistoryPoint {
  int iteration = 0;
  double train_loss = 0.0;
  double validation_error = std::numeric_limits<double>::quiet_NaN();  // NaN when not evaluated
  double learning_rate = 0.0;
};

struct TrainResult {
  WeightMatrix best_weights;
  double best_validation_error = std::numeric_limits<double>::infinity();
  int best_iteration = -1;
  std::vector<HistoryPoint> history;
  double normalization_factor = 1.0;
  int train_size = 0;
  int validation_size = 0;
};

inline RealInput embed(const TrpVector& v) {
  const auto n = v.size();
  RealInput x{RVector(2 * n)};
  x.entries.head(n) = v.entries.real();
  x.entries.tail(n) = v.entries.imag();
  return x;
}

inline RealChannelMatrix structured_weights(const CascadedChannel& h) {
  const auto n = h.entries.size();
  RealChannelMatrix r{RMatrix(2 * n, 2)};
  r.entries.block(0, 0, n, 1) = h.entries.real();
  r.entries.block(0, 1, n, 1) = h.entries.imag();
  r.entries.block(n, 0, n, 1) = h.entries.imag();
  r.entries.block(n, 1, n, 1) = -h.entries.real();
  return r;
}

/// ||x^T W||^2.
inline double forward(const RealInput& x, const WeightMatrix& w) {
  detail::require(w.entries.cols() == 2 && x.entries.size() == w.entries.rows(),
                  "forward: input length " + std::to_string(x.entries.size()) +
                      " does not match weights " + std::to_string(w.entries.rows()) + "x" +
                      std::to_string(w.entries.cols()));
  return (x.entries.transpose() * w.entries).squaredNorm();
}

namespace detail {

// Inputs packed as columns of a (2n) x B matrix.
inline RMatrix pack_inputs(std::span<const RealInput> inputs, Eigen::Index rows) {
  RMatrix x(rows, static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    require(inputs[i].entries.size() == rows, "input length does not match weights");
    x.col(static_cast<Eigen::Index>(i)) = inputs[i].entries;
  }
  return x;
}

inline void check_batch(std::span<const RealInput> inputs, std::span<const double> targets,
                        const WeightMatrix& w) {
  require(!inputs.empty(), "empty batch");
  require(inputs.size() == targets.size(), "inputs and targets differ in length");
  require(w.entries.cols() == 2, "weights must have two columns");
}

// Mean squared residual of the packed batch.
inline double packed_loss(const RMatrix& x, const RVector& y, const RMatrix& w) {
  const RVector f = (x.transpose() * w).rowwise().squaredNorm();
  return (f - y).squaredNorm() / static_cast<double>(y.size());
}

// (4/B) * sum_d (f_d - y_d) x_d x_d^T W
inline RMatrix packed_gradient(const RMatrix& x, const RVector& y, const RMatrix& w,
                               double* loss_out = nullptr) {
  const RMatrix p = x.transpose() * w;  // B x 2
  const RVector r = p.rowwise().squaredNorm() - y;
  const double b = static_cast<double>(y.size());
  if (loss_out) *loss_out = r.squaredNorm() / b;
  return (4.0 / b) * (x * (r.asDiagonal() * p));
}

}  // namespace detail

inline double loss(std::span<const RealInput> inputs, std::span<const double> targets,
                   const WeightMatrix& w) {
  detail::check_batch(inputs, targets, w);
  const RMatrix x = detail::pack_inputs(inputs, w.entries.rows());
  const RVector y = Eigen::Map<const RVector>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  return detail::packed_loss(x, y, w.entries);
}

/// Gradient of `loss` with respect to W.
inline RMatrix gradient(std::span<const RealInput> inputs, std::span<const double> targets,
                        const WeightMatrix& w) {
  detail::check_batch(inputs, targets, w);
  const RMatrix x = detail::pack_inputs(inputs, w.entries.rows());
  const RVector y = Eigen::Map<const RVector>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  return detail::packed_gradient(x, y, w.entries);
}

/// Cosine annealing with a restart every cosine_period steps.
inline double lr_schedule(long long t, const TrainConfig& cfg) {
  detail::require(t >= 0, "iteration index must be nonnegative");
  const double phase = static_cast<double>(t % cfg.cosine_period) / cfg.cosine_period;
  return cfg.lr_min +
         0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(std::numbers::pi * phase));
}

/// Mini-batch gradient descent on (TRP, power) pairs. The data are shuffled
/// once with cfg.seed, the first round(train_fraction * D) samples train and
/// the rest validate; the returned weights are the snapshot with the lowest
/// validation error.
inline TrainResult train(const TrpSet& trps, std::span<const PowerMeasurement> measurements,
                         const TrainConfig& cfg) {
  cfg.validate();
  const int d = trps.size();
  detail::require(d >= 2, "train: need at least two samples");
  detail::require(static_cast<int>(measurements.size()) == d,
                  "train: measurement count does not match TRP count");
  for (int i = 0; i < d; ++i) {
    detail::require(measurements[i].trp_index == i, "train: measurement order does not match TRPs");
  }
  const int d0 = static_cast<int>(std::lround(cfg.train_fraction * d));
  detail::require(d0 >= 1, "train: training split is empty");
  detail::require(d0 < d, "train: validation split is empty");
  detail::require(cfg.batch_size <= d0, "train: batch_size exceeds training split");

  Rng rng(cfg.seed);
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const Eigen::Index rows = 2 * trps.selected.front().size();
  RMatrix x_train(rows, d0), x_val(rows, d - d0);
  RVector y_train(d0), y_val(d - d0);
  for (int i = 0; i < d; ++i) {
    const int src = order[i];
    detail::require(trps.selected[src].size() * 2 == rows, "train: mixed TRP lengths");
    const RealInput x = embed(trps.selected[src]);
    if (i < d0) {
      x_train.col(i) = x.entries;
      y_train(i) = measurements[src].power;
    } else {
      x_val.col(i - d0) = x.entries;
      y_val(i - d0) = measurements[src].power;
    }
  }

  TrainResult result;
  result.train_size = d0;
  result.validation_size = d - d0;
  if (cfg.normalization == Normalization::mean_power) {
    const double mean = y_train.mean();
    result.normalization_factor = mean > 0.0 ? mean : 1.0;
  }
  y_train /= result.normalization_factor;
  y_val /= result.normalization_factor;

  std::normal_distribution<double> init(0.0, cfg.init_scale);
  RMatrix w(rows, 2);
  for (Eigen::Index c = 0; c < 2; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) w(r, c) = init(rng);
  result.best_weights.entries = w;

  std::vector<int> batch_order(d0);
  std::iota(batch_order.begin(), batch_order.end(), 0);
  std::shuffle(batch_order.begin(), batch_order.end(), rng);
  int cursor = 0;

  RMatrix xb(rows, cfg.batch_size);
  RVector yb(cfg.batch_size);
  result.history.reserve(cfg.max_iterations);

  for (int t = 0; t < cfg.max_iterations; ++t) {
    for (int b = 0; b < cfg.batch_size; ++b) {
      if (cursor == d0) {
        std::shuffle(batch_order.begin(), batch_order.end(), rng);
        cursor = 0;
      }
      xb.col(b) = x_train.col(batch_order[cursor]);
      yb(b) = y_train(batch_order[cursor]);
      ++cursor;
    }
    HistoryPoint point;
    point.iteration = t;
    point.learning_rate = lr_schedule(t, cfg);
    const RMatrix grad = detail::packed_gradient(xb, yb, w, &point.train_loss);
    w -= point.learning_rate * grad;

    if ((t + 1) % cfg.validation_every == 0 || t + 1 == cfg.max_iterations) {
      point.validation_error = detail::packed_loss(x_val, y_val, w);
      if (point.validation_error < result.best_validation_error) {
        result.best_validation_error = point.validation_error;
        result.best_iteration = t;
        result.best_weights.entries = w;
      }
    }
    result.history.push_back(point);
    // Diverged; later iterates cannot recover.
    if (!std::isfinite(point.train_loss) || !w.allFinite()) break;
  }
  return result;
}

/// Ĝ from S = W W^T, scaled by normalization_factor. Blocks S11, S12, S21,
/// S22 are n x n with n = rows / 2. Index 0 has no imaginary input
/// (v̄_0 = 1), so row n of W is never trained; entries touching index 0 use
/// only S11 and S12 row 0, all others average the two redundant blocks:
///   Ĝ = (S11 + S22)/2 + j (S21 - S12)/2.
/// Exact for W = structured_weights(h̄) and invariant under W -> W Q.
inline AutocorrelationMatrix recover_autocorrelation(const WeightMatrix& w,
                                                     double normalization_factor = 1.0) {
  detail::require(w.entries.cols() == 2 && w.entries.rows() % 2 == 0 && w.entries.rows() > 0,
                  "recover_autocorrelation: weights must be (2n) x 2");
  const Eigen::Index n = w.entries.rows() / 2;
  const RMatrix s = w.entries * w.entries.transpose();
  const auto s11 = s.topLeftCorner(n, n);
  const auto s12 = s.topRightCorner(n, n);
  const auto s21 = s.bottomLeftCorner(n, n);
  const auto s22 = s.bottomRightCorner(n, n);

  CMatrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      g(i, j) = cplx(0.5 * (s11(i, j) + s22(i, j)), 0.5 * (s21(i, j) - s12(i, j)));
  g(0, 0) = cplx(s11(0, 0), 0.0);
  for (Eigen::Index j = 1; j < n; ++j) {
    g(0, j) = cplx(s11(0, j), -s12(0, j));
    g(j, 0) = std::conj(g(0, j));
  }
  return {normalization_factor * g};
}

inline void write_history_csv(const TrainResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "iteration,train_loss,validation_error,learning_rate\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : result.history) {
    out << p.iteration << ',' << p.train_loss << ',';
    if (!std::isnan(p.validation_error)) out << p.validation_error;
    out << ',' << p.learning_rate << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace bdris
