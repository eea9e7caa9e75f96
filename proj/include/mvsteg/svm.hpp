#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mvsteg/error.hpp"
#include "mvsteg/features.hpp"
#include "mvsteg/stream.hpp"

namespace mvsteg {

struct labeled_sample {
  feature_array features{};
  label lbl = label::cover;
  // Identifies the cover/stego pair the sample came from.
  int pair_id = 0;
};

inline double label_value(label l) { return l == label::stego ? 1.0 : -1.0; }

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
  return d;
}

inline double gaussian_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  if (!(gamma > 0)) throw invalid_argument("gamma must be positive");
  return std::exp(-gamma * squared_distance(x, y));
}

// Per-dimension min-max scaling to [0,1]; constant dimensions map to 0.
struct min_max_scaler {
  feature_array lo{};
  feature_array hi{};

  static min_max_scaler fit(std::span<const labeled_sample> samples) {
    min_max_scaler s;
    s.lo.fill(std::numeric_limits<double>::infinity());
    s.hi.fill(-std::numeric_limits<double>::infinity());
    for (const auto& x : samples)
      for (std::size_t d = 0; d < feature_dims; ++d) {
        s.lo[d] = std::min(s.lo[d], x.features[d]);
        s.hi[d] = std::max(s.hi[d], x.features[d]);
      }
    if (samples.empty()) {
      s.lo.fill(0);
      s.hi.fill(0);
    }
    return s;
  }

  feature_array apply(const feature_array& x) const {
    feature_array out{};
    for (std::size_t d = 0; d < feature_dims; ++d) {
      const double span = hi[d] - lo[d];
      out[d] = span > 0 ? (x[d] - lo[d]) / span : 0.0;
    }
    return out;
  }
};

struct smo_options {
  double tolerance = 1e-3;
  long max_iterations = 10'000'000;
};

// Dual solution: decision(x) = sum_i coef[i] * K(x_i, x) + bias, coef = alpha * y.
struct dual_solution {
  std::vector<double> alpha;
  double bias = 0;
  long iterations = 0;
};

// Soft-margin C-SVM dual via sequential minimal optimization, choosing the
// working pair by maximal violation with second-order gain (as in LIBSVM's
// WSS2). Deterministic: ties resolve to the lowest index.
//   min 1/2 a'Qa - e'a,  0 <= a_i <= c,  y'a = 0,  Q_ij = y_i y_j K_ij
inline dual_solution solve_svm_dual(std::span<const feature_array> x, std::span<const double> y, double c, double gamma,
                                    const smo_options& opt = {}) {
  const std::size_t n = x.size();
  if (n != y.size()) throw invalid_argument("sample and label counts differ");
  if (!(c > 0)) throw invalid_argument("penalty c must be positive");
  if (!(gamma > 0)) throw invalid_argument("gamma must be positive");
  bool has_pos = false, has_neg = false;
  for (double v : y) (v > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw single_class_input("training data must contain both labels");

  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      q[i * n + j] = q[j * n + i] = y[i] * y[j] * gaussian_kernel(x[i], x[j], gamma);
  auto Q = [&](std::size_t i, std::size_t j) { return q[i * n + j]; };

  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };
  constexpr double tau = 1e-12;

  long iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y[t] * grad[t];
      gmin = std::min(gmin, v);
      if (i == n) continue;
      const double b = gmax - v;
      if (b > 0) {
        double a = Q(i, i) + Q(t, t) - 2.0 * y[i] * y[t] * Q(i, t);
        if (a <= 0) a = tau;
        const double gain = b * b / a;
        if (gain > best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax - gmin < opt.tolerance) break;

    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_ai, dj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * di + Q(t, j) * dj;
  }

  // Bias from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  int n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2;
  return {std::move(alpha), -rho, iter};
}

struct svm_model {
  std::vector<feature_array> support_vectors;  // scaled
  std::vector<double> coef;                    // alpha_i * y_i
  double bias = 0;
  double gamma = 1;
  double c = 1;
  min_max_scaler scaler;

  double decision_scaled(const feature_array& scaled) const {
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) f += coef[i] * gaussian_kernel(support_vectors[i], scaled, gamma);
    return f;
  }
  double decision(const feature_array& raw) const { return decision_scaled(scaler.apply(raw)); }
  // Positive decision values are stego; zero counts as cover.
  label predict(const feature_array& raw) const { return decision(raw) > 0 ? label::stego : label::cover; }
};

// Fits the scaler on `samples`, then solves the dual on the scaled features.
inline svm_model train(std::span<const labeled_sample> samples, double c, double gamma, const smo_options& opt = {}) {
  svm_model m;
  m.c = c;
  m.gamma = gamma;
  m.scaler = min_max_scaler::fit(samples);
  std::vector<feature_array> x;
  std::vector<double> y;
  x.reserve(samples.size());
  for (const auto& s : samples) {
    x.push_back(m.scaler.apply(s.features));
    y.push_back(label_value(s.lbl));
  }
  const auto sol = solve_svm_dual(x, y, c, gamma, opt);
  m.bias = sol.bias;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (sol.alpha[i] > 0) {
      m.support_vectors.push_back(x[i]);
      m.coef.push_back(sol.alpha[i] * y[i]);
    }
  }
  return m;
}

inline double accuracy(const svm_model& m, std::span<const labeled_sample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) correct += m.predict(s.features) == s.lbl;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Model blob (little-endian): "MVSM" u16 version=1, u16 dims, f64 gamma,
// f64 c, f64 bias, dims x (f64 lo, f64 hi), u32 n_sv, n_sv x (f64 coef,
// dims x f64).

inline constexpr std::array<std::uint8_t, 4> model_magic = {'M', 'V', 'S', 'M'};
inline constexpr std::uint16_t model_version = 1;

namespace detail {

inline void put_f64(byte_writer& w, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  w.put(u);
}

inline double get_f64(byte_reader& r, const char* what) {
  const auto u = r.get<std::uint64_t>(what);
  double v;
  std::memcpy(&v, &u, sizeof v);
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_model(const svm_model& m) {
  detail::byte_writer w;
  w.put_bytes(model_magic);
  w.put(model_version);
  w.put(static_cast<std::uint16_t>(feature_dims));
  detail::put_f64(w, m.gamma);
  detail::put_f64(w, m.c);
  detail::put_f64(w, m.bias);
  for (std::size_t d = 0; d < feature_dims; ++d) {
    detail::put_f64(w, m.scaler.lo[d]);
    detail::put_f64(w, m.scaler.hi[d]);
  }
  w.put(static_cast<std::uint32_t>(m.support_vectors.size()));
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
    detail::put_f64(w, m.coef[i]);
    for (double v : m.support_vectors[i]) detail::put_f64(w, v);
  }
  return w.take();
}

inline svm_model deserialize_model(std::span<const std::uint8_t> bytes) {
  detail::byte_reader r(bytes);
  const auto magic = r.get_bytes(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), model_magic.begin())) throw magic_mismatch("not an MVSM model");
  const auto version = r.get<std::uint16_t>("version");
  if (version != model_version) throw version_unsupported("unsupported model version " + std::to_string(version));
  const auto dims = r.get<std::uint16_t>("dims");
  if (dims != feature_dims) throw malformed_stream("model has " + std::to_string(dims) + " dimensions", r.offset());
  svm_model m;
  m.gamma = detail::get_f64(r, "gamma");
  m.c = detail::get_f64(r, "c");
  m.bias = detail::get_f64(r, "bias");
  for (std::size_t d = 0; d < feature_dims; ++d) {
    m.scaler.lo[d] = detail::get_f64(r, "scaler");
    m.scaler.hi[d] = detail::get_f64(r, "scaler");
  }
  const auto n = r.get<std::uint32_t>("support vector count");
  r.need(static_cast<std::size_t>(n) * 8 * (feature_dims + 1), "support vectors");
  for (std::uint32_t i = 0; i < n; ++i) {
    m.coef.push_back(detail::get_f64(r, "coef"));
    feature_array sv{};
    for (auto& v : sv) v = detail::get_f64(r, "support vector");
    m.support_vectors.push_back(sv);
  }
  if (r.remaining() != 0) throw malformed_stream("trailing bytes after model", r.offset());
  return m;
}

}  // namespace mvsteg
