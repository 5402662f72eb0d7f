#include "calm/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "calm/error.hpp"
#include "calm/kernels.hpp"

namespace calm::ops {

namespace {

// Grad sink through a copied handle; the span aliases shared storage.
std::span<double> sink(Tensor t) { return t.grad_sink(); }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void require_finite(const char* op, std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string(op) + ": non-finite input");
  }
}

template <typename F>
Tensor map(const Tensor& x, F f) {
  std::vector<double> out(x.size());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return Tensor(x.shape(), std::move(out));
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_string(a.shape()) + " · " +
                         shape_string(b.shape()));
  }
  std::vector<double> c(m * n);
  kernels::gemm_nn(m, k, n, a.data(), b.data(), c);
  Tensor out({m, n}, std::move(c));
  return tape.record(out, {a, b}, [a, b, m, k, n](std::span<const double> g) {
    std::vector<double> tmp;
    if (auto ga = sink(a); !ga.empty()) {
      tmp.resize(m * k);
      kernels::gemm_nt(m, n, k, g, b.data(), tmp);  // dC·Bᵀ
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += tmp[i];
    }
    if (auto gb = sink(b); !gb.empty()) {
      tmp.resize(k * n);
      kernels::gemm_tn(k, m, n, a.data(), g, tmp);  // Aᵀ·dC
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += tmp[i];
    }
  });
}

Tensor transpose(Tape& tape, const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> t(m * n);
  const auto in = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t[j * m + i] = in[i * n + j];
  Tensor out({n, m}, std::move(t));
  return tape.record(out, {a}, [a, m, n](std::span<const double> g) {
    auto ga = sink(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
  });
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  Tensor out(a.shape(), std::move(v));
  return tape.record(out, {a, b}, [a, b](std::span<const double> g) {
    if (auto ga = sink(a); !ga.empty())
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (auto gb = sink(b); !gb.empty())
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  Tensor out(a.shape(), std::move(v));
  return tape.record(out, {a, b}, [a, b](std::span<const double> g) {
    if (auto ga = sink(a); !ga.empty())
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (auto gb = sink(b); !gb.empty())
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  Tensor out(a.shape(), std::move(v));
  return tape.record(out, {a, b}, [a, b](std::span<const double> g) {
    if (auto ga = sink(a); !ga.empty())
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
    if (auto gb = sink(b); !gb.empty())
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
  });
}

Tensor add_row_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  const std::size_t m = x.rows(), n = x.cols();
  if (bias.rows() != 1 || bias.cols() != n) {
    throw DimensionError("add_row_bias: bias " + shape_string(bias.shape()) +
                         " does not match rows of " + shape_string(x.shape()));
  }
  std::vector<double> v(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = x[i * n + j] + bias[j];
  Tensor out(x.shape(), std::move(v));
  return tape.record(out, {x, bias}, [x, bias, m, n](std::span<const double> g) {
    if (auto gx = sink(x); !gx.empty())
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    if (auto gb = sink(bias); !gb.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
  });
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  Tensor out = map(x, [factor](double v) { return v * factor; });
  return tape.record(out, {x}, [x, factor](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

Tensor scale_by(Tape& tape, const Tensor& x, const Tensor& s) {
  if (s.size() != 1) throw DimensionError("scale_by: factor must have one element, got " +
                                          shape_string(s.shape()));
  const double factor = s[0];
  Tensor out = map(x, [factor](double v) { return v * factor; });
  return tape.record(out, {x, s}, [x, s, factor](std::span<const double> g) {
    if (auto gx = sink(x); !gx.empty())
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
    if (auto gs = sink(s); !gs.empty()) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * x[i];
      gs[0] += acc;
    }
  });
}

Tensor add_scalar(Tape& tape, const Tensor& x, double c) {
  Tensor out = map(x, [c](double v) { return v + c; });
  return tape.record(out, {x}, [x](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Tensor exp(Tape& tape, const Tensor& x) {
  Tensor out = map(x, [](double v) { return std::exp(v); });
  require_finite("exp", out.data());
  return tape.record(out, {x}, [x, out](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * out[i];
  });
}

Tensor log(Tape& tape, const Tensor& x) {
  for (double v : x.data()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw NumericError("log: argument outside (0, inf)");
  }
  Tensor out = map(x, [](double v) { return std::log(v); });
  return tape.record(out, {x}, [x](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / x[i];
  });
}

Tensor tanh(Tape& tape, const Tensor& x) {
  Tensor out = map(x, [](double v) { return std::tanh(v); });
  return tape.record(out, {x}, [x, out](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - out[i] * out[i]);
  });
}

Tensor relu(Tape& tape, const Tensor& x) {
  Tensor out = map(x, [](double v) { return v > 0.0 ? v : 0.0; });
  return tape.record(out, {x}, [x](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += x[i] > 0.0 ? g[i] : 0.0;
  });
}

Tensor square(Tape& tape, const Tensor& x) {
  Tensor out = map(x, [](double v) { return v * v; });
  return tape.record(out, {x}, [x](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += 2.0 * x[i] * g[i];
  });
}

Tensor clamp_min(Tape& tape, const Tensor& x, double floor) {
  Tensor out = map(x, [floor](double v) { return v > floor ? v : floor; });
  return tape.record(out, {x}, [x, floor](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += x[i] > floor ? g[i] : 0.0;
  });
}

Tensor softmax_rows(Tape& tape, const Tensor& x) {
  require_finite("softmax_rows", x.data());
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> y(m * n);
  kernels::softmax_rows(m, n, x.data(), y);
  Tensor out(x.shape(), std::move(y));
  return tape.record(out, {x}, [x, out, m, n](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[i * n + j] * out[i * n + j];
      for (std::size_t j = 0; j < n; ++j)
        gx[i * n + j] += out[i * n + j] * (g[i * n + j] - dot);
    }
  });
}

Tensor log_softmax_rows(Tape& tape, const Tensor& x) {
  require_finite("log_softmax_rows", x.data());
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> y(m * n), p(m * n);
  const auto in = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = in.data() + i * n;
    const double mx = *std::max_element(xi, xi + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += std::exp(xi[j] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t j = 0; j < n; ++j) {
      y[i * n + j] = xi[j] - lse;
      p[i * n + j] = std::exp(y[i * n + j]);
    }
  }
  Tensor out(x.shape(), std::move(y));
  return tape.record(out, {x}, [x, probs = std::move(p), m, n](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < m; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += g[i * n + j];
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += g[i * n + j] - probs[i * n + j] * total;
    }
  });
}

Tensor cosine_rows(Tape& tape, const Tensor& x, const Tensor& y) {
  const std::size_t m = x.rows(), n = y.rows(), d = x.cols();
  if (y.cols() != d) {
    throw DimensionError("cosine_rows: feature dimensions disagree, " + shape_string(x.shape()) +
                         " vs " + shape_string(y.shape()));
  }
  std::vector<double> nx(m), ny(n);
  kernels::row_norms(m, d, x.data(), nx);
  kernels::row_norms(n, d, y.data(), ny);
  for (std::size_t i = 0; i < m; ++i)
    if (!(nx[i] >= kNormFloor))
      throw DegenerateVectorError("cosine_rows: row " + std::to_string(i) + " of x has zero norm");
  for (std::size_t j = 0; j < n; ++j)
    if (!(ny[j] >= kNormFloor))
      throw DegenerateVectorError("cosine_rows: row " + std::to_string(j) + " of y has zero norm");

  std::vector<double> c(m * n);
  kernels::cosine_matrix(m, n, d, x.data(), nx, y.data(), ny, c);
  Tensor out({m, n}, std::move(c));
  return tape.record(out, {x, y}, [x, y, out, nx, ny, m, n, d](std::span<const double> g) {
    // d c_ij / d x_i = (ŷ_j - c_ij x̂_i) / ‖x_i‖, symmetric for y.
    if (auto gx = sink(x); !gx.empty()) {
      for (std::size_t i = 0; i < m; ++i) {
        double gc = 0.0;
        for (std::size_t j = 0; j < n; ++j) gc += g[i * n + j] * out[i * n + j];
        for (std::size_t p = 0; p < d; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * y[j * d + p] / ny[j];
          gx[i * d + p] += (acc - gc * x[i * d + p] / nx[i]) / nx[i];
        }
      }
    }
    if (auto gy = sink(y); !gy.empty()) {
      for (std::size_t j = 0; j < n; ++j) {
        double gc = 0.0;
        for (std::size_t i = 0; i < m; ++i) gc += g[i * n + j] * out[i * n + j];
        for (std::size_t p = 0; p < d; ++p) {
          double acc = 0.0;
          for (std::size_t i = 0; i < m; ++i) acc += g[i * n + j] * x[i * d + p] / nx[i];
          gy[j * d + p] += (acc - gc * y[j * d + p] / ny[j]) / ny[j];
        }
      }
    }
  });
}

Tensor mean_rows(Tape& tape, const Tensor& x) {
  const std::size_t m = x.rows();
  if (m == 0 || x.size() == 0) throw EmptyInputError("mean_rows: no rows");
  Tensor r = group_mean_rows(tape, x, m);
  return r;
}

Tensor group_mean_rows(Tape& tape, const Tensor& x, std::size_t group) {
  const std::size_t m = x.rows(), n = x.cols();
  if (group == 0 || m == 0) throw EmptyInputError("group_mean_rows: empty group");
  if (m % group != 0) {
    throw DimensionError("group_mean_rows: " + std::to_string(m) +
                         " rows not divisible by group " + std::to_string(group));
  }
  const std::size_t r = m / group;
  std::vector<double> v(r * n, 0.0);
  for (std::size_t q = 0; q < r; ++q) {
    for (std::size_t t = 0; t < group; ++t)
      for (std::size_t j = 0; j < n; ++j) v[q * n + j] += x[(q * group + t) * n + j];
    for (std::size_t j = 0; j < n; ++j) v[q * n + j] /= static_cast<double>(group);
  }
  Tensor out({r, n}, std::move(v));
  return tape.record(out, {x}, [x, r, n, group](std::span<const double> g) {
    auto gx = sink(x);
    const double w = 1.0 / static_cast<double>(group);
    for (std::size_t q = 0; q < r; ++q)
      for (std::size_t t = 0; t < group; ++t)
        for (std::size_t j = 0; j < n; ++j) gx[(q * group + t) * n + j] += g[q * n + j] * w;
  });
}

Tensor sum(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor out = Tensor::scalar(total);
  return tape.record(out, {x}, [x](std::span<const double> g) {
    auto gx = sink(x);
    for (auto& v : gx) v += g[0];
  });
}

Tensor mean(Tape& tape, const Tensor& x) {
  if (x.size() == 0) throw EmptyInputError("mean: empty tensor");
  double total = 0.0;
  for (double v : x.data()) total += v;
  const double inv = 1.0 / static_cast<double>(x.size());
  Tensor out = Tensor::scalar(total * inv);
  return tape.record(out, {x}, [x, inv](std::span<const double> g) {
    auto gx = sink(x);
    for (auto& v : gx) v += g[0] * inv;
  });
}

Tensor dropout(Tape& tape, const Tensor& x, const Tensor& mask) {
  require_same_shape("dropout", x, mask);
  return mul(tape, x, mask);
}

Tensor make_dropout_mask(const Shape& shape, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ContractError("dropout rate must be in [0, 1)");
  const std::size_t n = shape_size(shape);
  std::vector<double> m(n, 1.0);
  if (rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - rate);
    for (auto& v : m) v = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return Tensor(shape, std::move(m));
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
  }
  Tensor out(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
  return tape.record(out, {x}, [x](std::span<const double> g) {
    auto gx = sink(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

}  // namespace calm::ops
