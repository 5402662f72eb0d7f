#pragma once

// Differentiable primitives. Each op computes its value eagerly and, when
// any input requires grad, records a backward closure on the tape.
//
// Shapes: rank-0/1 tensors act as one row. Elementwise ops need identical
// shapes; the only broadcast is add_row_bias.

#include "calm/rng.hpp"
#include "calm/tensor.hpp"

namespace calm::ops {

/// Rows with a smaller norm are rejected by cosine_rows.
inline constexpr double kNormFloor = 1e-12;
/// Floor applied to probabilities before every log in the losses.
inline constexpr double kProbFloor = 1e-12;

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor transpose(Tape& tape, const Tensor& a);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
/// x[m×n] + bias broadcast over rows; bias is [n] or [1×n].
Tensor add_row_bias(Tape& tape, const Tensor& x, const Tensor& bias);
Tensor scale(Tape& tape, const Tensor& x, double factor);
/// x · s for a one-element tensor s (gradient flows to s).
Tensor scale_by(Tape& tape, const Tensor& x, const Tensor& s);
Tensor add_scalar(Tape& tape, const Tensor& x, double c);

Tensor exp(Tape& tape, const Tensor& x);
/// Natural log; non-positive entries are a numeric-domain error.
Tensor log(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
Tensor relu(Tape& tape, const Tensor& x);
Tensor square(Tape& tape, const Tensor& x);
/// max(x, floor); gradient passes only where x > floor.
Tensor clamp_min(Tape& tape, const Tensor& x, double floor);

Tensor softmax_rows(Tape& tape, const Tensor& x);
Tensor log_softmax_rows(Tape& tape, const Tensor& x);
/// Pairwise cosine similarity of the rows of x[m×d] and y[n×d] -> [m×n].
Tensor cosine_rows(Tape& tape, const Tensor& x, const Tensor& y);

/// Mean over rows -> [1×n].
Tensor mean_rows(Tape& tape, const Tensor& x);
/// Mean over consecutive groups of `group` rows: [g·r × n] -> [r × n].
Tensor group_mean_rows(Tape& tape, const Tensor& x, std::size_t group);
/// Sum of all entries -> scalar.
Tensor sum(Tape& tape, const Tensor& x);
/// Mean of all entries -> scalar.
Tensor mean(Tape& tape, const Tensor& x);

/// Inverted dropout with an explicit mask (entries 0 or 1/(1-rate)).
/// Replaying the same mask makes the forward deterministic.
Tensor dropout(Tape& tape, const Tensor& x, const Tensor& mask);
Tensor make_dropout_mask(const Shape& shape, double rate, Rng& rng);

Tensor reshape(Tape& tape, const Tensor& x, Shape shape);

}  // namespace calm::ops
