#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pc3/rng.hpp"

namespace pc3 {

// One weight or bias array together with its adaptive-moment accumulators.
struct ParamBlock {
  std::vector<double> value;
  std::vector<double> m;
  std::vector<double> v;
};

// The learnable relative quality measure: a feature difference is fed through
// three fully connected layers (D -> H1 -> H2 -> 1) with rectified-linear
// hidden units and a linear output.
struct HeadParameters {
  std::size_t input_dim = 0;
  std::size_t hidden1 = 0;
  std::size_t hidden2 = 0;
  std::uint64_t step = 0;  // optimizer step counter; also stamps tapes
  ParamBlock w1;           // input_dim x hidden1, row-major
  ParamBlock b1;           // hidden1
  ParamBlock w2;           // hidden1 x hidden2, row-major
  ParamBlock b2;           // hidden2
  ParamBlock w3;           // hidden2
  ParamBlock b3;           // 1
};

// Gradients shaped exactly like the value arrays of HeadParameters.
struct GradientBundle {
  std::vector<double> w1, b1, w2, b2, w3, b3;
};

GradientBundle zero_gradients(const HeadParameters& params);

// Cached activations from one forward pass. step_stamp pins the tape to the
// parameter revision it was computed with; backward rejects stale tapes.
struct ForwardTape {
  std::uint64_t step_stamp = 0;
  std::vector<double> diff;
  std::vector<double> z1, a1;
  std::vector<double> z2, a2;
  double score = 0.0;
};

// Weights drawn uniform on +-sqrt(6 / (fan_in + fan_out)), biases and
// moments zero.
HeadParameters head_init(std::size_t input_dim, std::size_t hidden1,
                         std::size_t hidden2, Rng& rng);

// score = w3 . relu(W2^T relu(W1^T (feat_x - feat_r) + b1) + b2) + b3.
// Pure; never mutates params. Pass a tape to enable a backward pass.
double s_theta_forward(const HeadParameters& params,
                       std::span<const double> feat_x,
                       std::span<const double> feat_r,
                       ForwardTape* tape = nullptr);

// Exact analytic gradient of the score w.r.t. every parameter, scaled by
// upstream_grad. Throws ValidationError on a stale or mismatched tape.
GradientBundle s_theta_backward(const HeadParameters& params,
                                const ForwardTape& tape, double upstream_grad);
void s_theta_backward_into(const HeadParameters& params,
                           const ForwardTape& tape, double upstream_grad,
                           GradientBundle& out);

// Adam update, decay rates 0.9 / 0.999, epsilon 1e-8. lambda >= 0 (a zero
// rate advances moments and the counter without moving parameters). Throws
// NumericError on non-finite gradients.
void optimizer_step(HeadParameters& params, const GradientBundle& grads,
                    double lambda);

// Binary checkpoint: magic "PC3HEAD1", then input_dim, hidden1, hidden2 and
// the step counter as little-endian u64, then the blocks w1 b1 w2 b2 w3 b3,
// each as value/m/v arrays of little-endian IEEE-754 doubles.
void save_head(const HeadParameters& params, const std::string& path);
HeadParameters load_head(const std::string& path);

}  // namespace pc3
