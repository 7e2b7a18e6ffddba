#include "pc3/net.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pc3/types.hpp"

namespace pc3 {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEpsilon = 1e-8;
constexpr char kMagic[8] = {'P', 'C', '3', 'H', 'E', 'A', 'D', '1'};

ParamBlock make_block(std::size_t size) {
  ParamBlock block;
  block.value.assign(size, 0.0);
  block.m.assign(size, 0.0);
  block.v.assign(size, 0.0);
  return block;
}

void fill_uniform(std::vector<double>& values, double limit, Rng& rng) {
  for (double& v : values) {
    v = rng.uniform(-limit, limit);
  }
}

void check_input(const HeadParameters& p, std::span<const double> feat_x,
                 std::span<const double> feat_r) {
  if (feat_x.size() != p.input_dim || feat_r.size() != p.input_dim) {
    throw ValidationError("feature dimension mismatch: head expects " +
                          std::to_string(p.input_dim) + ", got " +
                          std::to_string(feat_x.size()) + " and " +
                          std::to_string(feat_r.size()));
  }
}

void adam_update(std::vector<double>& value, std::vector<double>& m,
                 std::vector<double>& v, const std::vector<double>& grad,
                 double lambda, double inv_bias1, double inv_bias2,
                 const char* block_name) {
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) {
      throw NumericError(std::string("non-finite gradient in ") + block_name +
                         "[" + std::to_string(i) + "]");
    }
    m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
    v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
    const double m_hat = m[i] * inv_bias1;
    const double v_hat = v[i] * inv_bias2;
    value[i] -= lambda * m_hat / (std::sqrt(v_hat) + kEpsilon);
  }
}

void put_u64(std::ostream& os, std::uint64_t x) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  }
  os.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char bytes[8];
  is.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) {
    x |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  }
  return x;
}

void put_array(std::ostream& os, const std::vector<double>& values) {
  for (double v : values) {
    put_u64(os, std::bit_cast<std::uint64_t>(v));
  }
}

void get_array(std::istream& is, std::vector<double>& values) {
  for (double& v : values) {
    v = std::bit_cast<double>(get_u64(is));
  }
}

void put_block(std::ostream& os, const ParamBlock& block) {
  put_array(os, block.value);
  put_array(os, block.m);
  put_array(os, block.v);
}

void get_block(std::istream& is, ParamBlock& block) {
  get_array(is, block.value);
  get_array(is, block.m);
  get_array(is, block.v);
}

}  // namespace

GradientBundle zero_gradients(const HeadParameters& params) {
  GradientBundle g;
  g.w1.assign(params.w1.value.size(), 0.0);
  g.b1.assign(params.b1.value.size(), 0.0);
  g.w2.assign(params.w2.value.size(), 0.0);
  g.b2.assign(params.b2.value.size(), 0.0);
  g.w3.assign(params.w3.value.size(), 0.0);
  g.b3.assign(params.b3.value.size(), 0.0);
  return g;
}

HeadParameters head_init(std::size_t input_dim, std::size_t hidden1,
                         std::size_t hidden2, Rng& rng) {
  if (input_dim < 1 || hidden1 < 1 || hidden2 < 1) {
    throw ValidationError("head dimensions must be >= 1");
  }
  HeadParameters p;
  p.input_dim = input_dim;
  p.hidden1 = hidden1;
  p.hidden2 = hidden2;
  p.w1 = make_block(input_dim * hidden1);
  p.b1 = make_block(hidden1);
  p.w2 = make_block(hidden1 * hidden2);
  p.b2 = make_block(hidden2);
  p.w3 = make_block(hidden2);
  p.b3 = make_block(1);
  fill_uniform(p.w1.value,
               std::sqrt(6.0 / static_cast<double>(input_dim + hidden1)), rng);
  fill_uniform(p.w2.value,
               std::sqrt(6.0 / static_cast<double>(hidden1 + hidden2)), rng);
  fill_uniform(p.w3.value, std::sqrt(6.0 / static_cast<double>(hidden2 + 1)),
               rng);
  return p;
}

double s_theta_forward(const HeadParameters& p, std::span<const double> feat_x,
                       std::span<const double> feat_r, ForwardTape* tape) {
  check_input(p, feat_x, feat_r);
  const std::size_t d = p.input_dim;
  const std::size_t h1 = p.hidden1;
  const std::size_t h2 = p.hidden2;

  std::vector<double> diff(d);
  for (std::size_t i = 0; i < d; ++i) {
    diff[i] = feat_x[i] - feat_r[i];
  }

  std::vector<double> z1(p.b1.value);
  for (std::size_t i = 0; i < d; ++i) {
    const double x = diff[i];
    const double* row = p.w1.value.data() + i * h1;
    for (std::size_t j = 0; j < h1; ++j) {
      z1[j] += x * row[j];
    }
  }
  std::vector<double> a1(h1);
  for (std::size_t j = 0; j < h1; ++j) {
    a1[j] = z1[j] > 0.0 ? z1[j] : 0.0;
  }

  std::vector<double> z2(p.b2.value);
  for (std::size_t j = 0; j < h1; ++j) {
    const double x = a1[j];
    if (x == 0.0) {
      continue;
    }
    const double* row = p.w2.value.data() + j * h2;
    for (std::size_t k = 0; k < h2; ++k) {
      z2[k] += x * row[k];
    }
  }
  std::vector<double> a2(h2);
  for (std::size_t k = 0; k < h2; ++k) {
    a2[k] = z2[k] > 0.0 ? z2[k] : 0.0;
  }

  double score = p.b3.value[0];
  for (std::size_t k = 0; k < h2; ++k) {
    score += a2[k] * p.w3.value[k];
  }

  if (tape != nullptr) {
    tape->step_stamp = p.step;
    tape->diff = std::move(diff);
    tape->z1 = std::move(z1);
    tape->a1 = std::move(a1);
    tape->z2 = std::move(z2);
    tape->a2 = std::move(a2);
    tape->score = score;
  }
  return score;
}

void s_theta_backward_into(const HeadParameters& p, const ForwardTape& tape,
                           double upstream_grad, GradientBundle& out) {
  if (tape.step_stamp != p.step) {
    throw ValidationError(
        "stale tape: forward pass was taken at optimizer step " +
        std::to_string(tape.step_stamp) + ", parameters are at step " +
        std::to_string(p.step));
  }
  const std::size_t d = p.input_dim;
  const std::size_t h1 = p.hidden1;
  const std::size_t h2 = p.hidden2;
  if (tape.diff.size() != d || tape.a1.size() != h1 || tape.a2.size() != h2) {
    throw ValidationError("tape shape does not match head parameters");
  }

  out.b3[0] += upstream_grad;
  std::vector<double> delta2(h2);
  for (std::size_t k = 0; k < h2; ++k) {
    out.w3[k] += upstream_grad * tape.a2[k];
    delta2[k] = tape.z2[k] > 0.0 ? upstream_grad * p.w3.value[k] : 0.0;
  }

  std::vector<double> delta1(h1, 0.0);
  for (std::size_t j = 0; j < h1; ++j) {
    const double a = tape.a1[j];
    const double* w_row = p.w2.value.data() + j * h2;
    double* g_row = out.w2.data() + j * h2;
    double acc = 0.0;
    for (std::size_t k = 0; k < h2; ++k) {
      g_row[k] += delta2[k] * a;
      acc += w_row[k] * delta2[k];
    }
    delta1[j] = tape.z1[j] > 0.0 ? acc : 0.0;
  }
  for (std::size_t k = 0; k < h2; ++k) {
    out.b2[k] += delta2[k];
  }
  for (std::size_t j = 0; j < h1; ++j) {
    out.b1[j] += delta1[j];
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double x = tape.diff[i];
    double* g_row = out.w1.data() + i * h1;
    for (std::size_t j = 0; j < h1; ++j) {
      g_row[j] += delta1[j] * x;
    }
  }
}

GradientBundle s_theta_backward(const HeadParameters& p,
                                const ForwardTape& tape,
                                double upstream_grad) {
  GradientBundle out = zero_gradients(p);
  s_theta_backward_into(p, tape, upstream_grad, out);
  return out;
}

void optimizer_step(HeadParameters& p, const GradientBundle& grads,
                    double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("learning rate must be finite and >= 0");
  }
  if (grads.w1.size() != p.w1.value.size() ||
      grads.b1.size() != p.b1.value.size() ||
      grads.w2.size() != p.w2.value.size() ||
      grads.b2.size() != p.b2.value.size() ||
      grads.w3.size() != p.w3.value.size() ||
      grads.b3.size() != p.b3.value.size()) {
    throw ValidationError("gradient bundle shape does not match parameters");
  }
  const std::uint64_t t = p.step + 1;
  const double inv_bias1 = 1.0 / (1.0 - std::pow(kBeta1, static_cast<double>(t)));
  const double inv_bias2 = 1.0 / (1.0 - std::pow(kBeta2, static_cast<double>(t)));
  adam_update(p.w1.value, p.w1.m, p.w1.v, grads.w1, lambda, inv_bias1,
              inv_bias2, "w1");
  adam_update(p.b1.value, p.b1.m, p.b1.v, grads.b1, lambda, inv_bias1,
              inv_bias2, "b1");
  adam_update(p.w2.value, p.w2.m, p.w2.v, grads.w2, lambda, inv_bias1,
              inv_bias2, "w2");
  adam_update(p.b2.value, p.b2.m, p.b2.v, grads.b2, lambda, inv_bias1,
              inv_bias2, "b2");
  adam_update(p.w3.value, p.w3.m, p.w3.v, grads.w3, lambda, inv_bias1,
              inv_bias2, "w3");
  adam_update(p.b3.value, p.b3.m, p.b3.v, grads.b3, lambda, inv_bias1,
              inv_bias2, "b3");
  p.step = t;
}

void save_head(const HeadParameters& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  os.write(kMagic, sizeof(kMagic));
  put_u64(os, p.input_dim);
  put_u64(os, p.hidden1);
  put_u64(os, p.hidden2);
  put_u64(os, p.step);
  put_block(os, p.w1);
  put_block(os, p.b1);
  put_block(os, p.w2);
  put_block(os, p.b2);
  put_block(os, p.w3);
  put_block(os, p.b3);
  if (!os) {
    throw ValidationError("failed writing head checkpoint to '" + path + "'");
  }
}

HeadParameters load_head(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw ValidationError("cannot open head checkpoint '" + path + "'");
  }
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("'" + path + "' is not a head checkpoint");
  }
  HeadParameters p;
  p.input_dim = get_u64(is);
  p.hidden1 = get_u64(is);
  p.hidden2 = get_u64(is);
  p.step = get_u64(is);
  if (!is || p.input_dim < 1 || p.hidden1 < 1 || p.hidden2 < 1) {
    throw ValidationError("head checkpoint '" + path + "' has invalid shape");
  }
  p.w1 = make_block(p.input_dim * p.hidden1);
  p.b1 = make_block(p.hidden1);
  p.w2 = make_block(p.hidden1 * p.hidden2);
  p.b2 = make_block(p.hidden2);
  p.w3 = make_block(p.hidden2);
  p.b3 = make_block(1);
  get_block(is, p.w1);
  get_block(is, p.b1);
  get_block(is, p.w2);
  get_block(is, p.b2);
  get_block(is, p.w3);
  get_block(is, p.b3);
  if (!is) {
    throw ValidationError("head checkpoint '" + path + "' is truncated");
  }
  is.peek();
  if (!is.eof()) {
    throw ValidationError("head checkpoint '" + path +
                          "' has trailing bytes");
  }
  return p;
}

}  // namespace pc3
