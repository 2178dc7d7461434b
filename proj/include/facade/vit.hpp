#pragma once

// Seeded-weight encoder/decoder forward pass (patch embedding, pre-norm
// transformer encoder, class-token mask decoder). Everything is templated on
// the scalar type so the same code runs on doubles and on forward-mode duals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "facade/image.hpp"
#include "facade/synth.hpp"

namespace facade::vit {

// Forward-mode dual number: value and directional derivative.
template <typename T>
struct Dual {
  T v{};
  T d{};

  Dual() = default;
  Dual(T value, T tangent = T{}) : v(value), d(tangent) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) { d = (d * o.v - v * o.d) / (o.v * o.v); v /= o.v; return *this; }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
  friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }

  friend Dual exp(const Dual& a) {
    const T e = std::exp(a.v);
    return {e, a.d * e};
  }
  friend Dual sqrt(const Dual& a) {
    const T s = std::sqrt(a.v);
    return {s, a.d / (T(2) * s)};
  }
  friend Dual erf(const Dual& a) {
    return {std::erf(a.v), a.d * T(2) / std::sqrt(T(3.14159265358979323846)) * std::exp(-a.v * a.v)};
  }
};

inline double value_of(double x) { return x; }
template <typename T>
T value_of(const Dual<T>& x) { return x.v; }

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("matrix: negative shape");
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const T& x) { return std::isfinite(value_of(x)); });
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix<T> out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

// a * b^T
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimensions differ");
  Matrix<T> out(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.rows(); ++j) {
      T s{};
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      out(i, j) = s;
    }
  return out;
}

template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
  Matrix<T> out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

// x * w + bias (bias is 1 x cols).
template <typename T>
Matrix<T> linear(const Matrix<T>& x, const Matrix<T>& w, const Matrix<T>& bias) {
  Matrix<T> out = matmul(x, w);
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) += bias(0, j);
  return out;
}

template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const Matrix<T>& gamma, const Matrix<T>& beta,
                     double eps = 1e-6) {
  using std::sqrt;
  Matrix<T> out(x.rows(), x.cols());
  const T n = T(static_cast<double>(x.cols()));
  for (int i = 0; i < x.rows(); ++i) {
    T mean{};
    for (int j = 0; j < x.cols(); ++j) mean += x(i, j);
    mean = mean / n;
    T var{};
    for (int j = 0; j < x.cols(); ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var = var / n;
    const T inv = T(1.0) / sqrt(var + T(eps));
    for (int j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean) * inv * gamma(0, j) + beta(0, j);
  }
  return out;
}

template <typename T>
void softmax_rows(Matrix<T>& m) {
  using std::exp;
  for (int i = 0; i < m.rows(); ++i) {
    T mx = m(i, 0);
    for (int j = 1; j < m.cols(); ++j)
      if (m(i, j) > mx) mx = m(i, j);
    T sum{};
    for (int j = 0; j < m.cols(); ++j) {
      m(i, j) = exp(m(i, j) - mx);
      sum += m(i, j);
    }
    for (int j = 0; j < m.cols(); ++j) m(i, j) = m(i, j) / sum;
  }
}

template <typename T>
T gelu(const T& x) {
  using std::erf;
  return T(0.5) * x * (T(1.0) + erf(x * T(0.7071067811865476)));
}

template <typename T>
struct LayerWeights {
  Matrix<T> ln1_gamma, ln1_beta;
  Matrix<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Matrix<T> ln2_gamma, ln2_beta;
  Matrix<T> w1, b1, w2, b2;
};

template <typename T>
struct WeightSet {
  Matrix<T> patch_proj;  // (P*P*3) x D
  Matrix<T> patch_bias;  // 1 x D
  Matrix<T> pos;         // N x D
  std::vector<LayerWeights<T>> encoder;
  std::vector<LayerWeights<T>> decoder;
  Matrix<T> class_tokens;  // K x D
};

struct VitConfig {
  int patch = 16;
  int dim = 64;
  int layers = 2;
  int heads = 4;
  int decoder_layers = 2;
  int decoder_heads = 8;
  int classes = cls::kCount;
  int mlp_ratio = 4;
  std::uint64_t seed = 0;

  void validate() const {
    if (patch != 8 && patch != 16 && patch != 32)
      throw std::invalid_argument("vit: patch size must be 8, 16 or 32");
    if (dim < 1 || layers < 0 || decoder_layers < 0 || classes < 1 || mlp_ratio < 1)
      throw std::invalid_argument("vit: invalid model size");
    if (heads < 1 || dim % heads != 0)
      throw std::invalid_argument("vit: dim must be divisible by encoder heads");
    if (decoder_heads < 1 || dim % decoder_heads != 0)
      throw std::invalid_argument("vit: dim must be divisible by decoder heads");
    if (classes > 256) throw std::invalid_argument("vit: at most 256 classes");
  }
};

inline constexpr int kChannels = 3;

namespace detail {

inline Matrix<double> normal_matrix(int r, int c, std::mt19937_64& rng, double std = 0.02) {
  std::normal_distribution<double> n(0.0, std);
  Matrix<double> m(r, c);
  for (auto& v : m.data()) v = n(rng);
  return m;
}

inline LayerWeights<double> make_layer(int dim, int hidden, std::mt19937_64& rng) {
  LayerWeights<double> l;
  l.ln1_gamma = Matrix<double>(1, dim, 1.0);
  l.ln1_beta = Matrix<double>(1, dim, 0.0);
  l.wq = normal_matrix(dim, dim, rng);
  l.wk = normal_matrix(dim, dim, rng);
  l.wv = normal_matrix(dim, dim, rng);
  l.wo = normal_matrix(dim, dim, rng);
  l.bq = l.bk = l.bv = l.bo = Matrix<double>(1, dim, 0.0);
  l.ln2_gamma = Matrix<double>(1, dim, 1.0);
  l.ln2_beta = Matrix<double>(1, dim, 0.0);
  l.w1 = normal_matrix(dim, hidden, rng);
  l.b1 = Matrix<double>(1, hidden, 0.0);
  l.w2 = normal_matrix(hidden, dim, rng);
  l.b2 = Matrix<double>(1, dim, 0.0);
  return l;
}

template <typename U, typename T>
Matrix<U> cast(const Matrix<T>& m) {
  Matrix<U> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) out.data()[i] = U(m.data()[i]);
  return out;
}

template <typename U, typename T>
LayerWeights<U> cast(const LayerWeights<T>& l) {
  return {cast<U>(l.ln1_gamma), cast<U>(l.ln1_beta), cast<U>(l.wq), cast<U>(l.bq),
          cast<U>(l.wk),        cast<U>(l.bk),       cast<U>(l.wv), cast<U>(l.bv),
          cast<U>(l.wo),        cast<U>(l.bo),       cast<U>(l.ln2_gamma), cast<U>(l.ln2_beta),
          cast<U>(l.w1),        cast<U>(l.b1),       cast<U>(l.w2), cast<U>(l.b2)};
}

}  // namespace detail

// Scaled-normal (std 0.02) weights, deterministic in (config, num_patches).
// Each tensor group draws from its own seed stream.
inline WeightSet<double> make_weights(const VitConfig& config, int num_patches) {
  config.validate();
  const int d = config.dim, hidden = config.mlp_ratio * config.dim;
  WeightSet<double> w;
  std::mt19937_64 patch_rng(split_seed(config.seed, 101));
  std::mt19937_64 pos_rng(split_seed(config.seed, 102));
  std::mt19937_64 enc_rng(split_seed(config.seed, 103));
  std::mt19937_64 dec_rng(split_seed(config.seed, 104));
  std::mt19937_64 cls_rng(split_seed(config.seed, 105));
  w.patch_proj = detail::normal_matrix(config.patch * config.patch * kChannels, d, patch_rng);
  w.patch_bias = Matrix<double>(1, d, 0.0);
  w.pos = detail::normal_matrix(num_patches, d, pos_rng);
  for (int i = 0; i < config.layers; ++i) w.encoder.push_back(detail::make_layer(d, hidden, enc_rng));
  for (int i = 0; i < config.decoder_layers; ++i)
    w.decoder.push_back(detail::make_layer(d, hidden, dec_rng));
  w.class_tokens = detail::normal_matrix(config.classes, d, cls_rng);
  return w;
}

template <typename U, typename T>
WeightSet<U> cast_weights(const WeightSet<T>& w) {
  WeightSet<U> out;
  out.patch_proj = detail::cast<U>(w.patch_proj);
  out.patch_bias = detail::cast<U>(w.patch_bias);
  out.pos = detail::cast<U>(w.pos);
  for (const auto& l : w.encoder) out.encoder.push_back(detail::cast<U>(l));
  for (const auto& l : w.decoder) out.decoder.push_back(detail::cast<U>(l));
  out.class_tokens = detail::cast<U>(w.class_tokens);
  return out;
}

// Non-overlapping P x P patches in row-major patch order; each row is one
// patch flattened channel-last ((py * P + px) * C + c).
inline Matrix<double> patchify(const ImageBuffer& img, int patch) {
  if (patch < 1 || img.width() % patch != 0 || img.height() % patch != 0)
    throw std::invalid_argument("patchify: image " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " not divisible by patch " +
                                std::to_string(patch));
  const int gw = img.width() / patch, gh = img.height() / patch, c = img.channels();
  Matrix<double> out(gw * gh, patch * patch * c);
  for (int gy = 0; gy < gh; ++gy)
    for (int gx = 0; gx < gw; ++gx)
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px)
          for (int ch = 0; ch < c; ++ch)
            out(gy * gw + gx, (py * patch + px) * c + ch) =
                img.at(gx * patch + px, gy * patch + py, ch);
  return out;
}

inline ImageBuffer unpatchify(const Matrix<double>& patches, int patch, int width, int height,
                              int channels) {
  ImageBuffer img(width, height, channels);
  const int gw = width / patch;
  if (patches.rows() != gw * (height / patch) || patches.cols() != patch * patch * channels)
    throw std::invalid_argument("unpatchify: shape mismatch");
  for (int r = 0; r < patches.rows(); ++r)
    for (int py = 0; py < patch; ++py)
      for (int px = 0; px < patch; ++px)
        for (int ch = 0; ch < channels; ++ch)
          img.at((r % gw) * patch + px, (r / gw) * patch + py, ch) =
              static_cast<float>(patches(r, (py * patch + px) * channels + ch));
  return img;
}

// Attention probabilities of every head, recorded for inspection.
struct AttentionTrace {
  std::vector<Matrix<double>> probabilities;
};

// softmax(Q K^T / sqrt(d)) V per head, heads concatenated, then projected.
template <typename T>
Matrix<T> msa(const Matrix<T>& x, const LayerWeights<T>& w, int heads, AttentionTrace* trace = nullptr) {
  using std::sqrt;
  if (!x.all_finite()) throw std::domain_error("msa: non-finite input");
  const int dim = x.cols();
  if (heads < 1 || dim % heads != 0) throw std::invalid_argument("msa: dim not divisible by heads");
  const int hd = dim / heads;
  const Matrix<T> q = linear(x, w.wq, w.bq);
  const Matrix<T> k = linear(x, w.wk, w.bk);
  const Matrix<T> v = linear(x, w.wv, w.bv);
  const T scale = T(1.0 / std::sqrt(static_cast<double>(hd)));
  Matrix<T> concat(x.rows(), dim);
  for (int h = 0; h < heads; ++h) {
    Matrix<T> scores(x.rows(), x.rows());
    for (int i = 0; i < x.rows(); ++i)
      for (int j = 0; j < x.rows(); ++j) {
        T s{};
        for (int c = 0; c < hd; ++c) s += q(i, h * hd + c) * k(j, h * hd + c);
        scores(i, j) = s * scale;
      }
    softmax_rows(scores);
    if (trace) {
      Matrix<double> p(scores.rows(), scores.cols());
      for (std::size_t i = 0; i < p.data().size(); ++i) p.data()[i] = value_of(scores.data()[i]);
      trace->probabilities.push_back(std::move(p));
    }
    for (int i = 0; i < x.rows(); ++i)
      for (int c = 0; c < hd; ++c) {
        T s{};
        for (int j = 0; j < x.rows(); ++j) s += scores(i, j) * v(j, h * hd + c);
        concat(i, h * hd + c) = s;
      }
  }
  return linear(concat, w.wo, w.bo);
}

template <typename T>
Matrix<T> mlp(const Matrix<T>& x, const LayerWeights<T>& w) {
  Matrix<T> h = linear(x, w.w1, w.b1);
  for (auto& v : h.data()) v = gelu(v);
  return linear(h, w.w2, w.b2);
}

// a = MSA(LN(s)) + s; s' = MLP(LN(a)) + a.
template <typename T>
Matrix<T> transformer_layer(const Matrix<T>& s, const LayerWeights<T>& w, int heads,
                            AttentionTrace* trace = nullptr) {
  const Matrix<T> a = add(msa(layer_norm(s, w.ln1_gamma, w.ln1_beta), w, heads, trace), s);
  return add(mlp(layer_norm(a, w.ln2_gamma, w.ln2_beta), w), a);
}

template <typename T>
Matrix<T> encoder_forward(Matrix<T> s, std::span<const LayerWeights<T>> layers, int heads,
                          AttentionTrace* trace = nullptr) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    s = transformer_layer(s, layers[i], heads, trace);
    if (!s.all_finite())
      throw std::domain_error("encoder: non-finite activation after layer " + std::to_string(i));
  }
  return s;
}

// s_0 = patches * E + b (+ pos).
template <typename T>
Matrix<T> embed(const Matrix<T>& patches, const WeightSet<T>& w, bool with_pos = true) {
  Matrix<T> x = linear(patches, w.patch_proj, w.patch_bias);
  if (!with_pos) return x;
  if (w.pos.rows() != x.rows()) throw std::invalid_argument("embed: positional table size mismatch");
  return add(x, w.pos);
}

// Joint decoding of [s_L; z_0], then scores = s_{L,M} * z_M^T (N x K).
template <typename T>
Matrix<T> decode_mask(const Matrix<T>& s_l, const WeightSet<T>& w, const VitConfig& config,
                      AttentionTrace* trace = nullptr) {
  const int n = s_l.rows(), k = w.class_tokens.rows(), d = s_l.cols();
  if (w.class_tokens.cols() != d) throw std::invalid_argument("decode_mask: class token width mismatch");
  Matrix<T> joint(n + k, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) joint(i, j) = s_l(i, j);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) joint(n + i, j) = w.class_tokens(i, j);
  for (const auto& layer : w.decoder) joint = transformer_layer(joint, layer, config.decoder_heads, trace);
  Matrix<T> patches(n, d), classes(k, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) patches(i, j) = joint(i, j);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) classes(i, j) = joint(n + i, j);
  return matmul_nt(patches, classes);
}

// Grayscale inputs are replicated to three channels; intensities scaled to [0, 1].
inline Matrix<double> prepare_patches(const ImageBuffer& img, int patch) {
  ImageBuffer rgb = img;
  if (img.channels() == 1) {
    rgb = ImageBuffer(img.width(), img.height(), 3);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = img.at(x, y);
  }
  Matrix<double> p = patchify(rgb, patch);
  for (auto& v : p.data()) v /= 255.0;
  return p;
}

template <typename T>
Matrix<T> forward_scores(const Matrix<T>& patches, const WeightSet<T>& w, const VitConfig& config,
                         AttentionTrace* trace = nullptr) {
  const Matrix<T> s0 = embed(patches, w);
  const Matrix<T> s_l = encoder_forward(s0, std::span<const LayerWeights<T>>(w.encoder), config.heads, trace);
  return decode_mask(s_l, w, config, trace);
}

// Bilinear (half-pixel centred) upsampling of a gh x gw x K score grid, then
// per-pixel argmax with ties to the lower class.
inline LabelMask upsample_argmax(const Matrix<double>& scores, int grid_w, int grid_h, int patch,
                                 int classes) {
  const int width = grid_w * patch, height = grid_h * patch;
  LabelMask mask(width, height, classes);
  std::vector<double> acc(classes);
  for (int y = 0; y < height; ++y) {
    const double sy = std::clamp((y + 0.5) / patch - 0.5, 0.0, static_cast<double>(grid_h - 1));
    const int y0 = static_cast<int>(std::floor(sy)), y1 = std::min(y0 + 1, grid_h - 1);
    const double fy = sy - y0;
    for (int x = 0; x < width; ++x) {
      const double sx = std::clamp((x + 0.5) / patch - 0.5, 0.0, static_cast<double>(grid_w - 1));
      const int x0 = static_cast<int>(std::floor(sx)), x1 = std::min(x0 + 1, grid_w - 1);
      const double fx = sx - x0;
      int best = 0;
      for (int k = 0; k < classes; ++k) {
        acc[k] = (1 - fy) * ((1 - fx) * scores(y0 * grid_w + x0, k) + fx * scores(y0 * grid_w + x1, k)) +
                 fy * ((1 - fx) * scores(y1 * grid_w + x0, k) + fx * scores(y1 * grid_w + x1, k));
        if (acc[k] > acc[best]) best = k;
      }
      mask.at(x, y) = static_cast<std::uint8_t>(best);
    }
  }
  return mask;
}

inline LabelMask segment_forward(const ImageBuffer& img, const VitConfig& config) {
  config.validate();
  const Matrix<double> patches = prepare_patches(img, config.patch);
  const auto weights = make_weights(config, patches.rows());
  const Matrix<double> scores = forward_scores(patches, weights, config);
  return upsample_argmax(scores, img.width() / config.patch, img.height() / config.patch, config.patch,
                         config.classes);
}

}  // namespace facade::vit
