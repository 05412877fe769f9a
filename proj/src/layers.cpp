#include "tempcast/layers.hpp"

#include <cmath>
#include <random>

#include "kernels.hpp"
#include "tempcast/error.hpp"

namespace tempcast {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void apply_activation(std::span<double> values, Activation act) {
  switch (act) {
    case Activation::linear: return;
    case Activation::relu:
      for (double& v : values) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::sigmoid:
      for (double& v : values) v = kernels::sigmoid(v);
      return;
    case Activation::tanh:
      for (double& v : values) v = std::tanh(v);
      return;
  }
}

// grad ⊙ act'(z), with the derivative expressed through the activation output.
Tensor activation_backward(const Tensor& grad_out, const Tensor& output, Activation act) {
  Tensor dz = grad_out;
  auto g = dz.values();
  auto y = output.values();
  switch (act) {
    case Activation::linear: break;
    case Activation::relu:
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!(y[i] > 0.0)) g[i] = 0.0;
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i] * (1.0 - y[i]);
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - y[i] * y[i];
      break;
  }
  return dz;
}

void require_rank(const Tensor& x, std::size_t rank, const char* layer, const char* layout) {
  if (x.rank() != rank)
    fail(ErrorCode::shape_mismatch, std::string(layer) + " expects input " + layout + ", got " +
                                        shape_string(x.shape()));
}

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace

std::string layer_kind(const LayerSpec& spec) {
  return std::visit(overloaded{
                        [](const Conv1DSpec&) { return std::string("conv1d"); },
                        [](const LstmSpec&) { return std::string("lstm"); },
                        [](const DenseSpec&) { return std::string("dense"); },
                        [](const LambdaScaleSpec&) { return std::string("lambda_scale"); },
                        [](const GlobalAvgPoolSpec&) { return std::string("global_avg_pool"); },
                        [](const FlattenSpec&) { return std::string("flatten"); },
                    },
                    spec);
}

std::size_t parameter_count(const LayerSpec& spec) {
  return std::visit(
      overloaded{
          [](const Conv1DSpec& s) {
            return s.kernel_size * s.in_channels * s.filters + s.filters;
          },
          [](const LstmSpec& s) { return 4 * (s.inputs * s.units + s.units * s.units + s.units); },
          [](const DenseSpec& s) { return s.inputs * s.units + s.units; },
          [](const auto&) { return std::size_t{0}; },
      },
      spec);
}

Shape output_shape(const LayerSpec& spec, const Shape& in) {
  const std::string kind = layer_kind(spec);
  auto mismatch = [&](const std::string& expected) -> Shape {
    fail(ErrorCode::shape_mismatch,
         kind + " expects per-sample input " + expected + ", got " + shape_string(in));
  };
  return std::visit(
      overloaded{
          [&](const Conv1DSpec& s) -> Shape {
            if (in.size() != 2 || in[1] != s.in_channels)
              return mismatch("[T×" + std::to_string(s.in_channels) + "]");
            if (in[0] < s.kernel_size)
              fail(ErrorCode::window_too_long, "conv1d kernel width " +
                                                   std::to_string(s.kernel_size) +
                                                   " exceeds sequence length " +
                                                   std::to_string(in[0]));
            return {in[0] - s.kernel_size + 1, s.filters};
          },
          [&](const LstmSpec& s) -> Shape {
            if (in.size() != 2 || in[1] != s.inputs)
              return mismatch("[T×" + std::to_string(s.inputs) + "]");
            if (s.return_sequences) return {in[0], s.units};
            return {s.units};
          },
          [&](const DenseSpec& s) -> Shape {
            if (in.size() != 1 || in[0] != s.inputs)
              return mismatch("[" + std::to_string(s.inputs) + "]");
            return {s.units};
          },
          [&](const LambdaScaleSpec&) -> Shape { return in; },
          [&](const GlobalAvgPoolSpec&) -> Shape {
            if (in.size() != 2) return mismatch("[T×C]");
            return {in[1]};
          },
          [&](const FlattenSpec&) -> Shape { return {shape_size(in)}; },
      },
      spec);
}

std::size_t Layer::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

void Layer::require_cache(const char* name, const Shape& grad_shape) const {
  if (!cached_)
    fail(ErrorCode::missing_cache,
         std::string(name) + " backward called without a preceding forward");
  if (grad_shape != cached_out_shape_)
    fail(ErrorCode::shape_mismatch, std::string(name) + " backward: gradient shape " +
                                        shape_string(grad_shape) +
                                        " does not match forward output " +
                                        shape_string(cached_out_shape_));
}

std::unique_ptr<Layer> init_layer(const LayerSpec& spec, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) fail(ErrorCode::invalid_dimension, std::string(what) + " must be positive");
  };
  return std::visit(
      overloaded{
          [&](const Conv1DSpec& s) -> std::unique_ptr<Layer> {
            positive(s.in_channels, "conv1d in_channels");
            positive(s.filters, "conv1d filters");
            positive(s.kernel_size, "conv1d kernel_size");
            auto k = glorot_uniform({s.kernel_size, s.in_channels, s.filters},
                                    s.kernel_size * s.in_channels, s.kernel_size * s.filters, rng);
            return std::make_unique<Conv1DLayer>(std::move(k), Tensor({s.filters}), s.activation);
          },
          [&](const LstmSpec& s) -> std::unique_ptr<Layer> {
            positive(s.inputs, "lstm inputs");
            positive(s.units, "lstm units");
            const std::size_t gates = 4 * s.units;
            auto w = glorot_uniform({s.inputs, gates}, s.inputs, gates, rng);
            auto r = glorot_uniform({s.units, gates}, s.units, gates, rng);
            Tensor b({gates});
            for (std::size_t u = 0; u < s.units; ++u) b[s.units + u] = 1.0;
            return std::make_unique<LstmLayer>(std::move(w), std::move(r), std::move(b),
                                               s.return_sequences);
          },
          [&](const DenseSpec& s) -> std::unique_ptr<Layer> {
            positive(s.inputs, "dense inputs");
            positive(s.units, "dense units");
            auto w = glorot_uniform({s.inputs, s.units}, s.inputs, s.units, rng);
            return std::make_unique<DenseLayer>(std::move(w), Tensor({s.units}), s.activation);
          },
          [&](const LambdaScaleSpec& s) -> std::unique_ptr<Layer> {
            return std::make_unique<LambdaScaleLayer>(s.scale, s.offset);
          },
          [&](const GlobalAvgPoolSpec&) -> std::unique_ptr<Layer> {
            return std::make_unique<GlobalAvgPoolLayer>();
          },
          [&](const FlattenSpec&) -> std::unique_ptr<Layer> {
            return std::make_unique<FlattenLayer>();
          },
      },
      spec);
}

// ---------------------------------------------------------------------------
// Conv1D

Conv1DLayer::Conv1DLayer(Tensor kernels, Tensor bias, Activation act) : act_(act) {
  if (kernels.rank() != 3 || bias.rank() != 1 || bias.dim(0) != kernels.dim(2))
    fail(ErrorCode::shape_mismatch, "conv1d parameters must be kernels [K×C_in×F] and bias [F], got " +
                                        shape_string(kernels.shape()) + " and " +
                                        shape_string(bias.shape()));
  params_ = {std::move(kernels), std::move(bias)};
}

LayerSpec Conv1DLayer::spec() const {
  const auto& k = params_[0];
  return Conv1DSpec{k.dim(1), k.dim(2), k.dim(0), act_};
}

Tensor Conv1DLayer::forward(const Tensor& x) {
  require_rank(x, 3, "conv1d", "[B×T×C_in]");
  const Tensor& kern = params_[0];
  const Tensor& bias = params_[1];
  const std::size_t batch = x.dim(0), steps = x.dim(1), channels = x.dim(2);
  const std::size_t width = kern.dim(0), filters = kern.dim(2);
  if (channels != kern.dim(1))
    fail(ErrorCode::shape_mismatch, "conv1d expects " + std::to_string(kern.dim(1)) +
                                        " input channels, got input " + shape_string(x.shape()));
  if (steps < width)
    fail(ErrorCode::window_too_long, "conv1d kernel width " + std::to_string(width) +
                                         " exceeds sequence length " + std::to_string(steps));
  const std::size_t out_steps = steps - width + 1;
  Tensor out({batch, out_steps, filters});
  for (std::size_t b = 0; b < batch; ++b) {
    double* o = out.data() + b * out_steps * filters;
    for (std::size_t t = 0; t < out_steps; ++t)
      std::copy(bias.data(), bias.data() + filters, o + t * filters);
    // Row t of the im2col matrix is the contiguous block x[b][t..t+K) of length K·C.
    kernels::gemm_acc(x.data() + b * steps * channels, channels, kern.data(), filters, o, filters,
                      out_steps, width * channels, filters);
  }
  apply_activation(out.values(), act_);
  input_ = x;
  output_ = out;
  cached_ = true;
  cached_out_shape_ = out.shape();
  return out;
}

LayerGradients Conv1DLayer::backward(const Tensor& grad_out) const {
  require_cache("conv1d", grad_out.shape());
  const Tensor& kern = params_[0];
  const std::size_t batch = input_.dim(0), steps = input_.dim(1), channels = input_.dim(2);
  const std::size_t width = kern.dim(0), filters = kern.dim(2);
  const std::size_t out_steps = steps - width + 1;
  const std::size_t patch = width * channels;

  const Tensor dz = activation_backward(grad_out, output_, act_);
  LayerGradients g{Tensor(input_.shape()), {Tensor(kern.shape()), Tensor({filters})}};
  std::vector<double> kern_t(patch * filters);
  kernels::transpose(kern.data(), patch, filters, kern_t.data());

  for (std::size_t b = 0; b < batch; ++b) {
    const double* dz_b = dz.data() + b * out_steps * filters;
    const double* x_b = input_.data() + b * steps * channels;
    kernels::gemm_at_acc(x_b, channels, dz_b, filters, g.params[0].data(), filters, out_steps,
                         patch, filters);
    for (std::size_t t = 0; t < out_steps; ++t)
      for (std::size_t f = 0; f < filters; ++f) g.params[1][f] += dz_b[t * filters + f];
    // Overlapping output rows: row t scatters into x[b][t..t+K).
    kernels::gemm_acc(dz_b, filters, kern_t.data(), patch, g.input.data() + b * steps * channels,
                      channels, out_steps, filters, patch);
  }
  return g;
}

std::unique_ptr<Layer> Conv1DLayer::clone() const { return std::make_unique<Conv1DLayer>(*this); }

void Conv1DLayer::clear_cache() {
  Layer::clear_cache();
  input_ = Tensor();
  output_ = Tensor();
}

// ---------------------------------------------------------------------------
// LSTM

LstmLayer::LstmLayer(Tensor input_weights, Tensor recurrent_weights, Tensor bias,
                     bool return_sequences)
    : return_sequences_(return_sequences) {
  if (input_weights.rank() != 2 || recurrent_weights.rank() != 2 || bias.rank() != 1)
    fail(ErrorCode::shape_mismatch, "lstm parameters must be rank 2, 2 and 1");
  inputs_ = input_weights.dim(0);
  units_ = recurrent_weights.dim(0);
  const std::size_t gates = 4 * units_;
  if (input_weights.dim(1) != gates || recurrent_weights.dim(1) != gates || bias.dim(0) != gates)
    fail(ErrorCode::shape_mismatch,
         "lstm parameters must be [in×4U], [U×4U], [4U]; got " +
             shape_string(input_weights.shape()) + ", " +
             shape_string(recurrent_weights.shape()) + ", " + shape_string(bias.shape()));
  params_ = {std::move(input_weights), std::move(recurrent_weights), std::move(bias)};
}

LayerSpec LstmLayer::spec() const { return LstmSpec{inputs_, units_, return_sequences_}; }

Tensor LstmLayer::forward(const Tensor& x) {
  require_rank(x, 3, "lstm", "[B×T×in]");
  if (x.dim(2) != inputs_)
    fail(ErrorCode::shape_mismatch, "lstm expects " + std::to_string(inputs_) +
                                        " input features, got input " + shape_string(x.shape()));
  const std::size_t batch = x.dim(0), steps = x.dim(1), units = units_, gates = 4 * units_;
  const Tensor& w = params_[0];
  const Tensor& r = params_[1];
  const Tensor& bias = params_[2];

  gates_.resize(batch * steps * gates);
  cells_.resize(batch * steps * units);
  cell_tanh_.resize(batch * steps * units);
  hidden_.resize(batch * steps * units);

  // Input projections for every (b, t) row at once; the recurrent term is
  // added step by step below. Each gate value sums bias, then x·W, then h·R.
  for (std::size_t row = 0; row < batch * steps; ++row)
    std::copy(bias.data(), bias.data() + gates, gates_.data() + row * gates);
  kernels::gemm_acc(x.data(), inputs_, w.data(), gates, gates_.data(), gates, batch * steps,
                    inputs_, gates);

  const std::size_t gate_stride = steps * gates, unit_stride = steps * units;
  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0)
      kernels::gemm_acc(hidden_.data() + (t - 1) * units, unit_stride, r.data(), gates,
                        gates_.data() + t * gates, gate_stride, batch, units, gates);
    for (std::size_t b = 0; b < batch; ++b) {
      double* zb = gates_.data() + b * gate_stride + t * gates;
      const std::size_t row = b * unit_stride + t * units;
      const double* c_prev = t > 0 ? cells_.data() + row - units : nullptr;
      for (std::size_t u = 0; u < units; ++u) {
        const double i = kernels::sigmoid(zb[u]);
        const double f = kernels::sigmoid(zb[units + u]);
        const double g = std::tanh(zb[2 * units + u]);
        const double o = kernels::sigmoid(zb[3 * units + u]);
        zb[u] = i;
        zb[units + u] = f;
        zb[2 * units + u] = g;
        zb[3 * units + u] = o;
        const double c = (c_prev ? f * c_prev[u] : 0.0) + i * g;
        const double tc = std::tanh(c);
        cells_[row + u] = c;
        cell_tanh_[row + u] = tc;
        hidden_[row + u] = o * tc;
      }
    }
  }

  Tensor out;
  if (return_sequences_) {
    out = Tensor({batch, steps, units}, hidden_);
  } else {
    out = Tensor({batch, units});
    for (std::size_t b = 0; b < batch; ++b) {
      const double* h = hidden_.data() + b * unit_stride + (steps - 1) * units;
      std::copy(h, h + units, out.data() + b * units);
    }
  }
  input_ = x;
  batch_ = batch;
  steps_ = steps;
  cached_ = true;
  cached_out_shape_ = out.shape();
  return out;
}

LayerGradients LstmLayer::backward(const Tensor& grad_out) const {
  require_cache("lstm", grad_out.shape());
  const std::size_t batch = batch_, steps = steps_, units = units_, gates = 4 * units_;
  const std::size_t gate_stride = steps * gates, unit_stride = steps * units;
  const Tensor& w = params_[0];
  const Tensor& r = params_[1];

  LayerGradients g{Tensor(input_.shape()), {Tensor(w.shape()), Tensor(r.shape()), Tensor({gates})}};
  double* dw = g.params[0].data();
  double* dr = g.params[1].data();
  double* db = g.params[2].data();

  std::vector<double> w_t(gates * inputs_), r_t(gates * units);
  kernels::transpose(w.data(), inputs_, gates, w_t.data());
  kernels::transpose(r.data(), units, gates, r_t.data());

  // Pre-activation gate gradients for every (b, t), laid out like gates_.
  std::vector<double> dz(batch * gate_stride);
  std::vector<double> dh_next(batch * units, 0.0), dc_next(batch * units, 0.0);

  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t b = 0; b < batch; ++b) {
      const double* a = gates_.data() + b * gate_stride + t * gates;
      const std::size_t row = b * unit_stride + t * units;
      const double* c_prev = t > 0 ? cells_.data() + row - units : nullptr;
      const double* upstream = nullptr;
      if (return_sequences_)
        upstream = grad_out.data() + row;
      else if (t == steps - 1)
        upstream = grad_out.data() + b * units;
      double* dzb = dz.data() + b * gate_stride + t * gates;
      for (std::size_t u = 0; u < units; ++u) {
        const double i = a[u], f = a[units + u], gc = a[2 * units + u], o = a[3 * units + u];
        const double tc = cell_tanh_[row + u];
        const double dh = dh_next[b * units + u] + (upstream ? upstream[u] : 0.0);
        const double d_o = dh * tc;
        const double dc = dh * o * (1.0 - tc * tc) + dc_next[b * units + u];
        const double di = dc * gc;
        const double dg = dc * i;
        const double df = c_prev ? dc * c_prev[u] : 0.0;
        dc_next[b * units + u] = dc * f;
        dzb[u] = di * i * (1.0 - i);
        dzb[units + u] = df * f * (1.0 - f);
        dzb[2 * units + u] = dg * (1.0 - gc * gc);
        dzb[3 * units + u] = d_o * o * (1.0 - o);
      }
    }
    if (t > 0) {
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      kernels::gemm_acc(dz.data() + t * gates, gate_stride, r_t.data(), units, dh_next.data(),
                        units, batch, gates, units);
    }
  }

  const std::size_t rows = batch * steps;
  kernels::gemm_at_acc(input_.data(), inputs_, dz.data(), gates, dw, gates, rows, inputs_, gates);
  if (steps > 1)
    for (std::size_t b = 0; b < batch; ++b)
      kernels::gemm_at_acc(hidden_.data() + b * unit_stride, units,
                           dz.data() + b * gate_stride + gates, gates, dr, gates, steps - 1, units,
                           gates);
  for (std::size_t row = 0; row < rows; ++row)
    for (std::size_t k = 0; k < gates; ++k) db[k] += dz[row * gates + k];
  kernels::gemm_acc(dz.data(), gates, w_t.data(), inputs_, g.input.data(), inputs_, rows, gates,
                    inputs_);
  return g;
}

std::unique_ptr<Layer> LstmLayer::clone() const { return std::make_unique<LstmLayer>(*this); }

void LstmLayer::clear_cache() {
  Layer::clear_cache();
  input_ = Tensor();
  gates_.clear();
  cells_.clear();
  cell_tanh_.clear();
  hidden_.clear();
}

// ---------------------------------------------------------------------------
// Dense

DenseLayer::DenseLayer(Tensor weights, Tensor bias, Activation act) : act_(act) {
  if (weights.rank() != 2 || bias.rank() != 1 || bias.dim(0) != weights.dim(1))
    fail(ErrorCode::shape_mismatch, "dense parameters must be weights [in×out] and bias [out], got " +
                                        shape_string(weights.shape()) + " and " +
                                        shape_string(bias.shape()));
  params_ = {std::move(weights), std::move(bias)};
}

LayerSpec DenseLayer::spec() const {
  return DenseSpec{params_[0].dim(0), params_[0].dim(1), act_};
}

Tensor DenseLayer::forward(const Tensor& x) {
  require_rank(x, 2, "dense", "[B×in]");
  const Tensor& w = params_[0];
  const Tensor& bias = params_[1];
  const std::size_t batch = x.dim(0), in = w.dim(0), out_dim = w.dim(1);
  if (x.dim(1) != in)
    fail(ErrorCode::shape_mismatch, "dense expects " + std::to_string(in) +
                                        " input columns, got input " + shape_string(x.shape()));
  Tensor out({batch, out_dim});
  for (std::size_t b = 0; b < batch; ++b)
    std::copy(bias.data(), bias.data() + out_dim, out.data() + b * out_dim);
  kernels::gemm_acc(x.data(), in, w.data(), out_dim, out.data(), out_dim, batch, in, out_dim);
  apply_activation(out.values(), act_);
  input_ = x;
  output_ = out;
  cached_ = true;
  cached_out_shape_ = out.shape();
  return out;
}

LayerGradients DenseLayer::backward(const Tensor& grad_out) const {
  require_cache("dense", grad_out.shape());
  const Tensor& w = params_[0];
  const std::size_t batch = input_.dim(0), in = w.dim(0), out_dim = w.dim(1);
  const Tensor dz = activation_backward(grad_out, output_, act_);
  LayerGradients g{Tensor(input_.shape()), {Tensor(w.shape()), Tensor({out_dim})}};
  kernels::gemm_at_acc(input_.data(), in, dz.data(), out_dim, g.params[0].data(), out_dim, batch,
                       in, out_dim);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t j = 0; j < out_dim; ++j) g.params[1][j] += dz[b * out_dim + j];
  std::vector<double> w_t(in * out_dim);
  kernels::transpose(w.data(), in, out_dim, w_t.data());
  kernels::gemm_acc(dz.data(), out_dim, w_t.data(), in, g.input.data(), in, batch, out_dim, in);
  return g;
}

std::unique_ptr<Layer> DenseLayer::clone() const { return std::make_unique<DenseLayer>(*this); }

void DenseLayer::clear_cache() {
  Layer::clear_cache();
  input_ = Tensor();
  output_ = Tensor();
}

// ---------------------------------------------------------------------------
// Parameter-free layers

LambdaScaleLayer::LambdaScaleLayer(double scale, double offset) : scale_(scale), offset_(offset) {
  if (!std::isfinite(scale) || scale == 0.0 || !std::isfinite(offset))
    fail(ErrorCode::invalid_config, "lambda scale must be finite and nonzero, offset finite");
}

LayerSpec LambdaScaleLayer::spec() const { return LambdaScaleSpec{scale_, offset_}; }

Tensor LambdaScaleLayer::forward(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.values()) v = scale_ * v + offset_;
  cached_ = true;
  cached_out_shape_ = out.shape();
  return out;
}

LayerGradients LambdaScaleLayer::backward(const Tensor& grad_out) const {
  require_cache("lambda_scale", grad_out.shape());
  Tensor gin = grad_out;
  for (double& v : gin.values()) v *= scale_;
  return {std::move(gin), {}};
}

Tensor LambdaScaleLayer::inverse(const Tensor& y) const {
  Tensor out = y;
  for (double& v : out.values()) v = (v - offset_) / scale_;
  return out;
}

std::unique_ptr<Layer> LambdaScaleLayer::clone() const {
  return std::make_unique<LambdaScaleLayer>(*this);
}

LayerSpec GlobalAvgPoolLayer::spec() const { return GlobalAvgPoolSpec{}; }

Tensor GlobalAvgPoolLayer::forward(const Tensor& x) {
  require_rank(x, 3, "global_avg_pool", "[B×T×C]");
  const std::size_t batch = x.dim(0), steps = x.dim(1), channels = x.dim(2);
  Tensor out({batch, channels});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t c = 0; c < channels; ++c) out.at(b, c) += x.at(b, t, c);
  const double inv = 1.0 / static_cast<double>(steps);
  for (double& v : out.values()) v *= inv;
  input_shape_ = x.shape();
  cached_ = true;
  cached_out_shape_ = out.shape();
  return out;
}

LayerGradients GlobalAvgPoolLayer::backward(const Tensor& grad_out) const {
  require_cache("global_avg_pool", grad_out.shape());
  const std::size_t batch = input_shape_[0], steps = input_shape_[1], channels = input_shape_[2];
  const double inv = 1.0 / static_cast<double>(steps);
  Tensor gin(input_shape_);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t c = 0; c < channels; ++c) gin.at(b, t, c) = grad_out.at(b, c) * inv;
  return {std::move(gin), {}};
}

std::unique_ptr<Layer> GlobalAvgPoolLayer::clone() const {
  return std::make_unique<GlobalAvgPoolLayer>(*this);
}

LayerSpec FlattenLayer::spec() const { return FlattenSpec{}; }

Tensor FlattenLayer::forward(const Tensor& x) {
  if (x.rank() < 2)
    fail(ErrorCode::shape_mismatch, "flatten expects a batched input, got " + shape_string(x.shape()));
  input_shape_ = x.shape();
  Tensor out = x.reshaped({x.dim(0), x.size() / x.dim(0)});
  cached_ = true;
  cached_out_shape_ = out.shape();
  return out;
}

LayerGradients FlattenLayer::backward(const Tensor& grad_out) const {
  require_cache("flatten", grad_out.shape());
  return {grad_out.reshaped(input_shape_), {}};
}

std::unique_ptr<Layer> FlattenLayer::clone() const { return std::make_unique<FlattenLayer>(*this); }

}  // namespace tempcast
