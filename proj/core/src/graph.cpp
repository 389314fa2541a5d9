/* Copyright (c) 2026 The LDVD Lab Authors. All Rights Reserved.
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at
   http://www.apache.org/licenses/LICENSE-2.0
   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

#include "ldvd/graph.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace ldvd {

namespace {

std::string g_fault;  // see testing::inject_fault

struct ConvDims {
  int64_t B, T, H, W, Ci;
  int64_t Co, kt, kh, kw;
  int64_t st, sh, sw, pt, ph, pw;
  int64_t To, Ho, Wo;
};

int64_t conv_extent(int64_t in, int64_t pad, int64_t k, int64_t stride) {
  return (in + 2 * pad - k) / stride + 1;
}

ConvDims conv_dims(const Shape& x, const Shape& k, const std::array<int64_t, 3>& stride,
                   const std::array<int64_t, 3>& pad) {
  if (x.size() != 5) throw std::invalid_argument("conv input must be rank 5 (B,T,H,W,C), got " + shape_str(x));
  if (k.size() != 5) throw std::invalid_argument("conv kernel must be rank 5 (Co,kt,kh,kw,Ci), got " + shape_str(k));
  ConvDims d;
  d.B = x[0], d.T = x[1], d.H = x[2], d.W = x[3], d.Ci = x[4];
  d.Co = k[0], d.kt = k[1], d.kh = k[2], d.kw = k[3];
  if (k[4] != d.Ci) {
    throw std::invalid_argument("conv channel mismatch: input " + shape_str(x) + " vs kernel " + shape_str(k));
  }
  d.st = stride[0], d.sh = stride[1], d.sw = stride[2];
  d.pt = pad[0], d.ph = pad[1], d.pw = pad[2];
  for (int a = 0; a < 3; ++a) {
    if (stride[a] < 1) throw std::invalid_argument("conv stride must be >= 1");
    if (pad[a] < 0) throw std::invalid_argument("conv pad must be >= 0");
  }
  if (d.kt > d.T + 2 * d.pt || d.kh > d.H + 2 * d.ph || d.kw > d.W + 2 * d.pw) {
    throw std::invalid_argument("conv kernel " + shape_str(k) + " larger than padded input " + shape_str(x));
  }
  d.To = conv_extent(d.T, d.pt, d.kt, d.st);
  d.Ho = conv_extent(d.H, d.ph, d.kh, d.sh);
  d.Wo = conv_extent(d.W, d.pw, d.kw, d.sw);
  return d;
}

std::array<int64_t, 3> stride_of(const OpAttrs& a) { return {a.ints[0], a.ints[1], a.ints[2]}; }
std::array<int64_t, 3> pad_of(const OpAttrs& a) { return {a.ints[3], a.ints[4], a.ints[5]}; }
Shape tail_shape(const OpAttrs& a) { return Shape(a.ints.begin() + 6, a.ints.end()); }

Tensor ev_conv(const Tensor& x, const Tensor& k, const ConvDims& d) {
  Tensor out({d.B, d.To, d.Ho, d.Wo, d.Co});
  const double* xp = x.data();
  const double* kp = k.data();
  double* op = out.data();
  const int64_t kvol = d.kt * d.kh * d.kw * d.Ci;
  for (int64_t b = 0; b < d.B; ++b)
    for (int64_t to = 0; to < d.To; ++to)
      for (int64_t ho = 0; ho < d.Ho; ++ho)
        for (int64_t wo = 0; wo < d.Wo; ++wo) {
          double* orow = op + (((b * d.To + to) * d.Ho + ho) * d.Wo + wo) * d.Co;
          const int64_t t0 = to * d.st - d.pt, h0 = ho * d.sh - d.ph, w0 = wo * d.sw - d.pw;
          for (int64_t dt = 0; dt < d.kt; ++dt) {
            const int64_t ti = t0 + dt;
            if (ti < 0 || ti >= d.T) continue;
            for (int64_t dh = 0; dh < d.kh; ++dh) {
              const int64_t hi = h0 + dh;
              if (hi < 0 || hi >= d.H) continue;
              for (int64_t dw = 0; dw < d.kw; ++dw) {
                const int64_t wi = w0 + dw;
                if (wi < 0 || wi >= d.W) continue;
                const double* xrow = xp + (((b * d.T + ti) * d.H + hi) * d.W + wi) * d.Ci;
                const int64_t kbase = ((dt * d.kh + dh) * d.kw + dw) * d.Ci;
                for (int64_t co = 0; co < d.Co; ++co) {
                  const double* krow = kp + co * kvol + kbase;
                  double s = 0;
                  for (int64_t ci = 0; ci < d.Ci; ++ci) s += xrow[ci] * krow[ci];
                  orow[co] += s;
                }
              }
            }
          }
        }
  return out;
}

Tensor ev_conv_data_grad(const Tensor& g, const Tensor& k, const ConvDims& d) {
  Tensor out({d.B, d.T, d.H, d.W, d.Ci});
  const double* gp = g.data();
  const double* kp = k.data();
  double* xp = out.data();
  const int64_t kvol = d.kt * d.kh * d.kw * d.Ci;
  for (int64_t b = 0; b < d.B; ++b)
    for (int64_t to = 0; to < d.To; ++to)
      for (int64_t ho = 0; ho < d.Ho; ++ho)
        for (int64_t wo = 0; wo < d.Wo; ++wo) {
          const double* grow = gp + (((b * d.To + to) * d.Ho + ho) * d.Wo + wo) * d.Co;
          const int64_t t0 = to * d.st - d.pt, h0 = ho * d.sh - d.ph, w0 = wo * d.sw - d.pw;
          for (int64_t dt = 0; dt < d.kt; ++dt) {
            const int64_t ti = t0 + dt;
            if (ti < 0 || ti >= d.T) continue;
            for (int64_t dh = 0; dh < d.kh; ++dh) {
              const int64_t hi = h0 + dh;
              if (hi < 0 || hi >= d.H) continue;
              for (int64_t dw = 0; dw < d.kw; ++dw) {
                const int64_t wi = w0 + dw;
                if (wi < 0 || wi >= d.W) continue;
                double* xrow = xp + (((b * d.T + ti) * d.H + hi) * d.W + wi) * d.Ci;
                const int64_t kbase = ((dt * d.kh + dh) * d.kw + dw) * d.Ci;
                for (int64_t co = 0; co < d.Co; ++co) {
                  const double gv = grow[co];
                  const double* krow = kp + co * kvol + kbase;
                  for (int64_t ci = 0; ci < d.Ci; ++ci) xrow[ci] += gv * krow[ci];
                }
              }
            }
          }
        }
  return out;
}

Tensor ev_conv_kernel_grad(const Tensor& x, const Tensor& g, const ConvDims& d) {
  Tensor out({d.Co, d.kt, d.kh, d.kw, d.Ci});
  const double* xp = x.data();
  const double* gp = g.data();
  double* kp = out.data();
  const int64_t kvol = d.kt * d.kh * d.kw * d.Ci;
  for (int64_t b = 0; b < d.B; ++b)
    for (int64_t to = 0; to < d.To; ++to)
      for (int64_t ho = 0; ho < d.Ho; ++ho)
        for (int64_t wo = 0; wo < d.Wo; ++wo) {
          const double* grow = gp + (((b * d.To + to) * d.Ho + ho) * d.Wo + wo) * d.Co;
          const int64_t t0 = to * d.st - d.pt, h0 = ho * d.sh - d.ph, w0 = wo * d.sw - d.pw;
          for (int64_t dt = 0; dt < d.kt; ++dt) {
            const int64_t ti = t0 + dt;
            if (ti < 0 || ti >= d.T) continue;
            for (int64_t dh = 0; dh < d.kh; ++dh) {
              const int64_t hi = h0 + dh;
              if (hi < 0 || hi >= d.H) continue;
              for (int64_t dw = 0; dw < d.kw; ++dw) {
                const int64_t wi = w0 + dw;
                if (wi < 0 || wi >= d.W) continue;
                const double* xrow = xp + (((b * d.T + ti) * d.H + hi) * d.W + wi) * d.Ci;
                const int64_t kbase = ((dt * d.kh + dh) * d.kw + dw) * d.Ci;
                for (int64_t co = 0; co < d.Co; ++co) {
                  const double gv = grow[co];
                  double* krow = kp + co * kvol + kbase;
                  for (int64_t ci = 0; ci < d.Ci; ++ci) krow[ci] += gv * xrow[ci];
                }
              }
            }
          }
        }
  if (!g_fault.empty() && g_fault == "conv-kernel-grad") {
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= 1.001;
  }
  return out;
}

Tensor ev_temporal_shift(const Tensor& x, double fraction, int64_t steps) {
  const Shape& s = x.shape();
  if (s.size() != 5) throw std::invalid_argument("temporal_shift input must be rank 5, got " + shape_str(s));
  const int64_t B = s[0], T = s[1], HW = s[2] * s[3], C = s[4];
  const int64_t n = static_cast<int64_t>(std::floor(static_cast<double>(C) * fraction));
  if (n < 1) return x;
  Tensor out(s);
  const double* xp = x.data();
  double* op = out.data();
  for (int64_t b = 0; b < B; ++b)
    for (int64_t t = 0; t < T; ++t) {
      const int64_t tf = t - steps;  // forward-shifted group reads from the past
      const int64_t tb = t + steps;
      for (int64_t hw = 0; hw < HW; ++hw) {
        double* orow = op + ((b * T + t) * HW + hw) * C;
        if (tf >= 0 && tf < T) {
          const double* xrow = xp + ((b * T + tf) * HW + hw) * C;
          for (int64_t c = 0; c < n; ++c) orow[c] = xrow[c];
        }
        if (tb >= 0 && tb < T) {
          const double* xrow = xp + ((b * T + tb) * HW + hw) * C;
          for (int64_t c = n; c < 2 * n; ++c) orow[c] = xrow[c];
        }
        const double* xrow = xp + ((b * T + t) * HW + hw) * C;
        for (int64_t c = 2 * n; c < C; ++c) orow[c] = xrow[c];
      }
    }
  return out;
}

Tensor ev_matmul(const Tensor& a, const Tensor& b) {
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = out.data();
  for (int64_t i = 0; i < m; ++i)
    for (int64_t l = 0; l < k; ++l) {
      const double av = ap[i * k + l];
      if (av == 0.0) continue;
      const double* brow = bp + l * n;
      double* crow = cp + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  return out;
}

Tensor ev_transpose(const Tensor& a) {
  const int64_t m = a.dim(0), n = a.dim(1);
  Tensor out({n, m});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  return out;
}

Tensor ev_pad(const Tensor& a, const std::vector<int64_t>& lo, const std::vector<int64_t>& hi) {
  const int r = a.rank();
  Shape os(a.shape());
  for (int i = 0; i < r; ++i) os[static_cast<size_t>(i)] += lo[static_cast<size_t>(i)] + hi[static_cast<size_t>(i)];
  Tensor out(os);
  std::vector<int64_t> idx(static_cast<size_t>(r), 0);
  const Shape& is = a.shape();
  for (int64_t lin = 0; lin < a.numel(); ++lin) {
    int64_t off = 0;
    for (int i = 0; i < r; ++i) off = off * os[static_cast<size_t>(i)] + idx[static_cast<size_t>(i)] + lo[static_cast<size_t>(i)];
    out[off] = a[lin];
    for (int i = r - 1; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < is[static_cast<size_t>(i)]) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
  return out;
}

Tensor ev_slice(const Tensor& a, const std::vector<int64_t>& start, const std::vector<int64_t>& len) {
  const int r = a.rank();
  Shape os(len.begin(), len.end());
  Tensor out(os);
  const Shape& is = a.shape();
  std::vector<int64_t> idx(static_cast<size_t>(r), 0);
  for (int64_t lin = 0; lin < out.numel(); ++lin) {
    int64_t off = 0;
    for (int i = 0; i < r; ++i) off = off * is[static_cast<size_t>(i)] + idx[static_cast<size_t>(i)] + start[static_cast<size_t>(i)];
    out[lin] = a[off];
    for (int i = r - 1; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < os[static_cast<size_t>(i)]) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
  return out;
}

Tensor ev_concat(const Tensor& a, const Tensor& b, int axis) {
  Shape os(a.shape());
  os[static_cast<size_t>(axis)] += b.dim(axis);
  Tensor out(os);
  int64_t outer = 1;
  for (int i = 0; i < axis; ++i) outer *= a.dim(i);
  int64_t inner = 1;
  for (int i = axis + 1; i < a.rank(); ++i) inner *= a.dim(i);
  const int64_t da = a.dim(axis) * inner, db = b.dim(axis) * inner;
  for (int64_t o = 0; o < outer; ++o) {
    std::memcpy(out.data() + o * (da + db), a.data() + o * da, static_cast<size_t>(da) * sizeof(double));
    std::memcpy(out.data() + o * (da + db) + da, b.data() + o * db, static_cast<size_t>(db) * sizeof(double));
  }
  return out;
}

Tensor ev_sum_axis(const Tensor& a, int axis) {
  int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= a.dim(i);
  for (int i = axis + 1; i < a.rank(); ++i) inner *= a.dim(i);
  const int64_t n = a.dim(axis);
  Shape os;
  for (int i = 0; i < a.rank(); ++i)
    if (i != axis) os.push_back(a.dim(i));
  if (os.empty()) os.push_back(1);
  Tensor out(os);
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t j = 0; j < n; ++j) {
      const double* src = a.data() + (o * n + j) * inner;
      double* dst = out.data() + o * inner;
      for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  return out;
}

Tensor ev_broadcast_axis(const Tensor& a, int axis, int64_t n, const Shape& out_shape) {
  int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= out_shape[static_cast<size_t>(i)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < out_shape.size(); ++i) inner *= out_shape[i];
  Tensor out(out_shape);
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t j = 0; j < n; ++j)
      std::memcpy(out.data() + (o * n + j) * inner, a.data() + o * inner, static_cast<size_t>(inner) * sizeof(double));
  return out;
}

Tensor ev_add_channel(const Tensor& x, const Tensor& b) {
  Tensor out(x.shape());
  const int64_t C = x.dim(x.rank() - 1);
  for (int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] + b[i % C];
  return out;
}

Tensor ev_scale_channel(const Tensor& x, const Tensor& s) {
  Tensor out(x.shape());
  const int64_t C = x.dim(x.rank() - 1);
  for (int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] * s[i % C];
  return out;
}

Tensor ev_sum_to_channel(const Tensor& x) {
  const int64_t C = x.dim(x.rank() - 1);
  Tensor out({C});
  const int64_t rows = x.numel() / C;
  for (int64_t r = 0; r < rows; ++r) {
    const double* src = x.data() + r * C;
    for (int64_t c = 0; c < C; ++c) out[c] += src[c];
  }
  return out;
}

Tensor ev_broadcast_channel(const Tensor& v, const Shape& shape) {
  Tensor out(shape);
  const int64_t C = shape.back();
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = v[i % C];
  return out;
}

double softplus_stable(double x) {
  // log(1 + e^x) without overflow for |x| up to 1e6 and beyond.
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Tensor ev_unary(Op op, const Tensor& a, double scalar) {
  Tensor out(a.shape());
  const int64_t n = a.numel();
  switch (op) {
    case Op::kExp:
      for (int64_t i = 0; i < n; ++i) out[i] = std::exp(a[i]);
      break;
    case Op::kLog:
      for (int64_t i = 0; i < n; ++i) out[i] = std::log(a[i]);
      break;
    case Op::kSigmoid:
      for (int64_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-a[i]));
      break;
    case Op::kTanh:
      for (int64_t i = 0; i < n; ++i) out[i] = std::tanh(a[i]);
      break;
    case Op::kSoftplus:
      for (int64_t i = 0; i < n; ++i) out[i] = softplus_stable(a[i]);
      break;
    case Op::kReciprocal:
      for (int64_t i = 0; i < n; ++i) out[i] = 1.0 / a[i];
      break;
    case Op::kRsqrt:
      for (int64_t i = 0; i < n; ++i) out[i] = 1.0 / std::sqrt(a[i]);
      break;
    case Op::kLeakyRelu:
      // Subgradient at 0 takes the positive-branch slope.
      for (int64_t i = 0; i < n; ++i) out[i] = a[i] >= 0 ? a[i] : scalar * a[i];
      break;
    case Op::kLeakyReluMask:
      for (int64_t i = 0; i < n; ++i) out[i] = a[i] >= 0 ? 1.0 : scalar;
      break;
    case Op::kScale:
      for (int64_t i = 0; i < n; ++i) out[i] = scalar * a[i];
      break;
    case Op::kAddScalar:
      for (int64_t i = 0; i < n; ++i) out[i] = scalar + a[i];
      break;
    default:
      throw std::logic_error("ev_unary: not a unary op");
  }
  return out;
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kConst: return "const";
    case Op::kLeaf: return "leaf";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kScale: return "scale";
    case Op::kAddScalar: return "add_scalar";
    case Op::kMatmul: return "matmul";
    case Op::kTranspose: return "transpose";
    case Op::kReshape: return "reshape";
    case Op::kPad: return "pad";
    case Op::kSlice: return "slice";
    case Op::kConcat: return "concat";
    case Op::kSumAll: return "sum_all";
    case Op::kSumAxis: return "sum_axis";
    case Op::kBroadcastAxis: return "broadcast_axis";
    case Op::kBroadcastFull: return "broadcast_full";
    case Op::kAddChannel: return "add_channel";
    case Op::kScaleChannel: return "scale_channel";
    case Op::kSumToChannel: return "sum_to_channel";
    case Op::kBroadcastChannel: return "broadcast_channel";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSigmoid: return "sigmoid";
    case Op::kTanh: return "tanh";
    case Op::kSoftplus: return "softplus";
    case Op::kReciprocal: return "reciprocal";
    case Op::kRsqrt: return "rsqrt";
    case Op::kLeakyRelu: return "leaky_relu";
    case Op::kLeakyReluMask: return "leaky_relu_mask";
    case Op::kConv: return "conv";
    case Op::kConvDataGrad: return "conv_data_grad";
    case Op::kConvKernelGrad: return "conv_kernel_grad";
    case Op::kTemporalShift: return "temporal_shift";
  }
  return "?";
}

NodeId Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::constant(Tensor t) {
  Node n;
  n.op = Op::kConst;
  n.value = std::move(t);
  return push(std::move(n));
}

NodeId Graph::leaf(Tensor t) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(t);
  return push(std::move(n));
}

NodeId Graph::binary_same_shape(Op op, NodeId a, NodeId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) {
    throw std::invalid_argument(std::string(op_name(op)) + ": shape mismatch " + shape_str(va.shape()) + " vs " +
                                shape_str(vb.shape()));
  }
  Node n;
  n.op = op;
  n.parent = {a, b};
  n.n_parents = 2;
  Tensor out(va.shape());
  switch (op) {
    case Op::kAdd:
      for (int64_t i = 0; i < va.numel(); ++i) out[i] = va[i] + vb[i];
      break;
    case Op::kSub:
      for (int64_t i = 0; i < va.numel(); ++i) out[i] = va[i] - vb[i];
      break;
    case Op::kMul:
      for (int64_t i = 0; i < va.numel(); ++i) out[i] = va[i] * vb[i];
      break;
    default:
      throw std::logic_error("binary_same_shape: bad op");
  }
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) { return binary_same_shape(Op::kAdd, a, b); }
NodeId Graph::sub(NodeId a, NodeId b) { return binary_same_shape(Op::kSub, a, b); }
NodeId Graph::mul(NodeId a, NodeId b) { return binary_same_shape(Op::kMul, a, b); }

NodeId Graph::unary(Op op, NodeId a, double scalar) {
  Node n;
  n.op = op;
  n.parent = {a, kNoNode};
  n.n_parents = 1;
  n.attrs.scalar = scalar;
  n.value = ev_unary(op, value(a), scalar);
  return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double c) { return unary(Op::kScale, a, c); }
NodeId Graph::add_scalar(NodeId a, double c) { return unary(Op::kAddScalar, a, c); }
NodeId Graph::exp(NodeId a) { return unary(Op::kExp, a); }
NodeId Graph::log(NodeId a) { return unary(Op::kLog, a); }
NodeId Graph::sigmoid(NodeId a) { return unary(Op::kSigmoid, a); }
NodeId Graph::tanh(NodeId a) { return unary(Op::kTanh, a); }
NodeId Graph::softplus(NodeId a) { return unary(Op::kSoftplus, a); }
NodeId Graph::reciprocal(NodeId a) { return unary(Op::kReciprocal, a); }
NodeId Graph::rsqrt(NodeId a) { return unary(Op::kRsqrt, a); }
NodeId Graph::leaky_relu(NodeId a, double slope) { return unary(Op::kLeakyRelu, a, slope); }
NodeId Graph::leaky_relu_mask(NodeId a, double slope) { return unary(Op::kLeakyReluMask, a, slope); }

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.rank() != 2 || vb.rank() != 2 || va.dim(1) != vb.dim(0)) {
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(va.shape()) + " and " +
                                shape_str(vb.shape()));
  }
  Node n;
  n.op = Op::kMatmul;
  n.parent = {a, b};
  n.n_parents = 2;
  n.value = ev_matmul(va, vb);
  return push(std::move(n));
}

NodeId Graph::transpose(NodeId a) {
  const Tensor& va = value(a);
  if (va.rank() != 2) throw std::invalid_argument("transpose: rank-2 required, got " + shape_str(va.shape()));
  Node n;
  n.op = Op::kTranspose;
  n.parent = {a, kNoNode};
  n.n_parents = 1;
  n.value = ev_transpose(va);
  return push(std::move(n));
}

NodeId Graph::reshape(NodeId a, Shape shape) {
  const Tensor& va = value(a);
  if (shape_numel(shape) != va.numel()) {
    throw std::invalid_argument("reshape: element count mismatch " + shape_str(va.shape()) + " -> " +
                                shape_str(shape));
  }
  Node n;
  n.op = Op::kReshape;
  n.parent = {a, kNoNode};
  n.n_parents = 1;
  n.attrs.ints.assign(shape.begin(), shape.end());
  n.value = Tensor(shape, va.vec());
  return push(std::move(n));
}

NodeId Graph::pad(NodeId a, const std::vector<int64_t>& lo, const std::vector<int64_t>& hi) {
  const Tensor& va = value(a);
  if (static_cast<int>(lo.size()) != va.rank() || static_cast<int>(hi.size()) != va.rank()) {
    throw std::invalid_argument("pad: lo/hi arity must equal rank");
  }
  Node n;
  n.op = Op::kPad;
  n.parent = {a, kNoNode};
  n.n_parents = 1;
  n.attrs.ints = lo;
  n.attrs.ints.insert(n.attrs.ints.end(), hi.begin(), hi.end());
  n.value = ev_pad(va, lo, hi);
  return push(std::move(n));
}

NodeId Graph::slice(NodeId a, const std::vector<int64_t>& start, const std::vector<int64_t>& len) {
  const Tensor& va = value(a);
  if (static_cast<int>(start.size()) != va.rank() || static_cast<int>(len.size()) != va.rank()) {
    throw std::invalid_argument("slice: start/len arity must equal rank");
  }
  for (int i = 0; i < va.rank(); ++i) {
    if (start[static_cast<size_t>(i)] < 0 || len[static_cast<size_t>(i)] < 1 ||
        start[static_cast<size_t>(i)] + len[static_cast<size_t>(i)] > va.dim(i)) {
      throw std::invalid_argument("slice: out of range on axis " + std::to_string(i) + " for " +
                                  shape_str(va.shape()));
    }
  }
  Node n;
  n.op = Op::kSlice;
  n.parent = {a, kNoNode};
  n.n_parents = 1;
  n.attrs.ints = start;
  n.attrs.ints.insert(n.attrs.ints.end(), len.begin(), len.end());
  n.value = ev_slice(va, start, len);
  return push(std::move(n));
}

NodeId Graph::concat(NodeId a, NodeId b, int axis) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.rank() != vb.rank() || axis < 0 || axis >= va.rank()) {
    throw std::invalid_argument("concat: rank mismatch or bad axis");
  }
  for (int i = 0; i < va.rank(); ++i) {
    if (i != axis && va.dim(i) != vb.dim(i)) {
      throw std::invalid_argument("concat: shapes " + shape_str(va.shape()) + " and " + shape_str(vb.shape()) +
                                  " differ off axis " + std::to_string(axis));
    }
  }
  Node n;
  n.op = Op::kConcat;
  n.parent = {a, b};
  n.n_parents = 2;
  n.attrs.ints = {axis};
  n.value = ev_concat(va, vb, axis);
  return push(std::move(n));
}

NodeId Graph::sum_all(NodeId a) {
  Node n;
  n.op = Op::kSumAll;
  n.parent = {a, kNoNode};
  n.n_parents = 1;
  n.value = Tensor::scalar(value(a).sum());
  return push(std::move(n));
}

NodeId Graph::mean_all(NodeId a) { return scale(sum_all(a), 1.0 / static_cast<double>(value(a).numel())); }

NodeId Graph::sum_axis(NodeId a, int axis) {
  const Tensor& va = value(a);
  if (axis < 0 || axis >= va.rank()) throw std::invalid_argument("sum_axis: bad axis");
  Node n;
  n.op = Op::kSumAxis;
  n.parent = {a, kNoNode};
  n.n_parents = 1;
  n.attrs.ints = {axis};
  n.value = ev_sum_axis(va, axis);
  return push(std::move(n));
}

NodeId Graph::broadcast_axis(NodeId a, int axis, int64_t n_rep) {
  const Tensor& va = value(a);
  if (axis < 0 || axis > va.rank()) throw std::invalid_argument("broadcast_axis: bad axis");
  Shape os(va.shape());
  os.insert(os.begin() + axis, n_rep);
  Node n;
  n.op = Op::kBroadcastAxis;
  n.parent = {a, kNoNode};
  n.n_parents = 1;
  n.attrs.ints = {axis, n_rep};
  n.value = ev_broadcast_axis(va, axis, n_rep, os);
  return push(std::move(n));
}

NodeId Graph::broadcast_full(NodeId a, Shape shape) {
  const Tensor& va = value(a);
  if (va.numel() != 1) throw std::invalid_argument("broadcast_full: source must be scalar");
  Node n;
  n.op = Op::kBroadcastFull;
  n.parent = {a, kNoNode};
  n.n_parents = 1;
  n.attrs.ints.assign(shape.begin(), shape.end());
  n.value = Tensor::full(shape, va[0]);
  return push(std::move(n));
}

NodeId Graph::add_channel(NodeId x, NodeId b) {
  const Tensor& vx = value(x);
  const Tensor& vb = value(b);
  if (vb.rank() != 1 || vb.numel() != vx.dim(vx.rank() - 1)) {
    throw std::invalid_argument("add_channel: bias " + shape_str(vb.shape()) + " does not match channels of " +
                                shape_str(vx.shape()));
  }
  Node n;
  n.op = Op::kAddChannel;
  n.parent = {x, b};
  n.n_parents = 2;
  n.value = ev_add_channel(vx, vb);
  return push(std::move(n));
}

NodeId Graph::scale_channel(NodeId x, NodeId s) {
  const Tensor& vx = value(x);
  const Tensor& vs = value(s);
  if (vs.rank() != 1 || vs.numel() != vx.dim(vx.rank() - 1)) {
    throw std::invalid_argument("scale_channel: scale " + shape_str(vs.shape()) + " does not match channels of " +
                                shape_str(vx.shape()));
  }
  Node n;
  n.op = Op::kScaleChannel;
  n.parent = {x, s};
  n.n_parents = 2;
  n.value = ev_scale_channel(vx, vs);
  return push(std::move(n));
}

NodeId Graph::sum_to_channel(NodeId x) {
  Node n;
  n.op = Op::kSumToChannel;
  n.parent = {x, kNoNode};
  n.n_parents = 1;
  n.value = ev_sum_to_channel(value(x));
  return push(std::move(n));
}

NodeId Graph::broadcast_channel(NodeId v, Shape shape) {
  const Tensor& vv = value(v);
  if (vv.rank() != 1 || vv.numel() != shape.back()) {
    throw std::invalid_argument("broadcast_channel: vector " + shape_str(vv.shape()) + " vs target " +
                                shape_str(shape));
  }
  Node n;
  n.op = Op::kBroadcastChannel;
  n.parent = {v, kNoNode};
  n.n_parents = 1;
  n.attrs.ints.assign(shape.begin(), shape.end());
  n.value = ev_broadcast_channel(vv, shape);
  return push(std::move(n));
}

NodeId Graph::conv(NodeId x, NodeId kernel, const std::array<int64_t, 3>& stride, const std::array<int64_t, 3>& pad) {
  const ConvDims d = conv_dims(value(x).shape(), value(kernel).shape(), stride, pad);
  Node n;
  n.op = Op::kConv;
  n.parent = {x, kernel};
  n.n_parents = 2;
  n.attrs.ints = {d.st, d.sh, d.sw, d.pt, d.ph, d.pw};
  n.value = ev_conv(value(x), value(kernel), d);
  return push(std::move(n));
}

NodeId Graph::conv_data_grad(NodeId out_grad, NodeId kernel, const std::array<int64_t, 3>& stride,
                             const std::array<int64_t, 3>& pad, const Shape& input_shape) {
  const ConvDims d = conv_dims(input_shape, value(kernel).shape(), stride, pad);
  const Shape expect = {d.B, d.To, d.Ho, d.Wo, d.Co};
  if (value(out_grad).shape() != expect) {
    throw std::invalid_argument("conv_data_grad: out grad " + shape_str(value(out_grad).shape()) +
                                " does not match " + shape_str(expect));
  }
  Node n;
  n.op = Op::kConvDataGrad;
  n.parent = {out_grad, kernel};
  n.n_parents = 2;
  n.attrs.ints = {d.st, d.sh, d.sw, d.pt, d.ph, d.pw};
  n.attrs.ints.insert(n.attrs.ints.end(), input_shape.begin(), input_shape.end());
  n.value = ev_conv_data_grad(value(out_grad), value(kernel), d);
  return push(std::move(n));
}

NodeId Graph::conv_kernel_grad(NodeId x, NodeId out_grad, const std::array<int64_t, 3>& stride,
                               const std::array<int64_t, 3>& pad, const Shape& kernel_shape) {
  const ConvDims d = conv_dims(value(x).shape(), kernel_shape, stride, pad);
  const Shape expect = {d.B, d.To, d.Ho, d.Wo, d.Co};
  if (value(out_grad).shape() != expect) {
    throw std::invalid_argument("conv_kernel_grad: out grad " + shape_str(value(out_grad).shape()) +
                                " does not match " + shape_str(expect));
  }
  Node n;
  n.op = Op::kConvKernelGrad;
  n.parent = {x, out_grad};
  n.n_parents = 2;
  n.attrs.ints = {d.st, d.sh, d.sw, d.pt, d.ph, d.pw};
  n.attrs.ints.insert(n.attrs.ints.end(), kernel_shape.begin(), kernel_shape.end());
  n.value = ev_conv_kernel_grad(value(x), value(out_grad), d);
  return push(std::move(n));
}

NodeId Graph::temporal_shift(NodeId x, double fraction, int64_t steps) {
  Node n;
  n.op = Op::kTemporalShift;
  n.parent = {x, kNoNode};
  n.n_parents = 1;
  n.attrs.ints = {steps};
  n.attrs.scalar = fraction;
  n.value = ev_temporal_shift(value(x), fraction, steps);
  return push(std::move(n));
}

Graph::Backward Graph::backward(NodeId loss, const std::vector<NodeId>& wrt) {
  if (value(loss).numel() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(value(loss).shape()));
  }
  Backward bw;
  bw.loss = loss;
  bw.wrt = wrt;
  bw.n_forward_nodes = nodes_.size();
  std::vector<NodeId> adj(nodes_.size(), kNoNode);
  adj[static_cast<size_t>(loss)] = constant(Tensor::full(value(loss).shape(), 1.0));

  auto accumulate = [&](NodeId p, NodeId contrib) {
    if (adj[static_cast<size_t>(p)] == kNoNode) {
      adj[static_cast<size_t>(p)] = contrib;
    } else {
      adj[static_cast<size_t>(p)] = add(adj[static_cast<size_t>(p)], contrib);
    }
  };

  for (NodeId i = loss; i >= 0; --i) {
    const NodeId gid = adj[static_cast<size_t>(i)];
    if (gid == kNoNode) continue;
    // Copy what we need: emitting ops below may reallocate nodes_.
    const Op op = nodes_[static_cast<size_t>(i)].op;
    const NodeId p0 = nodes_[static_cast<size_t>(i)].parent[0];
    const NodeId p1 = nodes_[static_cast<size_t>(i)].parent[1];
    const OpAttrs attrs = nodes_[static_cast<size_t>(i)].attrs;
    switch (op) {
      case Op::kConst:
      case Op::kLeaf:
        break;
      case Op::kAdd:
        accumulate(p0, gid);
        accumulate(p1, gid);
        break;
      case Op::kSub:
        accumulate(p0, gid);
        accumulate(p1, scale(gid, -1.0));
        break;
      case Op::kMul:
        accumulate(p0, mul(gid, p1));
        accumulate(p1, mul(gid, p0));
        break;
      case Op::kScale:
        accumulate(p0, scale(gid, attrs.scalar));
        break;
      case Op::kAddScalar:
        accumulate(p0, gid);
        break;
      case Op::kMatmul:
        accumulate(p0, matmul(gid, transpose(p1)));
        accumulate(p1, matmul(transpose(p0), gid));
        break;
      case Op::kTranspose:
        accumulate(p0, transpose(gid));
        break;
      case Op::kReshape:
        accumulate(p0, reshape(gid, value(p0).shape()));
        break;
      case Op::kPad: {
        const size_t r = value(p0).shape().size();
        std::vector<int64_t> lo(attrs.ints.begin(), attrs.ints.begin() + static_cast<long>(r));
        std::vector<int64_t> len(value(p0).shape());
        accumulate(p0, slice(gid, lo, len));
        break;
      }
      case Op::kSlice: {
        const size_t r = value(p0).shape().size();
        std::vector<int64_t> start(attrs.ints.begin(), attrs.ints.begin() + static_cast<long>(r));
        std::vector<int64_t> len(attrs.ints.begin() + static_cast<long>(r), attrs.ints.end());
        std::vector<int64_t> hi(r);
        for (size_t a = 0; a < r; ++a) hi[a] = value(p0).shape()[a] - start[a] - len[a];
        accumulate(p0, pad(gid, start, hi));
        break;
      }
      case Op::kConcat: {
        const int axis = static_cast<int>(attrs.ints[0]);
        const Tensor& va = value(p0);
        const Tensor& vb = value(p1);
        std::vector<int64_t> s0(va.rank(), 0), l0(va.shape());
        accumulate(p0, slice(gid, s0, l0));
        std::vector<int64_t> s1(vb.rank(), 0), l1(vb.shape());
        s1[static_cast<size_t>(axis)] = va.dim(axis);
        accumulate(p1, slice(gid, s1, l1));
        break;
      }
      case Op::kSumAll:
        accumulate(p0, broadcast_full(gid, value(p0).shape()));
        break;
      case Op::kSumAxis: {
        const int axis = static_cast<int>(attrs.ints[0]);
        accumulate(p0, broadcast_axis(gid, axis, value(p0).dim(axis)));
        break;
      }
      case Op::kBroadcastAxis:
        accumulate(p0, sum_axis(gid, static_cast<int>(attrs.ints[0])));
        break;
      case Op::kBroadcastFull:
        accumulate(p0, sum_all(gid));
        break;
      case Op::kAddChannel:
        accumulate(p0, gid);
        accumulate(p1, sum_to_channel(gid));
        break;
      case Op::kScaleChannel:
        accumulate(p0, scale_channel(gid, p1));
        accumulate(p1, sum_to_channel(mul(gid, p0)));
        break;
      case Op::kSumToChannel:
        accumulate(p0, broadcast_channel(gid, value(p0).shape()));
        break;
      case Op::kBroadcastChannel:
        accumulate(p0, sum_to_channel(gid));
        break;
      case Op::kExp:
        accumulate(p0, mul(gid, i));
        break;
      case Op::kLog:
        accumulate(p0, mul(gid, reciprocal(p0)));
        break;
      case Op::kSigmoid: {
        // y' = y (1 - y)
        const NodeId one_minus = add_scalar(scale(i, -1.0), 1.0);
        accumulate(p0, mul(gid, mul(i, one_minus)));
        break;
      }
      case Op::kTanh: {
        const NodeId one_minus_sq = add_scalar(scale(mul(i, i), -1.0), 1.0);
        accumulate(p0, mul(gid, one_minus_sq));
        break;
      }
      case Op::kSoftplus:
        accumulate(p0, mul(gid, sigmoid(p0)));
        break;
      case Op::kReciprocal:
        accumulate(p0, scale(mul(gid, mul(i, i)), -1.0));
        break;
      case Op::kRsqrt:
        accumulate(p0, scale(mul(gid, mul(i, mul(i, i))), -0.5));
        break;
      case Op::kLeakyRelu:
        accumulate(p0, mul(gid, leaky_relu_mask(p0, attrs.scalar)));
        break;
      case Op::kConv: {
        const auto st = stride_of(attrs);
        const auto pd = pad_of(attrs);
        accumulate(p0, conv_data_grad(gid, p1, st, pd, value(p0).shape()));
        accumulate(p1, conv_kernel_grad(p0, gid, st, pd, value(p1).shape()));
        break;
      }
      case Op::kTemporalShift:
        accumulate(p0, temporal_shift(gid, attrs.scalar, -attrs.ints[0]));
        break;
      case Op::kLeakyReluMask:
      case Op::kConvDataGrad:
      case Op::kConvKernelGrad:
        throw std::logic_error(std::string("backward: op '") + op_name(op) +
                               "' only appears in gradient graphs; a second reverse pass is unsupported "
                               "(use jvp for second-order quantities)");
    }
  }

  bw.adjoints.assign(adj.begin(), adj.end());
  bw.grads.reserve(wrt.size());
  for (NodeId w : wrt) {
    NodeId gnode = adj[static_cast<size_t>(w)];
    if (gnode == kNoNode) gnode = constant(Tensor(value(w).shape()));
    bw.grads.push_back(gnode);
  }
  return bw;
}

std::vector<Tensor> Graph::jvp(const std::vector<std::pair<NodeId, Tensor>>& seeds,
                               const std::vector<NodeId>& targets) const {
  std::vector<Tensor> tan(nodes_.size());
  std::vector<char> has(nodes_.size(), 0);
  for (const auto& [id, t] : seeds) {
    if (!t.same_shape(value(id))) {
      throw std::invalid_argument("jvp: seed shape " + shape_str(t.shape()) + " does not match node " +
                                  shape_str(value(id).shape()));
    }
    tan[static_cast<size_t>(id)] = t;
    has[static_cast<size_t>(id)] = 1;
  }

  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.op == Op::kConst || n.op == Op::kLeaf) continue;
    const Tensor* ta = (n.n_parents > 0 && has[static_cast<size_t>(n.parent[0])])
                           ? &tan[static_cast<size_t>(n.parent[0])]
                           : nullptr;
    const Tensor* tb = (n.n_parents > 1 && has[static_cast<size_t>(n.parent[1])])
                           ? &tan[static_cast<size_t>(n.parent[1])]
                           : nullptr;
    if (!ta && !tb) continue;

    const Tensor& va = value(n.parent[0]);
    Tensor t;
    switch (n.op) {
      case Op::kAdd:
        if (ta && tb) {
          t = Tensor(ta->shape());
          for (int64_t j = 0; j < t.numel(); ++j) t[j] = (*ta)[j] + (*tb)[j];
        } else {
          t = ta ? *ta : *tb;
        }
        break;
      case Op::kSub:
        if (ta && tb) {
          t = Tensor(ta->shape());
          for (int64_t j = 0; j < t.numel(); ++j) t[j] = (*ta)[j] - (*tb)[j];
        } else if (ta) {
          t = *ta;
        } else {
          t = ev_unary(Op::kScale, *tb, -1.0);
        }
        break;
      case Op::kMul: {
        const Tensor& vb = value(n.parent[1]);
        t = Tensor(va.shape());
        if (ta)
          for (int64_t j = 0; j < t.numel(); ++j) t[j] += (*ta)[j] * vb[j];
        if (tb)
          for (int64_t j = 0; j < t.numel(); ++j) t[j] += va[j] * (*tb)[j];
        break;
      }
      case Op::kScale:
        t = ev_unary(Op::kScale, *ta, n.attrs.scalar);
        break;
      case Op::kAddScalar:
        t = *ta;
        break;
      case Op::kMatmul: {
        const Tensor& vb = value(n.parent[1]);
        if (ta) t = ev_matmul(*ta, vb);
        if (tb) {
          Tensor t2 = ev_matmul(va, *tb);
          if (t.empty()) {
            t = std::move(t2);
          } else {
            for (int64_t j = 0; j < t.numel(); ++j) t[j] += t2[j];
          }
        }
        break;
      }
      case Op::kTranspose:
        t = ev_transpose(*ta);
        break;
      case Op::kReshape:
        t = Tensor(n.value.shape(), ta->vec());
        break;
      case Op::kPad: {
        const size_t r = va.shape().size();
        std::vector<int64_t> lo(n.attrs.ints.begin(), n.attrs.ints.begin() + static_cast<long>(r));
        std::vector<int64_t> hi(n.attrs.ints.begin() + static_cast<long>(r), n.attrs.ints.end());
        t = ev_pad(*ta, lo, hi);
        break;
      }
      case Op::kSlice: {
        const size_t r = va.shape().size();
        std::vector<int64_t> start(n.attrs.ints.begin(), n.attrs.ints.begin() + static_cast<long>(r));
        std::vector<int64_t> len(n.attrs.ints.begin() + static_cast<long>(r), n.attrs.ints.end());
        t = ev_slice(*ta, start, len);
        break;
      }
      case Op::kConcat: {
        const int axis = static_cast<int>(n.attrs.ints[0]);
        const Tensor za = ta ? *ta : Tensor(va.shape());
        const Tensor zb = tb ? *tb : Tensor(value(n.parent[1]).shape());
        t = ev_concat(za, zb, axis);
        break;
      }
      case Op::kSumAll:
        t = Tensor::scalar(ta->sum());
        break;
      case Op::kSumAxis:
        t = ev_sum_axis(*ta, static_cast<int>(n.attrs.ints[0]));
        break;
      case Op::kBroadcastAxis:
        t = ev_broadcast_axis(*ta, static_cast<int>(n.attrs.ints[0]), n.attrs.ints[1], n.value.shape());
        break;
      case Op::kBroadcastFull:
        t = Tensor::full(n.value.shape(), (*ta)[0]);
        break;
      case Op::kAddChannel:
        if (ta && tb) {
          t = ev_add_channel(*ta, *tb);
        } else if (ta) {
          t = *ta;
        } else {
          t = ev_broadcast_channel(*tb, n.value.shape());
        }
        break;
      case Op::kScaleChannel: {
        const Tensor& vs = value(n.parent[1]);
        if (ta) t = ev_scale_channel(*ta, vs);
        if (tb) {
          Tensor t2 = ev_scale_channel(va, *tb);
          if (t.empty()) {
            t = std::move(t2);
          } else {
            for (int64_t j = 0; j < t.numel(); ++j) t[j] += t2[j];
          }
        }
        break;
      }
      case Op::kSumToChannel:
        t = ev_sum_to_channel(*ta);
        break;
      case Op::kBroadcastChannel:
        t = ev_broadcast_channel(*ta, n.value.shape());
        break;
      case Op::kExp:
        t = Tensor(va.shape());
        for (int64_t j = 0; j < t.numel(); ++j) t[j] = n.value[j] * (*ta)[j];
        break;
      case Op::kLog:
        t = Tensor(va.shape());
        for (int64_t j = 0; j < t.numel(); ++j) t[j] = (*ta)[j] / va[j];
        break;
      case Op::kSigmoid:
        t = Tensor(va.shape());
        for (int64_t j = 0; j < t.numel(); ++j) t[j] = n.value[j] * (1.0 - n.value[j]) * (*ta)[j];
        break;
      case Op::kTanh:
        t = Tensor(va.shape());
        for (int64_t j = 0; j < t.numel(); ++j) t[j] = (1.0 - n.value[j] * n.value[j]) * (*ta)[j];
        break;
      case Op::kSoftplus:
        t = Tensor(va.shape());
        for (int64_t j = 0; j < t.numel(); ++j) t[j] = (1.0 / (1.0 + std::exp(-va[j]))) * (*ta)[j];
        break;
      case Op::kReciprocal:
        t = Tensor(va.shape());
        for (int64_t j = 0; j < t.numel(); ++j) t[j] = -n.value[j] * n.value[j] * (*ta)[j];
        break;
      case Op::kRsqrt:
        t = Tensor(va.shape());
        for (int64_t j = 0; j < t.numel(); ++j)
          t[j] = -0.5 * n.value[j] * n.value[j] * n.value[j] * (*ta)[j];
        break;
      case Op::kLeakyRelu:
        t = Tensor(va.shape());
        for (int64_t j = 0; j < t.numel(); ++j) t[j] = (va[j] >= 0 ? 1.0 : n.attrs.scalar) * (*ta)[j];
        break;
      case Op::kLeakyReluMask:
        // Piecewise constant: tangent vanishes identically.
        continue;
      case Op::kConv: {
        const ConvDims d = conv_dims(va.shape(), value(n.parent[1]).shape(), stride_of(n.attrs), pad_of(n.attrs));
        if (ta) t = ev_conv(*ta, value(n.parent[1]), d);
        if (tb) {
          Tensor t2 = ev_conv(va, *tb, d);
          if (t.empty()) {
            t = std::move(t2);
          } else {
            for (int64_t j = 0; j < t.numel(); ++j) t[j] += t2[j];
          }
        }
        break;
      }
      case Op::kConvDataGrad: {
        const ConvDims d = conv_dims(tail_shape(n.attrs), value(n.parent[1]).shape(), stride_of(n.attrs),
                                     pad_of(n.attrs));
        if (ta) t = ev_conv_data_grad(*ta, value(n.parent[1]), d);
        if (tb) {
          Tensor t2 = ev_conv_data_grad(va, *tb, d);
          if (t.empty()) {
            t = std::move(t2);
          } else {
            for (int64_t j = 0; j < t.numel(); ++j) t[j] += t2[j];
          }
        }
        break;
      }
      case Op::kConvKernelGrad: {
        const ConvDims d = conv_dims(va.shape(), tail_shape(n.attrs), stride_of(n.attrs), pad_of(n.attrs));
        if (ta) t = ev_conv_kernel_grad(*ta, value(n.parent[1]), d);
        if (tb) {
          Tensor t2 = ev_conv_kernel_grad(va, *tb, d);
          if (t.empty()) {
            t = std::move(t2);
          } else {
            for (int64_t j = 0; j < t.numel(); ++j) t[j] += t2[j];
          }
        }
        break;
      }
      case Op::kTemporalShift:
        t = ev_temporal_shift(*ta, n.attrs.scalar, n.attrs.ints[0]);
        break;
      case Op::kConst:
      case Op::kLeaf:
        continue;
    }
    tan[i] = std::move(t);
    has[i] = 1;
  }

  std::vector<Tensor> out;
  out.reserve(targets.size());
  for (NodeId id : targets) {
    if (has[static_cast<size_t>(id)]) {
      out.push_back(tan[static_cast<size_t>(id)]);
    } else {
      out.push_back(Tensor(value(id).shape()));
    }
  }
  return out;
}

std::vector<double> gradient_flat(Graph& g, NodeId loss, const std::vector<NodeId>& leaves) {
  auto bw = g.backward(loss, leaves);
  std::vector<double> out;
  for (NodeId gn : bw.grads) {
    const Tensor& t = g.value(gn);
    out.insert(out.end(), t.vec().begin(), t.vec().end());
  }
  return out;
}

HvpOperator::HvpOperator(Graph& g, NodeId loss, std::vector<NodeId> leaves) : g_(&g), leaves_(std::move(leaves)) {
  auto bw = g.backward(loss, leaves_);
  grad_nodes_ = bw.grads;
  for (NodeId l : leaves_) dim_ += g.value(l).numel();
}

std::vector<double> HvpOperator::apply(std::span<const double> v) const {
  if (static_cast<int64_t>(v.size()) != dim_) {
    throw std::invalid_argument("hvp: vector length " + std::to_string(v.size()) + " != parameter dim " +
                                std::to_string(dim_));
  }
  std::vector<std::pair<NodeId, Tensor>> seeds;
  seeds.reserve(leaves_.size());
  size_t pos = 0;
  for (NodeId l : leaves_) {
    const Shape& s = g_->value(l).shape();
    const size_t n = static_cast<size_t>(shape_numel(s));
    seeds.emplace_back(l, Tensor(s, std::vector<double>(v.begin() + static_cast<long>(pos),
                                                        v.begin() + static_cast<long>(pos + n))));
    pos += n;
  }
  auto tangents = g_->jvp(seeds, grad_nodes_);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(dim_));
  for (const Tensor& t : tangents) out.insert(out.end(), t.vec().begin(), t.vec().end());
  return out;
}

namespace testing {
void inject_fault(const std::string& rule) { g_fault = rule; }
void clear_fault() { g_fault.clear(); }
}  // namespace testing

}  // namespace ldvd
