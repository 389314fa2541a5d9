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

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ldvd/paramset.hpp"
#include "ldvd/tensor.hpp"

namespace ldvd {

using NodeId = int32_t;
constexpr NodeId kNoNode = -1;

enum class Op : uint8_t {
  kConst,
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kMatmul,
  kTranspose,
  kReshape,
  kPad,
  kSlice,
  kConcat,
  kSumAll,
  kSumAxis,
  kBroadcastAxis,
  kBroadcastFull,
  kAddChannel,
  kScaleChannel,
  kSumToChannel,
  kBroadcastChannel,
  kExp,
  kLog,
  kSigmoid,
  kTanh,
  kSoftplus,
  kReciprocal,
  kRsqrt,
  kLeakyRelu,
  kLeakyReluMask,
  kConv,
  kConvDataGrad,
  kConvKernelGrad,
  kTemporalShift,
};

const char* op_name(Op op);

struct OpAttrs {
  std::vector<int64_t> ints;
  double scalar = 0.0;
};

struct Node {
  Op op = Op::kConst;
  std::array<NodeId, 2> parent{kNoNode, kNoNode};
  int n_parents = 0;
  Tensor value;
  OpAttrs attrs;
};

/// Append-only tape. Values are evaluated eagerly as ops are recorded;
/// parents always precede children. A Graph is single-writer: one thread
/// records and differentiates it, distinct Graphs share nothing.
///
/// Reverse pass (backward) appends the adjoint computation to the same tape
/// as ordinary ops. Exact Hessian-vector products are then a forward
/// directional pass (jvp) over the recorded gradient subgraph, which is the
/// R-operator applied through the adjoint computation.
class Graph {
 public:
  NodeId constant(Tensor t);
  NodeId leaf(Tensor t);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double c);
  NodeId add_scalar(NodeId a, double c);

  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);

  NodeId reshape(NodeId a, Shape shape);
  NodeId pad(NodeId a, const std::vector<int64_t>& lo, const std::vector<int64_t>& hi);
  NodeId slice(NodeId a, const std::vector<int64_t>& start, const std::vector<int64_t>& len);
  NodeId concat(NodeId a, NodeId b, int axis);

  NodeId sum_all(NodeId a);
  NodeId mean_all(NodeId a);
  NodeId sum_axis(NodeId a, int axis);
  NodeId broadcast_axis(NodeId a, int axis, int64_t n);
  NodeId broadcast_full(NodeId a, Shape shape);

  NodeId add_channel(NodeId x, NodeId b);
  NodeId scale_channel(NodeId x, NodeId s);
  NodeId sum_to_channel(NodeId x);
  NodeId broadcast_channel(NodeId v, Shape shape);

  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId softplus(NodeId a);
  NodeId reciprocal(NodeId a);
  NodeId rsqrt(NodeId a);
  NodeId leaky_relu(NodeId a, double slope);
  NodeId leaky_relu_mask(NodeId a, double slope);

  /// Batched correlation. x: (B,T,H,W,Ci), kernel: (Co,kt,kh,kw,Ci),
  /// stride/pad: per spatiotemporal axis (t,h,w). Output extents follow
  /// floor((in + 2*pad - k) / stride) + 1.
  NodeId conv(NodeId x, NodeId kernel, const std::array<int64_t, 3>& stride, const std::array<int64_t, 3>& pad);
  NodeId conv_data_grad(NodeId out_grad, NodeId kernel, const std::array<int64_t, 3>& stride,
                        const std::array<int64_t, 3>& pad, const Shape& input_shape);
  NodeId conv_kernel_grad(NodeId x, NodeId out_grad, const std::array<int64_t, 3>& stride,
                          const std::array<int64_t, 3>& pad, const Shape& kernel_shape);

  /// Shifts floor(C*fraction) channels forward in time by `steps` and the
  /// next floor(C*fraction) backward; vacated slots are zero-filled. The op
  /// is the identity when floor(C*fraction) == 0.
  NodeId temporal_shift(NodeId x, double fraction, int64_t steps);

  const Tensor& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
  size_t size() const { return nodes_.size(); }

  struct Backward {
    NodeId loss = kNoNode;
    std::vector<NodeId> wrt;
    std::vector<NodeId> grads;      // one per wrt entry; zero-constant if detached
    std::vector<NodeId> adjoints;   // adjoint node per forward node, kNoNode if none
    size_t n_forward_nodes = 0;
  };

  /// Appends the adjoint computation for a scalar loss. Rejects non-scalar
  /// losses. The returned gradient nodes are ordinary tape nodes and can be
  /// differentiated again with jvp().
  Backward backward(NodeId loss, const std::vector<NodeId>& wrt);

  /// Forward directional derivative sweep. Seeds assign tangents to leaves;
  /// everything unseeded starts with a structurally-zero tangent. Returns
  /// the tangent of each target (zero tensors where nothing flows).
  std::vector<Tensor> jvp(const std::vector<std::pair<NodeId, Tensor>>& seeds,
                          const std::vector<NodeId>& targets) const;

 private:
  NodeId push(Node n);
  NodeId binary_same_shape(Op op, NodeId a, NodeId b);
  NodeId unary(Op op, NodeId a, double scalar = 0.0);

  std::vector<Node> nodes_;
};

/// Reverse-mode gradient of a scalar loss with respect to a ParamSet whose
/// entries were bound to the given leaves. Missing leaves get zeros.
std::vector<double> gradient_flat(Graph& g, NodeId loss, const std::vector<NodeId>& leaves);

/// v -> (Hessian of loss) * v for a fixed recorded loss. Binding is done
/// once; each apply() is a single tangent sweep over the tape.
class HvpOperator {
 public:
  HvpOperator(Graph& g, NodeId loss, std::vector<NodeId> leaves);

  int64_t dim() const { return dim_; }
  std::vector<double> apply(std::span<const double> v) const;

 private:
  Graph* g_;
  std::vector<NodeId> leaves_;
  std::vector<NodeId> grad_nodes_;
  int64_t dim_ = 0;
};

namespace testing {
/// Fault injection hook for the verification harness self-test. Naming a
/// rule ("conv-kernel-grad") perturbs that rule's output until cleared.
void inject_fault(const std::string& rule);
void clear_fault();
}  // namespace testing

}  // namespace ldvd
