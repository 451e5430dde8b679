#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dlvgen/tensor.hpp"

namespace dlvgen {

// A trainable tensor together with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad();
};

// Owns parameters in registration order; pointers stay valid for the
// lifetime of the store.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& add(std::string name, Tensor init);
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

using NodeId = std::uint32_t;

enum class OpKind : std::uint8_t {
  constant,
  parameter,
  matmul,
  matmul_bt,
  add,
  sub,
  mul,
  scale,
  add_scalar,
  tanh,
  exp,
  reciprocal,
  gelu,
  square,
  sum,
  mean,
  l2_norm,
  concat_cols,
  slice_cols,
  slice_rows,
  gather_rows,
  layer_norm,
  softmax_rows,
  mean_rows,
  log_softmax_nll,
  clamp,
  magnitude_floor,
};

std::string_view op_name(OpKind kind);

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  NodeId id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  // Valid until the next node is recorded in the same graph.
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t size() const { return value().size(); }
  // Value of a single-element node.
  double item() const;

 private:
  friend class Graph;
  Var(Graph* graph, NodeId id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  NodeId id_ = 0;
};

// Tape of executed operations. Nodes are appended in execution order, so
// every input precedes the node that consumes it and backward() walks the
// tape in exact reverse.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, NodeId)>;

  // With tracking disabled no backward closures are stored; used for
  // inference.
  explicit Graph(bool track_gradients = true) : tracking_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf that reads the parameter in place. backward() adds into
  // Parameter::grad.
  Var parameter(Parameter& p);
  Var parameter(const Parameter& p);

  // Seeds d(loss)/d(loss) = 1 and propagates. The loss must hold exactly one
  // element. May be called once per graph.
  void backward(Var loss);

  const Tensor& value(NodeId id) const;
  // Gradient of the last backward() loss with respect to a node; a zero
  // tensor if the node was unreachable.
  Tensor grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  OpKind kind(NodeId id) const { return nodes_[id].kind; }
  std::span<const NodeId> inputs(NodeId id) const { return nodes_[id].inputs; }
  bool tracking() const { return tracking_; }

  // Op implementation interface.
  Var record(OpKind kind, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  bool needs_grad(NodeId id) const { return nodes_[id].needs_grad; }
  Tensor& grad_buffer(NodeId id);
  bool has_grad(NodeId id) const { return !nodes_[id].grad.empty(); }

 private:
  struct Node {
    OpKind kind = OpKind::constant;
    Tensor value;
    const Tensor* external = nullptr;
    Parameter* param = nullptr;
    std::vector<NodeId> inputs;
    bool needs_grad = false;
    BackwardFn backward;
    Tensor grad;
  };

  Var leaf(OpKind kind, const Tensor* external, Parameter* param);

  bool tracking_;
  bool backward_done_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, NodeId> param_nodes_;
};

}  // namespace dlvgen
