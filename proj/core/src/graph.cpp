#include "dlvgen/graph.hpp"

#include <algorithm>

#include "dlvgen/errors.hpp"

namespace dlvgen {

void Parameter::zero_grad() {
  if (grad.shape() != value.shape()) {
    grad = Tensor(value.shape());
  } else {
    grad.fill(0.0);
  }
}

Parameter& ParameterStore::add(std::string name, Tensor init) {
  if (find(name)) throw ContractError("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->grad = Tensor(init.shape());
  p->value = std::move(init);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParameterStore::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Parameter& ParameterStore::get(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw ContractError("unknown parameter: " + std::string(name));
}

const Parameter& ParameterStore::get(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw ContractError("unknown parameter: " + std::string(name));
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::constant: return "constant";
    case OpKind::parameter: return "parameter";
    case OpKind::matmul: return "matmul";
    case OpKind::matmul_bt: return "matmul_bt";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::add_scalar: return "add_scalar";
    case OpKind::tanh: return "tanh";
    case OpKind::exp: return "exp";
    case OpKind::reciprocal: return "reciprocal";
    case OpKind::gelu: return "gelu";
    case OpKind::square: return "square";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::l2_norm: return "l2_norm";
    case OpKind::concat_cols: return "concat_cols";
    case OpKind::slice_cols: return "slice_cols";
    case OpKind::slice_rows: return "slice_rows";
    case OpKind::gather_rows: return "gather_rows";
    case OpKind::layer_norm: return "layer_norm";
    case OpKind::softmax_rows: return "softmax_rows";
    case OpKind::mean_rows: return "mean_rows";
    case OpKind::log_softmax_nll: return "log_softmax_nll";
    case OpKind::clamp: return "clamp";
    case OpKind::magnitude_floor: return "magnitude_floor";
  }
  return "unknown";
}

const Tensor& Var::value() const { return graph_->value(id_); }

double Var::item() const {
  const auto& v = value();
  if (v.size() != 1) throw ContractError("item() on non-scalar node " + shape_string(v.shape()));
  return v[0];
}

Var Graph::leaf(OpKind kind, const Tensor* external, Parameter* param) {
  Node node;
  node.kind = kind;
  node.external = external;
  node.param = param;
  node.needs_grad = tracking_ && param != nullptr;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<NodeId>(nodes_.size() - 1));
}

Var Graph::constant(Tensor value) {
  Node node;
  node.kind = OpKind::constant;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<NodeId>(nodes_.size() - 1));
}

Var Graph::parameter(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  auto v = leaf(OpKind::parameter, &p.value, &p);
  param_nodes_.emplace(&p, v.id());
  return v;
}

Var Graph::parameter(const Parameter& p) {
  // Read-only use: the parameter is a constant of this graph.
  if (tracking_) return parameter(const_cast<Parameter&>(p));
  return leaf(OpKind::parameter, &p.value, nullptr);
}

const Tensor& Graph::value(NodeId id) const {
  const auto& node = nodes_[id];
  return node.external ? *node.external : node.value;
}

Var Graph::record(OpKind kind, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node node;
  node.kind = kind;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const auto& in : inputs) {
    if (in.graph_ != this) throw ContractError("operand belongs to a different graph");
    node.inputs.push_back(in.id());
    node.needs_grad = node.needs_grad || nodes_[in.id()].needs_grad;
  }
  if (tracking_ && node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<NodeId>(nodes_.size() - 1));
}

Tensor& Graph::grad_buffer(NodeId id) {
  auto& node = nodes_[id];
  if (node.grad.empty()) node.grad = Tensor(value(id).shape());
  return node.grad;
}

Tensor Graph::grad(Var v) const {
  const auto& node = nodes_[v.id()];
  if (node.grad.empty()) return Tensor(value(v.id()).shape());
  return node.grad;
}

void Graph::backward(Var loss) {
  if (loss.graph_ != this) throw ContractError("loss belongs to a different graph");
  if (loss.value().size() != 1) {
    throw ContractError("backward() requires a scalar loss, got shape " + shape_string(loss.value().shape()));
  }
  if (!tracking_) throw ContractError("backward() on a graph without gradient tracking");
  if (backward_done_) throw ContractError("backward() called twice on the same graph");
  backward_done_ = true;

  grad_buffer(loss.id())[0] = 1.0;
  for (NodeId id = loss.id() + 1; id-- > 0;) {
    auto& node = nodes_[id];
    if (node.grad.empty() || !node.backward) continue;
    node.backward(*this, id);
  }
  for (auto& node : nodes_) {
    if (node.param && !node.grad.empty()) {
      auto& dst = node.param->grad;
      if (dst.shape() != node.param->value.shape()) dst = Tensor(node.param->value.shape());
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += node.grad[i];
    }
  }
}

}  // namespace dlvgen
