#include "metags/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "metags/errors.hpp"
#include "metags/rng.hpp"

namespace metags::ad {

namespace {

thread_local Tape* g_current_tape = nullptr;
std::atomic<uint64_t> g_tape_counter{1};

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream s;
  s << "(";
  for (size_t i = 0; i < shape.size(); ++i) s << (i ? "," : "") << shape[i];
  s << ")";
  return s.str();
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::Stack: return "stack";
    case Op::Select: return "select";
    case Op::Add: return "add";
    case Op::Mul: return "mul";
    case Op::Negate: return "negate";
    case Op::ScaleConst: return "scale";
    case Op::ScaleScalar: return "scale_by";
    case Op::MatVec: return "matvec";
    case Op::Dot: return "dot";
    case Op::Concat: return "concat";
    case Op::LeakyRelu: return "leaky_relu";
    case Op::Relu: return "relu";
    case Op::Tanh: return "tanh";
    case Op::Softmax: return "softmax";
    case Op::SumList: return "sum_list";
    case Op::MeanList: return "mean_list";
    case Op::MaxList: return "max_list";
    case Op::SqEuclid: return "squared_euclidean";
    case Op::Log: return "log";
  }
  return "?";
}

size_t shape_elems(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) n *= size_t(d);
  return n;
}

void check_finite(const Node& node) {
  for (double v : node.value) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value out of op '") + op_name(node.op) +
                         "' with shape " + shape_str(node.shape));
    }
  }
}

Tensor make_op(Op op, std::vector<int> shape, std::vector<double> value,
               std::vector<NodePtr> parents, std::vector<double> aux = {},
               std::vector<int> aux_i = {}) {
  Tape* tape = Tape::current();
  if (!tape) {
    throw Error(ErrorClass::Internal,
                std::string("op '") + op_name(op) + "' executed outside an active Tape");
  }
  auto node = std::make_shared<Node>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->parents = std::move(parents);
  node->aux = std::move(aux);
  node->aux_i = std::move(aux_i);
  node->tape_id = tape->id();
  for (const NodePtr& p : node->parents) {
    if (p->requires_grad) {
      node->requires_grad = true;
      break;
    }
  }
  check_finite(*node);
  tape->record(node);
  return Tensor(node);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ValidationError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) +
                          " vs " + shape_str(b.shape()));
  }
}

void require_vector(const Tensor& t, const char* what) {
  if (t.shape().size() != 1) {
    throw ValidationError(std::string(what) + ": expected a vector, got shape " +
                          shape_str(t.shape()));
  }
}

void require_scalar(const Tensor& t, const char* what) {
  if (!t.shape().empty()) {
    throw ValidationError(std::string(what) + ": expected a scalar, got shape " +
                          shape_str(t.shape()));
  }
}

}  // namespace

Tensor Tensor::scalar(double v, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->shape = {};
  node->value = {v};
  node->requires_grad = requires_grad;
  check_finite(*node);
  return Tensor(node);
}

Tensor Tensor::vector(std::vector<double> v, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->shape = {int(v.size())};
  node->value = std::move(v);
  node->requires_grad = requires_grad;
  check_finite(*node);
  return Tensor(node);
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> v, bool requires_grad) {
  if (size_t(rows) * size_t(cols) != v.size()) {
    throw ValidationError("matrix: rows*cols != data size");
  }
  auto node = std::make_shared<Node>();
  node->shape = {rows, cols};
  node->value = std::move(v);
  node->requires_grad = requires_grad;
  check_finite(*node);
  return Tensor(node);
}

Tensor Tensor::zeros(const std::vector<int>& shape, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value.assign(shape_elems(shape), 0.0);
  node->requires_grad = requires_grad;
  return Tensor(node);
}

Tape::Tape() : id_(g_tape_counter.fetch_add(1)) {
  previous_ = g_current_tape;
  g_current_tape = this;
}

Tape::~Tape() { g_current_tape = previous_; }

Tape* Tape::current() { return g_current_tape; }

void Tape::record(NodePtr node) { nodes_.push_back(std::move(node)); }

void Tape::backward(const Tensor& loss) {
  if (consumed_) {
    throw ValidationError("backward: tape already consumed; build a fresh tape");
  }
  if (!loss.defined() || !loss.shape().empty()) {
    throw ValidationError("backward: loss must be a scalar tensor");
  }
  if (loss.node()->tape_id != id_) {
    throw ValidationError("backward: loss is detached from this tape");
  }
  consumed_ = true;

  loss.node()->ensure_grad();
  loss.node()->grad[0] = 1.0;

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& node = **it;
    if (!node.requires_grad || node.grad.empty()) continue;
    const std::vector<double>& g = node.grad;
    auto parent_grad = [&](size_t i) -> std::vector<double>* {
      Node& p = *node.parents[i];
      if (!p.requires_grad) return nullptr;
      p.ensure_grad();
      return &p.grad;
    };
    switch (node.op) {
      case Op::Leaf:
        break;
      case Op::Stack: {
        for (size_t i = 0; i < node.parents.size(); ++i) {
          if (auto* pg = parent_grad(i)) (*pg)[0] += g[i];
        }
        break;
      }
      case Op::Select: {
        if (auto* pg = parent_grad(0)) (*pg)[size_t(node.aux_i[0])] += g[0];
        break;
      }
      case Op::Add: {
        for (size_t i = 0; i < 2; ++i) {
          if (auto* pg = parent_grad(i)) {
            for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += g[e];
          }
        }
        break;
      }
      case Op::Mul: {
        const auto& a = node.parents[0]->value;
        const auto& b = node.parents[1]->value;
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += g[e] * b[e];
        }
        if (auto* pg = parent_grad(1)) {
          for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += g[e] * a[e];
        }
        break;
      }
      case Op::Negate: {
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < g.size(); ++e) (*pg)[e] -= g[e];
        }
        break;
      }
      case Op::ScaleConst: {
        double c = node.aux[0];
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += c * g[e];
        }
        break;
      }
      case Op::ScaleScalar: {
        const auto& x = node.parents[0]->value;
        double s = node.parents[1]->value[0];
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += s * g[e];
        }
        if (auto* pg = parent_grad(1)) {
          double acc = 0.0;
          for (size_t e = 0; e < g.size(); ++e) acc += g[e] * x[e];
          (*pg)[0] += acc;
        }
        break;
      }
      case Op::MatVec: {
        int rows = node.aux_i[0];
        int cols = node.aux_i[1];
        const auto& m = node.parents[0]->value;
        const auto& x = node.parents[1]->value;
        if (auto* pg = parent_grad(0)) {
          for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) (*pg)[size_t(i * cols + j)] += g[size_t(i)] * x[size_t(j)];
          }
        }
        if (auto* pg = parent_grad(1)) {
          for (int i = 0; i < rows; ++i) {
            double gi = g[size_t(i)];
            for (int j = 0; j < cols; ++j) (*pg)[size_t(j)] += m[size_t(i * cols + j)] * gi;
          }
        }
        break;
      }
      case Op::Dot: {
        const auto& a = node.parents[0]->value;
        const auto& b = node.parents[1]->value;
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < a.size(); ++e) (*pg)[e] += g[0] * b[e];
        }
        if (auto* pg = parent_grad(1)) {
          for (size_t e = 0; e < b.size(); ++e) (*pg)[e] += g[0] * a[e];
        }
        break;
      }
      case Op::Concat: {
        size_t n0 = node.parents[0]->value.size();
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < n0; ++e) (*pg)[e] += g[e];
        }
        if (auto* pg = parent_grad(1)) {
          for (size_t e = 0; e < node.parents[1]->value.size(); ++e) (*pg)[e] += g[n0 + e];
        }
        break;
      }
      case Op::LeakyRelu: {
        double slope = node.aux[0];
        const auto& x = node.parents[0]->value;
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += g[e] * (x[e] > 0.0 ? 1.0 : slope);
        }
        break;
      }
      case Op::Relu: {
        const auto& x = node.parents[0]->value;
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += x[e] > 0.0 ? g[e] : 0.0;
        }
        break;
      }
      case Op::Tanh: {
        const auto& y = node.value;
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += g[e] * (1.0 - y[e] * y[e]);
        }
        break;
      }
      case Op::Softmax: {
        const auto& y = node.value;
        if (auto* pg = parent_grad(0)) {
          double dot_yg = 0.0;
          for (size_t e = 0; e < g.size(); ++e) dot_yg += y[e] * g[e];
          for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += y[e] * (g[e] - dot_yg);
        }
        break;
      }
      case Op::SumList: {
        for (size_t i = 0; i < node.parents.size(); ++i) {
          if (auto* pg = parent_grad(i)) {
            for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += g[e];
          }
        }
        break;
      }
      case Op::MeanList: {
        double inv = 1.0 / double(node.parents.size());
        for (size_t i = 0; i < node.parents.size(); ++i) {
          if (auto* pg = parent_grad(i)) {
            for (size_t e = 0; e < g.size(); ++e) (*pg)[e] += inv * g[e];
          }
        }
        break;
      }
      case Op::MaxList: {
        // all gradient mass routes to the argmax positions
        for (size_t e = 0; e < g.size(); ++e) {
          size_t winner = size_t(node.aux_i[e]);
          if (auto* pg = parent_grad(winner)) (*pg)[e] += g[e];
        }
        break;
      }
      case Op::SqEuclid: {
        const auto& a = node.parents[0]->value;
        const auto& b = node.parents[1]->value;
        if (auto* pg = parent_grad(0)) {
          for (size_t e = 0; e < a.size(); ++e) (*pg)[e] += 2.0 * (a[e] - b[e]) * g[0];
        }
        if (auto* pg = parent_grad(1)) {
          for (size_t e = 0; e < a.size(); ++e) (*pg)[e] -= 2.0 * (a[e] - b[e]) * g[0];
        }
        break;
      }
      case Op::Log: {
        double floor = node.aux[0];
        double x = node.parents[0]->value[0];
        if (auto* pg = parent_grad(0)) {
          if (x > floor) (*pg)[0] += g[0] / x;
          // below the clamp the output is constant
        }
        break;
      }
    }
  }
}

Tensor stack(const std::vector<Tensor>& scalars) {
  if (scalars.empty()) throw ValidationError("stack: empty input list");
  std::vector<double> value;
  std::vector<NodePtr> parents;
  for (const Tensor& t : scalars) {
    require_scalar(t, "stack");
    value.push_back(t.values()[0]);
    parents.push_back(t.node());
  }
  return make_op(Op::Stack, {int(scalars.size())}, std::move(value), std::move(parents));
}

Tensor select(const Tensor& vec, int index) {
  require_vector(vec, "select");
  if (index < 0 || index >= vec.shape()[0]) {
    throw ValidationError("select: index " + std::to_string(index) + " out of range for shape " +
                          shape_str(vec.shape()));
  }
  return make_op(Op::Select, {}, {vec.values()[size_t(index)]}, {vec.node()}, {}, {index});
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> value(a.values());
  for (size_t e = 0; e < value.size(); ++e) value[e] += b.values()[e];
  return make_op(Op::Add, a.shape(), std::move(value), {a.node(), b.node()});
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> value(a.values());
  for (size_t e = 0; e < value.size(); ++e) value[e] *= b.values()[e];
  return make_op(Op::Mul, a.shape(), std::move(value), {a.node(), b.node()});
}

Tensor negate(const Tensor& a) {
  std::vector<double> value(a.values());
  for (double& v : value) v = -v;
  return make_op(Op::Negate, a.shape(), std::move(value), {a.node()});
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> value(a.values());
  for (double& v : value) v *= c;
  return make_op(Op::ScaleConst, a.shape(), std::move(value), {a.node()}, {c});
}

Tensor scale_by(const Tensor& vec, const Tensor& scalar) {
  require_scalar(scalar, "scale_by");
  double s = scalar.values()[0];
  std::vector<double> value(vec.values());
  for (double& v : value) v *= s;
  return make_op(Op::ScaleScalar, vec.shape(), std::move(value), {vec.node(), scalar.node()});
}

Tensor matvec(const Tensor& m, const Tensor& x) {
  if (m.shape().size() != 2) {
    throw ValidationError("matvec: left operand must be a matrix, got shape " +
                          shape_str(m.shape()));
  }
  require_vector(x, "matvec");
  int rows = m.shape()[0];
  int cols = m.shape()[1];
  if (cols != x.shape()[0]) {
    throw ValidationError("matvec: shape mismatch " + shape_str(m.shape()) + " vs " +
                          shape_str(x.shape()));
  }
  std::vector<double> value(size_t(rows), 0.0);
  const auto& mv = m.values();
  const auto& xv = x.values();
  for (int i = 0; i < rows; ++i) {
    double acc = 0.0;
    const double* row = mv.data() + size_t(i) * size_t(cols);
    for (int j = 0; j < cols; ++j) acc += row[j] * xv[size_t(j)];
    value[size_t(i)] = acc;
  }
  return make_op(Op::MatVec, {rows}, std::move(value), {m.node(), x.node()}, {}, {rows, cols});
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require_vector(a, "dot");
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (size_t e = 0; e < a.values().size(); ++e) acc += a.values()[e] * b.values()[e];
  return make_op(Op::Dot, {}, {acc}, {a.node(), b.node()});
}

Tensor concat(const Tensor& a, const Tensor& b) {
  require_vector(a, "concat");
  require_vector(b, "concat");
  std::vector<double> value(a.values());
  value.insert(value.end(), b.values().begin(), b.values().end());
  return make_op(Op::Concat, {int(value.size())}, std::move(value), {a.node(), b.node()});
}

Tensor leaky_relu(const Tensor& a, double slope) {
  std::vector<double> value(a.values());
  for (double& v : value) v = v > 0.0 ? v : slope * v;
  return make_op(Op::LeakyRelu, a.shape(), std::move(value), {a.node()}, {slope});
}

Tensor relu(const Tensor& a) {
  std::vector<double> value(a.values());
  for (double& v : value) v = v > 0.0 ? v : 0.0;
  return make_op(Op::Relu, a.shape(), std::move(value), {a.node()});
}

Tensor tanh(const Tensor& a) {
  std::vector<double> value(a.values());
  for (double& v : value) v = std::tanh(v);
  return make_op(Op::Tanh, a.shape(), std::move(value), {a.node()});
}

Tensor softmax(const Tensor& logits) {
  require_vector(logits, "softmax");
  const auto& x = logits.values();
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  std::vector<double> value(x.size());
  double z = 0.0;
  for (size_t e = 0; e < x.size(); ++e) {
    value[e] = std::exp(x[e] - m);
    z += value[e];
  }
  for (double& v : value) v /= z;
  return make_op(Op::Softmax, logits.shape(), std::move(value), {logits.node()});
}

std::vector<Tensor> softmax_list(const std::vector<Tensor>& scalars) {
  Tensor probs = softmax(stack(scalars));
  std::vector<Tensor> out;
  out.reserve(scalars.size());
  for (int i = 0; i < int(scalars.size()); ++i) out.push_back(select(probs, i));
  return out;
}

namespace {

Tensor reduce_list(Op op, const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ValidationError(std::string(op_name(op)) + ": empty input list");
  std::vector<NodePtr> parents;
  parents.reserve(xs.size());
  for (const Tensor& t : xs) {
    require_same_shape(xs[0], t, op_name(op));
    parents.push_back(t.node());
  }
  size_t n = xs[0].values().size();
  std::vector<double> value(n, 0.0);
  std::vector<int> aux_i;
  if (op == Op::MaxList) {
    aux_i.assign(n, 0);
    value = xs[0].values();
    for (size_t i = 1; i < xs.size(); ++i) {
      for (size_t e = 0; e < n; ++e) {
        if (xs[i].values()[e] > value[e]) {
          value[e] = xs[i].values()[e];
          aux_i[e] = int(i);
        }
      }
    }
  } else {
    for (const Tensor& t : xs) {
      for (size_t e = 0; e < n; ++e) value[e] += t.values()[e];
    }
    if (op == Op::MeanList) {
      for (double& v : value) v /= double(xs.size());
    }
  }
  return make_op(op, xs[0].shape(), std::move(value), std::move(parents), {}, std::move(aux_i));
}

}  // namespace

Tensor sum_list(const std::vector<Tensor>& xs) { return reduce_list(Op::SumList, xs); }
Tensor mean_list(const std::vector<Tensor>& xs) { return reduce_list(Op::MeanList, xs); }
Tensor max_list(const std::vector<Tensor>& xs) { return reduce_list(Op::MaxList, xs); }

Tensor squared_euclidean(const Tensor& a, const Tensor& b) {
  require_vector(a, "squared_euclidean");
  require_same_shape(a, b, "squared_euclidean");
  double acc = 0.0;
  for (size_t e = 0; e < a.values().size(); ++e) {
    double d = a.values()[e] - b.values()[e];
    acc += d * d;
  }
  return make_op(Op::SqEuclid, {}, {acc}, {a.node(), b.node()});
}

Tensor log(const Tensor& scalar, double clamp_floor) {
  require_scalar(scalar, "log");
  double x = std::max(scalar.values()[0], clamp_floor);
  if (x <= 0.0) {
    throw NumericError("log: non-positive input without clamp floor");
  }
  return make_op(Op::Log, {}, {std::log(x)}, {scalar.node()}, {clamp_floor});
}

// ---------------------------------------------------------------------------
// ParamStore

Tensor ParamStore::create(const std::string& name, const std::vector<int>& shape,
                          uint64_t init_seed) {
  if (params_.count(name)) {
    throw Error(ErrorClass::Internal, "parameter '" + name + "' already exists");
  }
  size_t n = shape_elems(shape);
  // fan-in: input dimension for matrices, length for vectors
  size_t fan_in = shape.size() == 2 ? size_t(shape[1]) : std::max<size_t>(1, n);
  double bound = 1.0 / std::sqrt(double(fan_in));
  Rng rng(init_seed);
  std::vector<double> value(n);
  for (double& v : value) v = rng.uniform(-bound, bound);

  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value = std::move(value);
  node->requires_grad = true;
  node->name = name;
  Tensor t(node);
  params_.emplace(name, t);
  return t;
}

Tensor ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw Error(ErrorClass::Internal, "unknown parameter '" + name + "'");
  }
  return it->second;
}

void ParamStore::visit(const std::function<void(const std::string&, Tensor&)>& fn) {
  for (auto& [name, t] : params_) fn(name, t);
}

void ParamStore::visit(const std::function<void(const std::string&, const Tensor&)>& fn) const {
  for (const auto& [name, t] : params_) fn(name, t);
}

void ParamStore::zero_grads() {
  for (auto& [name, t] : params_) t.zero_grad();
}

size_t ParamStore::total_elems() const {
  size_t n = 0;
  for (const auto& [name, t] : params_) n += t.values().size();
  return n;
}

}  // namespace metags::ad
