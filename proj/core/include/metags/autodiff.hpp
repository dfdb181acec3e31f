#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace metags::ad {

enum class Op {
  Leaf,
  Stack,        // scalars -> vector
  Select,       // vector component -> scalar
  Add,          // elementwise, any matching shapes
  Mul,          // elementwise
  Negate,
  ScaleConst,   // x * c
  ScaleScalar,  // vector * scalar tensor
  MatVec,       // matrix (r x c) * vector (c) -> vector (r)
  Dot,          // vector . vector -> scalar
  Concat,       // two vectors
  LeakyRelu,
  Relu,
  Tanh,
  Softmax,      // vector -> vector
  SumList,      // elementwise sum over k same-shape tensors
  MeanList,
  MaxList,      // elementwise max, argmax routing
  SqEuclid,     // squared euclidean distance -> scalar
  Log,          // scalar log with optional clamp floor
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Dense double tensor of rank 0 (scalar), 1 (vector) or 2 (matrix).
// Every forward op verifies shapes and finiteness of its output.
struct Node {
  Op op = Op::Leaf;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;   // allocated on demand, same size as value
  bool requires_grad = false;
  uint64_t tape_id = 0;       // 0 for leaves
  std::vector<NodePtr> parents;
  std::vector<double> aux;    // op constants (slope, clamp, saved softmax, ...)
  std::vector<int> aux_i;     // argmax indices, select index, matvec dims
  std::string name;           // parameters only

  size_t n_elems() const { return value.size(); }
  bool is_scalar() const { return shape.empty(); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Handle type: cheap to copy, points at a node owned by the active tape (op
// results) or by a parameter store / caller (leaves).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor vector(std::vector<double> v, bool requires_grad = false);
  static Tensor matrix(int rows, int cols, std::vector<double> v, bool requires_grad = false);
  static Tensor zeros(const std::vector<int>& shape, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  const std::vector<double>& values() const { return node_->value; }
  std::vector<double>& values() { return node_->value; }
  const std::vector<double>& grad() const { return node_->grad; }
  double scalar_value() const { return node_->value.at(0); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::string& name() const { return node_->name; }
  void set_name(std::string n) { node_->name = std::move(n); }
  void zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }
  NodePtr node() const { return node_; }

 private:
  NodePtr node_;
};

// Ordered record of executed ops. Ops recorded while a Tape is alive belong
// to it; backward() walks the record in exact reverse execution order and
// accumulates gradients additively across fan-out. One backward per tape.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void backward(const Tensor& loss);
  size_t n_nodes() const { return nodes_.size(); }
  uint64_t id() const { return id_; }

  static Tape* current();
  void record(NodePtr node);

 private:
  uint64_t id_;
  bool consumed_ = false;
  std::vector<NodePtr> nodes_;
  Tape* previous_ = nullptr;
};

// Forward ops. All of them type-check shapes, record onto the current tape,
// and reject non-finite outputs.
Tensor stack(const std::vector<Tensor>& scalars);
Tensor select(const Tensor& vec, int index);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor negate(const Tensor& a);
Tensor scale(const Tensor& a, double c);
Tensor scale_by(const Tensor& vec, const Tensor& scalar);
Tensor matvec(const Tensor& m, const Tensor& x);
Tensor dot(const Tensor& a, const Tensor& b);
Tensor concat(const Tensor& a, const Tensor& b);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor softmax(const Tensor& logits);
std::vector<Tensor> softmax_list(const std::vector<Tensor>& scalars);
Tensor sum_list(const std::vector<Tensor>& xs);
Tensor mean_list(const std::vector<Tensor>& xs);
Tensor max_list(const std::vector<Tensor>& xs);
Tensor squared_euclidean(const Tensor& a, const Tensor& b);
// log(max(x, clamp_floor)); clamp_floor = 0 gives the plain log.
Tensor log(const Tensor& scalar, double clamp_floor = 0.0);

// Named trainable tensors, iterated in name order for checkpoints,
// optimizer steps and gradient checks.
class ParamStore {
 public:
  Tensor create(const std::string& name, const std::vector<int>& shape, uint64_t init_seed);
  Tensor get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  void visit(const std::function<void(const std::string&, Tensor&)>& fn);
  void visit(const std::function<void(const std::string&, const Tensor&)>& fn) const;
  void zero_grads();
  size_t total_elems() const;
  size_t size() const { return params_.size(); }

 private:
  std::map<std::string, Tensor> params_;
};

}  // namespace metags::ad
