// Minimal reverse-mode differentiation over dense 64-bit tensors.
//
// A Tape records every operation in evaluation order. Leaves are either
// constants or references into a ParameterStore; Tape::backward() walks the
// record in reverse and returns one gradient tensor per stored parameter.
//
// Shapes are explicit. Apart from matrix-vector products, every binary
// elementwise op requires identical shapes.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace entrack {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

struct Tensor {
  Shape shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(Shape s, std::vector<double> v);

  static Tensor zeros(Shape s);
  static Tensor vector(std::vector<double> v);
  static Tensor scalar(double v) { return Tensor({}, {v}); }
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t element_count(const Shape& shape);

using ParamId = std::size_t;

// Named, ordered collection of model tensors. Order is insertion order and is
// the order of the gradient table returned by Tape::backward().
class ParameterStore {
 public:
  ParamId add(std::string name, Tensor value, bool trainable = true);

  std::size_t size() const { return tensors_.size(); }
  const Tensor& tensor(ParamId id) const { return tensors_.at(id); }
  Tensor& tensor(ParamId id) { return tensors_.at(id); }
  const std::string& name(ParamId id) const { return names_.at(id); }
  bool trainable(ParamId id) const { return trainable_.at(id); }
  ParamId find(const std::string& name) const;  // throws std::out_of_range
  std::size_t trainable_scalars() const;

  friend bool operator==(const ParameterStore&, const ParameterStore&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::vector<bool> trainable_;
};

using Gradients = std::vector<Tensor>;

Gradients zero_gradients(const ParameterStore& store);
void accumulate(Gradients& into, const Gradients& from, double scale = 1.0);

class Tape;

// Handle to a tape node. Cheap to copy; valid while its tape lives.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t index = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  std::size_t size() const { return value().size(); }
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a stored parameter. Repeated calls return the same node.
  Var param(const ParameterStore& store, ParamId id);

  // Records a node whose value is already computed. `backward` reads
  // grad(result) and accumulates into the operands' gradients.
  Var record(Tensor value, BackwardFn backward);

  const Tensor& value(std::uint32_t index) const { return nodes_[index].value; }
  std::vector<double>& grad(std::uint32_t index);

  std::size_t node_count() const { return nodes_.size(); }

  // Reverse sweep from a scalar loss. Returns d loss / d p for every entry of
  // `store`, zero for parameters the loss does not touch or that are frozen.
  Gradients backward(Var loss, const ParameterStore& store);

 private:
  struct Node {
    Tensor value;
    BackwardFn backward;
    std::vector<double> grad;
  };

  std::vector<Node> nodes_;
  const ParameterStore* store_ = nullptr;
  std::vector<std::int64_t> param_nodes_;
};

namespace ad {

// a: [m, n], b: [n] -> [m]; a: [m, k], b: [k, n] -> [m, n]
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
Var slice(Var a, std::size_t offset, std::size_t length);
Var reshape(Var a, Shape shape);
Var transpose(Var a);
// Row `r` of a matrix as a vector.
Var row(Var a, std::size_t r);
// Elementwise mean of same-shape operands.
Var mean_pool(std::span<const Var> parts);
Var tanh(Var a);
Var sigmoid(Var a);
Var sum(Var a);
Var dot(Var a, Var b);
Var pick(Var a, std::size_t i);
Var log_sum_exp(Var a);
Var log_softmax(Var a);
Var softmax(Var a);

// Plain forward helpers shared with non-tape code.
double log_sum_exp(std::span<const double> values);
double sigmoid(double x);

}  // namespace ad

}  // namespace entrack
