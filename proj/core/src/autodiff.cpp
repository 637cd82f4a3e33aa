#include "entrack/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace entrack {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
  if (element_count(shape) != values.size()) {
    throw ShapeError("tensor shape " + shape_string(shape) + " holds " +
                     std::to_string(element_count(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
}

Tensor Tensor::zeros(Shape s) {
  auto n = element_count(s);
  return Tensor(std::move(s), std::vector<double>(n, 0.0));
}

Tensor Tensor::vector(std::vector<double> v) {
  Shape s{v.size()};
  return Tensor(std::move(s), std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor({rows, cols}, std::move(v));
}

std::size_t Tensor::rows() const {
  if (shape.size() != 2) throw ShapeError("rows() on non-matrix " + shape_string(shape));
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (shape.size() != 2) throw ShapeError("cols() on non-matrix " + shape_string(shape));
  return shape[1];
}

bool Tensor::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

ParamId ParameterStore::add(std::string name, Tensor value, bool trainable) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
  trainable_.push_back(trainable);
  return tensors_.size() - 1;
}

ParamId ParameterStore::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("no parameter named " + name);
  return static_cast<ParamId>(it - names_.begin());
}

std::size_t ParameterStore::trainable_scalars() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (trainable_[i]) n += tensors_[i].size();
  }
  return n;
}

Gradients zero_gradients(const ParameterStore& store) {
  Gradients g;
  g.reserve(store.size());
  for (ParamId i = 0; i < store.size(); ++i) g.push_back(Tensor::zeros(store.tensor(i).shape));
  return g;
}

void accumulate(Gradients& into, const Gradients& from, double scale) {
  if (into.size() != from.size()) throw ShapeError("gradient tables differ in length");
  for (std::size_t i = 0; i < into.size(); ++i) {
    auto& dst = into[i].values;
    const auto& src = from[i].values;
    if (dst.size() != src.size()) throw ShapeError("gradient tensor size mismatch");
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
  }
}

const Tensor& Var::value() const { return tape->value(index); }

Var Tape::constant(Tensor value) { return record(std::move(value), nullptr); }

Var Tape::param(const ParameterStore& store, ParamId id) {
  if (store_ == nullptr) {
    store_ = &store;
  } else if (store_ != &store) {
    throw std::logic_error("a tape may reference only one parameter store");
  }
  if (param_nodes_.size() < store.size()) param_nodes_.resize(store.size(), -1);
  if (param_nodes_[id] >= 0) return Var{this, static_cast<std::uint32_t>(param_nodes_[id])};
  Var v = record(store.tensor(id), nullptr);
  param_nodes_[id] = v.index;
  return v;
}

Var Tape::record(Tensor value, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), std::move(backward), {}});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

std::vector<double>& Tape::grad(std::uint32_t index) {
  auto& node = nodes_[index];
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

Gradients Tape::backward(Var loss, const ParameterStore& store) {
  if (loss.tape != this) throw std::logic_error("loss belongs to a different tape");
  if (loss.value().size() != 1 || loss.value().rank() != 0) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (store_ != nullptr && store_ != &store) {
    throw std::logic_error("backward() called with a foreign parameter store");
  }
  for (auto& n : nodes_) n.grad.clear();
  grad(loss.index)[0] = 1.0;
  for (std::int64_t i = loss.index; i >= 0; --i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.grad.empty() || !node.backward) continue;
    node.backward(*this);
  }
  Gradients out = zero_gradients(store);
  for (ParamId id = 0; id < param_nodes_.size() && id < store.size(); ++id) {
    if (param_nodes_[id] < 0 || !store.trainable(id)) continue;
    const auto& g = nodes_[static_cast<std::size_t>(param_nodes_[id])].grad;
    if (!g.empty()) out[id].values = g;
  }
  return out;
}

namespace ad {
namespace {

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape || a.tape == nullptr) throw std::logic_error("operands on different tapes");
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || (bv.rank() != 1 && bv.rank() != 2) || av.shape[1] != bv.shape[0]) {
    throw ShapeError("matmul: cannot multiply " + shape_string(av.shape) + " by " +
                     shape_string(bv.shape));
  }
  const std::size_t m = av.shape[0], k = av.shape[1];
  const std::size_t n = bv.rank() == 1 ? 1 : bv.shape[1];
  Shape out_shape = bv.rank() == 1 ? Shape{m} : Shape{m, n};
  Tensor out = Tensor::zeros(out_shape);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &av.values[i * k];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      const double* brow = &bv.values[p * n];
      double* orow = &out.values[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  auto ai = a.index, bi = b.index;
  return t.record(std::move(out), [ai, bi, m, k, n, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    const auto& A = tp.value(ai).values;
    const auto& B = tp.value(bi).values;
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * B[p * n + j];
        ga[i * k + p] += s;
      }
    }
    auto& gb = tp.grad(bi);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = A[i * k + p];
        for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
      }
    }
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("add", a, b);
  Tensor out = a.value();
  const auto& bv = b.value().values;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += bv[i];
  auto ai = a.index, bi = b.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, bi, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto& gb = tp.grad(bi);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("sub", a, b);
  Tensor out = a.value();
  const auto& bv = b.value().values;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= bv[i];
  auto ai = a.index, bi = b.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, bi, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto& gb = tp.grad(bi);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("mul", a, b);
  Tensor out = a.value();
  const auto& bv = b.value().values;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= bv[i];
  auto ai = a.index, bi = b.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, bi, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    const auto& A = tp.value(ai).values;
    const auto& B = tp.value(bi).values;
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
    auto& gb = tp.grad(bi);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (auto& v : out.values) v *= factor;
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, factor, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  Tape& t = *parts.front().tape;
  std::vector<double> values;
  std::vector<std::uint32_t> indices;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    if (p.tape != &t) throw std::logic_error("concat: operands on different tapes");
    if (p.value().rank() != 1) {
      throw ShapeError("concat: operands must be vectors, got " + shape_string(p.shape()));
    }
    offsets.push_back(values.size());
    indices.push_back(p.index);
    const auto& v = p.value().values;
    values.insert(values.end(), v.begin(), v.end());
  }
  Tensor out = Tensor::vector(std::move(values));
  return t.record(std::move(out), [indices, offsets, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      auto& gp = tp.grad(indices[k]);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offsets[k] + i];
    }
  });
}

Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  const Tensor& av = a.value();
  if (av.rank() != 1 || offset + length > av.size()) {
    throw ShapeError("slice: [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                     ") out of range for " + shape_string(av.shape));
  }
  std::vector<double> v(av.values.begin() + static_cast<std::ptrdiff_t>(offset),
                        av.values.begin() + static_cast<std::ptrdiff_t>(offset + length));
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(Tensor::vector(std::move(v)), [ai, offset, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[offset + i] += g[i];
  });
}

Var reshape(Var a, Shape shape) {
  if (element_count(shape) != a.size()) {
    throw ShapeError("reshape: " + shape_string(a.shape()) + " to " + shape_string(shape));
  }
  Tensor out(std::move(shape), a.value().values);
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  if (av.rank() != 2) throw ShapeError("transpose: need a matrix, got " + shape_string(av.shape));
  const std::size_t m = av.shape[0], n = av.shape[1];
  Tensor out = Tensor::zeros({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.values[j * m + i] = av.values[i * n + j];
  }
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, m, n, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
    }
  });
}

Var row(Var a, std::size_t r) {
  const Tensor& av = a.value();
  if (av.rank() != 2 || r >= av.shape[0]) {
    throw ShapeError("row " + std::to_string(r) + " of " + shape_string(av.shape));
  }
  const std::size_t cols = av.shape[1];
  std::vector<double> v(av.values.begin() + static_cast<std::ptrdiff_t>(r * cols),
                        av.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(Tensor::vector(std::move(v)), [ai, r, cols, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < cols; ++i) ga[r * cols + i] += g[i];
  });
}

Var mean_pool(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("mean_pool: empty span");
  Tape& t = *parts.front().tape;
  Tensor out = Tensor::zeros(parts.front().shape());
  std::vector<std::uint32_t> indices;
  for (const Var& p : parts) {
    if (p.shape() != out.shape) {
      throw ShapeError("mean_pool: shape mismatch " + shape_string(p.shape()) + " vs " +
                       shape_string(out.shape));
    }
    indices.push_back(p.index);
    const auto& v = p.value().values;
    for (std::size_t i = 0; i < v.size(); ++i) out.values[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(parts.size());
  for (auto& v : out.values) v *= inv;
  return t.record(std::move(out), [indices, inv, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    for (auto idx : indices) {
      auto& gp = tp.grad(idx);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += inv * g[i];
    }
  });
}

Var tanh(Var a) {
  Tensor out = a.value();
  for (auto& v : out.values) v = std::tanh(v);
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    const auto& y = tp.value(self).values;
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var sigmoid(Var a) {
  Tensor out = a.value();
  for (auto& v : out.values) v = sigmoid(v);
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    const auto& y = tp.value(self).values;
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values) s += v;
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(Tensor::scalar(s), [ai, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const double g = tp.grad(self)[0];
    for (auto& x : tp.grad(ai)) x += g;
  });
}

Var dot(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("dot", a, b);
  const auto& A = a.value().values;
  const auto& B = b.value().values;
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) s += A[i] * B[i];
  auto ai = a.index, bi = b.index;
  Tape& t = *a.tape;
  return t.record(Tensor::scalar(s), [ai, bi, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const double g = tp.grad(self)[0];
    const auto& A = tp.value(ai).values;
    const auto& B = tp.value(bi).values;
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < A.size(); ++i) ga[i] += g * B[i];
    auto& gb = tp.grad(bi);
    for (std::size_t i = 0; i < A.size(); ++i) gb[i] += g * A[i];
  });
}

Var pick(Var a, std::size_t i) {
  if (i >= a.size()) {
    throw ShapeError("pick: index " + std::to_string(i) + " out of range for " +
                     shape_string(a.shape()));
  }
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(Tensor::scalar(a.value().values[i]), [ai, i, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    tp.grad(ai)[i] += tp.grad(self)[0];
  });
}

Var log_sum_exp(Var a) {
  if (a.size() == 0) throw ShapeError("log_sum_exp: empty operand");
  const double lse = log_sum_exp(std::span<const double>(a.value().values));
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(Tensor::scalar(lse), [ai, lse, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const double g = tp.grad(self)[0];
    const auto& x = tp.value(ai).values;
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] += g * std::exp(x[i] - lse);
  });
}

Var log_softmax(Var a) {
  if (a.value().rank() != 1 || a.size() == 0) {
    throw ShapeError("log_softmax: need a non-empty vector, got " + shape_string(a.shape()));
  }
  const double lse = log_sum_exp(std::span<const double>(a.value().values));
  Tensor out = a.value();
  for (auto& v : out.values) v -= lse;
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    const auto& y = tp.value(self).values;
    double gsum = 0.0;
    for (double v : g) gsum += v;
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] - std::exp(y[i]) * gsum;
  });
}

Var softmax(Var a) {
  if (a.value().rank() != 1 || a.size() == 0) {
    throw ShapeError("softmax: need a non-empty vector, got " + shape_string(a.shape()));
  }
  const double lse = log_sum_exp(std::span<const double>(a.value().values));
  Tensor out = a.value();
  for (auto& v : out.values) v = std::exp(v - lse);
  auto ai = a.index;
  Tape& t = *a.tape;
  return t.record(std::move(out), [ai, self = static_cast<std::uint32_t>(t.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    const auto& y = tp.value(self).values;
    double gy = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gy += g[i] * y[i];
    auto& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - gy);
  });
}

}  // namespace ad
}  // namespace entrack
