// SPDX-License-Identifier: Apache-2.0
#include "nre/core/layer.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "nre/core/error.hpp"

namespace nre {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using ConstRowVectorMap = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;

template <typename T>
T sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
Tensor<T> compute(LayerKind kind, const Tensor<T>& w, const Tensor<T>& b, const Tensor<T>& x,
                  std::size_t out_dim) {
  const auto batch = x.rows();
  Tensor<T> y({batch, out_dim});
  switch (kind) {
    case LayerKind::affine: {
      ConstMatrixMap<T> xm(x.data(), batch, x.cols());
      ConstMatrixMap<T> wm(w.data(), w.dim(0), w.dim(1));
      MatrixMap<T> ym(y.data(), batch, out_dim);
      ym.noalias() = xm * wm.transpose();
      ym.rowwise() += ConstRowVectorMap<T>(b.data(), out_dim);
      break;
    }
    case LayerKind::relu:
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
      break;
    case LayerKind::sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
      break;
    case LayerKind::tanh:
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
      break;
  }
  y.require_finite("layer output");
  return y;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::affine: return "affine";
    case LayerKind::relu: return "relu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::tanh: return "tanh";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  if (name == "affine") return LayerKind::affine;
  if (name == "relu") return LayerKind::relu;
  if (name == "sigmoid") return LayerKind::sigmoid;
  if (name == "tanh") return LayerKind::tanh;
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

template <typename T>
Layer<T>::Layer(LayerKind kind, std::size_t in_dim, std::size_t out_dim)
    : kind_(kind), in_dim_(in_dim), out_dim_(out_dim) {
  if (in_dim == 0 || out_dim == 0) throw ShapeError("layer dimensions must be positive");
}

template <typename T>
Layer<T> Layer<T>::affine(std::size_t in_dim, std::size_t out_dim) {
  Layer layer(LayerKind::affine, in_dim, out_dim);
  layer.weight_ = Tensor<T>({out_dim, in_dim});
  layer.bias_ = Tensor<T>({out_dim});
  return layer;
}

template <typename T>
Layer<T> Layer<T>::activation(LayerKind kind, std::size_t dim) {
  if (kind == LayerKind::affine) throw ShapeError("affine is not an activation");
  return Layer(kind, dim, dim);
}

template <typename T>
Tensor<T> Layer<T>::apply(const Tensor<T>& x) const {
  if (x.cols() != in_dim_) {
    throw ShapeError("layer " + std::string(to_string(kind_)) + " expects width " + std::to_string(in_dim_) +
                     ", got " + std::to_string(x.cols()));
  }
  return compute(kind_, weight_, bias_, x, out_dim_);
}

template <typename T>
Tensor<T> Layer<T>::forward(const Tensor<T>& x) {
  auto y = apply(x);
  cached_input_ = x;
  if (kind_ != LayerKind::affine && kind_ != LayerKind::relu) {
    cached_output_ = y;
  } else {
    cached_output_.reset();
  }
  return y;
}

template <typename T>
void Layer<T>::clear_cache() noexcept {
  cached_input_.reset();
  cached_output_.reset();
}

template <typename T>
Tensor<T> Layer<T>::backward(const Tensor<T>& upstream, bool param_grads) {
  if (!cached_input_) throw ShapeError("backward called before forward");
  const auto& x = *cached_input_;
  const auto batch = x.rows();
  if (upstream.rows() != batch || upstream.cols() != out_dim_) {
    throw ShapeError("upstream gradient shape " + to_string(upstream.shape()) + " does not match layer output (" +
                     std::to_string(batch) + ", " + std::to_string(out_dim_) + ")");
  }
  Tensor<T> dx({batch, in_dim_});
  switch (kind_) {
    case LayerKind::affine: {
      ConstMatrixMap<T> g(upstream.data(), batch, out_dim_);
      ConstMatrixMap<T> w(weight_.data(), out_dim_, in_dim_);
      MatrixMap<T> dxm(dx.data(), batch, in_dim_);
      dxm.noalias() = g * w;
      if (param_grads) {
        ConstMatrixMap<T> xm(x.data(), batch, in_dim_);
        weight_grad_ = Tensor<T>({out_dim_, in_dim_});
        bias_grad_ = Tensor<T>({out_dim_});
        MatrixMap<T> dw(weight_grad_.data(), out_dim_, in_dim_);
        dw.noalias() = g.transpose() * xm;
        Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(bias_grad_.data(), out_dim_);
        db = g.colwise().sum();
      }
      break;
    }
    case LayerKind::relu:
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = x[i] > T{0} ? upstream[i] : T{0};
      break;
    case LayerKind::sigmoid: {
      const auto& y = *cached_output_;
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = upstream[i] * y[i] * (T{1} - y[i]);
      break;
    }
    case LayerKind::tanh: {
      const auto& y = *cached_output_;
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = upstream[i] * (T{1} - y[i] * y[i]);
      break;
    }
  }
  return dx;
}

template class Layer<float>;
template class Layer<double>;

}  // namespace nre
