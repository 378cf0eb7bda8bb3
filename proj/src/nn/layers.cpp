#include "uavad/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "uavad/error.hpp"

namespace uavad::nn {

namespace {

void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw ShapeError(std::string(op) + ": " + what);
}

// Shared by dense and conv1x1 so the two agree bit for bit. Zero inputs are
// skipped; the remaining terms are summed in ascending input order.
void affine(std::span<const double> x, std::span<const double> W, std::span<const double> b,
            std::span<double> y, std::vector<std::size_t>& nz) {
  const std::size_t n_in = x.size();
  nz.clear();
  for (std::size_t j = 0; j < n_in; ++j) {
    if (x[j] != 0.0) nz.push_back(j);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double* row = W.data() + i * n_in;
    double acc = 0.0;
    for (const std::size_t j : nz) acc += row[j] * x[j];
    y[i] = acc + b[i];
  }
}

void affine_backward(std::span<const double> x, std::span<const double> W, std::span<const double> dy,
                     std::span<double> dW, std::span<double> db, std::span<double> dx,
                     std::vector<std::size_t>& nz) {
  const std::size_t n_in = x.size();
  nz.clear();
  for (std::size_t j = 0; j < n_in; ++j) {
    if (x[j] != 0.0) nz.push_back(j);
  }
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const double g = dy[i];
    db[i] += g;
    if (g == 0.0) continue;
    double* grad_row = dW.data() + i * n_in;
    for (const std::size_t j : nz) grad_row[j] += g * x[j];
    if (!dx.empty()) {
      const double* row = W.data() + i * n_in;
      for (std::size_t j = 0; j < n_in; ++j) dx[j] += row[j] * g;
    }
  }
}

void check_dense(const char* op, const NumArray& x, const NumArray& W, const NumArray& b) {
  require(W.rank() == 2, op, "weight must be rank 2, got " + shape_string(W.shape()));
  require(x.size() == W.dim(1), op, "input length " + std::to_string(x.size()) + " vs weight " +
                                        shape_string(W.shape()));
  require(b.size() == W.dim(0), op, "bias length " + std::to_string(b.size()) + " vs weight " +
                                        shape_string(W.shape()));
}

void check_conv(const char* op, const NumArray& x, const NumArray& K, const NumArray& b) {
  require(x.rank() == 3, op, "input must be [H x W x C], got " + shape_string(x.shape()));
  require(K.rank() == 2 && K.dim(1) == x.dim(2), op,
          "kernel " + shape_string(K.shape()) + " vs input " + shape_string(x.shape()));
  require(b.size() == K.dim(0), op, "bias length mismatch");
}

}  // namespace

NumArray dense_forward(const NumArray& x, const NumArray& W, const NumArray& b) {
  check_dense("dense_forward", x, W, b);
  NumArray y({W.dim(0)});
  std::vector<std::size_t> nz;
  affine(x.values(), W.values(), b.values(), y.values(), nz);
  return y;
}

NumArray dense_backward(const NumArray& x, const NumArray& W, const NumArray& dy, NumArray& dW, NumArray& db,
                        bool need_dx) {
  check_dense("dense_backward", x, W, db);
  require(dy.size() == W.dim(0), "dense_backward", "output gradient length mismatch");
  require(dW.shape() == W.shape(), "dense_backward", "weight gradient shape mismatch");
  NumArray dx = need_dx ? NumArray(x.shape()) : NumArray();
  std::vector<std::size_t> nz;
  affine_backward(x.values(), W.values(), dy.values(), dW.values(), db.values(), dx.values(), nz);
  return dx;
}

NumArray relu_forward(const NumArray& x) {
  NumArray y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

NumArray relu_backward(const NumArray& x, const NumArray& dy) {
  require(x.shape() == dy.shape(), "relu_backward", "shape mismatch");
  NumArray dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

NumArray sigmoid_forward(const NumArray& x) {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  NumArray y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::clamp(1.0 / (1.0 + std::exp(-x[i])), lo, hi);
  return y;
}

NumArray sigmoid_backward(const NumArray& y, const NumArray& dy) {
  require(y.shape() == dy.shape(), "sigmoid_backward", "shape mismatch");
  NumArray dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (1.0 - y[i]);
  return dx;
}

NumArray conv1x1_forward(const NumArray& x, const NumArray& K, const NumArray& b) {
  check_conv("conv1x1_forward", x, K, b);
  const std::size_t c_in = x.dim(2);
  const std::size_t c_out = K.dim(0);
  const std::size_t pixels = x.dim(0) * x.dim(1);
  NumArray y({x.dim(0), x.dim(1), c_out});
  std::vector<std::size_t> nz;
  for (std::size_t p = 0; p < pixels; ++p) {
    affine(x.values().subspan(p * c_in, c_in), K.values(), b.values(), y.values().subspan(p * c_out, c_out), nz);
  }
  return y;
}

NumArray conv1x1_backward(const NumArray& x, const NumArray& K, const NumArray& dy, NumArray& dK, NumArray& db,
                          bool need_dx) {
  check_conv("conv1x1_backward", x, K, db);
  require(dy.rank() == 3 && dy.dim(0) == x.dim(0) && dy.dim(1) == x.dim(1) && dy.dim(2) == K.dim(0),
          "conv1x1_backward", "output gradient shape mismatch");
  require(dK.shape() == K.shape(), "conv1x1_backward", "kernel gradient shape mismatch");
  const std::size_t c_in = x.dim(2);
  const std::size_t c_out = K.dim(0);
  const std::size_t pixels = x.dim(0) * x.dim(1);
  NumArray dx = need_dx ? NumArray(x.shape()) : NumArray();
  std::vector<std::size_t> nz;
  for (std::size_t p = 0; p < pixels; ++p) {
    affine_backward(x.values().subspan(p * c_in, c_in), K.values(), dy.values().subspan(p * c_out, c_out),
                    dK.values(), db.values(), need_dx ? dx.values().subspan(p * c_in, c_in) : std::span<double>{},
                    nz);
  }
  return dx;
}

NumArray concat(const NumArray& a, const NumArray& b, std::size_t axis) {
  require(a.rank() == b.rank() && axis < a.rank(), "concat", "rank/axis mismatch");
  for (std::size_t d = 0; d < a.rank(); ++d) {
    require(d == axis || a.dim(d) == b.dim(d), "concat",
            "shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()) + " disagree off-axis");
  }
  auto shape = a.shape();
  shape[axis] += b.dim(axis);
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= a.dim(d);
  const std::size_t a_block = a.size() / outer;
  const std::size_t b_block = b.size() / outer;
  NumArray y(shape);
  auto out = y.values().begin();
  for (std::size_t o = 0; o < outer; ++o) {
    out = std::copy_n(a.values().begin() + static_cast<std::ptrdiff_t>(o * a_block), a_block, out);
    out = std::copy_n(b.values().begin() + static_cast<std::ptrdiff_t>(o * b_block), b_block, out);
  }
  return y;
}

std::pair<NumArray, NumArray> concat_backward(const NumArray& dy, const std::vector<std::size_t>& a_shape,
                                              const std::vector<std::size_t>& b_shape, std::size_t axis) {
  NumArray da(a_shape);
  NumArray db(b_shape);
  require(da.size() + db.size() == dy.size() && axis < a_shape.size(), "concat_backward", "shape mismatch");
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= a_shape[d];
  const std::size_t a_block = da.size() / outer;
  const std::size_t b_block = db.size() / outer;
  auto in = dy.values().begin();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(in, a_block, da.values().begin() + static_cast<std::ptrdiff_t>(o * a_block));
    in += static_cast<std::ptrdiff_t>(a_block);
    std::copy_n(in, b_block, db.values().begin() + static_cast<std::ptrdiff_t>(o * b_block));
    in += static_cast<std::ptrdiff_t>(b_block);
  }
  return {std::move(da), std::move(db)};
}

NumArray reparameterize(const NumArray& mu, const NumArray& log_var, const NumArray& eps) {
  require(mu.shape() == log_var.shape() && mu.shape() == eps.shape(), "reparameterize", "shape mismatch");
  NumArray z(mu.shape());
  for (std::size_t i = 0; i < mu.size(); ++i) z[i] = mu[i] + std::exp(0.5 * log_var[i]) * eps[i];
  return z;
}

ReparamGrad reparameterize_backward(const NumArray& log_var, const NumArray& eps, const NumArray& dz) {
  require(log_var.shape() == eps.shape() && eps.shape() == dz.shape(), "reparameterize_backward",
          "shape mismatch");
  ReparamGrad g{dz, NumArray(log_var.shape())};
  for (std::size_t i = 0; i < dz.size(); ++i) g.d_log_var[i] = dz[i] * 0.5 * std::exp(0.5 * log_var[i]) * eps[i];
  return g;
}

}  // namespace uavad::nn
