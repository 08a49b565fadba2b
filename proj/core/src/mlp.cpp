#include "bpinn/mlp.hpp"

#include <cmath>
#include <string>

#include "bpinn/errors.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMajor>;
using Weights = Eigen::Map<RowMajor>;

int channel_count(int order, int deriv_dims) { return 1 + order * deriv_dims; }

}  // namespace

Jet JetBatch::at(Eigen::Index i) const {
  Jet jet;
  jet.value = value[i];
  jet.grad = grad.size() ? Vector(grad.col(i)) : Vector();
  jet.hess_diag = hess.size() ? Vector(hess.col(i)) : Vector();
  return jet;
}

JetBatch JetBatch::zeros(Eigen::Index n_points, Eigen::Index deriv_dims, JetOrder order) {
  JetBatch b;
  b.value = Vector::Zero(n_points);
  if (order >= JetOrder::kFirst) b.grad = Matrix::Zero(deriv_dims, n_points);
  if (order >= JetOrder::kSecond) b.hess = Matrix::Zero(deriv_dims, n_points);
  return b;
}

int MlpArchitecture::fan_in(int layer) const {
  return layer == 0 ? input_dim : hidden_widths[layer - 1];
}

int MlpArchitecture::fan_out(int layer) const {
  return layer == layer_count() - 1 ? 1 : hidden_widths[layer];
}

int MlpArchitecture::weight_offset(int layer) const {
  int offset = 0;
  for (int l = 0; l < layer; ++l) offset += fan_out(l) * fan_in(l) + fan_out(l);
  return offset;
}

int MlpArchitecture::bias_offset(int layer) const {
  return weight_offset(layer) + fan_out(layer) * fan_in(layer);
}

int MlpArchitecture::param_count() const { return weight_offset(layer_count()); }

void MlpArchitecture::validate() const {
  if (input_dim < 1) throw ConfigError("MLP input dimension must be positive");
  if (hidden_widths.empty()) throw ConfigError("MLP needs at least one hidden layer");
  for (int w : hidden_widths)
    if (w < 1) throw ConfigError("MLP hidden widths must be positive");
}

MlpTape::MlpTape(const MlpArchitecture& arch, const Eigen::Ref<const Vector>& theta,
                 const Eigen::Ref<const Matrix>& points, JetOrder order, int deriv_dims,
                 const DropoutMasks* masks)
    : arch_(arch),
      theta_(theta),
      input_(points),
      order_(static_cast<int>(order)),
      deriv_dims_(order == JetOrder::kValue ? 0 : deriv_dims),
      n_(points.cols()) {
  if (theta.size() != arch.param_count())
    throw DimensionError("MLP expects " + std::to_string(arch.param_count()) +
                         " parameters, got " + std::to_string(theta.size()));
  if (points.rows() != arch.input_dim)
    throw DimensionError("MLP expects " + std::to_string(arch.input_dim) +
                         "-dimensional inputs, got " + std::to_string(points.rows()));
  if (deriv_dims < 0 || deriv_dims > arch.input_dim)
    throw DimensionError("derivative dimensions exceed the MLP input dimension");

  const int hidden = arch.layer_count() - 1;
  if (masks) {
    if (static_cast<int>(masks->size()) != hidden)
      throw DimensionError("dropout masks must cover every hidden layer");
    for (int l = 0; l < hidden; ++l)
      if ((*masks)[l].rows() != arch.hidden_widths[l] || (*masks)[l].cols() != n_)
        throw DimensionError("dropout mask shape mismatch");
    masks_ = *masks;
  }

  const int nd = deriv_dims_;
  const int channels = channel_count(order_, nd);
  const Eigen::Index n = n_;
  pre_.resize(hidden);
  act_.resize(hidden);
  post_.resize(hidden);

  for (int l = 0; l < hidden; ++l) {
    const int fo = arch.fan_out(l), fi = arch.fan_in(l);
    const ConstWeights w(theta_.data() + arch.weight_offset(l), fo, fi);
    const auto b = theta_.segment(arch.bias_offset(l), fo);

    Matrix& pre = pre_[l];
    pre.resize(fo, n * channels);
    if (l == 0) {
      pre.leftCols(n).noalias() = w * input_;
      for (int i = 0; i < nd; ++i) pre.middleCols(n * (1 + i), n) = w.col(i).replicate(1, n);
      if (order_ == 2) pre.rightCols(n * nd).setZero();
    } else {
      const Matrix& prev = post_[l - 1];
      pre.leftCols(n).noalias() = w * prev.leftCols(n);
      if (channels > 1) pre.rightCols(n * (channels - 1)).noalias() = w * prev.rightCols(n * (channels - 1));
    }
    pre.leftCols(n).colwise() += b;

    act_[l] = pre.leftCols(n).array().tanh().matrix();
    const auto h = act_[l].array();
    const Eigen::ArrayXXd t1 = 1.0 - h.square();

    Matrix& post = post_[l];
    post.resize(fo, n * channels);
    post.leftCols(n) = act_[l];
    for (int i = 0; i < nd; ++i) {
      const auto da = pre.middleCols(n * (1 + i), n).array();
      post.middleCols(n * (1 + i), n) = (t1 * da).matrix();
      if (order_ == 2) {
        const auto dda = pre.middleCols(n * (1 + nd + i), n).array();
        post.middleCols(n * (1 + nd + i), n) = (t1 * dda - 2.0 * h * t1 * da.square()).matrix();
      }
    }
    if (!masks_.empty())
      for (int c = 0; c < channels; ++c)
        post.middleCols(n * c, n).array() *= masks_[l].array();
  }

  const int last = hidden;
  const ConstWeights w_out(theta_.data() + arch.weight_offset(last), 1, arch.fan_in(last));
  const double b_out = theta_[arch.bias_offset(last)];
  const Matrix& top = post_[last - 1];

  out_ = JetBatch::zeros(n, nd, order);
  out_.value = (w_out * top.leftCols(n)).transpose();
  out_.value.array() += b_out;
  for (int i = 0; i < nd; ++i) {
    out_.grad.row(i).noalias() = w_out * top.middleCols(n * (1 + i), n);
    if (order_ == 2) out_.hess.row(i).noalias() = w_out * top.middleCols(n * (1 + nd + i), n);
  }
}

void MlpTape::pullback(const JetBatch& adjoint, Eigen::Ref<Vector> grad) const {
  backward(adjoint, grad, nullptr);
}

void MlpTape::pullback(const JetBatch& adjoint, Eigen::Ref<Vector> grad,
                       Eigen::Ref<Matrix> input_grad) const {
  Matrix xbar;
  backward(adjoint, grad, &xbar);
  input_grad = xbar;
}

void MlpTape::backward(const JetBatch& adjoint, Eigen::Ref<Vector> grad, Matrix* input_grad) const {
  if (grad.size() != theta_.size()) throw DimensionError("gradient buffer has the wrong length");
  if (adjoint.value.size() != n_) throw DimensionError("adjoint batch has the wrong size");

  const int nd = deriv_dims_;
  const int channels = channel_count(order_, nd);
  const Eigen::Index n = n_;
  const int hidden = arch_.layer_count() - 1;

  // Output layer.
  Matrix gout(1, n * channels);
  gout.leftCols(n) = adjoint.value.transpose();
  for (int i = 0; i < nd; ++i) {
    gout.middleCols(n * (1 + i), n) = adjoint.grad.row(i);
    if (order_ == 2) gout.middleCols(n * (1 + nd + i), n) = adjoint.hess.row(i);
  }
  {
    const int fi = arch_.fan_in(hidden);
    Weights gw(grad.data() + arch_.weight_offset(hidden), 1, fi);
    gw.noalias() += gout * post_[hidden - 1].transpose();
    grad[arch_.bias_offset(hidden)] += gout.leftCols(n).sum();
  }
  const ConstWeights w_out(theta_.data() + arch_.weight_offset(hidden), 1, arch_.fan_in(hidden));
  Matrix hbar = w_out.transpose() * gout;

  for (int l = hidden - 1; l >= 0; --l) {
    const int fo = arch_.fan_out(l), fi = arch_.fan_in(l);
    if (!masks_.empty())
      for (int c = 0; c < channels; ++c) hbar.middleCols(n * c, n).array() *= masks_[l].array();

    const auto h = act_[l].array();
    const Eigen::ArrayXXd t1 = 1.0 - h.square();
    const Eigen::ArrayXXd t2 = -2.0 * h * t1;
    const Matrix& pre = pre_[l];

    Matrix abar(fo, n * channels);
    Eigen::ArrayXXd t1bar = Eigen::ArrayXXd::Zero(fo, n);
    Eigen::ArrayXXd t2bar = Eigen::ArrayXXd::Zero(fo, n);
    for (int i = 0; i < nd; ++i) {
      const auto da = pre.middleCols(n * (1 + i), n).array();
      const auto dhbar = hbar.middleCols(n * (1 + i), n).array();
      auto dabar = abar.middleCols(n * (1 + i), n).array();
      dabar = t1 * dhbar;
      t1bar += dhbar * da;
      if (order_ == 2) {
        const auto dda = pre.middleCols(n * (1 + nd + i), n).array();
        const auto ddhbar = hbar.middleCols(n * (1 + nd + i), n).array();
        abar.middleCols(n * (1 + nd + i), n).array() = t1 * ddhbar;
        dabar += 2.0 * t2 * da * ddhbar;
        t1bar += ddhbar * dda;
        t2bar += ddhbar * da.square();
      }
    }
    // t2 = -2 h t1, t1 = 1 - h^2, h = tanh(a)
    Eigen::ArrayXXd hbar_total = hbar.leftCols(n).array() - 2.0 * t1 * t2bar;
    t1bar -= 2.0 * h * t2bar;
    hbar_total -= 2.0 * h * t1bar;
    abar.leftCols(n).array() = t1 * hbar_total;

    Weights gw(grad.data() + arch_.weight_offset(l), fo, fi);
    if (l == 0) {
      gw.noalias() += abar.leftCols(n) * input_.transpose();
      for (int i = 0; i < nd; ++i) gw.col(i) += abar.middleCols(n * (1 + i), n).rowwise().sum();
    } else {
      gw.noalias() += abar * post_[l - 1].transpose();
    }
    grad.segment(arch_.bias_offset(l), fo) += abar.leftCols(n).rowwise().sum();

    const ConstWeights w(theta_.data() + arch_.weight_offset(l), fo, fi);
    if (l > 0) {
      hbar.noalias() = w.transpose() * abar;
    } else if (input_grad) {
      *input_grad = w.transpose() * abar.leftCols(n);
    }
  }
}

MlpSurrogate::MlpSurrogate(MlpArchitecture arch) : arch_(std::move(arch)) { arch_.validate(); }

std::unique_ptr<SurrogateTape> MlpSurrogate::record(const Eigen::Ref<const Vector>& theta,
                                                    const Eigen::Ref<const Matrix>& points,
                                                    JetOrder order) const {
  return std::make_unique<MlpTape>(arch_, theta, points, order, arch_.input_dim);
}

std::unique_ptr<MlpTape> MlpSurrogate::record_masked(const Eigen::Ref<const Vector>& theta,
                                                     const Eigen::Ref<const Matrix>& points,
                                                     JetOrder order,
                                                     const DropoutMasks& masks) const {
  return std::make_unique<MlpTape>(arch_, theta, points, order, arch_.input_dim, &masks);
}

double mlp_forward(const MlpArchitecture& arch, const Eigen::Ref<const Vector>& theta,
                   const Eigen::Ref<const Vector>& x) {
  arch.validate();
  MlpTape tape(arch, theta, x, JetOrder::kValue, arch.input_dim);
  return tape.jets().value[0];
}

Jet mlp_jet(const MlpArchitecture& arch, const Eigen::Ref<const Vector>& theta,
            const Eigen::Ref<const Vector>& x) {
  arch.validate();
  MlpTape tape(arch, theta, x, JetOrder::kSecond, arch.input_dim);
  return tape.jets().at(0);
}

Vector param_gradient(const ScalarFunctional& f, const Vector& theta) {
  Vector grad = Vector::Zero(theta.size());
  const double value = f(theta, &grad);
  if (grad.size() != theta.size()) throw DimensionError("functional returned a gradient of the wrong length");
  if (!std::isfinite(value)) throw NumericalError("functional value is not finite");
  for (Eigen::Index i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i]))
      throw NumericalError("non-finite gradient component " + std::to_string(i), static_cast<long>(i));
  return grad;
}

Vector xavier_init(const MlpArchitecture& arch, Rng& rng) {
  Vector theta = Vector::Zero(arch.param_count());
  for (int l = 0; l < arch.layer_count(); ++l) {
    const int fo = arch.fan_out(l), fi = arch.fan_in(l);
    const double scale = std::sqrt(2.0 / (fi + fo));
    for (int k = 0; k < fo * fi; ++k) theta[arch.weight_offset(l) + k] = scale * rng.normal();
  }
  return theta;
}

Vector layer_prior_std(const MlpArchitecture& arch, const std::vector<double>& sigma_w,
                       const std::vector<double>& sigma_b) {
  const int layers = arch.layer_count();
  auto pick = [layers](const std::vector<double>& s, int l, const char* what) {
    if (s.size() == 1) return s[0];
    if (static_cast<int>(s.size()) != layers)
      throw ConfigError(std::string(what) + " needs one entry per layer or a single entry");
    return s[l];
  };
  Vector std_dev(arch.param_count());
  for (int l = 0; l < layers; ++l) {
    const int fo = arch.fan_out(l), fi = arch.fan_in(l);
    std_dev.segment(arch.weight_offset(l), fo * fi).setConstant(pick(sigma_w, l, "sigma_w"));
    std_dev.segment(arch.bias_offset(l), fo).setConstant(pick(sigma_b, l, "sigma_b"));
  }
  if ((std_dev.array() <= 0.0).any()) throw ConfigError("prior standard deviations must be positive");
  return std_dev;
}

}  // namespace bpinn
