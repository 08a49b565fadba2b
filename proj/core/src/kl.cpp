#include "bpinn/kl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bpinn/errors.hpp"

namespace bpinn {
namespace {

constexpr double kRootTolerance = 1e-12;

template <typename F>
double bisect(F f, double lo, double hi, int mode_index) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo * fhi < 0.0))
    throw ConvergenceError("KL frequency bracket does not change sign for mode " +
                               std::to_string(mode_index),
                           mode_index);
  for (int it = 0; it < 200 && hi - lo > kRootTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo > kRootTolerance)
    throw ConvergenceError("KL bisection did not converge for mode " + std::to_string(mode_index),
                           mode_index);
  return 0.5 * (lo + hi);
}

}  // namespace

Vector KLBasis::eigenvalues() const {
  Vector v(n_terms());
  for (int i = 0; i < n_terms(); ++i) v[i] = modes[i].eigenvalue;
  return v;
}

double KLBasis::eigenfunction(int i, double x) const {
  const KLMode& m = modes[i];
  return m.norm * (m.even ? std::cos(m.frequency * x) : std::sin(m.frequency * x));
}

double KLBasis::eigenfunction_d1(int i, double x) const {
  const KLMode& m = modes[i];
  const double w = m.frequency;
  return m.norm * w * (m.even ? -std::sin(w * x) : std::cos(w * x));
}

double KLBasis::eigenfunction_d2(int i, double x) const {
  const KLMode& m = modes[i];
  return -m.frequency * m.frequency * eigenfunction(i, x);
}

KLBasis kl_eigenpairs(double corr_length, double half_width, int n_terms) {
  if (!(corr_length > 0.0) || !(half_width > 0.0) || n_terms < 1)
    throw ConfigError("KL basis needs corr_length > 0, half_width > 0 and n_terms >= 1");

  const double c = 1.0 / corr_length;
  const double a = half_width;
  const double pi = std::numbers::pi;

  // Frequencies of even and odd modes interleave, so the first n_terms
  // eigenvalues come from at most n_terms/2 + 1 roots of each family.
  const int per_family = n_terms / 2 + 1;
  std::vector<KLMode> modes;
  modes.reserve(2 * per_family);
  for (int k = 0; k < per_family; ++k) {
    const int even_index = 2 * k;
    const double w = bisect([&](double w) { return c * std::cos(w * a) - w * std::sin(w * a); },
                            k * pi / a, (k + 0.5) * pi / a, even_index);
    KLMode m;
    m.frequency = w;
    m.even = true;
    m.norm = 1.0 / std::sqrt(a + std::sin(2.0 * w * a) / (2.0 * w));
    m.eigenvalue = 2.0 * c / (w * w + c * c);
    modes.push_back(m);
  }
  for (int k = 0; k < per_family; ++k) {
    const int odd_index = 2 * k + 1;
    const double w = bisect([&](double w) { return w * std::cos(w * a) + c * std::sin(w * a); },
                            (k + 0.5) * pi / a, (k + 1.0) * pi / a, odd_index);
    KLMode m;
    m.frequency = w;
    m.even = false;
    m.norm = 1.0 / std::sqrt(a - std::sin(2.0 * w * a) / (2.0 * w));
    m.eigenvalue = 2.0 * c / (w * w + c * c);
    modes.push_back(m);
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const KLMode& x, const KLMode& y) { return x.eigenvalue > y.eigenvalue; });
  modes.resize(n_terms);

  KLBasis basis;
  basis.corr_length = corr_length;
  basis.half_width = half_width;
  basis.modes = std::move(modes);
  return basis;
}

namespace {

class KLTape final : public SurrogateTape {
 public:
  KLTape(const KLBasis& basis, const Eigen::Ref<const Vector>& theta,
         const Eigen::Ref<const Matrix>& points, JetOrder order)
      : order_(order) {
    const int n_terms = basis.n_terms();
    if (theta.size() != n_terms)
      throw DimensionError("KL surrogate expects " + std::to_string(n_terms) + " parameters, got " +
                           std::to_string(theta.size()));
    if (points.rows() != 1) throw DimensionError("KL surrogate is one-dimensional");
    const Eigen::Index n = points.cols();
    // Rows: modes, columns: points; each entry already scaled by sqrt(alpha_i).
    phi_.resize(n_terms, n);
    if (order >= JetOrder::kFirst) dphi_.resize(n_terms, n);
    if (order >= JetOrder::kSecond) ddphi_.resize(n_terms, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = points(0, j);
      if (!(std::abs(x) <= basis.half_width))
        throw DomainError("KL surrogate evaluated outside [-a, a] at x = " + std::to_string(x));
      for (int i = 0; i < n_terms; ++i) {
        const double s = std::sqrt(basis.modes[i].eigenvalue);
        phi_(i, j) = s * basis.eigenfunction(i, x);
        if (order >= JetOrder::kFirst) dphi_(i, j) = s * basis.eigenfunction_d1(i, x);
        if (order >= JetOrder::kSecond) ddphi_(i, j) = s * basis.eigenfunction_d2(i, x);
      }
    }
    out_ = JetBatch::zeros(n, 1, order);
    out_.value.noalias() = phi_.transpose() * theta;
    if (order >= JetOrder::kFirst) out_.grad.noalias() = theta.transpose() * dphi_;
    if (order >= JetOrder::kSecond) out_.hess.noalias() = theta.transpose() * ddphi_;
  }

  const JetBatch& jets() const override { return out_; }

  void pullback(const JetBatch& adjoint, Eigen::Ref<Vector> grad) const override {
    if (grad.size() != phi_.rows()) throw DimensionError("gradient buffer has the wrong length");
    grad.noalias() += phi_ * adjoint.value;
    if (order_ >= JetOrder::kFirst) grad.noalias() += dphi_ * adjoint.grad.row(0).transpose();
    if (order_ >= JetOrder::kSecond) grad.noalias() += ddphi_ * adjoint.hess.row(0).transpose();
  }

 private:
  JetOrder order_;
  Matrix phi_, dphi_, ddphi_;
  JetBatch out_;
};

}  // namespace

Jet kl_eval(const KLBasis& basis, const Eigen::Ref<const Vector>& theta, double x) {
  if (theta.size() < basis.n_terms())
    throw DimensionError("KL evaluation needs at least " + std::to_string(basis.n_terms()) +
                         " parameters");
  Matrix point(1, 1);
  point(0, 0) = x;
  return KLTape(basis, theta.head(basis.n_terms()), point, JetOrder::kSecond).jets().at(0);
}

KLSurrogate::KLSurrogate(KLBasis basis) : basis_(std::move(basis)) {
  if (basis_.n_terms() < 1) throw ConfigError("KL surrogate needs at least one term");
}

std::unique_ptr<SurrogateTape> KLSurrogate::record(const Eigen::Ref<const Vector>& theta,
                                                   const Eigen::Ref<const Matrix>& points,
                                                   JetOrder order) const {
  return std::make_unique<KLTape>(basis_, theta, points, order);
}

}  // namespace bpinn
