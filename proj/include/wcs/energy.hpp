#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "wcs/spectral_domain.hpp"

namespace wcs {

/// Scalar data of the coupled system
///   -Lap u1 - kappa1 u1 = mu1 |u1|^{p-2} u1 + lambda alpha |u1|^{alpha-2} |u2|^beta u1,
///   -Lap u2 - kappa2 u2 = mu2 |u2|^{p-2} u2 + lambda beta  |u1|^alpha |u2|^{beta-2} u2,
/// with p = alpha + beta.
struct SystemParams {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double lambda = 1.0;
  double alpha = 2.0;
  double beta = 2.0;
  double p = 4.0;
  int dim = 1;
  bool critical = false;

  /// Throws PreconditionError when an invariant is violated.
  void validate() const;
  double kappa(int component) const { return component == 1 ? kappa1 : kappa2; }
  double mu(int component) const { return component == 1 ? mu1 : mu2; }
  SystemParams with_lambda(double l) const {
    SystemParams q = *this;
    q.lambda = l;
    return q;
  }
};

/// 2N/(N-2) for N >= 3.
double critical_exponent(int dim);

/// (u1, u2) on a shared basis.
struct PairField {
  ScalarField u1;
  ScalarField u2;

  PairField() = default;
  PairField(ScalarField a, ScalarField b);
  static PairField zero(const BasisPtr& basis);
  static PairField from_stacked(const BasisPtr& basis, const Vec& x);
  const BasisPtr& basis() const { return u1.basis; }
  Vec stacked() const;
};

/// Index partition of the modes by the sign of gamma_k - kappa_i.
struct SpectralSplit {
  struct Component {
    std::vector<Eigen::Index> plus;
    std::vector<Eigen::Index> zero;
    std::vector<Eigen::Index> minus;
    /// zero and minus merged, ascending.
    std::vector<Eigen::Index> tilde() const;
  };

  std::array<Component, 2> components;
  double tolerance = 0.0;
  Eigen::Index modes = 0;

  const Component& component(int i) const { return components.at(static_cast<std::size_t>(i - 1)); }
  bool definite() const { return component(1).tilde().empty() && component(2).tilde().empty(); }
  /// Indices into the stacked coefficient vector [u1; u2].
  std::vector<Eigen::Index> stacked_plus() const;
  std::vector<Eigen::Index> stacked_tilde() const;
  std::size_t codim_plus() const { return stacked_tilde().size(); }

  PairField project_plus(const PairField& u) const;
  PairField project_tilde(const PairField& u) const;
};

/// Split for a single shift kappa.
SpectralSplit::Component split_component(const SineBasis& basis, double kappa, double tol);

/// Default zero-eigenvalue tolerance: 1e-9 * gamma_1.
double default_split_tolerance(const SineBasis& basis);

SpectralSplit spectral_split(const SystemParams& params, const SineBasis& basis, double tol);
inline SpectralSplit spectral_split(const SystemParams& params, const SineBasis& basis) {
  return spectral_split(params, basis, default_split_tolerance(basis));
}

double bilinear_Bi(int component, const ScalarField& f, const ScalarField& g, const SystemParams& params);
double bilinear_B(const PairField& u, const PairField& v, const SystemParams& params);

/// |x|^q with the value 0 at x = 0 for every q != 0.
double pow_abs(double x, double q);
/// |x|^{q-1} x, i.e. sign(x) |x|^{q}, with value 0 at x = 0.
double signed_pow(double x, double q);

/// Integrals appearing in the energy: int |u1|^p, int |u2|^p, int |u1|^alpha |u2|^beta.
struct Masses {
  double power1 = 0.0;
  double power2 = 0.0;
  double coupling = 0.0;
};

/// The system functional J_lambda on the stacked coefficient vector [c1; c2] of a Galerkin space.
/// J(x) = 1/2 Q(x) - 1/p D(x), Q = B(u,u), D = int(mu1|u1|^p + mu2|u2|^p + p lambda |u1|^a|u2|^b).
class SystemFunctional {
 public:
  SystemFunctional(SystemParams params, SpacePtr space,
                   std::optional<double> split_tol = std::nullopt);

  const SystemParams& params() const { return params_; }
  const GalerkinSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const SpectralSplit& split() const { return split_; }

  Eigen::Index dim() const { return 2 * space_->modes(); }
  double exponent() const { return params_.p; }
  const Vec& stiffness() const { return stiffness_; }
  const Vec& shifted() const { return shifted_; }
  const std::vector<Eigen::Index>& plus_indices() const { return plus_; }
  const std::vector<Eigen::Index>& tilde_indices() const { return tilde_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  double quadratic(const Vec& x) const { return (shifted_.array() * x.array().square()).sum(); }
  double homogeneous(const Vec& x) const;
  Masses masses(const Vec& x) const;

  /// Sign-orbit image (s1 u1, s2 u2).
  Vec sign_image(const Vec& x, int s1, int s2) const;

 private:
  SystemParams params_;
  SpacePtr space_;
  SpectralSplit split_;
  Vec stiffness_;
  Vec shifted_;
  std::vector<Eigen::Index> plus_;
  std::vector<Eigen::Index> tilde_;
};

/// J_i(w) = 1/2 B_i(w,w) - mu/p int |w|^p.
class ScalarFunctional {
 public:
  ScalarFunctional(double kappa, double mu, double p, SpacePtr space,
                   std::optional<double> split_tol = std::nullopt);
  static ScalarFunctional for_component(const SystemParams& params, int component,
                                        SpacePtr space,
                                        std::optional<double> split_tol = std::nullopt);

  const GalerkinSpace& space() const { return *space_; }
  double kappa() const { return kappa_; }
  double mu() const { return mu_; }
  Eigen::Index dim() const { return space_->modes(); }
  double exponent() const { return p_; }
  const Vec& stiffness() const { return space_->basis().eigenvalues(); }
  const Vec& shifted() const { return shifted_; }
  const std::vector<Eigen::Index>& plus_indices() const { return split_.plus; }
  const std::vector<Eigen::Index>& tilde_indices() const { return tilde_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  double quadratic(const Vec& x) const { return (shifted_.array() * x.array().square()).sum(); }
  double homogeneous(const Vec& x) const;

 private:
  double kappa_;
  double mu_;
  double p_;
  SpacePtr space_;
  SpectralSplit::Component split_;
  std::vector<Eigen::Index> tilde_;
  Vec shifted_;
};

double energy(const PairField& u, const SystemParams& params, const SpacePtr& space);
PairField gradient(const PairField& u, const SystemParams& params, const SpacePtr& space);
double scalar_energy(const ScalarField& w, int component, const SystemParams& params, const SpacePtr& space);
ScalarField scalar_gradient(const ScalarField& w, int component, const SystemParams& params, const SpacePtr& space);

}  // namespace wcs
