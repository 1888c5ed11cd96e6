#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace wcs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when an operation's input contract is not met (bad index, mismatched bases, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Axis-aligned box (0,L_1) x ... x (0,L_N).
class BoxDomain {
 public:
  explicit BoxDomain(std::vector<double> lengths);
  static BoxDomain unit(int dim) { return BoxDomain(std::vector<double>(static_cast<std::size_t>(dim), 1.0)); }

  int dim() const { return static_cast<int>(lengths_.size()); }
  const std::vector<double>& lengths() const { return lengths_; }
  double length(int axis) const { return lengths_.at(static_cast<std::size_t>(axis)); }
  /// Radius of the largest ball centred at the box centre.
  double inscribed_radius() const;
  std::vector<double> center() const;

  bool operator==(const BoxDomain&) const = default;

 private:
  std::vector<double> lengths_;
};

/// A multi-index k = (k_1,...,k_N), every k_i >= 1.
using MultiIndex = std::vector<int>;

/// Dirichlet eigenfunctions of -Laplace on a box, e_k(x) = prod_i sqrt(2/L_i) sin(pi k_i x_i / L_i),
/// truncated to 1 <= k_i <= K_i. Modes are stored by nondecreasing eigenvalue, ties broken
/// lexicographically.
class SineBasis {
 public:
  SineBasis(BoxDomain domain, std::vector<int> cutoffs);

  const BoxDomain& domain() const { return domain_; }
  const std::vector<int>& cutoffs() const { return cutoffs_; }
  int dim() const { return domain_.dim(); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(modes_.size()); }
  const std::vector<MultiIndex>& modes() const { return modes_; }
  const MultiIndex& mode(Eigen::Index index) const;
  /// gamma_k for every stored mode, in stored order.
  const Vec& eigenvalues() const { return eigenvalues_; }
  int max_cutoff() const;

  /// Value of the 1-D factor sqrt(2/L) sin(pi k x / L) on one axis.
  double axis_factor(int axis, int k, double x) const;
  double evaluate(Eigen::Index index, const std::vector<double>& x) const;

  bool operator==(const SineBasis& other) const {
    return domain_ == other.domain_ && cutoffs_ == other.cutoffs_;
  }

 private:
  BoxDomain domain_;
  std::vector<int> cutoffs_;
  std::vector<MultiIndex> modes_;
  Vec eigenvalues_;
};

using BasisPtr = std::shared_ptr<const SineBasis>;

inline BasisPtr make_basis(BoxDomain domain, std::vector<int> cutoffs) {
  return std::make_shared<const SineBasis>(std::move(domain), std::move(cutoffs));
}

bool same_basis(const BasisPtr& a, const BasisPtr& b);

/// Tensor product of composite Gauss-Legendre rules, one rule per axis.
class QuadratureGrid {
 public:
  /// `nodes_per_axis[i]` is a lower bound; each axis is split into equal panels of at most
  /// `max_panel_order` Gauss points and the node count is rounded up to fill them.
  QuadratureGrid(BoxDomain domain, const std::vector<int>& nodes_per_axis, int max_panel_order = 48);

  /// Default resolution for a basis: max(16, 3 K_i + 8) nodes per axis, times `factor`.
  static QuadratureGrid for_basis(const SineBasis& basis, double factor = 1.0);

  const BoxDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  const std::vector<double>& nodes(int axis) const { return nodes_.at(static_cast<std::size_t>(axis)); }
  const std::vector<double>& weights(int axis) const { return weights_.at(static_cast<std::size_t>(axis)); }
  std::vector<int> shape() const;
  Eigen::Index size() const;

  /// Tensor weights flattened with the first axis varying fastest.
  Vec tensor_weights() const;
  /// Coordinates of flat node `flat`.
  std::vector<double> point(Eigen::Index flat) const;

 private:
  BoxDomain domain_;
  std::vector<std::vector<double>> nodes_;
  std::vector<std::vector<double>> weights_;
};

/// Gauss-Legendre rule with `n` points on [a,b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

/// w in the Galerkin truncation: coefficients over a sine basis.
struct ScalarField {
  BasisPtr basis;
  Vec coeffs;

  ScalarField() = default;
  ScalarField(BasisPtr b, Vec c);
  static ScalarField zero(BasisPtr b);
  static ScalarField mode(BasisPtr b, Eigen::Index index, double amplitude = 1.0);
};

double eigenvalue(const SineBasis& basis, Eigen::Index index);

/// Pointwise values sum_k c_k e_k(x) at every grid node (flat order of QuadratureGrid).
Vec synthesize(const ScalarField& field, const QuadratureGrid& grid);

/// Tensor quadrature of node values.
double integrate(const Vec& values, const QuadratureGrid& grid);

/// Gradient inner product int grad f . grad g = sum_k gamma_k f_k g_k.
double h1_inner(const ScalarField& f, const ScalarField& g);

/// Precomputed synthesis matrix for a basis/grid pair, used by every quadrature-based
/// nonlinear term.
class GalerkinSpace {
 public:
  GalerkinSpace(BasisPtr basis, QuadratureGrid grid);
  static GalerkinSpace make(BasisPtr basis, double quadrature_factor = 1.0);

  const BasisPtr& basis_ptr() const { return basis_; }
  const SineBasis& basis() const { return *basis_; }
  const QuadratureGrid& grid() const { return grid_; }
  Eigen::Index modes() const { return basis_->size(); }
  Eigen::Index nodes() const { return synth_.rows(); }
  const Vec& weights() const { return weights_; }
  const Mat& synthesis_matrix() const { return synth_; }

  Vec synthesize(const Vec& coeffs) const { return synth_ * coeffs; }
  /// Coefficients int f e_k for node values f.
  Vec project(const Vec& values) const { return synth_.transpose() * weights_.cwiseProduct(values); }
  /// Matrix int f e_j e_k.
  Mat weighted_gram(const Vec& values) const;
  double integrate(const Vec& values) const { return weights_.dot(values); }

 private:
  BasisPtr basis_;
  QuadratureGrid grid_;
  Mat synth_;
  Vec weights_;
};

using SpacePtr = std::shared_ptr<const GalerkinSpace>;

inline SpacePtr make_space(BasisPtr basis, double quadrature_factor = 1.0) {
  return std::make_shared<const GalerkinSpace>(GalerkinSpace::make(std::move(basis), quadrature_factor));
}

}  // namespace wcs
