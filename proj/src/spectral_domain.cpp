#include "wcs/spectral_domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>

#include <boost/math/special_functions/legendre.hpp>

namespace wcs {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

BoxDomain::BoxDomain(std::vector<double> lengths) : lengths_(std::move(lengths)) {
  if (lengths_.empty()) throw PreconditionError("BoxDomain: dimension must be at least 1");
  for (double l : lengths_) {
    if (!(l > 0.0) || !std::isfinite(l)) throw PreconditionError("BoxDomain: every length must be positive");
  }
}

double BoxDomain::inscribed_radius() const {
  return 0.5 * *std::min_element(lengths_.begin(), lengths_.end());
}

std::vector<double> BoxDomain::center() const {
  std::vector<double> c(lengths_.size());
  std::transform(lengths_.begin(), lengths_.end(), c.begin(), [](double l) { return 0.5 * l; });
  return c;
}

SineBasis::SineBasis(BoxDomain domain, std::vector<int> cutoffs)
    : domain_(std::move(domain)), cutoffs_(std::move(cutoffs)) {
  if (static_cast<int>(cutoffs_.size()) != domain_.dim())
    throw PreconditionError("SineBasis: one cutoff per axis required");
  for (int k : cutoffs_) {
    if (k < 1) throw PreconditionError("SineBasis: cutoffs must be positive");
  }

  // Enumerate the full tensor index set.
  std::vector<MultiIndex> all;
  MultiIndex k(cutoffs_.size(), 1);
  while (true) {
    all.push_back(k);
    std::size_t axis = 0;
    while (axis < k.size() && ++k[axis] > cutoffs_[axis]) {
      k[axis] = 1;
      ++axis;
    }
    if (axis == k.size()) break;
  }

  auto scaled = [this](const MultiIndex& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double r = m[i] / domain_.lengths()[i];
      s += r * r;
    }
    return s;
  };
  double max_key = 0.0;
  for (const auto& m : all) max_key = std::max(max_key, scaled(m));

  // Quantise so that eigenvalues equal up to rounding compare equal and fall back to the
  // lexicographic order.
  std::vector<std::pair<long long, MultiIndex>> keyed;
  keyed.reserve(all.size());
  for (auto& m : all) keyed.emplace_back(std::llround(scaled(m) / max_key * 1e13), std::move(m));
  std::sort(keyed.begin(), keyed.end());

  modes_.reserve(keyed.size());
  eigenvalues_.resize(static_cast<Eigen::Index>(keyed.size()));
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    modes_.push_back(std::move(keyed[i].second));
    eigenvalues_[static_cast<Eigen::Index>(i)] = kPi * kPi * scaled(modes_.back());
  }
}

const MultiIndex& SineBasis::mode(Eigen::Index index) const {
  if (index < 0 || index >= size())
    throw PreconditionError("SineBasis: mode index " + std::to_string(index) + " out of range");
  return modes_[static_cast<std::size_t>(index)];
}

int SineBasis::max_cutoff() const { return *std::max_element(cutoffs_.begin(), cutoffs_.end()); }

double SineBasis::axis_factor(int axis, int k, double x) const {
  const double l = domain_.length(axis);
  return std::sqrt(2.0 / l) * std::sin(kPi * k * x / l);
}

double SineBasis::evaluate(Eigen::Index index, const std::vector<double>& x) const {
  const auto& m = mode(index);
  double v = 1.0;
  for (int axis = 0; axis < dim(); ++axis) v *= axis_factor(axis, m[static_cast<std::size_t>(axis)], x[static_cast<std::size_t>(axis)]);
  return v;
}

bool same_basis(const BasisPtr& a, const BasisPtr& b) {
  if (!a || !b) return false;
  return a == b || *a == *b;
}

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw PreconditionError("gauss_legendre: need at least one point");
  const auto zeros = boost::math::legendre_p_zeros<double>(n);  // nonnegative half
  std::vector<std::pair<double, double>> rule;
  for (double x : zeros) {
    const double dp = boost::math::legendre_p_prime<double>(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.emplace_back(x, w);
    if (x != 0.0) rule.emplace_back(-x, w);
  }
  std::sort(rule.begin(), rule.end());
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (const auto& [x, w] : rule) {
    nodes.push_back(mid + half * x);
    weights.push_back(half * w);
  }
}

QuadratureGrid::QuadratureGrid(BoxDomain domain, const std::vector<int>& nodes_per_axis, int max_panel_order)
    : domain_(std::move(domain)) {
  if (static_cast<int>(nodes_per_axis.size()) != domain_.dim())
    throw PreconditionError("QuadratureGrid: one node count per axis required");
  if (max_panel_order < 1) throw PreconditionError("QuadratureGrid: panel order must be positive");
  for (int axis = 0; axis < domain_.dim(); ++axis) {
    const int q = nodes_per_axis[static_cast<std::size_t>(axis)];
    if (q < 1) throw PreconditionError("QuadratureGrid: node counts must be positive");
    const int panels = (q + max_panel_order - 1) / max_panel_order;
    const int order = (q + panels - 1) / panels;
    const double l = domain_.length(axis);
    std::vector<double> x;
    std::vector<double> w;
    for (int p = 0; p < panels; ++p) gauss_legendre(order, l * p / panels, l * (p + 1) / panels, x, w);
    nodes_.push_back(std::move(x));
    weights_.push_back(std::move(w));
  }
}

QuadratureGrid QuadratureGrid::for_basis(const SineBasis& basis, double factor) {
  std::vector<int> q;
  for (int k : basis.cutoffs()) {
    const int base = std::max(16, 3 * k + 8);
    q.push_back(static_cast<int>(std::ceil(base * std::max(factor, 1e-9))));
  }
  return QuadratureGrid(basis.domain(), q);
}

std::vector<int> QuadratureGrid::shape() const {
  std::vector<int> s;
  for (const auto& n : nodes_) s.push_back(static_cast<int>(n.size()));
  return s;
}

Eigen::Index QuadratureGrid::size() const {
  Eigen::Index n = 1;
  for (const auto& axis : nodes_) n *= static_cast<Eigen::Index>(axis.size());
  return n;
}

Vec QuadratureGrid::tensor_weights() const {
  Vec w = Vec::Ones(size());
  Eigen::Index stride = 1;
  for (const auto& axis : weights_) {
    const auto n = static_cast<Eigen::Index>(axis.size());
    for (Eigen::Index flat = 0; flat < w.size(); ++flat) w[flat] *= axis[static_cast<std::size_t>((flat / stride) % n)];
    stride *= n;
  }
  return w;
}

std::vector<double> QuadratureGrid::point(Eigen::Index flat) const {
  std::vector<double> x(nodes_.size());
  for (std::size_t axis = 0; axis < nodes_.size(); ++axis) {
    const auto n = static_cast<Eigen::Index>(nodes_[axis].size());
    x[axis] = nodes_[axis][static_cast<std::size_t>(flat % n)];
    flat /= n;
  }
  return x;
}

ScalarField::ScalarField(BasisPtr b, Vec c) : basis(std::move(b)), coeffs(std::move(c)) {
  if (!basis) throw PreconditionError("ScalarField: null basis");
  if (coeffs.size() != basis->size()) throw PreconditionError("ScalarField: coefficient count must equal mode count");
}

ScalarField ScalarField::zero(BasisPtr b) {
  const auto n = b->size();
  return ScalarField(std::move(b), Vec::Zero(n));
}

ScalarField ScalarField::mode(BasisPtr b, Eigen::Index index, double amplitude) {
  b->mode(index);  // range check
  Vec c = Vec::Zero(b->size());
  c[index] = amplitude;
  return ScalarField(std::move(b), std::move(c));
}

double eigenvalue(const SineBasis& basis, Eigen::Index index) {
  basis.mode(index);
  return basis.eigenvalues()[index];
}

namespace {

// Per-axis tables of the 1-D factors: table[axis](node, k-1).
std::vector<Mat> axis_tables(const SineBasis& basis, const QuadratureGrid& grid) {
  std::vector<Mat> tables;
  for (int axis = 0; axis < basis.dim(); ++axis) {
    const auto& x = grid.nodes(axis);
    const int kmax = basis.cutoffs()[static_cast<std::size_t>(axis)];
    Mat t(static_cast<Eigen::Index>(x.size()), kmax);
    for (std::size_t q = 0; q < x.size(); ++q)
      for (int k = 1; k <= kmax; ++k) t(static_cast<Eigen::Index>(q), k - 1) = basis.axis_factor(axis, k, x[q]);
    tables.push_back(std::move(t));
  }
  return tables;
}

Mat synthesis_matrix(const SineBasis& basis, const QuadratureGrid& grid) {
  if (!(basis.domain() == grid.domain())) throw PreconditionError("basis and grid live on different domains");
  const auto tables = axis_tables(basis, grid);
  const auto shape = grid.shape();
  Mat e(grid.size(), basis.size());
  for (Eigen::Index flat = 0; flat < grid.size(); ++flat) {
    std::vector<Eigen::Index> q(shape.size());
    Eigen::Index rest = flat;
    for (std::size_t axis = 0; axis < shape.size(); ++axis) {
      q[axis] = rest % shape[axis];
      rest /= shape[axis];
    }
    for (Eigen::Index m = 0; m < basis.size(); ++m) {
      const auto& k = basis.modes()[static_cast<std::size_t>(m)];
      double v = 1.0;
      for (std::size_t axis = 0; axis < shape.size(); ++axis) v *= tables[axis](q[axis], k[axis] - 1);
      e(flat, m) = v;
    }
  }
  return e;
}

}  // namespace

Vec synthesize(const ScalarField& field, const QuadratureGrid& grid) {
  return synthesis_matrix(*field.basis, grid) * field.coeffs;
}

double integrate(const Vec& values, const QuadratureGrid& grid) {
  if (values.size() != grid.size()) throw PreconditionError("integrate: value array does not match grid shape");
  return grid.tensor_weights().dot(values);
}

double h1_inner(const ScalarField& f, const ScalarField& g) {
  if (!same_basis(f.basis, g.basis)) throw PreconditionError("h1_inner: fields live on different bases");
  return (f.basis->eigenvalues().array() * f.coeffs.array() * g.coeffs.array()).sum();
}

GalerkinSpace::GalerkinSpace(BasisPtr basis, QuadratureGrid grid)
    : basis_(std::move(basis)), grid_(std::move(grid)) {
  synth_ = wcs::synthesis_matrix(*basis_, grid_);
  weights_ = grid_.tensor_weights();
}

GalerkinSpace GalerkinSpace::make(BasisPtr basis, double quadrature_factor) {
  auto grid = QuadratureGrid::for_basis(*basis, quadrature_factor);
  return GalerkinSpace(std::move(basis), std::move(grid));
}

Mat GalerkinSpace::weighted_gram(const Vec& values) const {
  const Vec wv = weights_.cwiseProduct(values);
  return synth_.transpose() * wv.asDiagonal() * synth_;
}

}  // namespace wcs
