#include "driveby/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "driveby/error.hpp"

namespace driveby {

namespace {

using Matrix4 = Eigen::Matrix4d;

Matrix4 element_stiffness(double ei, double l) {
  Matrix4 k;
  const double l2 = l * l;
  k << 12.0, 6.0 * l, -12.0, 6.0 * l,
       6.0 * l, 4.0 * l2, -6.0 * l, 2.0 * l2,
       -12.0, -6.0 * l, 12.0, -6.0 * l,
       6.0 * l, 2.0 * l2, -6.0 * l, 4.0 * l2;
  return k * (ei / (l2 * l));
}

// Consistent mass of a Hermite cubic element.
Matrix4 element_mass(double mu, double l) {
  Matrix4 m;
  const double l2 = l * l;
  m << 156.0, 22.0 * l, 54.0, -13.0 * l,
       22.0 * l, 4.0 * l2, 13.0 * l, -3.0 * l2,
       54.0, 13.0 * l, 156.0, -22.0 * l,
       -13.0 * l, -3.0 * l2, -22.0 * l, 4.0 * l2;
  return m * (mu * l / 420.0);
}

}  // namespace

void BeamBridge::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidInput("bridge: " + msg); };
  if (!(span_length > 0.0)) fail("span_length must be > 0");
  if (!(youngs_modulus > 0.0)) fail("youngs_modulus must be > 0");
  if (!(area > 0.0)) fail("area must be > 0");
  if (!(inertia > 0.0)) fail("inertia must be > 0");
  if (!(mass_per_length > 0.0)) fail("mass_per_length must be > 0");
  if (!(damping_ratio >= 0.0 && damping_ratio < 1.0)) fail("damping_ratio must be in [0, 1)");
  if (elements < 10) fail("elements must be >= 10");
  if (!(stiffness_scale > 0.0)) fail("stiffness_scale must be > 0");
  if (damage) {
    if (!(damage->location > 0.0 && damage->location < span_length))
      fail("damage location must lie strictly inside the span");
    if (!(damage->depth_ratio >= 0.0 && damage->depth_ratio < 1.0))
      fail("damage depth_ratio must be in [0, 1)");
  }
}

double BeamBridge::analytic_frequency(int mode) const {
  const double n = static_cast<double>(mode);
  return n * n * std::numbers::pi / (2.0 * span_length * span_length) *
         std::sqrt(youngs_modulus * inertia * stiffness_scale / mass_per_length);
}

double BeamBridge::flexural_rigidity(double x) const {
  const double intact = youngs_modulus * inertia * stiffness_scale;
  if (!damage || damage->depth_ratio == 0.0) return intact;
  const Section s = equivalent_section(*this);
  // I_c = b (h - h_c)^3 / 12 = I_o (1 - a_c)^3 for the equivalent rectangle.
  const double remaining = 1.0 - damage->depth_ratio;
  const double cracked_fraction = remaining * remaining * remaining;
  const double extent = 1.5 * s.height;
  const double proximity = std::max(0.0, 1.0 - std::abs(x - damage->location) / extent);
  return intact * (1.0 - (1.0 - cracked_fraction) * proximity);
}

Section equivalent_section(const BeamBridge& bridge) {
  if (!(bridge.area > 0.0) || !(bridge.inertia > 0.0))
    throw InvalidInput("invalid geometry: area and inertia must be positive");
  Section s;
  s.height = std::sqrt(12.0 * bridge.inertia / bridge.area);
  s.width = bridge.area / s.height;
  return s;
}

AssembledSystem AssembledSystem::assemble(const BeamBridge& bridge) {
  bridge.validate();

  AssembledSystem sys;
  sys.bridge_ = bridge;
  const int ne = bridge.elements;
  sys.element_length_ = bridge.span_length / ne;
  sys.dofs_ = 2 * (ne + 1) - 2;

  const double l = sys.element_length_;
  const Matrix4 me = element_mass(bridge.mass_per_length, l);

  std::vector<Eigen::Triplet<double>> m_trip;
  std::vector<Eigen::Triplet<double>> k_trip;
  m_trip.reserve(16 * ne);
  k_trip.reserve(16 * ne);
  for (int e = 0; e < ne; ++e) {
    const double x_mid = (e + 0.5) * l;
    const Matrix4 ke = element_stiffness(bridge.flexural_rigidity(x_mid), l);
    const auto dofs = sys.element_dofs(e);
    for (int a = 0; a < 4; ++a) {
      if (dofs[a] < 0) continue;
      for (int b = 0; b < 4; ++b) {
        if (dofs[b] < 0) continue;
        m_trip.emplace_back(dofs[a], dofs[b], me(a, b));
        k_trip.emplace_back(dofs[a], dofs[b], ke(a, b));
      }
    }
  }
  const int n = sys.dofs_;
  sys.mass_.resize(n, n);
  sys.stiffness_.resize(n, n);
  sys.mass_.setFromTriplets(m_trip.begin(), m_trip.end());
  sys.stiffness_.setFromTriplets(k_trip.begin(), k_trip.end());

  Eigen::SimplicialLLT<SparseMatrix> check(sys.stiffness_);
  if (check.info() != Eigen::Success)
    throw NumericalError("bridge assembly: constrained stiffness matrix is singular");

  if (bridge.damping_ratio > 0.0) {
    const auto f = natural_frequencies(sys, 2);
    const double w1 = 2.0 * std::numbers::pi * f[0];
    const double w2 = 2.0 * std::numbers::pi * f[1];
    sys.rayleigh_alpha_ = 2.0 * bridge.damping_ratio * w1 * w2 / (w1 + w2);
    sys.rayleigh_beta_ = 2.0 * bridge.damping_ratio / (w1 + w2);
  }
  sys.damping_ = sys.rayleigh_alpha_ * sys.mass_ + sys.rayleigh_beta_ * sys.stiffness_;
  return sys;
}

std::array<int, 4> AssembledSystem::element_dofs(int e) const {
  return {transverse_dof(e), rotation_dof(e), transverse_dof(e + 1), rotation_dof(e + 1)};
}

int AssembledSystem::rotation_dof(int node) const {
  // Free numbering: theta_0, w_1, theta_1, ..., w_{ne-1}, theta_{ne-1}, theta_ne.
  return node == bridge_.elements ? 2 * node - 1 : 2 * node;
}

int AssembledSystem::transverse_dof(int node) const {
  const int ne = bridge_.elements;
  if (node <= 0 || node >= ne) return -1;
  return 2 * node - 1;
}

ShapeWeights AssembledSystem::shape_weights(double x) const {
  const double span = bridge_.span_length;
  const double tol = 1e-12 * span;
  if (x < -tol || x > span + tol) {
    std::ostringstream msg;
    msg << "out of span: x = " << x << " not in [0, " << span << "]";
    throw InvalidInput(msg.str());
  }
  const int ne = bridge_.elements;
  const double l = element_length_;
  int e = static_cast<int>(std::floor(x / l));
  e = std::clamp(e, 0, ne - 1);
  const double s = std::clamp((x - e * l) / l, 0.0, 1.0);
  const double s2 = s * s;
  const double s3 = s2 * s;

  ShapeWeights w;
  w.dof = element_dofs(e);
  w.weight = {1.0 - 3.0 * s2 + 2.0 * s3,
              l * (s - 2.0 * s2 + s3),
              3.0 * s2 - 2.0 * s3,
              l * (s3 - s2)};
  for (int k = 0; k < 4; ++k)
    if (w.dof[k] < 0) w.weight[k] = 0.0;
  return w;
}

Eigen::VectorXd AssembledSystem::shape_vector(double x) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dofs_);
  const ShapeWeights w = shape_weights(x);
  for (int k = 0; k < 4; ++k)
    if (w.dof[k] >= 0) u[w.dof[k]] += w.weight[k];
  return u;
}

std::vector<double> natural_frequencies(const AssembledSystem& system, int count) {
  const int n = system.dof_count();
  if (count < 1 || count > n)
    throw InvalidInput("natural_frequencies: count must be in [1, dof_count]");
  const Eigen::MatrixXd k = Eigen::MatrixXd(system.stiffness());
  const Eigen::MatrixXd m = Eigen::MatrixXd(system.mass());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    std::ostringstream msg;
    msg << "natural_frequencies: generalized eigensolver failed (mass condition ~ "
        << sv(0) / sv(sv.size() - 1) << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  std::vector<double> f(count);
  for (int i = 0; i < count; ++i) {
    if (!(lambda[i] > 0.0))
      throw NumericalError("natural_frequencies: non-positive eigenvalue");
    f[i] = std::sqrt(lambda[i]) / (2.0 * std::numbers::pi);
  }
  return f;
}

double modal_damping_ratio(const AssembledSystem& system, int index) {
  const double w = 2.0 * std::numbers::pi * natural_frequencies(system, index + 1)[index];
  return system.rayleigh_alpha() / (2.0 * w) + system.rayleigh_beta() * w / 2.0;
}

}  // namespace driveby
