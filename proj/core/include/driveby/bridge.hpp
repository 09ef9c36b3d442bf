#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace driveby {

/// Open crack with linearly varying flexural rigidity around `location`.
struct CrackDamage {
  double location = 0.0;     // m along the span
  double depth_ratio = 0.0;  // crack depth / section height
};

/// Simply supported Euler-Bernoulli beam. SI units throughout.
struct BeamBridge {
  double span_length = 0.0;
  double youngs_modulus = 0.0;
  double area = 0.0;
  double inertia = 0.0;
  double mass_per_length = 0.0;
  double damping_ratio = 0.0;
  int elements = 50;
  std::optional<CrackDamage> damage;
  /// Uniform multiplier on E*I. Used by fixtures whose "damaged" state is not
  /// a crack (e.g. the lab bridge whose frequency rises after intervention).
  double stiffness_scale = 1.0;

  /// Throws InvalidInput when an invariant is violated.
  void validate() const;

  /// Analytic first bending frequency for the intact prismatic beam, Hz.
  double analytic_frequency(int mode = 1) const;

  /// E*I(x) including the crack profile and the uniform scale.
  double flexural_rigidity(double x) const;
};

/// Rectangular section with the same area and second moment.
struct Section {
  double height = 0.0;
  double width = 0.0;
};

Section equivalent_section(const BeamBridge& bridge);

/// Non-zero entries of the interpolation vector u_b(x): at most four free DOFs
/// of the element containing x. Constrained DOFs carry index -1.
struct ShapeWeights {
  std::array<int, 4> dof{-1, -1, -1, -1};
  std::array<double, 4> weight{0.0, 0.0, 0.0, 0.0};

  template <class Vec>
  double dot(const Vec& z) const {
    double s = 0.0;
    for (int k = 0; k < 4; ++k)
      if (dof[k] >= 0) s += weight[k] * z[dof[k]];
    return s;
  }
};

/// Constrained FE matrices of a BeamBridge plus the DOF bookkeeping needed to
/// interpolate deflections. Immutable after construction.
class AssembledSystem {
 public:
  using SparseMatrix = Eigen::SparseMatrix<double>;

  static AssembledSystem assemble(const BeamBridge& bridge);

  const BeamBridge& bridge() const { return bridge_; }
  int dof_count() const { return dofs_; }
  double element_length() const { return element_length_; }

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& damping() const { return damping_; }
  const SparseMatrix& stiffness() const { return stiffness_; }

  /// Rayleigh coefficients: C = alpha * M + beta * K.
  double rayleigh_alpha() const { return rayleigh_alpha_; }
  double rayleigh_beta() const { return rayleigh_beta_; }

  /// Free-DOF indices (w_i, theta_i, w_j, theta_j) of element e; -1 if fixed.
  std::array<int, 4> element_dofs(int e) const;

  /// Free index of the transverse DOF at a node, -1 at supports.
  int transverse_dof(int node) const;
  int rotation_dof(int node) const;

  /// Hermite interpolation weights at x. Throws InvalidInput off-span.
  ShapeWeights shape_weights(double x) const;

  /// Dense global-sized u_b(x).
  Eigen::VectorXd shape_vector(double x) const;

  /// Deflection at x for nodal vector z.
  double deflection(const Eigen::VectorXd& z, double x) const {
    return shape_weights(x).dot(z);
  }

 private:
  AssembledSystem() = default;

  BeamBridge bridge_;
  int dofs_ = 0;
  double element_length_ = 0.0;
  SparseMatrix mass_;
  SparseMatrix damping_;
  SparseMatrix stiffness_;
  double rayleigh_alpha_ = 0.0;
  double rayleigh_beta_ = 0.0;
};

/// Lowest `count` undamped natural frequencies in Hz, ascending.
std::vector<double> natural_frequencies(const AssembledSystem& system, int count);

/// Modal damping ratio of mode `index` (0-based) under the system's Rayleigh model.
double modal_damping_ratio(const AssembledSystem& system, int index);

}  // namespace driveby
