#pragma once

#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "pdebias/domain.hpp"

namespace pdebias {

enum class BasisKind { Sine1D, Hat1D, TensorSine2D, BilinearFem2D };

std::string to_string(BasisKind kind);

/// A finite basis {phi_1, ..., phi_m} of H^1_0(Omega). Every family vanishes
/// on the boundary; FEM kinds use uniform node spacing h = L/(m+1) per axis.
/// 2D kinds index k = (k1-1)*m2 + k2 with per-axis counts m1, m2.
class BasisFamily {
 public:
  static BasisFamily sine1d(const Domain& domain, int m);
  static BasisFamily hat1d(const Domain& domain, int m);
  static BasisFamily tensor_sine_2d(const Domain& domain, int m1, int m2);
  static BasisFamily bilinear_fem_2d(const Domain& domain, int m1, int m2);

  BasisKind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }
  int size() const { return m1_ * m2_; }
  int axis_count(int axis) const { return axis == 0 ? m1_ : m2_; }

  /// Mesh width of FEM kinds on the given axis.
  double spacing(int axis) const;
  /// Node location x_j = a + j*h of FEM kinds, j = 1..m.
  double node(int axis, int j) const;

  bool is_2d() const {
    return kind_ == BasisKind::TensorSine2D || kind_ == BasisKind::BilinearFem2D;
  }

 private:
  BasisFamily(BasisKind kind, const Domain& domain, int m1, int m2);
  BasisKind kind_;
  Domain domain_;
  int m1_;
  int m2_;
};

enum class MatrixStructure { Diagonal, Tridiagonal, Banded, Dense };

/// Assembled system A c = b with A_jk = a(phi_k, phi_j).
struct StiffnessSystem {
  MatrixStructure structure;
  Eigen::SparseMatrix<double> matrix;
  std::vector<double> rhs;
};

struct RgSolution {
  BasisFamily basis;
  std::vector<double> coefficients;
};

/// phi_k(x) for 1-based k. Throws if k is out of range; returns exactly 0 on
/// the domain boundary.
double eval_basis(const BasisFamily& basis, int k, const Point& x);

/// Stiffness matrix from the closed-form entries of each family (rhs left
/// empty).
StiffnessSystem assemble_stiffness(const BasisFamily& basis);

/// b_j = sum_i weight_i f(x_i) phi_j(x_i).
std::vector<double> assemble_rhs(const BasisFamily& basis, const SampleSet& samples);

/// Assembles and solves A c = b, dispatching on the matrix structure.
/// Enforces the residual bound ||Ac - b||_inf <= 1e-10 ||b||_inf.
RgSolution solve_rg(const BasisFamily& basis, const SampleSet& samples);

/// Solves a pre-assembled system.
std::vector<double> solve_system(const StiffnessSystem& system);

double eval_rg_at(const RgSolution& solution, const Point& x);
std::vector<double> eval_rg(const RgSolution& solution, const std::vector<Point>& grid);

/// Basis descriptor plus coefficient array.
std::string solution_json(const RgSolution& solution);

}  // namespace pdebias
