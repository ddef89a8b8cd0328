#ifndef XHINGE_BEAM_FEM_HPP
#define XHINGE_BEAM_FEM_HPP

// Planar geometrically exact shear-deformable beam (Reissner / Simo-Vu-Quoc)
// discretized with 4-node cubic Lagrange elements. Every flexure is clamped at
// s = 0; all s = 1 cross-sections are slaved to one rigid master node whose
// pose is (u_A, phi) with A the tip of the first flexure.

#include "xhinge/error.hpp"
#include "xhinge/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace xhinge::fem {

using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

inline Mat2 rotation(double a) {
  Mat2 r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

/// Constant stress-resultant stiffnesses of a rectangular section.
struct Section {
  double EA = 0.0;
  double GAs = 0.0;
  double EI = 0.0;
  double height = 0.0;

  static Section rectangular(double youngs, double poisson, double width, double height,
                             double shear_factor = 5.0 / 6.0) {
    const double area = width * height;
    const double shear_modulus = youngs / (2.0 * (1.0 + poisson));
    return {youngs * area, shear_factor * shear_modulus * area,
            youngs * width * height * height * height / 12.0, height};
  }
};

inline constexpr int kNodesPerElement = 4;

/// Shape data of the cubic element at one quadrature point.
struct QuadraturePoint {
  std::array<double, 4> N{};
  std::array<double, 4> dN{}; // d/dS (arc length), not d/dxi
  double weight = 0.0;        // includes the Jacobian
  Vec2 ref_strain = Vec2::Zero();
  double ref_curvature = 0.0;
};

struct Element {
  std::array<int, 4> nodes{}; // flexure-local node indices
  std::vector<QuadraturePoint> points;
};

struct FlexureMesh {
  std::vector<Vec2> X;         // reference nodal positions
  std::vector<double> Theta;   // reference nodal section angles
  Section section;
  std::vector<Element> elements;
  int first_interior_dof = 0;  // reduced index of node 1, dof 0

  int num_nodes() const { return static_cast<int>(X.size()); }
  int tip() const { return num_nodes() - 1; }
};

/// Reference geometry of one flexure fed to the mesher.
struct FlexureSpec {
  std::array<double, 4> coeffs{};
  double length = 1.0;
  Vec2 base = Vec2::Zero();
  Section section;
};

struct ModelOptions {
  int elements_per_flexure = 30;
  int quadrature_points = 3;
};

/// How the master rotation is treated when condensing onto translations.
enum class RotationTreatment {
  Held,      // rotation stays at its prescribed value
  Condensed, // rotation is eliminated along with the interior DOFs
};

struct BeamModel {
  std::vector<FlexureMesh> flexures;
  std::vector<Vec2> tip_offsets; // X_tip(f) - X_tip(0)
  Vec2 master_reference = Vec2::Zero();
  int num_dofs = 0;              // reduced: interior triples + master triple
  ModelOptions options;

  int master_x() const { return num_dofs - 3; }
  int master_y() const { return num_dofs - 2; }
  int master_phi() const { return num_dofs - 1; }
  double max_axial_stiffness() const {
    double m = 0.0;
    for (const auto& f : flexures) m = std::max(m, f.section.EA);
    return m;
  }
};

namespace detail {

inline constexpr std::array<double, 4> kLagrangeNodes = {-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0};

inline void lagrange_cubic(double xi, std::array<double, 4>& N, std::array<double, 4>& dN) {
  for (int a = 0; a < 4; ++a) {
    double value = 1.0;
    double deriv = 0.0;
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      const double denom = kLagrangeNodes[a] - kLagrangeNodes[b];
      double term = 1.0 / denom;
      for (int c = 0; c < 4; ++c) {
        if (c == a || c == b) continue;
        term *= (xi - kLagrangeNodes[c]) / (kLagrangeNodes[a] - kLagrangeNodes[c]);
      }
      deriv += term;
      value *= (xi - kLagrangeNodes[b]) / denom;
    }
    N[a] = value;
    dN[a] = deriv;
  }
}

inline void gauss_rule(int n, std::vector<double>& pts, std::vector<double>& wts) {
  switch (n) {
  case 2:
    pts = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
    wts = {1.0, 1.0};
    break;
  case 3:
    pts = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    wts = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    break;
  case 4:
    pts.assign(xhinge::detail::kGauss4Points.begin(), xhinge::detail::kGauss4Points.end());
    wts.assign(xhinge::detail::kGauss4Weights.begin(), xhinge::detail::kGauss4Weights.end());
    break;
  default:
    throw Error(ErrorCode::ConfigError, "unsupported quadrature order " + std::to_string(n));
  }
}

} // namespace detail

/// Meshes the given flexures. Nodes sit on the exact centerline; reference
/// strains are taken from the interpolated geometry so that the undeformed
/// configuration is stress-free.
inline BeamModel assemble_model(std::span<const FlexureSpec> specs, const ModelOptions& options = {}) {
  if (specs.empty()) throw Error(ErrorCode::DegenerateInput, "model needs at least one flexure");
  if (options.elements_per_flexure < 1)
    throw Error(ErrorCode::ConfigError, "elements per flexure must be positive");

  std::vector<double> qp, qw;
  detail::gauss_rule(options.quadrature_points, qp, qw);

  BeamModel model;
  model.options = options;
  const int ne = options.elements_per_flexure;
  const int nn = 3 * ne + 1;
  std::vector<double> s_nodes(nn);
  for (int k = 0; k < nn; ++k) s_nodes[k] = static_cast<double>(k) / (nn - 1);
  s_nodes.back() = 1.0;

  int next_dof = 0;
  for (const auto& spec : specs) {
    FlexureMesh mesh;
    mesh.section = spec.section;
    const auto pts = centerline_at(spec.coeffs, spec.length, spec.base, s_nodes);
    mesh.X.reserve(nn);
    mesh.Theta.reserve(nn);
    for (const auto& p : pts) {
      mesh.X.push_back(p.position);
      mesh.Theta.push_back(p.angle);
    }
    mesh.first_interior_dof = next_dof;
    next_dof += 3 * (nn - 2);

    const double jac = 0.5 * spec.length / ne;
    for (int e = 0; e < ne; ++e) {
      Element el;
      for (int a = 0; a < 4; ++a) el.nodes[a] = 3 * e + a;
      for (std::size_t g = 0; g < qp.size(); ++g) {
        QuadraturePoint q;
        std::array<double, 4> dNdxi{};
        detail::lagrange_cubic(qp[g], q.N, dNdxi);
        for (int a = 0; a < 4; ++a) q.dN[a] = dNdxi[a] / jac;
        q.weight = qw[g] * jac;
        Vec2 dX = Vec2::Zero();
        double th = 0.0, dth = 0.0;
        for (int a = 0; a < 4; ++a) {
          dX += q.dN[a] * mesh.X[el.nodes[a]];
          th += q.N[a] * mesh.Theta[el.nodes[a]];
          dth += q.dN[a] * mesh.Theta[el.nodes[a]];
        }
        q.ref_strain = rotation(th).transpose() * dX;
        q.ref_curvature = dth;
        el.points.push_back(q);
      }
      mesh.elements.push_back(std::move(el));
    }
    model.flexures.push_back(std::move(mesh));
  }
  model.num_dofs = next_dof + 3;
  model.master_reference = model.flexures.front().X.back();
  for (const auto& f : model.flexures) model.tip_offsets.push_back(f.X.back() - model.master_reference);
  return model;
}

/// Meshes both flexures of a cross-hinge.
inline BeamModel assemble_model(const HingeGeometry& g, const ModelOptions& options = {}) {
  std::array<FlexureSpec, 2> specs;
  for (int i = 0; i < 2; ++i) {
    const auto& f = g.flexures[i];
    specs[i] = {f.coeffs, f.length, f.base,
                Section::rectangular(g.youngs, g.poisson, f.width, f.height)};
  }
  return assemble_model(std::span<const FlexureSpec>(specs), options);
}

/// Reduced generalized coordinates plus solver bookkeeping.
struct BeamState {
  Eigen::VectorXd q;
  bool converged = true;
  int iterations = 0;

  static BeamState reference(const BeamModel& m) { return {Eigen::VectorXd::Zero(m.num_dofs), true, 0}; }

  Vec2 master_translation(const BeamModel& m) const { return {q[m.master_x()], q[m.master_y()]}; }
  double master_rotation(const BeamModel& m) const { return q[m.master_phi()]; }
  /// Current position of the master point A.
  Vec2 tip_position(const BeamModel& m) const { return m.master_reference + master_translation(m); }
};

/// Displacement and section rotation increment of one node.
struct NodalDofs {
  Vec2 u = Vec2::Zero();
  double psi = 0.0;
};

inline NodalDofs nodal_dofs(const BeamModel& m, const Eigen::VectorXd& q, int flexure, int node) {
  const auto& f = m.flexures[flexure];
  if (node == 0) return {};
  if (node == f.tip()) {
    const double phi = q[m.master_phi()];
    const Vec2 d = m.tip_offsets[flexure];
    return {Vec2(q[m.master_x()], q[m.master_y()]) + (rotation(phi) - Mat2::Identity()) * d, phi};
  }
  const int base = f.first_interior_dof + 3 * (node - 1);
  return {Vec2(q[base], q[base + 1]), q[base + 2]};
}

/// Current nodal positions of one flexure.
inline std::vector<Vec2> deformed_positions(const BeamModel& m, const BeamState& s, int flexure) {
  const auto& f = m.flexures[flexure];
  std::vector<Vec2> out(f.num_nodes());
  for (int n = 0; n < f.num_nodes(); ++n) out[n] = f.X[n] + nodal_dofs(m, s.q, flexure, n).u;
  return out;
}

/// Current nodal coordinates of one element: (x, y, theta) per node.
struct ElementState {
  std::array<Vec2, 4> x;
  std::array<double, 4> theta{};
};

inline ElementState element_state(const BeamModel& m, const Eigen::VectorXd& q, int flexure,
                                  const Element& el) {
  const auto& f = m.flexures[flexure];
  ElementState s;
  for (int a = 0; a < 4; ++a) {
    const int n = el.nodes[a];
    const auto d = nodal_dofs(m, q, flexure, n);
    s.x[a] = f.X[n] + d.u;
    s.theta[a] = f.Theta[n] + d.psi;
  }
  return s;
}

/// Generalized strains (axial, shear, curvature change) at one quadrature point.
inline Vec3 strains_at(const QuadraturePoint& qp, const ElementState& s) {
  Vec2 dx = Vec2::Zero();
  double th = 0.0, dth = 0.0;
  for (int a = 0; a < 4; ++a) {
    dx += qp.dN[a] * s.x[a];
    th += qp.N[a] * s.theta[a];
    dth += qp.dN[a] * s.theta[a];
  }
  const Vec2 g = rotation(th).transpose() * dx - qp.ref_strain;
  return {g.x(), g.y(), dth - qp.ref_curvature};
}

inline double element_energy(const Element& el, const Section& sec, const ElementState& s) {
  double u = 0.0;
  for (const auto& qp : el.points) {
    const Vec3 e = strains_at(qp, s);
    u += 0.5 * qp.weight * (sec.EA * e[0] * e[0] + sec.GAs * e[1] * e[1] + sec.EI * e[2] * e[2]);
  }
  return u;
}

struct ElementResponse {
  Vec12 force = Vec12::Zero();   // d energy / d (x_a, y_a, theta_a)
  Mat12 tangent = Mat12::Zero(); // consistent second derivative
  double max_curvature_change = 0.0;
};

/// Internal force vector and consistent tangent of one element.
inline ElementResponse element_internal_forces(const Element& el, const Section& sec,
                                               const ElementState& s) {
  ElementResponse out;
  for (const auto& qp : el.points) {
    Vec2 dx = Vec2::Zero();
    double th = 0.0, dth = 0.0;
    for (int a = 0; a < 4; ++a) {
      dx += qp.dN[a] * s.x[a];
      th += qp.N[a] * s.theta[a];
      dth += qp.dN[a] * s.theta[a];
    }
    const double c = std::cos(th), sn = std::sin(th);
    // material stretch vector g = R^T x'
    const double g1 = c * dx.x() + sn * dx.y();
    const double g2 = -sn * dx.x() + c * dx.y();
    const Vec3 e(g1 - qp.ref_strain.x(), g2 - qp.ref_strain.y(), dth - qp.ref_curvature);
    const double axial = sec.EA * e[0];
    const double shear = sec.GAs * e[1];
    const double moment = sec.EI * e[2];
    out.max_curvature_change = std::max(out.max_curvature_change, std::abs(e[2]));

    Eigen::Matrix<double, 3, 12> B = Eigen::Matrix<double, 3, 12>::Zero();
    for (int a = 0; a < 4; ++a) {
      const int i = 3 * a;
      B(0, i) = qp.dN[a] * c;
      B(0, i + 1) = qp.dN[a] * sn;
      B(0, i + 2) = qp.N[a] * g2;
      B(1, i) = -qp.dN[a] * sn;
      B(1, i + 1) = qp.dN[a] * c;
      B(1, i + 2) = -qp.N[a] * g1;
      B(2, i + 2) = qp.dN[a];
    }
    const Vec3 stress(axial, shear, moment);
    const Vec3 D(sec.EA, sec.GAs, sec.EI);
    out.force.noalias() += qp.weight * B.transpose() * stress;
    out.tangent.noalias() += qp.weight * B.transpose() * D.asDiagonal() * B;

    // geometric part: axial * d2(g1) + shear * d2(g2)
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const double xt = qp.weight * qp.dN[a] * qp.N[b];
        // d2/dx_a dtheta_b
        const double kx = xt * (axial * -sn + shear * -c);
        const double ky = xt * (axial * c + shear * -sn);
        out.tangent(3 * a, 3 * b + 2) += kx;
        out.tangent(3 * a + 1, 3 * b + 2) += ky;
        out.tangent(3 * b + 2, 3 * a) += kx;
        out.tangent(3 * b + 2, 3 * a + 1) += ky;
        // d2/dtheta_a dtheta_b
        out.tangent(3 * a + 2, 3 * b + 2) +=
            qp.weight * qp.N[a] * qp.N[b] * (-axial * g1 - shear * g2);
      }
    }
  }
  return out;
}

/// Assembled quantities of the whole model in reduced coordinates.
struct GlobalResponse {
  Eigen::VectorXd gradient;                   // d U / d q
  Eigen::SparseMatrix<double> tangent;        // d2 U / d q2
  double energy = 0.0;
  double max_curvature_strain = 0.0;          // max |kappa - kappa0| * h / 2
};

namespace detail {

// First-order dependence of an element DOF on the reduced coordinates.
struct DofMap {
  std::array<int, 2> index{-1, -1};
  std::array<double, 2> coeff{0.0, 0.0};
  double phi_curvature = 0.0; // second derivative w.r.t. phi (tip translations)
};

inline DofMap dof_map(const BeamModel& m, const Eigen::VectorXd& q, int flexure, int node, int comp) {
  const auto& f = m.flexures[flexure];
  DofMap d;
  if (node == 0) return d;
  if (node == f.tip()) {
    if (comp == 2) {
      d.index[0] = m.master_phi();
      d.coeff[0] = 1.0;
      return d;
    }
    const double phi = q[m.master_phi()];
    const Vec2 off = m.tip_offsets[flexure];
    const Vec2 dr = rotation(phi + std::numbers::pi / 2) * off; // R'(phi) * off
    const Vec2 ddr = -(rotation(phi) * off);                   // R''(phi) * off
    d.index[0] = comp == 0 ? m.master_x() : m.master_y();
    d.coeff[0] = 1.0;
    d.index[1] = m.master_phi();
    d.coeff[1] = dr[comp];
    d.phi_curvature = ddr[comp];
    return d;
  }
  d.index[0] = f.first_interior_dof + 3 * (node - 1) + comp;
  d.coeff[0] = 1.0;
  return d;
}

} // namespace detail

inline GlobalResponse assemble(const BeamModel& m, const Eigen::VectorXd& q, bool with_tangent = true) {
  GlobalResponse out;
  out.gradient = Eigen::VectorXd::Zero(m.num_dofs);
  std::vector<Eigen::Triplet<double>> trip;
  if (with_tangent) trip.reserve(m.flexures.size() * m.flexures.front().elements.size() * 200);

  for (int fi = 0; fi < static_cast<int>(m.flexures.size()); ++fi) {
    const auto& f = m.flexures[fi];
    for (const auto& el : f.elements) {
      const ElementState es = element_state(m, q, fi, el);
      const ElementResponse r = element_internal_forces(el, f.section, es);
      out.energy += element_energy(el, f.section, es);
      out.max_curvature_strain =
          std::max(out.max_curvature_strain, r.max_curvature_change * f.section.height / 2.0);

      std::array<detail::DofMap, 12> maps;
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 3; ++c) maps[3 * a + c] = detail::dof_map(m, q, fi, el.nodes[a], c);

      for (int i = 0; i < 12; ++i) {
        for (int t = 0; t < 2; ++t)
          if (maps[i].index[t] >= 0) out.gradient[maps[i].index[t]] += maps[i].coeff[t] * r.force[i];
        if (!with_tangent) continue;
        if (maps[i].phi_curvature != 0.0)
          trip.emplace_back(m.master_phi(), m.master_phi(), maps[i].phi_curvature * r.force[i]);
        for (int j = 0; j < 12; ++j) {
          const double kij = r.tangent(i, j);
          if (kij == 0.0) continue;
          for (int t = 0; t < 2; ++t) {
            if (maps[i].index[t] < 0) continue;
            for (int u = 0; u < 2; ++u) {
              if (maps[j].index[u] < 0) continue;
              trip.emplace_back(maps[i].index[t], maps[j].index[u],
                                maps[i].coeff[t] * maps[j].coeff[u] * kij);
            }
          }
        }
      }
    }
  }
  if (with_tangent) {
    out.tangent.resize(m.num_dofs, m.num_dofs);
    out.tangent.setFromTriplets(trip.begin(), trip.end());
  }
  return out;
}

inline double strain_energy(const BeamModel& m, const Eigen::VectorXd& q) {
  double u = 0.0;
  for (int fi = 0; fi < static_cast<int>(m.flexures.size()); ++fi)
    for (const auto& el : m.flexures[fi].elements)
      u += element_energy(el, m.flexures[fi].section, element_state(m, q, fi, el));
  return u;
}

/// Boundary conditions on the master triple (u_x, u_y, phi): each component is
/// either prescribed or free and loaded by an external generalized force.
struct MasterLoading {
  std::array<std::optional<double>, 3> prescribed{};
  Vec3 load = Vec3::Zero();

  static MasterLoading rotation_control(double phi) {
    MasterLoading l;
    l.prescribed[2] = phi;
    return l;
  }
};

struct SolverSettings {
  int max_iterations = 50;
  double residual_tolerance = 1e-9; // scaled by max(1, EA)
  double increment_tolerance = 1e-10;
  int max_bisections = 2;
};

namespace detail {

// Solves K x = b with a sparse symmetric factorization, falling back to LU.
class SparseSolver {
public:
  bool factorize(const Eigen::SparseMatrix<double>& K) {
    ldlt_.compute(K);
    use_lu_ = false;
    if (ldlt_.info() == Eigen::Success) {
      const auto& d = ldlt_.vectorD();
      const double scale = d.cwiseAbs().maxCoeff();
      if (std::isfinite(scale) && d.cwiseAbs().minCoeff() > 1e-14 * scale) return true;
    }
    lu_.compute(K);
    use_lu_ = true;
    return lu_.info() == Eigen::Success;
  }

  template <class Rhs> Eigen::MatrixXd solve(const Rhs& b) {
    if (use_lu_) return lu_.solve(b);
    return ldlt_.solve(b);
  }

private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool use_lu_ = false;
};

inline Eigen::SparseMatrix<double> restrict(const Eigen::SparseMatrix<double>& K,
                                            const std::vector<int>& keep_index, int n_keep) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(K.nonZeros());
  for (int col = 0; col < K.outerSize(); ++col) {
    const int jc = keep_index[col];
    if (jc < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      const int ir = keep_index[it.row()];
      if (ir >= 0) trip.emplace_back(ir, jc, it.value());
    }
  }
  Eigen::SparseMatrix<double> out(n_keep, n_keep);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

} // namespace detail

/// Newton-Raphson equilibrium for the given master loading, starting from
/// `start` (whose prescribed components are overwritten). The returned state
/// has `converged == false` on failure.
inline BeamState solve(const BeamModel& m, const BeamState& start, const MasterLoading& loading,
                       const SolverSettings& settings = {}) {
  BeamState s = start;
  s.iterations = 0;
  s.converged = false;

  std::vector<int> free_index(m.num_dofs, -1);
  int n_free = 0;
  for (int i = 0; i < m.num_dofs; ++i) {
    const int master = i - m.master_x();
    if (master >= 0 && loading.prescribed[master]) {
      s.q[i] = *loading.prescribed[master];
      continue;
    }
    free_index[i] = n_free++;
  }
  const double tol = settings.residual_tolerance * std::max(1.0, m.max_axial_stiffness());

  detail::SparseSolver solver;
  double last_increment = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= settings.max_iterations; ++it) {
    const GlobalResponse g = assemble(m, s.q, true);
    Eigen::VectorXd r(n_free);
    for (int i = 0; i < m.num_dofs; ++i) {
      if (free_index[i] < 0) continue;
      const int master = i - m.master_x();
      r[free_index[i]] = g.gradient[i] - (master >= 0 ? loading.load[master] : 0.0);
    }
    const double rnorm = n_free > 0 ? r.lpNorm<Eigen::Infinity>() : 0.0;
    if (!std::isfinite(rnorm)) return s;
    if (rnorm < tol && (it == 0 || last_increment < settings.increment_tolerance)) {
      s.converged = true;
      return s;
    }
    if (it == settings.max_iterations) break;

    if (!solver.factorize(detail::restrict(g.tangent, free_index, n_free))) return s;
    const Eigen::VectorXd dq = -solver.solve(r);
    if (!dq.allFinite()) return s;
    for (int i = 0; i < m.num_dofs; ++i)
      if (free_index[i] >= 0) s.q[i] += dq[free_index[i]];
    last_increment = dq.lpNorm<Eigen::Infinity>();
    s.iterations = it + 1;
  }
  return s;
}

namespace detail {

inline BeamState solve_rotation(const BeamModel& m, const BeamState& from, double phi_target,
                                const std::optional<Eigen::VectorXd>& predictor,
                                const SolverSettings& settings, int depth) {
  BeamState start = from;
  if (predictor) start.q = *predictor;
  BeamState s = solve(m, start, MasterLoading::rotation_control(phi_target), settings);
  if (s.converged || depth >= settings.max_bisections) return s;

  const double phi_mid = 0.5 * (from.master_rotation(m) + phi_target);
  BeamState half = solve_rotation(m, from, phi_mid, std::nullopt, settings, depth + 1);
  if (!half.converged) return half;
  return solve_rotation(m, half, phi_target, std::nullopt, settings, depth + 1);
}

} // namespace detail

/// Equilibrium at a prescribed master rotation with free master translation.
/// Retries by bisecting the increment up to `settings.max_bisections` times.
inline BeamState solve_step(const BeamModel& m, const BeamState& state, double phi_target,
                            const SolverSettings& settings = {},
                            const std::optional<Eigen::VectorXd>& predictor = std::nullopt) {
  return detail::solve_rotation(m, state, phi_target, predictor, settings, 0);
}

/// Generalized internal force conjugate to the master rotation.
inline double reaction_moment(const BeamModel& m, const BeamState& s) {
  return assemble(m, s.q, false).gradient[m.master_phi()];
}

/// Internal force conjugate to the master translation.
inline Vec2 reaction_force(const BeamModel& m, const BeamState& s) {
  const auto g = assemble(m, s.q, false).gradient;
  return {g[m.master_x()], g[m.master_y()]};
}

/// Schur complement of the tangent onto the master translations.
inline Mat2 condense_translational_stiffness(const BeamModel& m, const BeamState& s,
                                             RotationTreatment treatment = RotationTreatment::Held) {
  const GlobalResponse g = assemble(m, s.q, true);
  std::vector<int> inner(m.num_dofs, -1);
  int n_inner = 0;
  for (int i = 0; i < m.num_dofs; ++i) {
    if (i == m.master_x() || i == m.master_y()) continue;
    if (i == m.master_phi() && treatment == RotationTreatment::Held) continue;
    inner[i] = n_inner++;
  }
  Eigen::MatrixXd K_im = Eigen::MatrixXd::Zero(n_inner, 2);
  Mat2 K_mm = Mat2::Zero();
  const std::array<int, 2> mdofs{m.master_x(), m.master_y()};
  for (int c = 0; c < 2; ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.tangent, mdofs[c]); it; ++it) {
      if (inner[it.row()] >= 0) K_im(inner[it.row()], c) = it.value();
      else if (it.row() == mdofs[0]) K_mm(0, c) = it.value();
      else if (it.row() == mdofs[1]) K_mm(1, c) = it.value();
    }
  }
  detail::SparseSolver solver;
  if (!solver.factorize(detail::restrict(g.tangent, inner, n_inner)))
    throw Error(ErrorCode::SingularTangent, "interior tangent factorization failed");
  const Eigen::MatrixXd X = solver.solve(K_im);
  if (!X.allFinite()) throw Error(ErrorCode::SingularTangent, "interior tangent is singular");
  Mat2 Kt = K_mm - K_im.transpose() * X;
  return 0.5 * (Kt + Kt.transpose());
}

inline double max_bending_strain(const BeamModel& m, const BeamState& s) {
  return assemble(m, s.q, false).max_curvature_strain;
}

struct SweepSettings {
  int steps = 20;
  double total_rotation = std::numbers::pi / 2;
  double strain_limit = 0.2;
  RotationTreatment condensation = RotationTreatment::Held;
  SolverSettings solver;
  bool keep_states = false;
};

enum class SweepFailure { None, NonConverged, StrainLimit, SingularTangent };

struct SweepRecord {
  double phi = 0.0;
  Vec2 tip = Vec2::Zero();          // x_A(phi)
  double moment = 0.0;              // M(phi)
  Mat2 stiffness = Mat2::Zero();    // K_t(phi)
  double max_strain = 0.0;          // running maximum up to this step
  int iterations = 0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<BeamState> states; // filled when keep_states is set
  bool converged = false;
  SweepFailure failure = SweepFailure::None;
  int planned_steps = 0;
  double max_strain = 0.0;
};

/// Quasi-static prescribed-rotation sweep. Never throws; failures end the
/// sweep early with `converged == false`.
inline SweepResult run_sweep(const BeamModel& m, const SweepSettings& settings = {}) {
  SweepResult out;
  out.planned_steps = settings.steps;
  const double dphi = settings.total_rotation / settings.steps;

  BeamState prev = BeamState::reference(m);
  BeamState cur = prev;
  for (int k = 0; k <= settings.steps; ++k) {
    const double phi = k == settings.steps ? settings.total_rotation : k * dphi;
    if (k > 0) {
      std::optional<Eigen::VectorXd> predictor;
      if (k >= 2) predictor = 2.0 * cur.q - prev.q;
      BeamState next = solve_step(m, cur, phi, settings.solver, predictor);
      if (!next.converged) {
        out.failure = SweepFailure::NonConverged;
        return out;
      }
      prev = cur;
      cur = next;
    }
    SweepRecord rec;
    rec.phi = phi;
    rec.iterations = cur.iterations;
    rec.tip = cur.tip_position(m);
    const GlobalResponse g = assemble(m, cur.q, false);
    rec.moment = g.gradient[m.master_phi()];
    out.max_strain = std::max(out.max_strain, g.max_curvature_strain);
    rec.max_strain = out.max_strain;
    try {
      rec.stiffness = condense_translational_stiffness(m, cur, settings.condensation);
    } catch (const Error&) {
      out.failure = SweepFailure::SingularTangent;
      return out;
    }
    out.records.push_back(rec);
    if (settings.keep_states) out.states.push_back(cur);
    if (out.max_strain > settings.strain_limit) {
      out.failure = SweepFailure::StrainLimit;
      return out;
    }
  }
  out.converged = true;
  return out;
}

} // namespace xhinge::fem

#endif
