#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wcrv/common/errors.hpp"

namespace wcrv {

enum class SurfaceKind { ZonalSphere, ZonalProjectivePlane, TriangleMesh };

inline const char* to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::ZonalSphere: return "zonal-sphere";
    case SurfaceKind::ZonalProjectivePlane: return "zonal-projective-plane";
    case SurfaceKind::TriangleMesh: return "mesh";
  }
  return "?";
}

/// Discretized base surface of constant Gaussian curvature khat, immutable
/// after construction and safe to share across threads.
///
/// Zonal kinds: rotation-invariant functions on the round sphere (grid of
/// colatitudes on [0, pi]) or on the projective plane (grid on [0, pi/2],
/// functions extended by even reflection across the equator). The Laplacian
/// is the conservative second-order flux discretization of
/// u'' + cot(s) u', scaled by khat, with exact cell masses
/// integral of sin(s) over each dual cell. Flux form keeps the operator
/// exactly self-adjoint in the mass inner product and makes
/// sum_i m_i (Lap u)_i vanish identically.
///
/// Mesh kind: closed oriented triangle mesh with cotangent weights and
/// lumped (barycentric) vertex masses. khat is the nominal constant
/// curvature of the smooth surface the mesh stands for.
class Surface {
public:
  static Surface zonal_sphere(double khat, int n_cells) {
    if (khat <= 0.0) throw ValidationError("zonal sphere requires khat > 0");
    if (n_cells < 8) throw ValidationError("zonal grid too coarse (need at least 8 cells)");
    Surface s;
    s.kind_ = SurfaceKind::ZonalSphere;
    s.khat_ = khat;
    s.euler_ = 2;
    s.build_zonal(n_cells, M_PI, /*equator_neumann=*/false);
    return s;
  }

  static Surface zonal_projective_plane(double khat, int n_cells) {
    if (khat <= 0.0) throw ValidationError("zonal projective plane requires khat > 0");
    if (n_cells < 8) throw ValidationError("zonal grid too coarse (need at least 8 cells)");
    Surface s;
    s.kind_ = SurfaceKind::ZonalProjectivePlane;
    s.khat_ = khat;
    s.euler_ = 1;
    s.build_zonal(n_cells, M_PI / 2.0, /*equator_neumann=*/true);
    return s;
  }

  static Surface triangle_mesh(std::vector<Eigen::Vector3d> vertices,
                               std::vector<std::array<int, 3>> triangles,
                               double khat) {
    if (khat == 0.0) throw ValidationError("khat must be nonzero");
    Surface s;
    s.kind_ = SurfaceKind::TriangleMesh;
    s.khat_ = khat;
    s.vertices_ = std::move(vertices);
    s.triangles_ = std::move(triangles);
    s.build_mesh();
    return s;
  }

  SurfaceKind kind() const { return kind_; }
  double khat() const { return khat_; }
  int euler_characteristic() const { return euler_; }
  int node_count() const { return static_cast<int>(mass_.size()); }
  bool zonal() const { return kind_ != SurfaceKind::TriangleMesh; }

  /// Dual-cell measures w.r.t. the background metric ghat; they sum to the
  /// exact area 2*pi*chi/khat for the zonal kinds.
  const Eigen::VectorXd& node_mass() const { return mass_; }
  double total_area() const { return mass_.sum(); }

  /// Colatitude nodes (zonal kinds only).
  const Eigen::VectorXd& colatitudes() const { return colat_; }
  double grid_spacing() const { return ds_; }
  int cell_count() const { return n_cells_; }

  const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  int negative_cotan_weight_count() const { return negative_weights_; }

  /// ghat-Laplacian as a sparse matrix (rows already divided by masses).
  const Eigen::SparseMatrix<double>& laplacian_matrix() const { return lap_; }

  /// Stiffness form S with M * Lap = S, S symmetric negative semidefinite.
  const Eigen::SparseMatrix<double>& stiffness_matrix() const { return stiff_; }

  /// Applies the Laplacian in flux form, sum of w_ij (u_j - u_i), so constants
  /// are annihilated exactly in floating point.
  Eigen::VectorXd laplacian(const Eigen::VectorXd& u) const {
    require_size(u);
    const int n = node_count();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& [j, w] : adjacency_[i]) acc += w * (u[j] - u[i]);
      out[i] = acc / mass_[i];
    }
    return out;
  }

  /// d/ds by central differences; zero at the poles and at the projective
  /// plane equator, where smooth invariant functions have vanishing slope.
  Eigen::VectorXd dds(const Eigen::VectorXd& u) const {
    if (!zonal()) throw ValidationError("dds is defined for zonal kinds only");
    require_size(u);
    const int n = node_count();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * ds_);
    return d;
  }

  /// ghat(grad u, grad u) per node.
  Eigen::VectorXd grad_norm_sq_hat(const Eigen::VectorXd& u) const {
    require_size(u);
    if (zonal()) {
      // |grad u|^2 = khat * (du/ds)^2 in unit-radius colatitude coordinates.
      Eigen::VectorXd d = dds(u);
      return khat_ * d.array().square().matrix();
    }
    return mesh_grad_norm_sq(u);
  }

  /// Antipodal reflection of node indices (zonal sphere: s -> pi - s).
  int antipode(int i) const {
    if (kind_ != SurfaceKind::ZonalSphere)
      throw ValidationError("antipode is defined for the zonal sphere only");
    return n_cells_ - i;
  }

  double mass_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    require_size(u);
    require_size(v);
    return (u.array() * mass_.array() * v.array()).sum();
  }
  double mass_norm(const Eigen::VectorXd& u) const { return std::sqrt(mass_inner(u, u)); }

private:
  void require_size(const Eigen::VectorXd& u) const {
    if (u.size() != mass_.size())
      throw ValidationError("field length " + std::to_string(u.size()) +
                            " does not match node count " + std::to_string(mass_.size()));
  }

  void build_zonal(int n_cells, double s_max, bool equator_neumann) {
    n_cells_ = n_cells;
    ds_ = s_max / n_cells;
    const int n = n_cells + 1;
    colat_.resize(n);
    for (int i = 0; i < n; ++i) colat_[i] = i * ds_;

    // Exact integrals of sin over the dual cells; flux weights at half nodes.
    mass_.resize(n);
    const double two_pi = 2.0 * M_PI;
    auto cell_mass = [&](double a, double b) { return two_pi / khat_ * (std::cos(a) - std::cos(b)); };
    mass_[0] = cell_mass(0.0, 0.5 * ds_);
    for (int i = 1; i < n - 1; ++i) mass_[i] = cell_mass(colat_[i] - 0.5 * ds_, colat_[i] + 0.5 * ds_);
    mass_[n - 1] = cell_mass(s_max - 0.5 * ds_, s_max);

    // Stiffness: S_{i,i+1} = w_{i+1/2}, row sums zero. The flux through the
    // colatitude circle at s is 2*pi*sin(s)*u'(s), independent of the radius;
    // the boundary fluxes vanish (sin at the poles, Neumann at the equator).
    (void)equator_neumann; // zero flux at every domain end either way
    adjacency_.assign(n, {});
    for (int i = 0; i + 1 < n; ++i) {
      const double w = two_pi * std::sin(colat_[i] + 0.5 * ds_) / ds_;
      adjacency_[i].emplace_back(i + 1, w);
      adjacency_[i + 1].emplace_back(i, w);
    }
    build_matrices_from_adjacency();
  }

  void build_mesh() {
    const int nv = static_cast<int>(vertices_.size());
    const int nf = static_cast<int>(triangles_.size());
    if (nv < 4 || nf < 4) throw ValidationError("mesh too small");

    // Closed + oriented: every directed edge appears exactly once and every
    // undirected edge exactly twice.
    std::map<std::pair<int, int>, int> directed;
    for (int t = 0; t < nf; ++t) {
      const auto& tri = triangles_[t];
      for (int e = 0; e < 3; ++e) {
        int a = tri[e], b = tri[(e + 1) % 3];
        if (a < 0 || a >= nv || b < 0 || b >= nv || a == b)
          throw ValidationError("triangle " + std::to_string(t) + " has invalid vertex indices");
        if (!directed.emplace(std::make_pair(a, b), t).second)
          throw ValidationError("mesh is not orientable or not manifold at edge (" +
                                std::to_string(a) + "," + std::to_string(b) + ")");
      }
    }
    int ne = 0;
    for (const auto& [edge, t] : directed) {
      (void)t;
      if (edge.first < edge.second) {
        if (!directed.count({edge.second, edge.first}))
          throw ValidationError("mesh is not closed: boundary edge (" +
                                std::to_string(edge.first) + "," + std::to_string(edge.second) + ")");
        ++ne;
      }
    }
    euler_ = nv - ne + nf;

    mass_ = Eigen::VectorXd::Zero(nv);
    std::map<std::pair<int, int>, double> cot_sum;
    for (int t = 0; t < nf; ++t) {
      const auto& tri = triangles_[t];
      const Eigen::Vector3d& p0 = vertices_[tri[0]];
      const Eigen::Vector3d& p1 = vertices_[tri[1]];
      const Eigen::Vector3d& p2 = vertices_[tri[2]];
      const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
      const double lmax2 = std::max({(p1 - p0).squaredNorm(), (p2 - p1).squaredNorm(), (p0 - p2).squaredNorm()});
      if (!(area > 1e-12 * lmax2))
        throw DegenerateTriangleError(t, area, "degenerate triangle " + std::to_string(t) +
                                                   " (area " + std::to_string(area) + ")");
      for (int k = 0; k < 3; ++k) mass_[tri[k]] += area / 3.0;
      for (int k = 0; k < 3; ++k) {
        const int i = tri[k], j = tri[(k + 1) % 3], o = tri[(k + 2) % 3];
        const Eigen::Vector3d e1 = vertices_[i] - vertices_[o];
        const Eigen::Vector3d e2 = vertices_[j] - vertices_[o];
        const double cot = e1.dot(e2) / e1.cross(e2).norm();
        auto key = i < j ? std::make_pair(i, j) : std::make_pair(j, i);
        cot_sum[key] += 0.5 * cot;
      }
    }

    negative_weights_ = 0;
    adjacency_.assign(nv, {});
    for (const auto& [edge, w] : cot_sum) {
      if (w < 0.0) ++negative_weights_;
      adjacency_[edge.first].emplace_back(edge.second, w);
      adjacency_[edge.second].emplace_back(edge.first, w);
    }
    build_matrices_from_adjacency();
    build_face_gradients();
  }

  void build_matrices_from_adjacency() {
    const int n = static_cast<int>(adjacency_.size());
    std::vector<Eigen::Triplet<double>> ts;
    for (int i = 0; i < n; ++i) {
      double diag = 0.0;
      for (const auto& [j, w] : adjacency_[i]) {
        ts.emplace_back(i, j, w);
        diag -= w;
      }
      ts.emplace_back(i, i, diag);
    }
    stiff_.resize(n, n);
    stiff_.setFromTriplets(ts.begin(), ts.end());
    lap_ = stiff_;
    for (int k = 0; k < lap_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(lap_, k); it; ++it)
        it.valueRef() /= mass_[it.row()];
  }

  void build_face_gradients() {
    // Per-face gradient of a vertex function, cached as 3 coefficient vectors
    // per face: grad u = sum_k u_k g_k with g_k = (n x e_k) / (2A).
    face_grad_.resize(triangles_.size());
    face_area_.resize(triangles_.size());
    for (size_t t = 0; t < triangles_.size(); ++t) {
      const auto& tri = triangles_[t];
      const Eigen::Vector3d& p0 = vertices_[tri[0]];
      const Eigen::Vector3d& p1 = vertices_[tri[1]];
      const Eigen::Vector3d& p2 = vertices_[tri[2]];
      const Eigen::Vector3d n = (p1 - p0).cross(p2 - p0);
      const double two_area = n.norm();
      const Eigen::Vector3d nh = n / two_area;
      face_area_[t] = 0.5 * two_area;
      // Edge opposite to vertex k, oriented so the formula gives grad of the
      // hat function at k.
      face_grad_[t][0] = nh.cross(p2 - p1) / two_area;
      face_grad_[t][1] = nh.cross(p0 - p2) / two_area;
      face_grad_[t][2] = nh.cross(p1 - p0) / two_area;
    }
  }

  Eigen::VectorXd mesh_grad_norm_sq(const Eigen::VectorXd& u) const {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(node_count());
    Eigen::VectorXd wsum = Eigen::VectorXd::Zero(node_count());
    for (size_t t = 0; t < triangles_.size(); ++t) {
      const auto& tri = triangles_[t];
      Eigen::Vector3d g = Eigen::Vector3d::Zero();
      for (int k = 0; k < 3; ++k) g += u[tri[k]] * face_grad_[t][k];
      const double q = g.squaredNorm();
      for (int k = 0; k < 3; ++k) {
        acc[tri[k]] += face_area_[t] * q;
        wsum[tri[k]] += face_area_[t];
      }
    }
    return (acc.array() / wsum.array()).matrix();
  }

  SurfaceKind kind_ = SurfaceKind::ZonalSphere;
  double khat_ = 1.0;
  int euler_ = 2;

  // Zonal data
  int n_cells_ = 0;
  double ds_ = 0.0;
  Eigen::VectorXd colat_;

  // Mesh data
  std::vector<Eigen::Vector3d> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<Eigen::Vector3d, 3>> face_grad_;
  std::vector<double> face_area_;
  int negative_weights_ = 0;

  // Edge weights per node, shared by the flux-form apply and the matrices.
  std::vector<std::vector<std::pair<int, double>>> adjacency_;

  Eigen::VectorXd mass_;
  Eigen::SparseMatrix<double> stiff_;
  Eigen::SparseMatrix<double> lap_;
};

/// Discrete real function on a surface. Holds a non-owning reference to the
/// surface, which must outlive the field.
struct ScalarField {
  const Surface* surface = nullptr;
  Eigen::VectorXd values;

  ScalarField() = default;
  ScalarField(const Surface& s, Eigen::VectorXd v) : surface(&s), values(std::move(v)) {
    validate();
  }
  static ScalarField constant(const Surface& s, double c) {
    return ScalarField(s, Eigen::VectorXd::Constant(s.node_count(), c));
  }
  static ScalarField zero(const Surface& s) { return constant(s, 0.0); }

  void validate() const {
    if (!surface) throw ValidationError("scalar field has no surface");
    if (values.size() != surface->node_count())
      throw ValidationError("scalar field length does not match surface node count");
    if (!values.allFinite()) throw ValidationError("scalar field has non-finite values");
  }
};

} // namespace wcrv
