#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cstddef>
#include <vector>

namespace switching {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Point = Eigen::Vector2d;

/// P1 triangulation of the square (-1,1)^2 together with its assembled mass
/// and stiffness matrices.
struct SpatialMesh {
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> triangles;
    SparseMatrix mass;
    SparseMatrix stiffness;

    std::size_t num_vertices() const { return vertices.size(); }
    double triangle_area(std::size_t t) const;
    /// Longest triangle edge.
    double max_diameter() const;
};

struct MeshOptions {
    /// Upper bound on the number of vertices; build_mesh throws beyond it.
    std::size_t max_vertices = 4'000'000;
};

/// Structured triangulation with cells of side <= `resolution`; each cell is
/// split along one diagonal, alternating in a checkerboard pattern.
///
/// Throws std::invalid_argument if resolution is outside (0, 2], and
/// std::length_error if the vertex count exceeds options.max_vertices.
SpatialMesh build_mesh(double resolution, const MeshOptions& options = {});

/// Disk used for control and observation subdomains.
struct Disk {
    Point center;
    double radius = 0.0;

    bool contains(const Point& x) const { return (x - center).squaredNorm() <= radius * radius; }
};

/// Subdivision quadrature of chi_disk against P1 basis functions.
///
/// Triangles that lie entirely inside (outside) the disk are integrated exactly
/// (skipped). Triangles crossing the boundary are split into four children
/// recursively down to `depth`; a leaf is counted when its centroid lies in the
/// disk and its P1 integrals are then evaluated exactly.
struct IndicatorQuadrature {
    int depth = 3;

    /// Load vector b_k = int chi phi_k.
    Eigen::VectorXd load(const SpatialMesh& mesh, const Disk& disk) const;
    /// Restricted mass matrix M_kl = int chi phi_k phi_l.
    SparseMatrix mass(const SpatialMesh& mesh, const Disk& disk) const;
};

} // namespace switching
