#include "switching/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace switching {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
    const Point ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double triangle_distance(const Point& p, const Point& a, const Point& b, const Point& c) {
    const double total = signed_area(a, b, c);
    const double l0 = signed_area(p, b, c) / total;
    const double l1 = signed_area(a, p, c) / total;
    const double l2 = 1.0 - l0 - l1;
    if (l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0)
        return 0.0;
    return std::min({segment_distance(p, a, b), segment_distance(p, b, c), segment_distance(p, c, a)});
}

// Barycentric coordinates of x with respect to a fixed parent triangle.
struct Barycentric {
    Point origin;
    Eigen::Matrix2d inverse;

    Barycentric(const Point& a, const Point& b, const Point& c) : origin(a) {
        Eigen::Matrix2d J;
        J.col(0) = b - a;
        J.col(1) = c - a;
        inverse = J.inverse();
    }

    Eigen::Vector3d operator()(const Point& x) const {
        const Eigen::Vector2d r = inverse * (x - origin);
        return {1.0 - r.x() - r.y(), r.x(), r.y()};
    }
};

struct LocalIntegrals {
    Eigen::Vector3d load = Eigen::Vector3d::Zero();
    Eigen::Matrix3d mass = Eigen::Matrix3d::Zero();
};

void add_exact(const Barycentric& bary, const Point& a, const Point& b, const Point& c,
               LocalIntegrals& out) {
    const double area = std::abs(signed_area(a, b, c));
    out.load += area * bary((a + b + c) / 3.0);
    // Edge-midpoint rule, exact for the quadratic products phi_k phi_l.
    for (const Point& m : {Point(0.5 * (a + b)), Point(0.5 * (b + c)), Point(0.5 * (c + a))}) {
        const Eigen::Vector3d phi = bary(m);
        out.mass += (area / 3.0) * phi * phi.transpose();
    }
}

void integrate_indicator(const Barycentric& bary, const Disk& disk, const Point& a,
                         const Point& b, const Point& c, int depth, LocalIntegrals& out) {
    if (disk.contains(a) && disk.contains(b) && disk.contains(c)) {
        add_exact(bary, a, b, c, out);
        return;
    }
    if (triangle_distance(disk.center, a, b, c) > disk.radius)
        return;
    if (depth == 0) {
        if (disk.contains((a + b + c) / 3.0))
            add_exact(bary, a, b, c, out);
        return;
    }
    const Point ab = 0.5 * (a + b);
    const Point bc = 0.5 * (b + c);
    const Point ca = 0.5 * (c + a);
    integrate_indicator(bary, disk, a, ab, ca, depth - 1, out);
    integrate_indicator(bary, disk, ab, b, bc, depth - 1, out);
    integrate_indicator(bary, disk, ca, bc, c, depth - 1, out);
    integrate_indicator(bary, disk, ab, bc, ca, depth - 1, out);
}

template <class Visit>
void for_each_indicator_triangle(const SpatialMesh& mesh, const Disk& disk, int depth, Visit visit) {
    for (const auto& tri : mesh.triangles) {
        const Point& a = mesh.vertices[tri[0]];
        const Point& b = mesh.vertices[tri[1]];
        const Point& c = mesh.vertices[tri[2]];
        if (triangle_distance(disk.center, a, b, c) > disk.radius)
            continue;
        LocalIntegrals local;
        integrate_indicator(Barycentric(a, b, c), disk, a, b, c, depth, local);
        visit(tri, local);
    }
}

} // namespace

double SpatialMesh::triangle_area(std::size_t t) const {
    const auto& tri = triangles.at(t);
    return std::abs(signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]));
}

double SpatialMesh::max_diameter() const {
    double diameter = 0.0;
    for (const auto& tri : triangles) {
        for (int k = 0; k < 3; ++k)
            diameter = std::max(diameter, (vertices[tri[k]] - vertices[tri[(k + 1) % 3]]).norm());
    }
    return diameter;
}

SpatialMesh build_mesh(double resolution, const MeshOptions& options) {
    if (!(resolution > 0.0) || resolution > 2.0)
        throw std::invalid_argument("build_mesh: resolution must lie in (0, 2]");

    const double cells_real = std::ceil(2.0 / resolution - 1e-12);
    const double vertices_real = (cells_real + 1.0) * (cells_real + 1.0);
    if (vertices_real > static_cast<double>(options.max_vertices))
        throw std::length_error("build_mesh: resolution exceeds the vertex budget");

    const int cells = static_cast<int>(cells_real);
    const int stride = cells + 1;
    const double h = 2.0 / cells;

    SpatialMesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(stride) * stride);
    for (int j = 0; j <= cells; ++j) {
        for (int i = 0; i <= cells; ++i) {
            // Boundary coordinates are pinned so the mesh covers the square exactly.
            const double x = (i == cells) ? 1.0 : -1.0 + i * h;
            const double y = (j == cells) ? 1.0 : -1.0 + j * h;
            mesh.vertices.emplace_back(x, y);
        }
    }

    mesh.triangles.reserve(2 * static_cast<std::size_t>(cells) * cells);
    for (int j = 0; j < cells; ++j) {
        for (int i = 0; i < cells; ++i) {
            const int v00 = j * stride + i;
            const int v10 = v00 + 1;
            const int v01 = v00 + stride;
            const int v11 = v01 + 1;
            if ((i + j) % 2 == 0) {
                mesh.triangles.push_back({v00, v10, v11});
                mesh.triangles.push_back({v00, v11, v01});
            } else {
                mesh.triangles.push_back({v00, v10, v01});
                mesh.triangles.push_back({v10, v11, v01});
            }
        }
    }

    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    std::vector<Eigen::Triplet<double>> mass_entries;
    std::vector<Eigen::Triplet<double>> stiffness_entries;
    mass_entries.reserve(9 * mesh.triangles.size());
    stiffness_entries.reserve(9 * mesh.triangles.size());

    for (const auto& tri : mesh.triangles) {
        const Point& a = mesh.vertices[tri[0]];
        const Point& b = mesh.vertices[tri[1]];
        const Point& c = mesh.vertices[tri[2]];
        const double area = signed_area(a, b, c);
        if (!(area > 0.0))
            throw std::logic_error("build_mesh: degenerate or inverted triangle");

        // Gradients of the barycentric basis functions.
        Eigen::Matrix<double, 3, 2> grad;
        grad.row(0) << b.y() - c.y(), c.x() - b.x();
        grad.row(1) << c.y() - a.y(), a.x() - c.x();
        grad.row(2) << a.y() - b.y(), b.x() - a.x();
        grad /= 2.0 * area;

        const Eigen::Matrix3d local_stiffness = area * grad * grad.transpose();
        for (int r = 0; r < 3; ++r) {
            for (int s = 0; s < 3; ++s) {
                mass_entries.emplace_back(tri[r], tri[s], area * (r == s ? 2.0 : 1.0) / 12.0);
                stiffness_entries.emplace_back(tri[r], tri[s], local_stiffness(r, s));
            }
        }
    }

    mesh.mass.resize(n, n);
    mesh.mass.setFromTriplets(mass_entries.begin(), mass_entries.end());
    mesh.stiffness.resize(n, n);
    mesh.stiffness.setFromTriplets(stiffness_entries.begin(), stiffness_entries.end());
    return mesh;
}

Eigen::VectorXd IndicatorQuadrature::load(const SpatialMesh& mesh, const Disk& disk) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    for_each_indicator_triangle(mesh, disk, depth, [&](const auto& tri, const LocalIntegrals& local) {
        for (int r = 0; r < 3; ++r)
            b[tri[r]] += local.load[r];
    });
    return b;
}

SparseMatrix IndicatorQuadrature::mass(const SpatialMesh& mesh, const Disk& disk) const {
    std::vector<Eigen::Triplet<double>> entries;
    for_each_indicator_triangle(mesh, disk, depth, [&](const auto& tri, const LocalIntegrals& local) {
        for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s)
                entries.emplace_back(tri[r], tri[s], local.mass(r, s));
    });
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    SparseMatrix m(n, n);
    m.setFromTriplets(entries.begin(), entries.end());
    return m;
}

} // namespace switching
