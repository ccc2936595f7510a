#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "reachlab/polytope.hpp"
#include "reachlab/quadrature.hpp"

namespace reachlab {

struct WeightedNode {
    Vec point;
    double weight;
};

// Vertices of a convex planar face ordered cyclically in its own plane.
inline std::vector<Vec> ordered_face_vertices(const std::vector<Vec>& pts) {
    Vec c = zeros(pts[0].size());
    for (const Vec& p : pts) axpy(c, 1.0 / pts.size(), p);
    std::vector<Vec> dirs;
    for (const Vec& p : pts) dirs.push_back(sub(p, c));
    std::vector<Vec> basis = orthonormal_basis(dirs);
    if (basis.size() != 2) throw NumericalError("face is not two-dimensional");
    std::vector<std::pair<double, Vec>> ang;
    for (const Vec& p : pts) {
        Vec d = sub(p, c);
        ang.push_back({std::atan2(dot(d, basis[1]), dot(d, basis[0])), p});
    }
    std::sort(ang.begin(), ang.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Vec> out;
    for (auto& [a, p] : ang) out.push_back(std::move(p));
    return out;
}

// Quadrature nodes for integrating over a polytope face (H^dim), dim <= 2.
inline std::vector<WeightedNode> face_quadrature_nodes(const std::vector<Vec>& face_pts, int dim,
                                                       int order) {
    std::vector<WeightedNode> nodes;
    if (dim == 0) {
        nodes.push_back({face_pts[0], 1.0});
        return nodes;
    }
    if (dim == 1) {
        // extreme pair of the (possibly oversampled) vertex list
        const Vec *p = &face_pts[0], *q = &face_pts[0];
        double best = -1.0;
        for (std::size_t i = 0; i < face_pts.size(); ++i)
            for (std::size_t j = i + 1; j < face_pts.size(); ++j) {
                double d = dist(face_pts[i], face_pts[j]);
                if (d > best) {
                    best = d;
                    p = &face_pts[i];
                    q = &face_pts[j];
                }
            }
        const QuadRule& r = gauss_legendre(order);
        for (int i = 0; i < order; ++i) {
            double s = 0.5 * (1.0 + r.nodes[i]);
            Vec x = *p;
            axpy(x, s, sub(*q, *p));
            nodes.push_back({std::move(x), 0.5 * best * r.weights[i]});
        }
        return nodes;
    }
    if (dim == 2) {
        std::vector<Vec> ring = ordered_face_vertices(face_pts);
        const QuadRule& r = gauss_legendre(order);
        for (std::size_t k = 1; k + 1 < ring.size(); ++k) {
            const Vec& A = ring[0];
            Vec AB = sub(ring[k], A), AC = sub(ring[k + 1], A);
            double ab2 = norm_sq(AB), ac2 = norm_sq(AC), abac = dot(AB, AC);
            double area = 0.5 * std::sqrt(std::max(0.0, ab2 * ac2 - abac * abac));
            if (area <= 0.0) continue;
            for (int i = 0; i < order; ++i) {
                double xi = 0.5 * (1.0 + r.nodes[i]);
                for (int j = 0; j < order; ++j) {
                    double eta = 0.5 * (1.0 + r.nodes[j]);
                    double u = xi, v = eta * (1.0 - xi);
                    Vec x = A;
                    axpy(x, u, AB);
                    axpy(x, v, AC);
                    double w = 2.0 * area * (1.0 - xi) * (0.25 * r.weights[i] * r.weights[j]);
                    nodes.push_back({std::move(x), w});
                }
            }
        }
        return nodes;
    }
    throw UnsupportedOperation("face quadrature supports dimensions 0..2");
}

// Nodes for H^1 over the unit arc between two unit vectors (angle measure).
inline std::vector<WeightedNode> arc_quadrature_nodes(const Vec& a1, const Vec& a2, int order) {
    double g = std::acos(std::clamp(dot(a1, a2), -1.0, 1.0));
    std::vector<WeightedNode> nodes;
    if (g < 1e-14) return nodes;
    const QuadRule& r = gauss_legendre(order);
    const double sg = std::sin(g);
    for (int i = 0; i < order; ++i) {
        double psi = 0.5 * g * (1.0 + r.nodes[i]);
        Vec v = scaled(a1, std::sin(g - psi) / sg);
        axpy(v, std::sin(psi) / sg, a2);
        nodes.push_back({std::move(v), 0.5 * g * r.weights[i]});
    }
    return nodes;
}

// Nodes for H^2 over the spherical polygon spanned by cyclically ordered unit
// rays on S^2 (fan of spherical triangles, collapsed-square parameterization).
inline std::vector<WeightedNode> spherical_patch_nodes(const std::vector<Vec>& rays_in, int order) {
    std::vector<Vec> rays = order_rays_cyclically(rays_in);
    std::vector<WeightedNode> nodes;
    const QuadRule& r = gauss_legendre(order);
    auto cross3 = [](const Vec& a, const Vec& b) {
        return Vec{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    };
    for (std::size_t k = 1; k + 1 < rays.size(); ++k) {
        const Vec &A = rays[0], &B = rays[k], &C = rays[k + 1];
        Vec AB = sub(B, A), AC = sub(C, A);
        for (int i = 0; i < order; ++i) {
            double xi = 0.5 * (1.0 + r.nodes[i]);
            for (int j = 0; j < order; ++j) {
                double eta = 0.5 * (1.0 + r.nodes[j]);
                double u = xi, v = eta * (1.0 - xi);
                Vec Q = A;
                axpy(Q, u, AB);
                axpy(Q, v, AC);
                double nq = norm(Q);
                Vec P = scaled(Q, 1.0 / nq);
                Vec dQx = AB;
                axpy(dQx, -eta, AC);
                Vec dQe = scaled(AC, 1.0 - xi);
                auto tangent = [&](const Vec& dQ) {
                    Vec d = scaled(dQ, 1.0 / nq);
                    axpy(d, -dot(P, d), P);
                    return d;
                };
                Vec tx = tangent(dQx), te = tangent(dQe);
                double jac = norm(cross3(tx, te));
                nodes.push_back({std::move(P), jac * 0.25 * r.weights[i] * r.weights[j]});
            }
        }
    }
    return nodes;
}

}  // namespace reachlab
