#pragma once

#include <Eigen/Dense>

namespace qdens {

enum class Boundary { OBC, PBC };

// Uniform 1D grid on [0, Lx]. OBC keeps both endpoints as nodes; PBC drops
// the duplicate endpoint at Lx. Quadrature is trapezoid (OBC) or rectangle
// (PBC), matching the node layout.
class SpatialGrid {
public:
    SpatialGrid(double length, int num_points, Boundary boundary);

    double length() const { return length_; }
    int num_points() const { return num_points_; }
    Boundary boundary() const { return boundary_; }
    double spacing() const { return spacing_; }

    double node(int i) const { return spacing_ * i; }
    Eigen::VectorXd nodes() const;
    Eigen::VectorXd quadrature_weights() const;

    double integrate(const Eigen::VectorXd& f) const;
    double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
    double norm(const Eigen::VectorXd& f) const;
    double l1_distance(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;

    bool same_as(const SpatialGrid& other) const;

private:
    double length_;
    int num_points_;
    Boundary boundary_;
    double spacing_;
};

} // namespace qdens
