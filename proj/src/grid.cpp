#include "qdens/grid.hpp"

#include <stdexcept>

namespace qdens {

SpatialGrid::SpatialGrid(double length, int num_points, Boundary boundary)
    : length_(length), num_points_(num_points), boundary_(boundary) {
    if (!(length > 0.0))
        throw std::invalid_argument("SpatialGrid: length must be positive");
    if (num_points < 3)
        throw std::invalid_argument("SpatialGrid: need at least 3 points");
    spacing_ = (boundary == Boundary::OBC) ? length / (num_points - 1)
                                           : length / num_points;
}

Eigen::VectorXd SpatialGrid::nodes() const {
    Eigen::VectorXd x(num_points_);
    for (int i = 0; i < num_points_; ++i) x[i] = node(i);
    return x;
}

Eigen::VectorXd SpatialGrid::quadrature_weights() const {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(num_points_, spacing_);
    if (boundary_ == Boundary::OBC) {
        w[0] *= 0.5;
        w[num_points_ - 1] *= 0.5;
    }
    return w;
}

double SpatialGrid::integrate(const Eigen::VectorXd& f) const {
    return quadrature_weights().dot(f);
}

double SpatialGrid::inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
    return quadrature_weights().cwiseProduct(f).dot(g);
}

double SpatialGrid::norm(const Eigen::VectorXd& f) const {
    return std::sqrt(inner(f, f));
}

double SpatialGrid::l1_distance(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
    return integrate((f - g).cwiseAbs());
}

bool SpatialGrid::same_as(const SpatialGrid& other) const {
    return length_ == other.length_ && num_points_ == other.num_points_ &&
           boundary_ == other.boundary_;
}

} // namespace qdens
