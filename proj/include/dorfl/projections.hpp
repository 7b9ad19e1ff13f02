#ifndef DORFL_PROJECTIONS_HPP
#define DORFL_PROJECTIONS_HPP

#include "dorfl/model.hpp"

namespace dorfl {

// Euclidean projection onto the probability simplex (sort-based exact KKT
// solution of min ||lambda - v||^2 over the simplex).
Vec project_simplex(const Vec& v);

// Radial projection onto the Euclidean ball of the given radius.
Vec project_ball(const Vec& theta, double radius);

}  // namespace dorfl

#endif
