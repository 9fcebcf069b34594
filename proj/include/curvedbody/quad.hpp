#pragma once

// Quad-precision scalar (IEEE binary128 via libquadmath) usable as an Eigen
// scalar type.

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

namespace curvedbody {

using Quad = boost::multiprecision::float128;

}  // namespace curvedbody
