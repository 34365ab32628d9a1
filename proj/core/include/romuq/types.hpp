#ifndef ROMUQ_TYPES_HPP
#define ROMUQ_TYPES_HPP

#include <Eigen/Dense>

namespace romuq
{

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

}  // namespace romuq

#endif  // ROMUQ_TYPES_HPP
