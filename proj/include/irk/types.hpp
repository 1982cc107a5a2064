#ifndef IRK_TYPES_HPP
#define IRK_TYPES_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace irk {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<Vector>;
using ConstVectorRef = Eigen::Ref<const Vector>;

/// Raised when operand sizes do not match an operator's shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a Krylov process is seeded with a zero residual.
class ConvergedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline void require_size(Index actual, Index expected, const char* what) {
  if (actual != expected) {
    throw DimensionError(std::string(what) + ": expected length " +
                         std::to_string(expected) + ", got " +
                         std::to_string(actual));
  }
}

}  // namespace irk

#endif  // IRK_TYPES_HPP
