#ifndef ROMUQ_ERROR_HPP
#define ROMUQ_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace romuq
{

class Error : public std::runtime_error
{
public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// det(F) <= 0 at a material point; element() is -1 when no element applies.
class SingularDeformationError : public Error
{
public:
  explicit SingularDeformationError(double det_f, int element = -1)
    : Error("singular deformation: det(F) = " + std::to_string(det_f) +
            (element >= 0 ? " in element " + std::to_string(element) : "")),
      det_f_(det_f), element_(element)
  {
  }
  double det_f() const { return det_f_; }
  int element() const { return element_; }

private:
  double det_f_;
  int element_;
};

// Newton failed to reach the residual tolerance within the iteration budget.
class StepFailureError : public Error
{
public:
  StepFailureError(int step, double residual_norm, int iterations)
    : Error("time step " + std::to_string(step) + ": Newton did not converge in " +
            std::to_string(iterations) + " iterations, last |R| = " +
            std::to_string(residual_norm)),
      step_(step), residual_norm_(residual_norm)
  {
  }
  int step() const { return step_; }
  double residual_norm() const { return residual_norm_; }

private:
  int step_;
  double residual_norm_;
};

class DegenerateFeatureError : public Error
{
public:
  explicit DegenerateFeatureError(std::ptrdiff_t row)
    : Error("degenerate feature: row " + std::to_string(row) +
            " is constant over the training data"),
      row_(row)
  {
  }
  std::ptrdiff_t row() const { return row_; }

private:
  std::ptrdiff_t row_;
};

class DegenerateDataError : public Error
{
public:
  explicit DegenerateDataError(const std::string &msg) : Error(msg) {}
};

class DimensionError : public Error
{
public:
  explicit DimensionError(const std::string &msg) : Error(msg) {}
};

class IllConditionedKernelError : public Error
{
public:
  explicit IllConditionedKernelError(const std::string &msg) : Error(msg) {}
};

class TrainingFailureError : public Error
{
public:
  explicit TrainingFailureError(const std::string &msg) : Error(msg) {}
};

class IoError : public Error
{
public:
  explicit IoError(const std::string &msg) : Error(msg) {}
};

}  // namespace romuq

#endif  // ROMUQ_ERROR_HPP
