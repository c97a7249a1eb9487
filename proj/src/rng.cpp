#include "kronadapt/rng.hpp"

namespace kronadapt {

Matrix sample_gaussian(Rng& rng, Index rows, Index cols, double std) {
  if (rows < 1 || cols < 1)
    throw ShapeError("sample_gaussian: rows and cols must be positive");
  if (!(std > 0.0))
    throw ParameterError("sample_gaussian: std must be positive");
  Matrix m(rows, cols);
  std::normal_distribution<double> dist(0.0, std);
  double* p = m.data();
  for (Index i = 0; i < rows * cols; ++i) p[i] = dist(rng.engine());
  return m;
}

Matrix sample_uniform(Rng& rng, Index rows, Index cols, double bound) {
  if (rows < 1 || cols < 1)
    throw ShapeError("sample_uniform: rows and cols must be positive");
  if (!(bound > 0.0))
    throw ParameterError("sample_uniform: bound must be positive");
  Matrix m(rows, cols);
  std::uniform_real_distribution<double> dist(-bound, bound);
  double* p = m.data();
  for (Index i = 0; i < rows * cols; ++i) p[i] = dist(rng.engine());
  return m;
}

}  // namespace kronadapt
