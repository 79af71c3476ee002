#include "diffnum/config.hpp"

#include <stdexcept>

namespace diffnum {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
  if (!(rtol > 0.0) || !(atol > 0.0))
    throw std::invalid_argument("SolverConfig: rtol and atol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("SolverConfig: max_steps must be >= 1");
  if (!(damping > 0.0)) throw std::invalid_argument("SolverConfig: damping must be > 0");
  if (panels < 0) throw std::invalid_argument("SolverConfig: panels must be >= 0");
}

}  // namespace diffnum
