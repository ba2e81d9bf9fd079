#include "gda/errors.hpp"

namespace gda {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::model: return "model";
    case ErrorKind::bracket: return "bracket";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::step_size: return "step-size";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::boundary: return "boundary";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace gda
