#include "polylab/scalar.hpp"

#include <stdexcept>
#include <string>

namespace polylab {

const char* to_string(Precision p) {
  switch (p) {
    case Precision::standard: return "standard";
    case Precision::extended: return "extended";
    case Precision::adaptive: return "adaptive";
  }
  return "?";
}

Precision precision_from_string(const std::string& s) {
  if (s == "standard") return Precision::standard;
  if (s == "extended") return Precision::extended;
  if (s == "adaptive") return Precision::adaptive;
  throw std::invalid_argument("unknown precision '" + s + "' (expected standard|extended|adaptive)");
}

}  // namespace polylab
