#include "bpcalc/errors.hpp"

#include <fmt/core.h>

namespace bpcalc {

CommutatorError::CommutatorError(std::size_t i, std::size_t j, double norm)
    : Error(fmt::format("generators {} and {} do not commute: commutator norm {:.3e}", i, j, norm)),
      i_(i), j_(j), norm_(norm) {}

ParseError::ParseError(const std::string& key, int line, const std::string& message)
    : Error(line > 0 ? fmt::format("line {}: key '{}': {}", line, key, message)
                     : fmt::format("key '{}': {}", key, message)),
      key_(key), line_(line) {}

}  // namespace bpcalc
