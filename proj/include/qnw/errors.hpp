#pragma once

#include <stdexcept>
#include <string>

namespace qnw {

// Thrown when a desk-scale guard (dense dimension, exhaustive enumeration size)
// would be exceeded. Usage errors are plain std::invalid_argument.
class resource_error : public std::runtime_error {
  public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qnw
