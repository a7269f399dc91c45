#pragma once

#include <stdexcept>
#include <string>

namespace pointstokes {

/// Raised for invalid input, violated mesh invariants and solver failures.
class Error : public std::runtime_error
{
public:
  explicit Error(const std::string& what)
    : std::runtime_error(what)
  {}
};

} // namespace pointstokes
