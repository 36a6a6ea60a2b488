#pragma once

#include <stdexcept>
#include <string>

namespace snspd {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation called on a configuration it does not support.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Quadrature or arithmetic breakdown (non-finite values, violated bounds).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace snspd
