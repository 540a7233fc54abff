#pragma once

#include <stdexcept>
#include <string>

namespace wpsglue {

/// Malformed or out-of-contract user input. The CLI maps this to exit code 2.
class invalid_input : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Text that failed to parse; `position` is the 0-based offset of the problem.
class parse_error : public invalid_input {
public:
  parse_error(const std::string& what, std::size_t position)
      : invalid_input(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

/// A numerical routine could not honour its contract (exit code 3).
class numerical_failure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The metric stopped being positive definite at radius-squared `s`.
class positivity_lost : public numerical_failure {
public:
  explicit positivity_lost(double s)
      : numerical_failure("metric lost positivity at s = " + std::to_string(s)), s_(s) {}
  double s() const noexcept { return s_; }

private:
  double s_;
};

} // namespace wpsglue
