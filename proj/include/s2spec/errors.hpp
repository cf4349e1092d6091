#ifndef S2SPEC_ERRORS_HPP
#define S2SPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace s2spec {

/// Argument coincides with a pole of the evaluated function (a nonpositive
/// integer of a digamma, a non-interacting energy of a band, the aL = 1
/// divergence of the running coupling, ...).  Root finders and the CLI treat
/// this as structural, not as a numerical overflow.
class pole_error : public std::domain_error {
public:
  pole_error(const std::string& msg, double where)
      : std::domain_error(msg), where_(where) {}
  double where() const noexcept { return where_; }

private:
  double where_;
};

/// A bracketing root search could not establish or maintain a sign change.
class bracket_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An extrapolation ladder failed its internal consistency check.
class convergence_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Angular-momentum arguments exceed the precomputed log-factorial table.
class table_overflow_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A basis enumeration produced no admissible states.
class empty_basis_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A channel violates the two-nucleon antisymmetry selection rule.
class selection_rule_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A system description or report file does not match the documented schema.
class schema_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter fit failed (no bracket, pole collision, too many MC failures).
class fit_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace s2spec

#endif
