#pragma once

#include <stdexcept>
#include <string>

namespace weaksim {

// A caller broke an operation's precondition: dimension mismatch, missing
// hermitian flag, nonpositive coupling, unknown path label, and the like.
struct ContractViolation : std::logic_error {
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

// Physically meaningful failure of an otherwise well-posed request.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// <fin|in> vanishes, so the weak value is undefined.
struct OrthogonalPostselection : DomainError {
  explicit OrthogonalPostselection(const std::string& msg) : DomainError(msg) {}
};

// The postselected meter component has (numerically) zero norm.
struct NullPostselection : DomainError {
  explicit NullPostselection(const std::string& msg) : DomainError(msg) {}
};

// A state with zero norm where a physical state is required.
struct DegenerateState : DomainError {
  explicit DegenerateState(const std::string& msg) : DomainError(msg) {}
};

// Too few data points for the requested analysis (e.g. a one-point sweep).
struct InsufficientData : DomainError {
  explicit InsufficientData(const std::string& msg) : DomainError(msg) {}
};

}  // namespace weaksim
