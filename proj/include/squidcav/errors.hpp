#pragma once

#include <stdexcept>
#include <string>

namespace squidcav {

/// Operand shapes do not agree (kron/embed/commutator/partial trace).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A generator or density matrix failed its structural check.
class StructureError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A parameter violates its invariant. `key()` names the offending field.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Thermal weight mass beyond the Fock cutoff exceeds the allowed bound.
class LeakageError : public std::range_error {
 public:
  LeakageError(const std::string& what, double leakage)
      : std::range_error(what), leakage_(leakage) {}
  double leakage() const noexcept { return leakage_; }

 private:
  double leakage_;
};

/// Entropy was requested for a state that is not pure.
class MixedStateError : public std::domain_error {
 public:
  MixedStateError(const std::string& what, double purity)
      : std::domain_error(what), purity_(purity) {}
  double purity() const noexcept { return purity_; }

 private:
  double purity_;
};

}  // namespace squidcav
