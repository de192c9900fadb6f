#ifndef DODLAB_ERROR_HPP_
#define DODLAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dodlab {

// Precondition violations (bad degree, alpha out of range, size mismatch)
// are reported as std::invalid_argument. The types below mark failures of
// the numerical machinery itself, so callers can tell them apart.

/// Iterative norm computation did not reach its tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  explicit NonConvergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A CFL bracket whose endpoints are both stable or both unstable.
class BracketError : public std::runtime_error {
 public:
  BracketError(const std::string& what, double lo, double hi, bool lo_stable,
               bool hi_stable)
      : std::runtime_error(what),
        lo_(lo), hi_(hi), lo_stable_(lo_stable), hi_stable_(hi_stable) {}

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool lo_stable() const { return lo_stable_; }
  bool hi_stable() const { return hi_stable_; }

 private:
  double lo_, hi_;
  bool lo_stable_, hi_stable_;
};

}  // namespace dodlab

#endif  // DODLAB_ERROR_HPP_
