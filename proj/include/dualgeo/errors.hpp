#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace dualgeo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidModelSpec : public Error {
 public:
  using Error::Error;
};

class PointOutOfDomain : public Error {
 public:
  using Error::Error;
};

class BaseMismatch : public Error {
 public:
  using Error::Error;
};

class DomainExit : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

/// Newton shooting for a log map did not converge. When raised while
/// integrating along a path, `path_time()` holds the offending parameter.
class ShootingNoConvergence : public Error {
 public:
  explicit ShootingNoConvergence(const std::string& what,
                                 std::optional<double> t = std::nullopt)
      : Error(what), t_(t) {}

  std::optional<double> path_time() const { return t_; }

 private:
  std::optional<double> t_;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

class StencilOutOfDomain : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

}  // namespace dualgeo
