#pragma once

#include <stdexcept>
#include <string>

namespace ergopt {

/// Base for all library failures. `where` names the module.operation that
/// detected the problem so callers can report it without unwinding context.
class error : public std::runtime_error {
 public:
  error(std::string where, const std::string& what)
      : std::runtime_error(what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class invalid_argument : public error {
 public:
  using error::error;
};

/// Iteration budget exhausted before reaching the requested tolerance.
class no_convergence : public error {
 public:
  no_convergence(std::string where, const std::string& what, double residual,
                 int iterations)
      : error(std::move(where), what),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A quantity that is an identity in exact arithmetic exceeded its tolerance;
/// usually means an upstream eigenpair was accepted unconverged.
class internal_consistency : public error {
 public:
  using error::error;
};

class degenerate_cylinder : public error {
 public:
  using error::error;
};

class inconsistent_m : public error {
 public:
  using error::error;
};

class empty_omega : public error {
 public:
  using error::error;
};

class construction_failure : public error {
 public:
  construction_failure(std::string where, const std::string& what, int node)
      : error(std::move(where), what), node_(node) {}
  int node() const noexcept { return node_; }

 private:
  int node_;
};

class incompatible_boundary : public error {
 public:
  incompatible_boundary(std::string where, const std::string& what, int from,
                        int to)
      : error(std::move(where), what), from_(from), to_(to) {}
  int from() const noexcept { return from_; }
  int to() const noexcept { return to_; }

 private:
  int from_, to_;
};

class precondition_failed : public error {
 public:
  using error::error;
};

}  // namespace ergopt
