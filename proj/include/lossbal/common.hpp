#pragma once

// Shared aliases, error types and the smooth-objective concept used by the
// solvers.  Objectives expose exact value/gradient/Hessian oracles; every
// solver in this library is written against that interface.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <utility>

namespace lossbal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (bad CSV cell, absent group, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Schema/config problems: unknown keys, missing columns, header mismatch.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A constrained problem has an empty feasible set at the requested level.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Iteration budget exhausted or divergence; carries the best iterate seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, Vector best)
      : Error(msg), best_iterate(std::move(best)) {}
  Vector best_iterate;
};

// A loss-balance precondition (group-optimum margin) does not hold.
class AssumptionError : public Error {
 public:
  AssumptionError(const std::string& msg, double m0, double m1)
      : Error(msg), margin0(m0), margin1(m1) {}
  double margin0;
  double margin1;
};

// ---------------------------------------------------------------------------
// Smooth objective concept and combinators
// ---------------------------------------------------------------------------

template <typename F>
concept SmoothObjective = requires(const F f, const Vector& w) {
  { f.value(w) } -> std::convertible_to<double>;
  { f.gradient(w) } -> std::convertible_to<Vector>;
  { f.hessian(w) } -> std::convertible_to<Matrix>;
  { f.dim() } -> std::convertible_to<Index>;
};

// ca*A + cb*B.  Holds non-owning pointers; used for population losses
// (p0*L0 + p1*L1) and Lagrangians (obj + mu*con).
template <SmoothObjective A, SmoothObjective B>
class WeightedSum {
 public:
  WeightedSum(const A& a, const B& b, double ca, double cb)
      : a_(&a), b_(&b), ca_(ca), cb_(cb) {}

  double value(const Vector& w) const {
    return ca_ * a_->value(w) + cb_ * b_->value(w);
  }
  Vector gradient(const Vector& w) const {
    return ca_ * a_->gradient(w) + cb_ * b_->gradient(w);
  }
  Matrix hessian(const Vector& w) const {
    return ca_ * a_->hessian(w) + cb_ * b_->hessian(w);
  }
  Index dim() const { return a_->dim(); }

 private:
  const A* a_;
  const B* b_;
  double ca_, cb_;
};

// A + constant shift; gradients/Hessians unchanged.
template <SmoothObjective A>
class Shifted {
 public:
  Shifted(const A& a, double shift) : a_(&a), shift_(shift) {}

  double value(const Vector& w) const { return a_->value(w) + shift_; }
  Vector gradient(const Vector& w) const { return a_->gradient(w); }
  Matrix hessian(const Vector& w) const { return a_->hessian(w); }
  Index dim() const { return a_->dim(); }

 private:
  const A* a_;
  double shift_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace lossbal
