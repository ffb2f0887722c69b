#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "cplab/errors.hpp"

namespace cplab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

/// The three central-path flavors: the full (x, s, y) curve and its
/// projections onto the (x, s) and y coordinate blocks.
enum class Flavor { PD = 0, P = 1, D = 2 };

inline const char* to_string(Flavor f) {
  switch (f) {
    case Flavor::PD: return "PD";
    case Flavor::P: return "P";
    case Flavor::D: return "D";
  }
  return "?";
}

inline constexpr std::array<Flavor, 3> kAllFlavors = {Flavor::PD, Flavor::P, Flavor::D};

/// Shared numeric tolerances, threaded explicitly through every operation.
struct Tolerances {
  double newton_tol = 1e-11;   // scaled residual accepted for path points
  double rank_tol = 1e-10;     // relative smallest singular value for full rank
  double solve_tol = 1e-10;    // relative residual for linear solves
  double feas_margin = 1e-7;   // strictness margin for open cells
  double quad_tol = 1e-6;      // curvature quadrature budget per cell
  double tail_tol = 1e-7;      // Gauss-curve motion per decade counting as stalled
  double cond_cap = 1e12;      // condition estimate beyond which cells get flagged

  void validate() const {
    require(newton_tol > 0 && rank_tol > 0 && solve_tol > 0 && feas_margin > 0 &&
                quad_tol > 0 && tail_tol > 0 && cond_cap > 0,
            Errc::InvalidArgument, "tolerances must be strictly positive");
    require(newton_tol < feas_margin, Errc::InvalidArgument,
            "newton_tol must be smaller than feas_margin");
  }
};

/// One of the 2^m sign conditions, entries in {+1, -1}.
class SignVector {
 public:
  SignVector() = default;
  explicit SignVector(IntVector eps) : eps_(std::move(eps)) {
    for (int i = 0; i < eps_.size(); ++i)
      require(eps_[i] == 1 || eps_[i] == -1, Errc::InvalidArgument,
              "sign entries must be +1 or -1");
  }

  static SignVector all_plus(int m) { return SignVector(IntVector::Constant(m, 1)); }

  /// Binary counting order: bit i of k clear means eps_i = +1.
  static SignVector from_index(int m, std::uint64_t k) {
    IntVector e(m);
    for (int i = 0; i < m; ++i) e[i] = ((k >> i) & 1u) ? -1 : 1;
    return SignVector(std::move(e));
  }

  static SignVector parse(const std::string& s) {
    IntVector e(static_cast<int>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      require(s[i] == '+' || s[i] == '-', Errc::InvalidArgument,
              "sign string must consist of '+' and '-'");
      e[static_cast<int>(i)] = s[i] == '+' ? 1 : -1;
    }
    return SignVector(std::move(e));
  }

  int size() const { return static_cast<int>(eps_.size()); }
  int sign(int i) const { return eps_[i]; }
  const IntVector& raw() const { return eps_; }

  std::uint64_t index() const {
    std::uint64_t k = 0;
    for (int i = 0; i < eps_.size(); ++i)
      if (eps_[i] < 0) k |= (std::uint64_t{1} << i);
    return k;
  }

  std::string str() const {
    std::string s(static_cast<std::size_t>(eps_.size()), '+');
    for (int i = 0; i < eps_.size(); ++i)
      if (eps_[i] < 0) s[static_cast<std::size_t>(i)] = '-';
    return s;
  }

  /// Componentwise product with another sign vector.
  SignVector compose(const SignVector& other) const {
    require(other.size() == size(), Errc::DimensionMismatch, "sign vector sizes differ");
    IntVector e = eps_.cwiseProduct(other.eps_);
    return SignVector(std::move(e));
  }

  bool operator==(const SignVector& o) const {
    return eps_.size() == o.eps_.size() && (eps_.array() == o.eps_.array()).all();
  }

 private:
  IntVector eps_;
};

/// Problem data (A, b, c) with m > n >= 1 and rank(A) = n.
struct LpInstance {
  int m = 0;
  int n = 0;
  Matrix A;  // m x n
  Vector b;  // m
  Vector c;  // n
  std::optional<std::uint64_t> seed;

  void validate(const Tolerances& tol) const;  // defined in linalg.cpp
};

}  // namespace cplab
