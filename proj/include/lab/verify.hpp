#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lab/common.hpp"
#include "lab/sequences.hpp"
#include "lab/systems.hpp"

namespace lab {

struct IdentityRecord {
  uint64_t N = 0;
  cplx avg_a;
  cplx avg_id;
  double abs_diff = 0;
};

struct IdentityReport {
  std::vector<IdentityRecord> records;
  std::string trend;  // decreasing | flat | increasing
  double final_diff = 0;
};

// Cesaro window [1, N] by default; optional [M, N) interval family.
using Windows = std::vector<std::pair<uint64_t, uint64_t>>;

// E_{n<=N} integral f0 . T1^{a(n)} f1 . T2^{a(n)} f2 dmu against the same
// average along a(n) = n, over a ladder of Ns. Exact modular reduction of
// shifts through a residue table of period lcm(ord T1, ord T2).
IdentityReport compare_averages(const FiniteSystem& sys, const Observable& f0,
                                const Observable& f1, const Observable& f2,
                                const SequenceSpec& s, const std::vector<uint64_t>& Ns,
                                const std::optional<Windows>& windows = std::nullopt);

// Per k: averages along p(k!n + n_k) vs along k!n at a single N.
std::vector<std::pair<int, IdentityReport>> compare_factorial(
    const FiniteSystem& sys, const Observable& f0, const Observable& f1, const Observable& f2,
    const PolynomialZ& p, const std::vector<int>& ks, uint64_t N);

// lhs = |full-period E_n integral f0 . T1^n f1 . T2^n f2|,
// rhs = min( |||f0|||_{T1,T2}, |||f1|||_{T1,T2T1^-1}, |||f2|||_{T2T1^-1,T2} ).
// Inputs must be 1-bounded.
std::pair<double, double> linear_control_check(const FiniteSystem& sys, const Observable& f0,
                                               const Observable& f1, const Observable& f2);

struct WeylReport {
  Frac128 beta;
  std::vector<std::pair<uint64_t, double>> magnitudes;
  std::string classification;  // tends_to_zero | tends_to_positive | inconclusive
  double limit_estimate = 0;
};

// |E_{n<=N} e(beta a(n))| with fixed-point reduction certified for
// |a(n)| < 2^63.
WeylReport weyl_sum(const SequenceSpec& s, Frac128 beta, const std::vector<uint64_t>& Ns);

struct TrigTerm {
  cplx c;
  int kx = 0;
  int ky = 0;
};

struct TrigPoly {
  std::vector<TrigTerm> terms;
  static TrigPoly parse(const std::string& text);  // "re im kx ky; ..."
  cplx eval(double x, double y) const;
};

// E_{n<=N} F(T^{a(n)} x0) against E_{n<=N} F(T^n x0) on the skew product.
IdentityReport nil_orbit_average(const SkewProductSystem& skew, const TrigPoly& F,
                                 const SequenceSpec& s, const std::vector<uint64_t>& Ns);

}  // namespace lab
