#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <vector>

#include "lab/common.hpp"

namespace lab {

using BigInt = boost::multiprecision::cpp_int;

// Integer polynomial, constant term first, trailing zeros trimmed.
struct PolynomialZ {
  std::vector<long long> coeffs;

  static PolynomialZ parse(const std::string& text);  // "-1 0 1" -> t^2 - 1
  static PolynomialZ zero() { return PolynomialZ{}; }
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool is_zero() const { return coeffs.empty(); }
  PolynomialZ derivative() const;
  std::string to_string() const;
  void trim();
};

BigInt poly_eval(const PolynomialZ& p, const BigInt& n);
// Exact Horner evaluation mod q, q >= 1. Result in [0, q).
long long poly_eval_mod(const PolynomialZ& p, long long n, long long q);

// One term c * t^e * (log t)^k of a Hardy-grammar expression.
struct HardyTerm {
  double coeff = 0;
  double exponent = 0;
  int log_power = 0;
  std::string coeff_text;  // literal, kept for the exact rational path
};

struct HardyExpr {
  std::vector<HardyTerm> terms;

  static HardyExpr parse(const std::string& text);  // "1*t^1.5 + 2*t^1*log^1"
  void validate() const;
  std::string to_string() const;
};

// floor(a(n)); exact integer root extraction when the expression is a
// rational combination with a single t^{p/q} term (q <= 4), certified
// extended-precision floats otherwise. Throws PrecisionError when the
// floor cannot be certified.
BigInt hardy_eval(const HardyExpr& h, uint64_t n);

struct SequenceSpec {
  enum class Kind { Identity, Polynomial, Hardy, Factorial };
  Kind kind = Kind::Identity;
  PolynomialZ poly;  // Polynomial payload / Factorial base
  HardyExpr hardy;
  int k = 0;             // Factorial scheme
  BigInt k_factorial;    // k!
  uint64_t n_k = 0;      // residue with k! | poly(n_k)

  static SequenceSpec identity();
  static SequenceSpec polynomial(PolynomialZ p);
  static SequenceSpec hardy_seq(HardyExpr h);
  // verifies k! | base(n_k); n_k found via find_nk when not supplied
  static SequenceSpec factorial_scheme(PolynomialZ base, int k,
                                       std::optional<uint64_t> n_k = std::nullopt);
  static SequenceSpec parse(const std::string& text);
  std::string to_string() const;
};

BigInt sequence_eval(const SequenceSpec& s, uint64_t n);
// a(n) mod q without materializing huge values where possible.
long long sequence_eval_mod(const SequenceSpec& s, uint64_t n, long long q);

struct IntersectivityVerdict {
  bool obstructed = false;       // true = NotIntersective
  long long witness_modulus = 0; // prime power with no roots
  long long prime_bound = 0;
  int lift_bound = 0;
};

// Bounded verification: for each prime <= prime_bound, root search mod
// the prime and Hensel lifting (exhaustive fallback at singular roots)
// up to exponent lift_bound. Primes are scanned in increasing order and
// the first obstruction found (least prime, least failing power) is
// reported.
IntersectivityVerdict is_intersective_bounded(const PolynomialZ& p, long long prime_bound,
                                              int lift_bound);

// Least n in [0, k!) with k! | p(n); brute force while k! <= 1e7, CRT
// over the maximal prime powers of k! beyond. Throws NoSolutionError.
uint64_t find_nk(const PolynomialZ& p, int k);
BigInt factorial(int k);

struct LogAwayVerdict {
  enum class Kind { Satisfied, Violated, Unknown } kind = Kind::Unknown;
  double c = 0;
  PolynomialZ p;
};

// Conservative sufficient-condition classifier for the "stays
// logarithmically away from real multiples of integer polynomials"
// property over the term grammar.
LogAwayVerdict classify_log_away(const HardyExpr& h);

// Exact counts of a(n) mod q, n = 1..N. Sums to N.
std::vector<uint64_t> residue_distribution(const SequenceSpec& s, long long q, uint64_t N);

}  // namespace lab
