#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lab/common.hpp"
#include "lab/sequences.hpp"
#include "lab/systems.hpp"

namespace lab {

struct PlaneSet {
  int q = 0;
  std::vector<uint8_t> membership;  // q*q, index x + q*y

  static PlaneSet empty(int q);
  static PlaneSet full(int q);
  static PlaneSet random_density(int q, double density, Rng& rng);
  bool at(int x, int y) const { return membership[(x % q + q) % q + q * ((y % q + q) % q)]; }
  long long count() const;
};

// mu(A cap T1^{-a} A cap T2^{-a} A) for a subset given as indicator flags.
double triple_density(const FiniteSystem& sys, const std::vector<uint8_t>& A, const BigInt& a_value);

// #{m in Z_q^2 : m, m+v1*shift, m+v2*shift all in L}; direct loop.
long long corner_count(const PlaneSet& L, const std::array<long long, 2>& v1,
                       const std::array<long long, 2>& v2, long long shift);
// Bit-parallel accelerated path; exact integer counts.
long long corner_count_fast(const PlaneSet& L, const std::array<long long, 2>& v1,
                            const std::array<long long, 2>& v2, long long shift);

struct CornerScanRecord {
  uint64_t n = 0;
  long long shift_mod = 0;
  double density = 0;
};

struct CornerScanReport {
  std::vector<CornerScanRecord> records;
  double base_density = 0;
  double threshold = 0;
  std::vector<uint64_t> good_set;
  uint64_t max_gap = 0;           // N when the good set is empty
  double lower_density_of_good_set = 0;
};

struct SystemTarget {
  const FiniteSystem* sys;
  std::vector<uint8_t> A;
};

struct PlaneTarget {
  const PlaneSet* L;
  std::array<long long, 2> v1, v2;
};

CornerScanReport popular_scan(const SystemTarget& target, const SequenceSpec& s, uint64_t N,
                              double eps);
CornerScanReport popular_scan(const PlaneTarget& target, const SequenceSpec& s, uint64_t N,
                              double eps);

struct KhintchineRow {
  double eps = 0;
  double fraction = 0;
};

// For each eps, the fraction of n <= N with d_n >= mu(A)^4 - eps.
std::vector<KhintchineRow> khintchine_report(const FiniteSystem& sys,
                                             const std::vector<uint8_t>& A,
                                             const SequenceSpec& s, uint64_t N,
                                             const std::vector<double>& eps_grid);

}  // namespace lab
