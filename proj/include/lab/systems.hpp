#pragma once

#include <utility>
#include <vector>

#include "lab/common.hpp"

namespace lab {

struct TransformationWord {
  std::vector<int> exponents;  // one per generator

  static TransformationWord unit(int ngens, int j, int e = 1) {
    TransformationWord w;
    w.exponents.assign(ngens, 0);
    w.exponents[j] = e;
    return w;
  }
  TransformationWord scaled(int r) const {
    TransformationWord w = *this;
    for (auto& x : w.exponents) x *= r;
    return w;
  }
  TransformationWord operator+(const TransformationWord& o) const {
    TransformationWord w = *this;
    for (size_t i = 0; i < w.exponents.size(); ++i) w.exponents[i] += o.exponents[i];
    return w;
  }
  static TransformationWord parse(const std::string& text, int ngens);  // "T2*T1^-1"
};

// Finite point set with probability weights and commuting
// weight-preserving bijections. Immutable after construction.
struct FiniteSystem {
  int m = 0;
  std::vector<double> weights;
  std::vector<std::vector<int>> maps;

  static FiniteSystem make(std::vector<double> weights, std::vector<std::vector<int>> maps);
  int gens() const { return static_cast<int>(maps.size()); }
};

// X = (Z_q)^d with uniform weights, one translation per shift vector.
// Point index convention: x_0 + q x_1 + ... + q^{d-1} x_{d-1}.
FiniteSystem make_product_rotation(int q, int d, const std::vector<std::vector<long long>>& shifts);

struct Observable {
  std::vector<cplx> values;
  double sup_bound = 0;

  static Observable from_values(std::vector<cplx> v);
  static Observable constant(int m, cplx c);
  static Observable indicator(int m, const std::vector<int>& points);
  static Observable random_unimodular(int m, Rng& rng);
  static Observable random_pm1(int m, Rng& rng);
};

// e((k . x)/q) on (Z_q)^d
Observable character_observable(int q, int d, const std::vector<long long>& freqs);

std::vector<int> compose(const std::vector<int>& f, const std::vector<int>& g);  // f after g
std::vector<int> perm_inverse(const std::vector<int>& p);
std::vector<int> perm_pow(const std::vector<int>& p, long long e);  // any sign, cycle-based
long long perm_order(const std::vector<int>& p);

std::vector<int> word_to_map(const FiniteSystem& sys, const TransformationWord& w);
long long map_order(const FiniteSystem& sys, const TransformationWord& w);

// Orbit partition of a permutation; weight is constant on orbits for
// weight-preserving maps, so conditional expectations are plain means.
struct OrbitPartition {
  std::vector<int> orbit_of;              // point -> orbit id
  std::vector<std::vector<int>> members;  // orbit id -> points

  static OrbitPartition of(const std::vector<int>& perm);
  // common refinement (atoms of the join of the invariant algebras)
  static OrbitPartition join(const OrbitPartition& a, const OrbitPartition& b);
};

Observable orbit_average(const Observable& f, const OrbitPartition& part);
Observable conditional_expectation_invariant(const FiniteSystem& sys, const Observable& f,
                                             const TransformationWord& w);
cplx integrate(const FiniteSystem& sys, const Observable& f);
double l2_norm(const FiniteSystem& sys, const Observable& f);
cplx inner(const FiniteSystem& sys, const Observable& f, const Observable& g);  // <f, g-bar>

// Closed-form skew product T(x,y) = (x+alpha, y+2x+alpha) on T^2:
// T^n(x,y) = (x + n alpha, y + 2nx + n^2 alpha).
struct SkewProductSystem {
  Frac128 alpha;
  Frac128 x0, y0;

  // |n| <= 1e13 certified; throws PrecisionError beyond
  std::pair<double, double> orbit_point(long long n) const;
  std::pair<double, double> step_once(std::pair<double, double> xy) const;  // test oracle aid
};

}  // namespace lab
