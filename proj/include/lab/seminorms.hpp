#pragma once

#include <string>
#include <vector>

#include "lab/common.hpp"
#include "lab/systems.hpp"

namespace lab {

// Ordered list of transformation words R_1, ..., R_s (repetition allowed
// for multiplicity). s <= 6 cost guard.
struct SeminormSpec {
  std::vector<TransformationWord> words;

  int s() const { return static_cast<int>(words.size()); }
  // "T2*T1^-1,T2,T2"
  static SeminormSpec parse(const std::string& text, int ngens);
};

// f . (T^w)^h conj(f)
Observable mult_derivative(const FiniteSystem& sys, const Observable& f,
                           const TransformationWord& w, long long h);

// ||f||^{2^s} along the spec words, every Cesaro limit replaced by the
// exact average over the full period of the corresponding permutation.
// Real and >= 0 up to roundoff; tiny negatives clamped.
double box_seminorm_pow(const FiniteSystem& sys, const Observable& f, const SeminormSpec& spec);
double box_seminorm(const FiniteSystem& sys, const Observable& f, const SeminormSpec& spec);

// Dual function: fs[mask] for mask in [1, 2^s) indexes the vertex
// function at epsilon = bits of mask (bit i-1 <-> word i).
Observable dual_function(const FiniteSystem& sys, const std::vector<Observable>& fs,
                         const SeminormSpec& spec);
Observable dual_function_same(const FiniteSystem& sys, const Observable& f,
                              const SeminormSpec& spec);

// lhs = |full-period multilinear average|, rhs = prod of seminorms.
// fs[mask] for mask in [0, 2^s).
std::pair<double, double> gcs_check(const FiniteSystem& sys, const std::vector<Observable>& fs,
                                    const SeminormSpec& spec);

// Cube system X^{2^s} carrying the iterated relative-product (cubic)
// measure; tuple position p holds the vertex with bits eps_i = bit(i-1).
struct CubeSystem {
  FiniteSystem base;
  int s = 0;
  std::vector<std::vector<int>> support;   // tuples of base point indices
  std::vector<double> weights;
  std::vector<std::vector<int>> side_maps;  // R_i^* as permutations of the support
  std::vector<std::vector<int>> lifted;     // T_j^* as permutations of the support

  int dim() const { return 1 << s; }
  // view the cube as a finite system with the given support permutations
  FiniteSystem as_system(const std::vector<std::vector<int>>& chosen) const;
  // pull a base observable to vertex coordinate p
  Observable vertex_pull(const Observable& f, int p) const;
  // project a support observable to the coordinate-0 marginal check
  std::vector<double> coordinate0_marginal() const;
};

// mu^{[s]} by iterated relative products over the orbit partition of the
// diagonal actions. s <= 3 support guard.
CubeSystem cubic_measure(const FiniteSystem& sys, const std::vector<TransformationWord>& words);

// Magic extension: cubic measure plus side transformations R_i^* and
// lifted generators T_j^*. Requires the word-exponent block on the first
// s generators to be unimodular (integer inverse).
CubeSystem magic_extension(const FiniteSystem& sys, const std::vector<TransformationWord>& words);

// L^2 distance between chi and E_{h1,h2} T^{h1+h2} conj(chi) . T^{h1}chi . T^{h2}chi
// over the full period. Zero for nonergodic eigenfunctions.
double eigenfunction_residual(const FiniteSystem& sys, const Observable& chi,
                              const TransformationWord& w);

}  // namespace lab
