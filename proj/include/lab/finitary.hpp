#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lab/common.hpp"

namespace lab {

// Finitely supported complex function on [-N..N]^ell, zero outside.
struct GridFunction {
  int ell = 0;
  int N = 0;
  std::vector<cplx> values;  // row-major, coordinate 0 fastest
  double sup_bound = 0;

  static GridFunction zeros(int ell, int N);
  int side() const { return 2 * N + 1; }
  size_t size() const { return values.size(); }
  size_t index(const std::vector<int>& x) const;
  bool inside(const std::vector<int>& x) const;
  cplx at(const std::vector<int>& x) const;       // zero outside
  cplx& ref(const std::vector<int>& x);
  cplx at2(int x, int y) const;                   // ell = 2 helpers
  cplx& ref2(int x, int y);
  void refresh_sup();
  double l2_mean() const;  // ||f||_{L^2([+-N]^ell)} with normalized counting measure
};

// s direction sets, each a finite subset of Z^ell.
struct DirectionSet {
  std::vector<std::vector<std::vector<int>>> sets;

  int s() const { return static_cast<int>(sets.size()); }
  static DirectionSet axis_segments(int ell, const std::vector<std::pair<int, int>>& dirs);
  // "e1:8,e2:8,e2:8"
  static DirectionSet parse(const std::string& text, int ell);
  // the canonical inverse-theorem direction set e_1[N], ..., e_ell[N], e_ell[N]
  static DirectionSet canonical(int ell, int N);
};

struct GridNormResult {
  double value = 0;       // the 2^s-th root
  double pow_value = 0;   // the accumulated 2^s power
  bool monte_carlo = false;
  double std_error = 0;   // of pow_value (MC mode)
  uint64_t samples = 0;
};

// Exact weighted-difference evaluation; Monte Carlo estimator with
// reported standard error when mc_samples > 0.
GridNormResult grid_box_norm(const GridFunction& f, const DirectionSet& dirs,
                             uint64_t mc_samples = 0, uint64_t seed = 0);

// Fast exact path for the canonical direction set (e_1, ..., e_ell, e_ell);
// ell = 2 only. Returns the 2^{ell+1} power.
double canonical_box_norm_pow(const GridFunction& f);

struct U2Witness {
  std::vector<double> phi;  // per row, frequency in [0,1)
  std::vector<double> psi;  // per row, phase in [0,1)
  double correlation = 0;   // sum f(x,y) e(phi(y)x + psi(y)), real >= 0
  double norm_pow = 0;      // ||f||^4 along (e_1[N], e_1[N])
  double delta = 0;         // norm_pow / N^2
  double c_achieved = 0;    // correlation / (delta^{3/2} N^2)
};

// Row frequencies from a DFT on a cyclic group of size 4N+2 (wraparound-
// free embedding); psi aligns each row sum to the nonnegative real axis.
U2Witness u2_inverse_witness(const GridFunction& f);

struct BoxWitness {
  std::vector<double> phi;          // table over hat{x}_ell
  std::vector<std::vector<cplx>> b; // ell tables over hat{x}_j
  double correlation = 0;
  std::vector<int> m_star;
  double norm_pow = 0;              // canonical box norm power of f
  double c_achieved = 0;
};

// The constructive inverse pipeline: derivative expansion, per-derivative
// U^2 witnesses, positivity alignment, weight removal, variable shift,
// pigeonhole. ell = 2 exact, ell = 3 sampled.
BoxWitness box_inverse_witness(const GridFunction& f, uint64_t mc_samples = 200,
                               uint64_t seed = 0);

// M atoms c_i e(phi_i(hat x_ell) x_ell) b_{i,1}(hat x_1) ... b_{i,ell}(hat x_ell),
// tables stored over [-N..N]^{ell-1}. clip_bound > 0 radially clips the
// evaluated sum.
struct StructuredAtom {
  cplx c;
  std::vector<double> phi;
  std::vector<std::vector<cplx>> b;  // ell tables
};

struct StructuredFunction {
  int ell = 0;
  int N = 0;
  double clip_bound = 0;  // 0 = none
  std::vector<StructuredAtom> atoms;

  double M() const;
  cplx eval(const std::vector<int>& x) const;
  GridFunction to_grid(int N_target) const;
  static StructuredFunction zero(int ell, int N);
};

// E_{x in [+-N]^ell} f(x) conj(psi(x))
cplx correlate_structured(const GridFunction& f, const StructuredFunction& psi);

struct RegularityOutput {
  StructuredFunction f_str;
  GridFunction f_str_grid;  // f_str evaluated on the grid (clipped)
  GridFunction f_sml;
  GridFunction f_unif;
  int M = 0;
  double sml_l2 = 0;
  double unif_norm_pow = 0;
  double unif_threshold_pow = 0;
  bool converged = false;
  int rounds = 0;
};

// Energy-increment decomposition f = f_str + f_sml + f_unif against the
// canonical box norm with uniformity threshold N^ell / F(M).
RegularityOutput regularity_decompose(const GridFunction& f, double eps,
                                      const std::function<double(int)>& growth,
                                      int max_rounds = 64);
double default_growth(int M);  // 2^10 (M+1)^3

}  // namespace lab
