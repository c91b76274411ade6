#pragma once

// Test-side brute-force oracles, independent of the library's
// restructured evaluation paths.

#include <cmath>
#include <complex>
#include <vector>

#include "lab/finitary.hpp"
#include "lab/seminorms.hpp"
#include "lab/systems.hpp"

namespace oracle {

using lab::cplx;

// literal inductive recursion for ||f||^{2^s}: base integral, then
// E_{h in [0, P_s)} of the derivative's power
inline cplx naive_box_pow(const lab::FiniteSystem& sys, const lab::Observable& f,
                          const std::vector<lab::TransformationWord>& words) {
  if (words.empty()) return lab::integrate(sys, f);
  auto rest = words;
  lab::TransformationWord last = rest.back();
  rest.pop_back();
  long long P = lab::map_order(sys, last);
  cplx acc = 0;
  for (long long h = 0; h < P; ++h)
    acc += naive_box_pow(sys, lab::mult_derivative(sys, f, last, h), rest);
  return acc / static_cast<double>(P);
}

inline double naive_box_seminorm(const lab::FiniteSystem& sys, const lab::Observable& f,
                                 const std::vector<lab::TransformationWord>& words) {
  cplx pw = naive_box_pow(sys, f, words);
  double re = std::max(0.0, pw.real());
  return std::pow(re, 1.0 / static_cast<double>(1ull << words.size()));
}

// dual function by the full nested h-grid product
inline lab::Observable naive_dual(const lab::FiniteSystem& sys,
                                  const std::vector<lab::Observable>& fs,
                                  const std::vector<lab::TransformationWord>& words) {
  int s = static_cast<int>(words.size());
  std::vector<std::vector<std::vector<int>>> pow_tabs;
  std::vector<long long> periods;
  for (const auto& w : words) {
    std::vector<int> base = lab::word_to_map(sys, w);
    long long P = lab::perm_order(base);
    periods.push_back(P);
    std::vector<std::vector<int>> tab;
    std::vector<int> cur(sys.m);
    for (int x = 0; x < sys.m; ++x) cur[x] = x;
    for (long long h = 0; h < P; ++h) {
      tab.push_back(cur);
      cur = lab::compose(base, cur);
    }
    pow_tabs.push_back(std::move(tab));
  }
  uint64_t total = 1;
  for (long long P : periods) total *= static_cast<uint64_t>(P);
  std::vector<cplx> D(sys.m, 0.0);
  std::vector<long long> h(s);
  for (uint64_t it = 0; it < total; ++it) {
    uint64_t rem = it;
    for (int i = 0; i < s; ++i) {
      h[i] = static_cast<long long>(rem % periods[i]);
      rem /= periods[i];
    }
    for (int x = 0; x < sys.m; ++x) {
      cplx prod = 1.0;
      for (int mask = 1; mask < (1 << s); ++mask) {
        int y = x;
        for (int i = 0; i < s; ++i)
          if (mask & (1 << i)) y = pow_tabs[i][h[i]][y];
        cplx v = fs[mask - 1].values[y];
        prod *= (__builtin_popcount(static_cast<unsigned>(mask)) & 1) ? std::conj(v) : v;
      }
      D[x] += prod;
    }
  }
  for (auto& z : D) z /= static_cast<double>(total);
  return lab::Observable::from_values(std::move(D));
}

// grid box norm power via the raw h, h' nested loops
inline double grid_box_pow_hform(const lab::GridFunction& f, const lab::DirectionSet& dirs) {
  int s = dirs.s();
  std::vector<size_t> idx(2 * s, 0);
  double total = 0;
  std::vector<int> x(f.ell), y(f.ell);
  for (;;) {
    cplx term = 0;
    // sum over x of prod_eps C^{|eps|} f(x + sum_i (eps_i ? h'_i : h_i))
    int L = f.side();
    size_t cells = f.size();
    for (size_t ci = 0; ci < cells; ++ci) {
      size_t rem = ci;
      for (int i = 0; i < f.ell; ++i) {
        x[i] = static_cast<int>(rem % L) - f.N;
        rem /= L;
      }
      cplx prod = 1.0;
      for (int mask = 0; mask < (1 << s); ++mask) {
        y = x;
        for (int i = 0; i < s; ++i) {
          const auto& v = (mask & (1 << i)) ? dirs.sets[i][idx[2 * i + 1]]
                                            : dirs.sets[i][idx[2 * i]];
          for (int c = 0; c < f.ell; ++c) y[c] += v[c];
        }
        cplx val = f.at(y);
        prod *= (__builtin_popcount(static_cast<unsigned>(mask)) & 1) ? std::conj(val) : val;
        if (prod == cplx(0.0, 0.0)) break;
      }
      term += prod;
    }
    total += term.real();
    int i = 0;
    while (i < 2 * s && ++idx[i] == dirs.sets[i / 2].size()) idx[i++] = 0;
    if (i == 2 * s) break;
  }
  double den = 1;
  for (const auto& set : dirs.sets) den *= static_cast<double>(set.size()) * set.size();
  return total / den;
}

// grid box norm power via the difference-weight form, hand-rolled
inline double grid_box_pow_mform(const lab::GridFunction& f, const lab::DirectionSet& dirs) {
  int s = dirs.s();
  // per direction: enumerate differences with multiplicity by raw loops
  struct Diff {
    std::vector<int> d;
    long long count;
  };
  std::vector<std::vector<Diff>> diffs(s);
  for (int i = 0; i < s; ++i) {
    std::vector<Diff>& out = diffs[i];
    for (const auto& h : dirs.sets[i])
      for (const auto& hp : dirs.sets[i]) {
        std::vector<int> d(f.ell);
        for (int c = 0; c < f.ell; ++c) d[c] = hp[c] - h[c];
        bool found = false;
        for (auto& existing : out)
          if (existing.d == d) {
            ++existing.count;
            found = true;
            break;
          }
        if (!found) out.push_back({d, 1});
      }
  }
  std::vector<size_t> pos(s, 0);
  double num = 0;
  std::vector<int> x(f.ell), y(f.ell);
  for (;;) {
    long long cprod = 1;
    for (int i = 0; i < s; ++i) cprod *= diffs[i][pos[i]].count;
    cplx term = 0;
    int L = f.side();
    for (size_t ci = 0; ci < f.size(); ++ci) {
      size_t rem = ci;
      for (int i = 0; i < f.ell; ++i) {
        x[i] = static_cast<int>(rem % L) - f.N;
        rem /= L;
      }
      cplx prod = 1.0;
      for (int mask = 0; mask < (1 << s); ++mask) {
        y = x;
        for (int i = 0; i < s; ++i)
          if (mask & (1 << i))
            for (int c = 0; c < f.ell; ++c) y[c] += diffs[i][pos[i]].d[c];
        cplx val = f.at(y);
        prod *= (__builtin_popcount(static_cast<unsigned>(mask)) & 1) ? std::conj(val) : val;
        if (prod == cplx(0.0, 0.0)) break;
      }
      term += prod;
    }
    num += static_cast<double>(cprod) * term.real();
    int i = 0;
    while (i < s && ++pos[i] == diffs[i].size()) pos[i++] = 0;
    if (i == s) break;
  }
  double den = 1;
  for (const auto& set : dirs.sets) den *= static_cast<double>(set.size()) * set.size();
  return num / den;
}

// exact integer sqrt floor oracle for n^3
inline unsigned long long isqrt_n3(unsigned long long n) {
  unsigned __int128 x = static_cast<unsigned __int128>(n) * n * n;
  unsigned long long r = static_cast<unsigned long long>(std::sqrt(static_cast<double>(n)) * n);
  while (static_cast<unsigned __int128>(r) * r > x) --r;
  while (static_cast<unsigned __int128>(r + 1) * (r + 1) <= x) ++r;
  return r;
}

}  // namespace oracle
