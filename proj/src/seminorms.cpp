#include "lab/seminorms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace lab {

SeminormSpec SeminormSpec::parse(const std::string& text, int ngens) {
  SeminormSpec spec;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      spec.words.push_back(TransformationWord::parse(cur, ngens));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) spec.words.push_back(TransformationWord::parse(cur, ngens));
  if (spec.words.empty()) throw ValidationError("seminorm spec: no words");
  if (spec.s() > 6) throw ValidationError("seminorm spec: length s > 6");
  return spec;
}

Observable mult_derivative(const FiniteSystem& sys, const Observable& f,
                           const TransformationWord& w, long long h) {
  std::vector<int> perm = perm_pow(word_to_map(sys, w), h);
  std::vector<cplx> v(sys.m);
  for (int x = 0; x < sys.m; ++x) v[x] = f.values[x] * std::conj(f.values[perm[x]]);
  return Observable::from_values(std::move(v));
}

namespace {

struct SpecMachine {
  // per word: power tables sigma^h for h in [0, P), plus the orbit
  // partition of the last word
  std::vector<std::vector<std::vector<int>>> powers;  // [i][h] -> perm
  std::vector<long long> periods;
  OrbitPartition last_orbits;
  int s;
  int m;

  SpecMachine(const FiniteSystem& sys, const std::vector<TransformationWord>& words) {
    s = static_cast<int>(words.size());
    m = sys.m;
    if (s < 1) throw ValidationError("seminorm: empty word list");
    uint64_t cost = 1;
    for (const auto& w : words) {
      std::vector<int> base = word_to_map(sys, w);
      long long P = perm_order(base);
      periods.push_back(P);
      std::vector<std::vector<int>> tab(P);
      std::vector<int> cur(m);
      std::iota(cur.begin(), cur.end(), 0);
      for (long long h = 0; h < P; ++h) {
        tab[h] = cur;
        cur = compose(base, cur);
      }
      powers.push_back(std::move(tab));
    }
    for (int i = 0; i + 1 < s; ++i) cost *= static_cast<uint64_t>(periods[i]);
    charge_budget(cost * static_cast<uint64_t>(m) * (1ull << s), "box seminorm sweep");
    // cycles of the last word's map (identity when its period is 1)
    last_orbits = OrbitPartition::of(periods[s - 1] > 1 ? powers[s - 1][1] : powers[s - 1][0]);
  }

  // W_h(x) = prod over eps' in {0,1}^{s-1} of C^{|eps'|} R^{eps' h} f_{pick(eps')}
  // pick returns the observable for a cube vertex; conjugation per |eps'|.
  template <class Pick>
  void cube_product(const std::vector<long long>& h, Pick pick, std::vector<cplx>& out,
                    int nbits) {
    std::fill(out.begin(), out.end(), cplx(1.0, 0.0));
    int faces = 1 << nbits;
    for (int mask = 0; mask < faces; ++mask) {
      const Observable* g = pick(mask);
      if (!g) continue;
      bool conj = __builtin_popcount(static_cast<unsigned>(mask)) & 1;
      // composed index map for this eps'
      for (int x = 0; x < m; ++x) {
        int y = x;
        for (int i = 0; i < nbits; ++i)
          if (mask & (1 << i)) y = powers[i][h[i]][y];
        out[x] *= conj ? std::conj(g->values[y]) : g->values[y];
      }
    }
  }

  // iterate over h in prod [0, P_i), i < s-1... full (s-1)-tuple sweep
  template <class Body>
  void sweep(Body body) {
    std::vector<long long> h(std::max(0, s - 1), 0);
    uint64_t total = 1;
    for (int i = 0; i + 1 < s; ++i) total *= static_cast<uint64_t>(periods[i]);
    for (uint64_t it = 0; it < total; ++it) {
      uint64_t rem = it;
      for (int i = 0; i + 1 < s; ++i) {
        h[i] = static_cast<long long>(rem % periods[i]);
        rem /= periods[i];
      }
      body(h);
    }
  }
};

}  // namespace

double box_seminorm_pow(const FiniteSystem& sys, const Observable& f, const SeminormSpec& spec) {
  SpecMachine mach(sys, spec.words);
  int s = mach.s;
  // ||f||^{2^s} = E_{h in prod [0,P_i), i<s} integral |E(W_h | I(R_s))|^2 dmu,
  // an exact rearrangement of the inductive full-period recursion.
  std::vector<cplx> W(sys.m);
  KahanSum acc;
  uint64_t count = 0;
  mach.sweep([&](const std::vector<long long>& h) {
    mach.cube_product(h, [&](int) { return &f; }, W, s - 1);
    // per-orbit mean of W against itself: sum_O (w_O/|O|) |sum_{x in O} W|^2
    KahanSum inner_acc;
    for (const auto& orb : mach.last_orbits.members) {
      KahanCSum zs;
      for (int x : orb) zs.add(W[x]);
      cplx z = zs.value();
      inner_acc.add(sys.weights[orb[0]] / static_cast<double>(orb.size()) * std::norm(z));
    }
    acc.add(inner_acc.value());
    ++count;
  });
  double pow_val = acc.value() / static_cast<double>(count);
  if (pow_val < -1e-9)
    throw ValidationError("box_seminorm: accumulated value " + std::to_string(pow_val) +
                          " below -1e-9");
  return std::max(0.0, pow_val);
}

double box_seminorm(const FiniteSystem& sys, const Observable& f, const SeminormSpec& spec) {
  double p = box_seminorm_pow(sys, f, spec);
  return std::pow(p, 1.0 / static_cast<double>(1ull << spec.s()));
}

Observable dual_function(const FiniteSystem& sys, const std::vector<Observable>& fs,
                         const SeminormSpec& spec) {
  int s = spec.s();
  if (static_cast<int>(fs.size()) != (1 << s) - 1)
    throw ValidationError("dual_function: expected 2^s - 1 observables");
  SpecMachine mach(sys, spec.words);
  int top = 1 << (s - 1);
  // D = E_{h'} A_{h'} . E(conj B_{h'} | I(R_s)) with
  // A = prod_{eps' != 0} C^{|eps'|} R^{eps' h'} f_{(eps',0)},
  // B = prod_{eps'} C^{|eps'|} R^{eps' h'} f_{(eps',1)}.
  std::vector<cplx> A(sys.m), B(sys.m);
  std::vector<KahanCSum> acc(sys.m);
  uint64_t count = 0;
  mach.sweep([&](const std::vector<long long>& h) {
    mach.cube_product(h, [&](int mask) { return mask == 0 ? nullptr : &fs[mask - 1]; }, A, s - 1);
    mach.cube_product(h, [&](int mask) { return &fs[(mask | top) - 1]; }, B, s - 1);
    Observable Bo = Observable::from_values(std::vector<cplx>(B.begin(), B.end()));
    Observable Bavg = orbit_average(Bo, mach.last_orbits);
    for (int x = 0; x < sys.m; ++x) acc[x].add(A[x] * std::conj(Bavg.values[x]));
    ++count;
  });
  std::vector<cplx> D(sys.m);
  for (int x = 0; x < sys.m; ++x) D[x] = acc[x].value() / static_cast<double>(count);
  return Observable::from_values(std::move(D));
}

Observable dual_function_same(const FiniteSystem& sys, const Observable& f,
                              const SeminormSpec& spec) {
  std::vector<Observable> fs((1 << spec.s()) - 1, f);
  return dual_function(sys, fs, spec);
}

std::pair<double, double> gcs_check(const FiniteSystem& sys, const std::vector<Observable>& fs,
                                    const SeminormSpec& spec) {
  int s = spec.s();
  if (static_cast<int>(fs.size()) != (1 << s))
    throw ValidationError("gcs_check: expected 2^s observables");
  SpecMachine mach(sys, spec.words);
  int top = 1 << (s - 1);
  std::vector<cplx> A(sys.m), B(sys.m);
  KahanCSum acc;
  uint64_t count = 0;
  mach.sweep([&](const std::vector<long long>& h) {
    mach.cube_product(h, [&](int mask) { return &fs[mask]; }, A, s - 1);
    mach.cube_product(h, [&](int mask) { return &fs[mask | top]; }, B, s - 1);
    Observable Bo = Observable::from_values(std::vector<cplx>(B.begin(), B.end()));
    Observable Bavg = orbit_average(Bo, mach.last_orbits);
    KahanCSum term;
    for (int x = 0; x < sys.m; ++x)
      term.add(sys.weights[x] * A[x] * std::conj(Bavg.values[x]));
    acc.add(term.value());
    ++count;
  });
  double lhs = std::abs(acc.value() / static_cast<double>(count));
  double rhs = 1.0;
  for (int mask = 0; mask < (1 << s); ++mask) rhs *= box_seminorm(sys, fs[mask], spec);
  return {lhs, rhs};
}

// ----------------------------------------------------------------- cube system

namespace {
struct TupleKey {
  const std::vector<int>* t;
  bool operator<(const TupleKey& o) const { return *t < *o.t; }
};

int find_tuple(const std::map<std::vector<int>, int>& index, const std::vector<int>& t,
               const char* what) {
  auto it = index.find(t);
  if (it == index.end())
    throw ValidationError(std::string(what) + ": image tuple not in the cube support");
  return it->second;
}
}  // namespace

FiniteSystem CubeSystem::as_system(const std::vector<std::vector<int>>& chosen) const {
  return FiniteSystem::make(weights, chosen);
}

Observable CubeSystem::vertex_pull(const Observable& f, int p) const {
  std::vector<cplx> v(support.size());
  for (size_t i = 0; i < support.size(); ++i) v[i] = f.values[support[i][p]];
  return Observable::from_values(std::move(v));
}

std::vector<double> CubeSystem::coordinate0_marginal() const {
  std::vector<double> marg(base.m, 0.0);
  for (size_t i = 0; i < support.size(); ++i) marg[support[i][0]] += weights[i];
  return marg;
}

CubeSystem cubic_measure(const FiniteSystem& sys, const std::vector<TransformationWord>& words) {
  int s = static_cast<int>(words.size());
  if (s < 1 || s > 3) throw ValidationError("cubic_measure: s must be in [1, 3]");
  CubeSystem cube;
  cube.base = sys;
  cube.s = s;
  // level 0: singleton tuples with the base measure
  std::vector<std::vector<int>> support;
  std::vector<double> weights;
  for (int x = 0; x < sys.m; ++x) {
    support.push_back({x});
    weights.push_back(sys.weights[x]);
  }
  std::vector<std::vector<int>> perms;  // generator maps of the base
  for (int i = 0; i < s; ++i) perms.push_back(word_to_map(sys, words[i]));

  for (int level = 1; level <= s; ++level) {
    // diagonal action of R_level on the current support
    const std::vector<int>& R = perms[level - 1];
    std::map<std::vector<int>, int> index;
    for (size_t i = 0; i < support.size(); ++i) index[support[i]] = static_cast<int>(i);
    std::vector<int> diag(support.size());
    for (size_t i = 0; i < support.size(); ++i) {
      std::vector<int> img = support[i];
      for (auto& x : img) x = R[x];
      diag[i] = find_tuple(index, img, "cubic_measure diagonal");
    }
    OrbitPartition orbits = OrbitPartition::of(diag);
    // relative product over the orbit partition
    std::vector<std::vector<int>> nsupport;
    std::vector<double> nweights;
    uint64_t est = 0;
    for (const auto& orb : orbits.members) est += orb.size() * orb.size();
    charge_budget(est, "cubic_measure support");
    if (est > 200'000) throw BudgetError("cubic_measure: support growth guard");
    int half = 1 << (level - 1);
    for (const auto& orb : orbits.members) {
      double worb = 0;
      for (int i : orb) worb += weights[i];
      for (int i : orb) {
        for (int j : orb) {
          std::vector<int> t(half * 2);
          for (int p = 0; p < half; ++p) {
            t[p] = support[i][p];
            t[p + half] = support[j][p];
          }
          nsupport.push_back(std::move(t));
          nweights.push_back(weights[i] * weights[j] / worb);
        }
      }
    }
    support = std::move(nsupport);
    weights = std::move(nweights);
  }
  cube.support = std::move(support);
  cube.weights = std::move(weights);

  // side transformations R_i^*: apply R_i at vertices with eps_i = 0
  std::map<std::vector<int>, int> index;
  for (size_t i = 0; i < cube.support.size(); ++i) index[cube.support[i]] = static_cast<int>(i);
  int dim = cube.dim();
  for (int i = 0; i < s; ++i) {
    std::vector<int> perm(cube.support.size());
    for (size_t t = 0; t < cube.support.size(); ++t) {
      std::vector<int> img = cube.support[t];
      for (int p = 0; p < dim; ++p)
        if (!(p & (1 << i))) img[p] = perms[i][img[p]];
      perm[t] = find_tuple(index, img, "cubic_measure side map");
    }
    cube.side_maps.push_back(std::move(perm));
  }
  return cube;
}

namespace {
// integer inverse of the s x s exponent block; requires |det| = 1
std::vector<std::vector<long long>> unimodular_inverse(
    const std::vector<std::vector<long long>>& B) {
  int s = static_cast<int>(B.size());
  if (s > 3) throw ValidationError("magic_extension: s > 3 not supported");
  auto det2 = [](long long a, long long b, long long c, long long d) { return a * d - b * c; };
  long long det = 0;
  std::vector<std::vector<long long>> adj(s, std::vector<long long>(s));
  if (s == 1) {
    det = B[0][0];
    adj[0][0] = 1;
  } else if (s == 2) {
    det = det2(B[0][0], B[0][1], B[1][0], B[1][1]);
    adj = {{B[1][1], -B[0][1]}, {-B[1][0], B[0][0]}};
  } else {
    det = B[0][0] * det2(B[1][1], B[1][2], B[2][1], B[2][2]) -
          B[0][1] * det2(B[1][0], B[1][2], B[2][0], B[2][2]) +
          B[0][2] * det2(B[1][0], B[1][1], B[2][0], B[2][1]);
    // cyclic-index adjugate: the row/column rotation absorbs the
    // cofactor signs
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        int r0 = (i + 1) % 3, r1 = (i + 2) % 3, c0 = (j + 1) % 3, c1 = (j + 2) % 3;
        adj[j][i] = det2(B[r0][c0], B[r0][c1], B[r1][c0], B[r1][c1]);
      }
  }
  if (det != 1 && det != -1)
    throw ValidationError("magic_extension: generation hypothesis fails (word block det " +
                          std::to_string(det) + " is not +-1)");
  for (auto& row : adj)
    for (auto& v : row) v *= det;  // det = +-1, so adj/det = adj*det
  return adj;
}
}  // namespace

CubeSystem magic_extension(const FiniteSystem& sys,
                           const std::vector<TransformationWord>& words) {
  int s = static_cast<int>(words.size());
  int ell = sys.gens();
  if (s > ell) throw ValidationError("magic_extension: more words than generators");
  std::vector<std::vector<long long>> B(s, std::vector<long long>(s));
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < ell; ++j) {
      if (j < s)
        B[i][j] = words[i].exponents[j];
      else if (words[i].exponents[j] != 0)
        throw ValidationError(
            "magic_extension: words must involve only the first s generators");
    }
  }
  std::vector<std::vector<long long>> C = unimodular_inverse(B);  // T_j = prod R_i^{C[j][i]}
  CubeSystem cube = cubic_measure(sys, words);
  int dim = cube.dim();
  // lifted generators: word decomposition for j < s, diagonal beyond
  for (int j = 0; j < ell; ++j) {
    std::vector<int> perm(cube.support.size());
    if (j < s) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = 0; i < s; ++i) {
        if (C[j][i] == 0) continue;
        perm = compose(perm_pow(cube.side_maps[i], C[j][i]), perm);
      }
    } else {
      std::map<std::vector<int>, int> index;
      for (size_t t = 0; t < cube.support.size(); ++t)
        index[cube.support[t]] = static_cast<int>(t);
      const std::vector<int>& T = sys.maps[j];
      for (size_t t = 0; t < cube.support.size(); ++t) {
        std::vector<int> img = cube.support[t];
        for (int p = 0; p < dim; ++p) img[p] = T[img[p]];
        perm[t] = find_tuple(index, img, "magic_extension diagonal lift");
      }
    }
    cube.lifted.push_back(std::move(perm));
  }
  return cube;
}

double eigenfunction_residual(const FiniteSystem& sys, const Observable& chi,
                              const TransformationWord& w) {
  for (const auto& z : chi.values) {
    double a = std::abs(z);
    if (a > 1e-9 && std::abs(a - 1.0) > 1e-9)
      throw ValidationError("eigenfunction_residual: |chi| must be 0 or 1");
  }
  std::vector<int> T = word_to_map(sys, w);
  long long P = perm_order(T);
  charge_budget(static_cast<uint64_t>(P) * P * sys.m, "eigenfunction residual sweep");
  // power table
  std::vector<std::vector<int>> pow_tab(P);
  std::vector<int> cur(sys.m);
  std::iota(cur.begin(), cur.end(), 0);
  for (long long h = 0; h < P; ++h) {
    pow_tab[h] = cur;
    cur = compose(T, cur);
  }
  std::vector<KahanCSum> acc(sys.m);
  for (long long h1 = 0; h1 < P; ++h1) {
    for (long long h2 = 0; h2 < P; ++h2) {
      const auto& p1 = pow_tab[h1];
      const auto& p2 = pow_tab[h2];
      const auto& p12 = pow_tab[(h1 + h2) % P];
      for (int x = 0; x < sys.m; ++x) {
        acc[x].add(std::conj(chi.values[p12[x]]) * chi.values[p1[x]] * chi.values[p2[x]]);
      }
    }
  }
  double denom = static_cast<double>(P) * static_cast<double>(P);
  KahanSum dist;
  for (int x = 0; x < sys.m; ++x) {
    cplx diff = chi.values[x] - acc[x].value() / denom;
    dist.add(sys.weights[x] * std::norm(diff));
  }
  return std::sqrt(std::max(0.0, dist.value()));
}

}  // namespace lab
