#include "lab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lab {

TransformationWord TransformationWord::parse(const std::string& text, int ngens) {
  TransformationWord w;
  w.exponents.assign(ngens, 0);
  std::string cur;
  auto flush = [&](const std::string& tok) {
    if (tok.empty()) return;
    if (tok[0] != 'T') throw ValidationError("word: expected T<j>[^e], got '" + tok + "'");
    auto caret = tok.find('^');
    int j = std::stoi(tok.substr(1, caret == std::string::npos ? std::string::npos : caret - 1));
    int e = caret == std::string::npos ? 1 : std::stoi(tok.substr(caret + 1));
    if (j < 1 || j > ngens)
      throw ValidationError("word: generator index " + std::to_string(j) + " out of range");
    w.exponents[j - 1] += e;
  };
  for (char c : text) {
    if (c == '*') {
      flush(cur);
      cur.clear();
    } else if (!isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  flush(cur);
  return w;
}

FiniteSystem FiniteSystem::make(std::vector<double> weights, std::vector<std::vector<int>> maps) {
  FiniteSystem sys;
  sys.m = static_cast<int>(weights.size());
  if (sys.m < 1) throw ValidationError("system: empty point set");
  double tot = 0;
  for (double w : weights) {
    if (w < 0) throw ValidationError("system: negative weight");
    tot += w;
  }
  if (std::abs(tot - 1.0) > 1e-12) throw ValidationError("system: weights must sum to 1");
  for (const auto& p : maps) {
    if (static_cast<int>(p.size()) != sys.m) throw ValidationError("system: map size mismatch");
    std::vector<char> seen(sys.m, 0);
    for (int x : p) {
      if (x < 0 || x >= sys.m || seen[x]) throw ValidationError("system: map is not a bijection");
      seen[x] = 1;
    }
  }
  for (const auto& p : maps)
    for (int x = 0; x < sys.m; ++x)
      if (std::abs(weights[p[x]] - weights[x]) > 1e-12)
        throw ValidationError("system: map does not preserve the measure");
  for (size_t i = 0; i < maps.size(); ++i)
    for (size_t j = i + 1; j < maps.size(); ++j)
      for (int x = 0; x < sys.m; ++x)
        if (maps[i][maps[j][x]] != maps[j][maps[i][x]])
          throw ValidationError("system: generators " + std::to_string(i + 1) + "," +
                                std::to_string(j + 1) + " do not commute");
  sys.weights = std::move(weights);
  sys.maps = std::move(maps);
  return sys;
}

FiniteSystem make_product_rotation(int q, int d,
                                   const std::vector<std::vector<long long>>& shifts) {
  if (q < 1 || d < 1) throw ValidationError("product_rotation: q, d must be >= 1");
  long long m = 1;
  for (int i = 0; i < d; ++i) {
    m *= q;
    if (m > 2'000'000) throw ValidationError("product_rotation: point count too large");
  }
  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  std::vector<std::vector<int>> maps;
  for (const auto& sh : shifts) {
    if (static_cast<int>(sh.size()) != d)
      throw ValidationError("product_rotation: shift dimension mismatch");
    std::vector<int> perm(m);
    for (long long x = 0; x < m; ++x) {
      long long y = 0, base = 1, rem = x;
      for (int i = 0; i < d; ++i) {
        long long xi = rem % q;
        rem /= q;
        long long yi = ((xi + sh[i]) % q + q) % q;
        y += yi * base;
        base *= q;
      }
      perm[x] = static_cast<int>(y);
    }
    maps.push_back(std::move(perm));
  }
  return FiniteSystem::make(std::move(w), std::move(maps));
}

Observable Observable::from_values(std::vector<cplx> v) {
  Observable f;
  f.values = std::move(v);
  double s = 0;
  for (const auto& z : f.values) s = std::max(s, std::abs(z));
  f.sup_bound = s;
  return f;
}

Observable Observable::constant(int m, cplx c) { return from_values(std::vector<cplx>(m, c)); }

Observable Observable::indicator(int m, const std::vector<int>& points) {
  std::vector<cplx> v(m, 0.0);
  for (int p : points) {
    if (p < 0 || p >= m) throw ValidationError("indicator: point out of range");
    v[p] = 1.0;
  }
  return from_values(std::move(v));
}

Observable Observable::random_unimodular(int m, Rng& rng) {
  std::vector<cplx> v(m);
  for (auto& z : v) z = rng.next_unimodular();
  return from_values(std::move(v));
}

Observable Observable::random_pm1(int m, Rng& rng) {
  std::vector<cplx> v(m);
  for (auto& z : v) z = rng.next_pm1();
  return from_values(std::move(v));
}

Observable character_observable(int q, int d, const std::vector<long long>& freqs) {
  if (static_cast<int>(freqs.size()) != d)
    throw ValidationError("character: frequency dimension mismatch");
  long long m = 1;
  for (int i = 0; i < d; ++i) m *= q;
  std::vector<cplx> v(m);
  for (long long x = 0; x < m; ++x) {
    long long rem = x, dot = 0;
    for (int i = 0; i < d; ++i) {
      dot += (rem % q) * freqs[i];
      rem /= q;
    }
    v[x] = e(static_cast<double>(((dot % q) + q) % q) / q);
  }
  return Observable::from_values(std::move(v));
}

std::vector<int> compose(const std::vector<int>& f, const std::vector<int>& g) {
  std::vector<int> h(f.size());
  for (size_t x = 0; x < f.size(); ++x) h[x] = f[g[x]];
  return h;
}

std::vector<int> perm_inverse(const std::vector<int>& p) {
  std::vector<int> inv(p.size());
  for (size_t x = 0; x < p.size(); ++x) inv[p[x]] = static_cast<int>(x);
  return inv;
}

std::vector<int> perm_pow(const std::vector<int>& p, long long e) {
  int m = static_cast<int>(p.size());
  std::vector<int> out(m);
  std::vector<int> cycle;
  std::vector<char> seen(m, 0);
  for (int start = 0; start < m; ++start) {
    if (seen[start]) continue;
    cycle.clear();
    int x = start;
    while (!seen[x]) {
      seen[x] = 1;
      cycle.push_back(x);
      x = p[x];
    }
    long long len = static_cast<long long>(cycle.size());
    long long shift = ((e % len) + len) % len;
    for (long long i = 0; i < len; ++i)
      out[cycle[i]] = cycle[(i + shift) % len];
  }
  return out;
}

long long perm_order(const std::vector<int>& p) {
  int m = static_cast<int>(p.size());
  std::vector<char> seen(m, 0);
  long long ord = 1;
  for (int start = 0; start < m; ++start) {
    if (seen[start]) continue;
    long long len = 0;
    int x = start;
    while (!seen[x]) {
      seen[x] = 1;
      ++len;
      x = p[x];
    }
    ord = std::lcm(ord, len);
  }
  return ord;
}

std::vector<int> word_to_map(const FiniteSystem& sys, const TransformationWord& w) {
  if (static_cast<int>(w.exponents.size()) != sys.gens())
    throw ValidationError("word: exponent count does not match generator count");
  std::vector<int> acc(sys.m);
  std::iota(acc.begin(), acc.end(), 0);
  for (int j = 0; j < sys.gens(); ++j) {
    if (w.exponents[j] == 0) continue;
    acc = compose(perm_pow(sys.maps[j], w.exponents[j]), acc);
  }
  return acc;
}

long long map_order(const FiniteSystem& sys, const TransformationWord& w) {
  return perm_order(word_to_map(sys, w));
}

OrbitPartition OrbitPartition::of(const std::vector<int>& perm) {
  int m = static_cast<int>(perm.size());
  OrbitPartition part;
  part.orbit_of.assign(m, -1);
  for (int start = 0; start < m; ++start) {
    if (part.orbit_of[start] >= 0) continue;
    int id = static_cast<int>(part.members.size());
    part.members.emplace_back();
    int x = start;
    while (part.orbit_of[x] < 0) {
      part.orbit_of[x] = id;
      part.members[id].push_back(x);
      x = perm[x];
    }
  }
  return part;
}

OrbitPartition OrbitPartition::join(const OrbitPartition& a, const OrbitPartition& b) {
  int m = static_cast<int>(a.orbit_of.size());
  // union-find over the two partitions
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int x, int y) { parent[find(x)] = find(y); };
  for (const auto& orb : a.members)
    for (size_t i = 1; i < orb.size(); ++i) unite(orb[0], orb[i]);
  for (const auto& orb : b.members)
    for (size_t i = 1; i < orb.size(); ++i) unite(orb[0], orb[i]);
  OrbitPartition out;
  out.orbit_of.assign(m, -1);
  std::vector<int> id_of_root(m, -1);
  for (int x = 0; x < m; ++x) {
    int r = find(x);
    if (id_of_root[r] < 0) {
      id_of_root[r] = static_cast<int>(out.members.size());
      out.members.emplace_back();
    }
    out.orbit_of[x] = id_of_root[r];
    out.members[id_of_root[r]].push_back(x);
  }
  return out;
}

Observable orbit_average(const Observable& f, const OrbitPartition& part) {
  std::vector<cplx> out(f.values.size());
  for (const auto& orb : part.members) {
    KahanCSum acc;
    for (int x : orb) acc.add(f.values[x]);
    cplx mean = acc.value() / static_cast<double>(orb.size());
    for (int x : orb) out[x] = mean;
  }
  return Observable::from_values(std::move(out));
}

Observable conditional_expectation_invariant(const FiniteSystem& sys, const Observable& f,
                                             const TransformationWord& w) {
  return orbit_average(f, OrbitPartition::of(word_to_map(sys, w)));
}

cplx integrate(const FiniteSystem& sys, const Observable& f) {
  KahanCSum acc;
  for (int x = 0; x < sys.m; ++x) acc.add(sys.weights[x] * f.values[x]);
  return acc.value();
}

double l2_norm(const FiniteSystem& sys, const Observable& f) {
  KahanSum acc;
  for (int x = 0; x < sys.m; ++x) acc.add(sys.weights[x] * std::norm(f.values[x]));
  return std::sqrt(std::max(0.0, acc.value()));
}

cplx inner(const FiniteSystem& sys, const Observable& f, const Observable& g) {
  KahanCSum acc;
  for (int x = 0; x < sys.m; ++x) acc.add(sys.weights[x] * f.values[x] * std::conj(g.values[x]));
  return acc.value();
}

std::pair<double, double> SkewProductSystem::orbit_point(long long n) const {
  if (n > 10'000'000'000'000ll || n < -10'000'000'000'000ll)
    throw PrecisionError("skew orbit: |n| exceeds certified range 1e13");
  Frac128 x = x0 + alpha.mul_i64(n);
  unsigned __int128 n2 = static_cast<unsigned __int128>(n < 0 ? -n : n);
  n2 *= n2;
  Frac128 y = y0 + x0.mul_i64(2 * n) + alpha.mul_u128(n2);
  return {x.to_double(), y.to_double()};
}

std::pair<double, double> SkewProductSystem::step_once(std::pair<double, double> xy) const {
  double a = alpha.to_double();
  double x = xy.first, y = xy.second;
  double nx = x + a;
  nx -= std::floor(nx);
  double ny = y + 2 * x + a;
  ny -= std::floor(ny);
  return {nx, ny};
}

}  // namespace lab
