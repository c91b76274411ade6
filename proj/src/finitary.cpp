#include "lab/finitary.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace lab {

// ---------------------------------------------------------------- GridFunction

GridFunction GridFunction::zeros(int ell, int N) {
  GridFunction f;
  f.ell = ell;
  f.N = N;
  size_t total = 1;
  for (int i = 0; i < ell; ++i) total *= static_cast<size_t>(2 * N + 1);
  f.values.assign(total, cplx(0.0, 0.0));
  return f;
}

size_t GridFunction::index(const std::vector<int>& x) const {
  size_t idx = 0, base = 1;
  int L = side();
  for (int i = 0; i < ell; ++i) {
    idx += static_cast<size_t>(x[i] + N) * base;
    base *= L;
  }
  return idx;
}

bool GridFunction::inside(const std::vector<int>& x) const {
  for (int i = 0; i < ell; ++i)
    if (x[i] < -N || x[i] > N) return false;
  return true;
}

cplx GridFunction::at(const std::vector<int>& x) const {
  if (!inside(x)) return {0.0, 0.0};
  return values[index(x)];
}

cplx& GridFunction::ref(const std::vector<int>& x) { return values[index(x)]; }

cplx GridFunction::at2(int x, int y) const {
  if (x < -N || x > N || y < -N || y > N) return {0.0, 0.0};
  return values[static_cast<size_t>(x + N) + static_cast<size_t>(side()) * (y + N)];
}

cplx& GridFunction::ref2(int x, int y) {
  return values[static_cast<size_t>(x + N) + static_cast<size_t>(side()) * (y + N)];
}

void GridFunction::refresh_sup() {
  double s = 0;
  for (const auto& z : values) s = std::max(s, std::abs(z));
  sup_bound = s;
}

double GridFunction::l2_mean() const {
  KahanSum acc;
  for (const auto& z : values) acc.add(std::norm(z));
  return std::sqrt(std::max(0.0, acc.value() / static_cast<double>(values.size())));
}

// ---------------------------------------------------------------- DirectionSet

DirectionSet DirectionSet::axis_segments(int ell, const std::vector<std::pair<int, int>>& dirs) {
  DirectionSet d;
  for (auto [axis, radius] : dirs) {
    if (axis < 1 || axis > ell) throw ValidationError("direction set: axis out of range");
    std::vector<std::vector<int>> set;
    for (int k = -radius; k <= radius; ++k) {
      std::vector<int> v(ell, 0);
      v[axis - 1] = k;
      set.push_back(std::move(v));
    }
    d.sets.push_back(std::move(set));
  }
  return d;
}

DirectionSet DirectionSet::parse(const std::string& text, int ell) {
  std::vector<std::pair<int, int>> dirs;
  std::string cur;
  auto flush = [&](const std::string& tok) {
    if (tok.empty()) return;
    auto colon = tok.find(':');
    if (tok[0] != 'e' || colon == std::string::npos)
      throw ValidationError("direction set: expected e<j>:<radius>, got '" + tok + "'");
    dirs.emplace_back(std::stoi(tok.substr(1, colon - 1)), std::stoi(tok.substr(colon + 1)));
  };
  for (char c : text) {
    if (c == ',') {
      flush(cur);
      cur.clear();
    } else if (!isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  flush(cur);
  return axis_segments(ell, dirs);
}

DirectionSet DirectionSet::canonical(int ell, int N) {
  std::vector<std::pair<int, int>> dirs;
  for (int j = 1; j <= ell; ++j) dirs.emplace_back(j, N);
  dirs.emplace_back(ell, N);
  return axis_segments(ell, dirs);
}

// --------------------------------------------------------------- grid box norm

namespace {

// difference multiset of a direction set entry: vector -> count over E x E
std::vector<std::pair<std::vector<int>, long long>> difference_counts(
    const std::vector<std::vector<int>>& set) {
  std::map<std::vector<int>, long long> counts;
  for (const auto& h : set)
    for (const auto& hp : set) {
      std::vector<int> d(h.size());
      for (size_t i = 0; i < h.size(); ++i) d[i] = hp[i] - h[i];
      ++counts[d];
    }
  return {counts.begin(), counts.end()};
}

// S_m = sum_x prod_{eps} C^{|eps|} f(x + eps . m)
cplx derivative_sum(const GridFunction& f, const std::vector<std::vector<int>>& m) {
  int s = static_cast<int>(m.size());
  int faces = 1 << s;
  std::vector<int> x(f.ell), y(f.ell);
  KahanCSum acc;
  size_t total = f.size();
  int L = f.side();
  for (size_t idx = 0; idx < total; ++idx) {
    size_t rem = idx;
    for (int i = 0; i < f.ell; ++i) {
      x[i] = static_cast<int>(rem % L) - f.N;
      rem /= L;
    }
    cplx prod = f.values[idx];
    if (prod == cplx(0.0, 0.0)) continue;
    bool dead = false;
    for (int mask = 1; mask < faces && !dead; ++mask) {
      y = x;
      for (int i = 0; i < s; ++i)
        if (mask & (1 << i))
          for (int c = 0; c < f.ell; ++c) y[c] += m[i][c];
      cplx v = f.at(y);
      if (v == cplx(0.0, 0.0)) {
        dead = true;
        break;
      }
      prod *= (__builtin_popcount(static_cast<unsigned>(mask)) & 1) ? std::conj(v) : v;
    }
    if (!dead) acc.add(prod);
  }
  return acc.value();
}

}  // namespace

GridNormResult grid_box_norm(const GridFunction& f, const DirectionSet& dirs,
                             uint64_t mc_samples, uint64_t seed) {
  int s = dirs.s();
  if (s < 1) throw ValidationError("grid_box_norm: empty direction set");
  GridNormResult res;
  double den = 1.0;
  for (const auto& set : dirs.sets) {
    if (set.empty()) throw ValidationError("grid_box_norm: empty direction entry");
    den *= static_cast<double>(set.size()) * static_cast<double>(set.size());
  }

  if (mc_samples == 0) {
    std::vector<std::vector<std::pair<std::vector<int>, long long>>> diffs;
    uint64_t cost = f.size() << s;
    for (const auto& set : dirs.sets) {
      diffs.push_back(difference_counts(set));
      cost *= diffs.back().size();
    }
    charge_budget(cost, "grid_box_norm exact sweep");
    // iterate the product of difference supports
    std::vector<size_t> pos(s, 0);
    KahanCSum num;
    std::vector<std::vector<int>> m(s);
    for (;;) {
      long long count_prod = 1;
      for (int i = 0; i < s; ++i) {
        m[i] = diffs[i][pos[i]].first;
        count_prod *= diffs[i][pos[i]].second;
      }
      num.add(static_cast<double>(count_prod) * derivative_sum(f, m));
      int i = 0;
      while (i < s && ++pos[i] == diffs[i].size()) pos[i++] = 0;
      if (i == s) break;
    }
    cplx total = num.value() / den;
    if (std::abs(total.imag()) > 1e-9 * std::max(1.0, std::abs(total.real())))
      throw ValidationError("grid_box_norm: imaginary residue " + std::to_string(total.imag()));
    if (total.real() < -1e-9)
      throw ValidationError("grid_box_norm: negative accumulation " +
                            std::to_string(total.real()));
    res.pow_value = std::max(0.0, total.real());
    res.value = std::pow(res.pow_value, 1.0 / static_cast<double>(1ull << s));
    return res;
  }

  // Monte Carlo over difference tuples sampled as h' - h
  Rng rng(seed, 0x67726964);  // "grid"
  KahanSum mean_acc, m2_acc;
  double mean = 0;
  std::vector<std::vector<int>> m(s);
  for (uint64_t it = 1; it <= mc_samples; ++it) {
    for (int i = 0; i < s; ++i) {
      const auto& set = dirs.sets[i];
      const auto& h = set[rng.next_below(set.size())];
      const auto& hp = set[rng.next_below(set.size())];
      m[i].assign(f.ell, 0);
      for (int c = 0; c < f.ell; ++c) m[i][c] = hp[c] - h[c];
    }
    double sample = derivative_sum(f, m).real();
    double delta = sample - mean;
    mean += delta / static_cast<double>(it);
    m2_acc.add(delta * (sample - mean));
  }
  res.monte_carlo = true;
  res.samples = mc_samples;
  res.pow_value = std::max(0.0, mean);
  res.std_error = mc_samples > 1
                      ? std::sqrt(std::max(0.0, m2_acc.value() /
                                                    (static_cast<double>(mc_samples) - 1)) /
                                  static_cast<double>(mc_samples))
                      : 0.0;
  res.value = std::pow(res.pow_value, 1.0 / static_cast<double>(1ull << s));
  return res;
}

// per-line weighted 1-d box norm^4 helper: counts are integers, one
// final division keeps +-1 inputs exact
static double line_box4_num(const std::vector<cplx>& line, int N) {
  int L = 2 * N + 1;
  KahanSum num;
  std::vector<cplx> u(L);
  for (int d2 = -2 * N; d2 <= 2 * N; ++d2) {
    long long c2 = L - std::abs(d2);
    if (c2 <= 0) continue;
    std::fill(u.begin(), u.end(), cplx(0.0, 0.0));
    for (int y = -N; y <= N; ++y) {
      int yp = y + d2;
      if (yp < -N || yp > N) continue;
      u[y + N] = line[y + N] * std::conj(line[yp + N]);
    }
    for (int d3 = -2 * N; d3 <= 2 * N; ++d3) {
      long long c3 = L - std::abs(d3);
      if (c3 <= 0) continue;
      KahanCSum ac;
      for (int y = -N; y <= N; ++y) {
        int yp = y + d3;
        if (yp < -N || yp > N) continue;
        ac.add(u[y + N] * std::conj(u[yp + N]));
      }
      num.add(static_cast<double>(c2) * static_cast<double>(c3) * ac.value().real());
    }
  }
  return num.value();
}

double canonical_box_norm_pow(const GridFunction& f) {
  if (f.ell != 2) throw ValidationError("canonical_box_norm_pow: ell = 2 only");
  int N = f.N, L = f.side();
  double den = std::pow(static_cast<double>(L) * L, 3.0);
  KahanSum num;
  std::vector<cplx> col(L);
  for (int m1 = -2 * N; m1 <= 2 * N; ++m1) {
    long long c1 = L - std::abs(m1);
    if (c1 <= 0) continue;
    // g(x,y) = f(x,y) conj f(x+m1, y); per column x the (e2,e2) norm
    KahanSum inner;
    for (int x = -N; x <= N; ++x) {
      int xp = x + m1;
      if (xp < -N || xp > N) continue;
      for (int y = -N; y <= N; ++y) col[y + N] = f.at2(x, y) * std::conj(f.at2(xp, y));
      inner.add(line_box4_num(col, N));
    }
    num.add(static_cast<double>(c1) * inner.value());
  }
  double pow_val = num.value() / den;
  if (pow_val < -1e-9)
    throw ValidationError("canonical_box_norm_pow: negative accumulation");
  return std::max(0.0, pow_val);
}

// --------------------------------------------------------------- U^2 witness

namespace {

struct LineWitness {
  double phi = 0;
  double psi = 0;
  double magnitude = 0;
};

// best cyclic frequency (group size Q = 4N+2) for one line
LineWitness line_witness(const std::vector<cplx>& line, int N) {
  int Q = 4 * N + 2;
  LineWitness best;
  cplx best_A = 0;
  for (int k = 0; k < Q; ++k) {
    KahanCSum acc;
    for (int x = -N; x <= N; ++x)
      acc.add(line[x + N] * e(static_cast<double>(k) * x / Q));
    cplx A = acc.value();
    if (std::abs(A) > best.magnitude) {
      best.magnitude = std::abs(A);
      best.phi = static_cast<double>(k) / Q;
      best_A = A;
    }
  }
  if (best.magnitude > 0) {
    double ang = std::atan2(best_A.imag(), best_A.real()) / kTwoPi;
    best.psi = ang <= 0 ? -ang : 1.0 - ang;
  }
  return best;
}

}  // namespace

U2Witness u2_inverse_witness(const GridFunction& f) {
  if (f.ell != 2) throw ValidationError("u2_inverse_witness: ell = 2 only");
  int N = f.N, L = f.side();
  U2Witness w;
  w.phi.assign(L, 0.0);
  w.psi.assign(L, 0.0);
  KahanSum corr;
  KahanSum norm_num;
  std::vector<cplx> row(L);
  for (int y = -N; y <= N; ++y) {
    for (int x = -N; x <= N; ++x) row[x + N] = f.at2(x, y);
    LineWitness lw = line_witness(row, N);
    w.phi[y + N] = lw.phi;
    w.psi[y + N] = lw.psi;
    corr.add(lw.magnitude);
    norm_num.add(line_box4_num(row, N));
  }
  w.correlation = corr.value();
  w.norm_pow = norm_num.value() / std::pow(static_cast<double>(L) * L, 2.0);
  w.delta = w.norm_pow / (static_cast<double>(N) * N);
  double scale = std::pow(std::max(w.delta, 0.0), 1.5) * N * N;
  w.c_achieved = scale > 0 ? w.correlation / scale : 0.0;
  return w;
}

// --------------------------------------------------------------- box witness

namespace {

// last-axis U^2 witness tables for a derivative grid (ell = 2): for each
// x a frequency/phase pair along y
struct LastAxisWitness {
  std::vector<double> phi, psi;  // indexed by x + N
};

LastAxisWitness u2_lastaxis(const GridFunction& g) {
  int N = g.N, L = g.side();
  LastAxisWitness w;
  w.phi.assign(L, 0.0);
  w.psi.assign(L, 0.0);
  std::vector<cplx> col(L);
  for (int x = -N; x <= N; ++x) {
    for (int y = -N; y <= N; ++y) col[y + N] = g.at2(x, y);
    LineWitness lw = line_witness(col, N);
    w.phi[x + N] = lw.phi;
    w.psi[x + N] = lw.psi;
  }
  return w;
}

BoxWitness box_witness_ell2(const GridFunction& f) {
  int N = f.N, L = f.side();
  // derivative tables Delta_{m e_1} f for every m in [-2N, 2N]
  std::vector<LastAxisWitness> tab(4 * N + 1);
  GridFunction g = GridFunction::zeros(2, N);
  for (int m = -2 * N; m <= 2 * N; ++m) {
    for (int x = -N; x <= N; ++x)
      for (int y = -N; y <= N; ++y) g.ref2(x, y) = f.at2(x, y) * std::conj(f.at2(x + m, y));
    tab[m + 2 * N] = u2_lastaxis(g);
  }
  // shifted correlation per pigeonhole candidate m'
  cplx best = 0;
  int best_m = 0;
  for (int mp = -N; mp <= N; ++mp) {
    KahanCSum acc;
    for (int x = -N; x <= N; ++x) {
      const LastAxisWitness& lw = tab[mp - x + 2 * N];
      double phi = lw.phi[x + N], psi = lw.psi[x + N];
      for (int y = -N; y <= N; ++y)
        acc.add(f.at2(x, y) * std::conj(f.at2(mp, y)) * e(phi * y + psi));
    }
    cplx v = acc.value();
    if (std::abs(v) > std::abs(best)) {
      best = v;
      best_m = mp;
    }
  }
  BoxWitness w;
  w.m_star = {best_m};
  w.correlation = std::abs(best);
  cplx rot = w.correlation > 0 ? std::conj(best) / w.correlation : cplx(1.0, 0.0);
  w.phi.assign(L, 0.0);
  w.b.assign(2, std::vector<cplx>(L, cplx(0.0, 0.0)));
  for (int x = -N; x <= N; ++x) {
    const LastAxisWitness& lw = tab[best_m - x + 2 * N];
    w.phi[x + N] = lw.phi[x + N];
    w.b[1][x + N] = e(lw.psi[x + N]) * rot;  // b_2(hat x_2) = b_2(x)
  }
  for (int y = -N; y <= N; ++y) w.b[0][y + N] = std::conj(f.at2(best_m, y));  // b_1(y)
  w.norm_pow = canonical_box_norm_pow(f);
  double delta = w.norm_pow / (static_cast<double>(N) * N);
  double scale = std::pow(std::max(delta, 0.0), 1.5) * N * N;
  w.c_achieved = scale > 0 ? w.correlation / scale : 0.0;
  return w;
}

BoxWitness box_witness_ell3(const GridFunction& f, uint64_t mc_samples, uint64_t seed) {
  int N = f.N, L = f.side();
  Rng rng(seed, 0x77626f78);  // "xbow"
  struct Sample {
    int m1, m2;
    std::vector<double> phi, psi;  // over (x1, x2)
  };
  std::map<std::pair<int, int>, Sample> samples;
  std::vector<cplx> col(L);
  for (uint64_t it = 0; it < mc_samples; ++it) {
    int m1 = static_cast<int>(rng.next_below(4 * N + 1)) - 2 * N;
    int m2 = static_cast<int>(rng.next_below(4 * N + 1)) - 2 * N;
    if (samples.count({m1, m2})) continue;
    Sample s;
    s.m1 = m1;
    s.m2 = m2;
    s.phi.assign(L * L, 0.0);
    s.psi.assign(L * L, 0.0);
    for (int x1 = -N; x1 <= N; ++x1)
      for (int x2 = -N; x2 <= N; ++x2) {
        for (int x3 = -N; x3 <= N; ++x3) {
          cplx v = f.at({x1, x2, x3}) * std::conj(f.at({x1 + m1, x2, x3})) *
                   std::conj(f.at({x1, x2 + m2, x3})) * f.at({x1 + m1, x2 + m2, x3});
          col[x3 + N] = v;
        }
        LineWitness lw = line_witness(col, N);
        s.phi[(x1 + N) + L * (x2 + N)] = lw.phi;
        s.psi[(x1 + N) + L * (x2 + N)] = lw.psi;
      }
    samples.insert({{m1, m2}, std::move(s)});
  }
  // accumulate shifted correlations over candidates m' = m + (x1, x2)
  std::map<std::pair<int, int>, cplx> corr;
  for (const auto& [key, s] : samples) {
    for (int x1 = -N; x1 <= N; ++x1) {
      int mp1 = s.m1 + x1;
      if (mp1 < -N || mp1 > N) continue;
      for (int x2 = -N; x2 <= N; ++x2) {
        int mp2 = s.m2 + x2;
        if (mp2 < -N || mp2 > N) continue;
        double phi = s.phi[(x1 + N) + L * (x2 + N)];
        double psi = s.psi[(x1 + N) + L * (x2 + N)];
        KahanCSum acc;
        for (int x3 = -N; x3 <= N; ++x3) {
          acc.add(f.at({x1, x2, x3}) * std::conj(f.at({mp1, x2, x3})) *
                  std::conj(f.at({x1, mp2, x3})) * f.at({mp1, mp2, x3}) * e(phi * x3 + psi));
        }
        corr[{mp1, mp2}] += acc.value();
      }
    }
  }
  std::pair<int, int> best_key{0, 0};
  cplx best = 0;
  for (const auto& [key, v] : corr)
    if (std::abs(v) > std::abs(best)) {
      best = v;
      best_key = key;
    }
  BoxWitness w;
  w.m_star = {best_key.first, best_key.second};
  w.correlation = std::abs(best);
  cplx rot = w.correlation > 0 ? std::conj(best) / w.correlation : cplx(1.0, 0.0);
  int T = L * L;
  w.phi.assign(T, 0.0);
  w.b.assign(3, std::vector<cplx>(T, cplx(0.0, 0.0)));
  auto [mp1, mp2] = best_key;
  // b_1(x2,x3), b_2(x1,x3), b_3(x1,x2); hat-index: first listed fastest
  for (int x2 = -N; x2 <= N; ++x2)
    for (int x3 = -N; x3 <= N; ++x3)
      w.b[0][(x2 + N) + L * (x3 + N)] =
          std::conj(f.at({mp1, x2, x3})) * f.at({mp1, mp2, x3});
  for (int x1 = -N; x1 <= N; ++x1)
    for (int x3 = -N; x3 <= N; ++x3)
      w.b[1][(x1 + N) + L * (x3 + N)] = std::conj(f.at({x1, mp2, x3}));
  for (int x1 = -N; x1 <= N; ++x1)
    for (int x2 = -N; x2 <= N; ++x2) {
      auto it = samples.find({mp1 - x1, mp2 - x2});
      if (it == samples.end()) continue;  // outside the sampled set: b_3 stays 0
      double phi = it->second.phi[(x1 + N) + L * (x2 + N)];
      double psi = it->second.psi[(x1 + N) + L * (x2 + N)];
      w.phi[(x1 + N) + L * (x2 + N)] = phi;
      w.b[2][(x1 + N) + L * (x2 + N)] = e(psi) * rot;
    }
  GridNormResult nr = grid_box_norm(f, DirectionSet::canonical(3, N), mc_samples, seed + 1);
  w.norm_pow = nr.pow_value;
  double delta = w.norm_pow / std::pow(static_cast<double>(N), 3.0);
  double scale = std::pow(std::max(delta, 0.0), 1.5) * std::pow(static_cast<double>(N), 3.0);
  w.c_achieved = scale > 0 ? w.correlation / scale : 0.0;
  return w;
}

}  // namespace

BoxWitness box_inverse_witness(const GridFunction& f, uint64_t mc_samples, uint64_t seed) {
  if (f.ell == 2) return box_witness_ell2(f);
  if (f.ell == 3) return box_witness_ell3(f, mc_samples, seed);
  throw ValidationError("box_inverse_witness: ell must be 2 (exact) or 3 (sampled)");
}

// ---------------------------------------------------------- structured functions

double StructuredFunction::M() const {
  double maxc = 0;
  for (const auto& a : atoms) maxc = std::max(maxc, std::abs(a.c));
  return std::max(static_cast<double>(atoms.size()), std::ceil(maxc));
}

StructuredFunction StructuredFunction::zero(int ell, int N) {
  StructuredFunction s;
  s.ell = ell;
  s.N = N;
  return s;
}

namespace {
// index of hat{x}_j (x with coordinate j removed) in a table over
// [-N..N]^{ell-1}, first remaining coordinate fastest
size_t hat_index(const std::vector<int>& x, int drop, int N, int L) {
  size_t idx = 0, base = 1;
  for (size_t i = 0; i < x.size(); ++i) {
    if (static_cast<int>(i) == drop) continue;
    idx += static_cast<size_t>(x[i] + N) * base;
    base *= L;
  }
  return idx;
}
}  // namespace

cplx StructuredFunction::eval(const std::vector<int>& x) const {
  for (int i = 0; i < ell; ++i)
    if (x[i] < -N || x[i] > N) return {0.0, 0.0};
  int L = 2 * N + 1;
  KahanCSum acc;
  for (const auto& a : atoms) {
    cplx term = a.c * e(a.phi[hat_index(x, ell - 1, N, L)] * x[ell - 1]);
    for (int j = 0; j < ell; ++j) term *= a.b[j][hat_index(x, j, N, L)];
    acc.add(term);
  }
  cplx v = acc.value();
  if (clip_bound > 0) {
    double m = std::abs(v);
    if (m > clip_bound) v *= clip_bound / m;
  }
  return v;
}

GridFunction StructuredFunction::to_grid(int N_target) const {
  GridFunction g = GridFunction::zeros(ell, N_target);
  std::vector<int> x(ell);
  int L = 2 * N_target + 1;
  for (size_t idx = 0; idx < g.size(); ++idx) {
    size_t rem = idx;
    for (int i = 0; i < ell; ++i) {
      x[i] = static_cast<int>(rem % L) - N_target;
      rem /= L;
    }
    g.values[idx] = eval(x);
  }
  g.refresh_sup();
  return g;
}

cplx correlate_structured(const GridFunction& f, const StructuredFunction& psi) {
  KahanCSum acc;
  std::vector<int> x(f.ell);
  int L = f.side();
  for (size_t idx = 0; idx < f.size(); ++idx) {
    size_t rem = idx;
    for (int i = 0; i < f.ell; ++i) {
      x[i] = static_cast<int>(rem % L) - f.N;
      rem /= L;
    }
    acc.add(f.values[idx] * std::conj(psi.eval(x)));
  }
  return acc.value() / static_cast<double>(f.size());
}

// ------------------------------------------------------------ regularity lemma

namespace {

// Gaussian elimination with partial pivoting for small complex systems
std::vector<cplx> solve_complex(std::vector<std::vector<cplx>> A, std::vector<cplx> b) {
  int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    std::swap(b[col], b[piv]);
    if (std::abs(A[col][col]) < 1e-14)
      throw ValidationError("regularity: singular projection system");
    for (int r = col + 1; r < n; ++r) {
      cplx factor = A[r][col] / A[col][col];
      for (int c = col; c < n; ++c) A[r][c] -= factor * A[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<cplx> x(n);
  for (int r = n - 1; r >= 0; --r) {
    cplx acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= A[r][c] * x[c];
    x[r] = acc / A[r][r];
  }
  return x;
}

// third part of an exact double-precision decomposition t = a + b + c,
// summed left to right; nudges c by ulps to absorb rounding
double exact_third(double t, double a, double b) {
  double s = a + b;
  double c = t - s;
  for (int i = 0; i < 200; ++i) {
    double r = s + c;
    if (r == t) return c;
    c = std::nextafter(c, r < t ? c + std::abs(t - r) + 1.0 : c - std::abs(t - r) - 1.0);
  }
  throw PrecisionError("regularity: exact reconstruction fixup failed");
}

}  // namespace

double default_growth(int M) { return 1024.0 * std::pow(static_cast<double>(M) + 1.0, 3.0); }

RegularityOutput regularity_decompose(const GridFunction& f, double eps,
                                      const std::function<double(int)>& growth,
                                      int max_rounds) {
  if (f.ell != 2) throw ValidationError("regularity_decompose: ell = 2 only");
  if (!(eps > 0 && eps < 1)) throw ValidationError("regularity_decompose: eps in (0,1)");
  int N = f.N;
  double nl = std::pow(static_cast<double>(N), static_cast<double>(f.ell));

  RegularityOutput out;
  StructuredFunction span = StructuredFunction::zero(f.ell, f.N);
  std::vector<GridFunction> atom_grids;
  std::vector<cplx> coeffs;
  GridFunction p = GridFunction::zeros(f.ell, f.N);
  GridFunction g = f;

  for (int round = 0;; ++round) {
    out.rounds = round;
    out.M = static_cast<int>(span.atoms.size());
    double norm_pow = canonical_box_norm_pow(g);
    double thr = nl / growth(out.M);
    out.unif_norm_pow = norm_pow;
    out.unif_threshold_pow = thr;
    if (norm_pow <= thr) {
      out.converged = true;
      break;
    }
    if (round >= max_rounds || out.M >= max_rounds) break;  // cap: partial certificates
    BoxWitness w = box_inverse_witness(g);
    StructuredAtom atom;
    atom.c = 1.0;
    atom.phi = w.phi;
    atom.b = w.b;
    span.atoms.push_back(atom);
    {
      StructuredFunction single = StructuredFunction::zero(f.ell, f.N);
      single.atoms.push_back(atom);
      atom_grids.push_back(single.to_grid(f.N));
    }
    int M = static_cast<int>(span.atoms.size());
    // least squares projection of f onto the atom span
    std::vector<std::vector<cplx>> G(M, std::vector<cplx>(M));
    std::vector<cplx> rhs(M);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        KahanCSum acc;
        for (size_t idx = 0; idx < f.size(); ++idx)
          acc.add(atom_grids[j].values[idx] * std::conj(atom_grids[i].values[idx]));
        G[i][j] = acc.value();
        if (i == j) G[i][j] += 1e-9 * std::abs(G[i][j]) + 1e-12;
      }
      KahanCSum acc;
      for (size_t idx = 0; idx < f.size(); ++idx)
        acc.add(f.values[idx] * std::conj(atom_grids[i].values[idx]));
      rhs[i] = acc.value();
    }
    coeffs = solve_complex(G, rhs);
    for (int i = 0; i < M; ++i) span.atoms[i].c = coeffs[i];
    for (size_t idx = 0; idx < f.size(); ++idx) {
      KahanCSum acc;
      for (int i = 0; i < M; ++i) acc.add(coeffs[i] * atom_grids[i].values[idx]);
      p.values[idx] = acc.value();
    }
    for (size_t idx = 0; idx < f.size(); ++idx) g.values[idx] = f.values[idx] - p.values[idx];
  }

  // clip the projection to sup <= 4, then split exactly
  span.clip_bound = 4.0;
  out.f_str = span;
  out.f_str_grid = GridFunction::zeros(f.ell, f.N);
  out.f_sml = GridFunction::zeros(f.ell, f.N);
  out.f_unif = GridFunction::zeros(f.ell, f.N);
  for (size_t idx = 0; idx < f.size(); ++idx) {
    cplx pv = p.values[idx];
    double mag = std::abs(pv);
    cplx clipped = mag > 4.0 ? pv * (4.0 / mag) : pv;
    out.f_str_grid.values[idx] = clipped;
    out.f_sml.values[idx] = pv - clipped;
    double cr = exact_third(f.values[idx].real(), clipped.real(), out.f_sml.values[idx].real());
    double ci = exact_third(f.values[idx].imag(), clipped.imag(), out.f_sml.values[idx].imag());
    out.f_unif.values[idx] = {cr, ci};
  }
  out.f_str_grid.refresh_sup();
  out.f_sml.refresh_sup();
  out.f_unif.refresh_sup();
  out.sml_l2 = out.f_sml.l2_mean();
  // the certificate norm is on the stored uniform part
  out.unif_norm_pow = canonical_box_norm_pow(out.f_unif);
  return out;
}

}  // namespace lab
