#include "lab/corners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lab {

PlaneSet PlaneSet::empty(int q) {
  if (q < 1) throw ValidationError("plane set: q must be >= 1");
  PlaneSet L;
  L.q = q;
  L.membership.assign(static_cast<size_t>(q) * q, 0);
  return L;
}

PlaneSet PlaneSet::full(int q) {
  PlaneSet L = empty(q);
  std::fill(L.membership.begin(), L.membership.end(), 1);
  return L;
}

PlaneSet PlaneSet::random_density(int q, double density, Rng& rng) {
  PlaneSet L = empty(q);
  for (auto& b : L.membership) b = rng.next_unit() < density ? 1 : 0;
  return L;
}

long long PlaneSet::count() const {
  long long c = 0;
  for (uint8_t b : membership) c += b;
  return c;
}

double triple_density(const FiniteSystem& sys, const std::vector<uint8_t>& A,
                      const BigInt& a_value) {
  if (static_cast<int>(A.size()) != sys.m)
    throw ValidationError("triple_density: indicator size mismatch");
  if (sys.gens() < 2) throw ValidationError("triple_density: two generators required");
  // reduce the shift modulo each generator's order
  auto power_of = [&](int j) {
    long long P = perm_order(sys.maps[j]);
    BigInt r = a_value % P;
    if (r < 0) r += P;
    return perm_pow(sys.maps[j], static_cast<long long>(r));
  };
  std::vector<int> t1 = power_of(0), t2 = power_of(1);
  KahanSum acc;
  for (int x = 0; x < sys.m; ++x)
    if (A[x] && A[t1[x]] && A[t2[x]]) acc.add(sys.weights[x]);
  return acc.value();
}

long long corner_count(const PlaneSet& L, const std::array<long long, 2>& v1,
                       const std::array<long long, 2>& v2, long long shift) {
  int q = L.q;
  auto red = [&](long long a) { return static_cast<int>(((a % q) + q) % q); };
  int d1x = red(v1[0] * shift), d1y = red(v1[1] * shift);
  int d2x = red(v2[0] * shift), d2y = red(v2[1] * shift);
  long long c = 0;
  for (int y = 0; y < q; ++y)
    for (int x = 0; x < q; ++x)
      if (L.membership[x + q * y] && L.membership[(x + d1x) % q + q * ((y + d1y) % q)] &&
          L.membership[(x + d2x) % q + q * ((y + d2y) % q)])
        ++c;
  return c;
}

namespace {
// rows of the membership table as bit rows, cyclically shifted by (dx, dy)
std::vector<uint64_t> shifted_bitplane(const PlaneSet& L, int dx, int dy, int words_per_row) {
  int q = L.q;
  std::vector<uint64_t> rows(static_cast<size_t>(q) * words_per_row, 0);
  for (int y = 0; y < q; ++y) {
    int sy = (y + dy) % q;
    for (int x = 0; x < q; ++x) {
      int sx = (x + dx) % q;
      if (L.membership[sx + q * sy]) rows[y * words_per_row + (x >> 6)] |= 1ull << (x & 63);
    }
  }
  return rows;
}
}  // namespace

long long corner_count_fast(const PlaneSet& L, const std::array<long long, 2>& v1,
                            const std::array<long long, 2>& v2, long long shift) {
  int q = L.q;
  auto red = [&](long long a) { return static_cast<int>(((a % q) + q) % q); };
  int words = (q + 63) / 64;
  auto base = shifted_bitplane(L, 0, 0, words);
  auto b1 = shifted_bitplane(L, red(v1[0] * shift), red(v1[1] * shift), words);
  auto b2 = shifted_bitplane(L, red(v2[0] * shift), red(v2[1] * shift), words);
  long long c = 0;
  for (size_t i = 0; i < base.size(); ++i)
    c += __builtin_popcountll(base[i] & b1[i] & b2[i]);
  return c;
}

namespace {

CornerScanReport scan_common(const std::vector<double>& density_by_residue, long long period,
                             double base_density, const SequenceSpec& s, uint64_t N, double eps) {
  if (!(eps > 0 && eps < 1)) throw ValidationError("popular_scan: eps in (0,1)");
  CornerScanReport rep;
  rep.base_density = base_density;
  rep.threshold = std::pow(base_density, 4.0) - eps;
  rep.records.reserve(N);
  for (uint64_t n = 1; n <= N; ++n) {
    long long r = sequence_eval_mod(s, n, period);
    double d = density_by_residue[r];
    rep.records.push_back({n, r, d});
    if (d >= rep.threshold) rep.good_set.push_back(n);
  }
  if (rep.good_set.empty()) {
    rep.max_gap = N;
    rep.lower_density_of_good_set = 0;
  } else {
    uint64_t prev = 0, gap = 0;
    for (uint64_t n : rep.good_set) {
      gap = std::max(gap, n - prev);
      prev = n;
    }
    rep.max_gap = gap;
    rep.lower_density_of_good_set =
        static_cast<double>(rep.good_set.size()) / static_cast<double>(N);
  }
  return rep;
}

}  // namespace

CornerScanReport popular_scan(const SystemTarget& target, const SequenceSpec& s, uint64_t N,
                              double eps) {
  const FiniteSystem& sys = *target.sys;
  long long P = std::lcm(perm_order(sys.maps[0]), perm_order(sys.maps[1]));
  if (P > 1'000'000) throw BudgetError("popular_scan: system period too large");
  std::vector<double> dens(P);
  for (long long r = 0; r < P; ++r) dens[r] = triple_density(sys, target.A, BigInt(r));
  double base = 0;
  {
    KahanSum acc;
    for (int x = 0; x < sys.m; ++x)
      if (target.A[x]) acc.add(sys.weights[x]);
    base = acc.value();
  }
  return scan_common(dens, P, base, s, N, eps);
}

CornerScanReport popular_scan(const PlaneTarget& target, const SequenceSpec& s, uint64_t N,
                              double eps) {
  const PlaneSet& L = *target.L;
  long long q = L.q;
  std::vector<double> dens(q);
  double qq = static_cast<double>(q) * q;
  for (long long r = 0; r < q; ++r)
    dens[r] = static_cast<double>(corner_count_fast(L, target.v1, target.v2, r)) / qq;
  double base = static_cast<double>(L.count()) / qq;
  return scan_common(dens, q, base, s, N, eps);
}

std::vector<KhintchineRow> khintchine_report(const FiniteSystem& sys,
                                             const std::vector<uint8_t>& A,
                                             const SequenceSpec& s, uint64_t N,
                                             const std::vector<double>& eps_grid) {
  long long P = std::lcm(perm_order(sys.maps[0]), perm_order(sys.maps[1]));
  if (P > 1'000'000) throw BudgetError("khintchine_report: system period too large");
  std::vector<double> dens(P);
  for (long long r = 0; r < P; ++r) dens[r] = triple_density(sys, A, BigInt(r));
  KahanSum base_acc;
  for (int x = 0; x < sys.m; ++x)
    if (A[x]) base_acc.add(sys.weights[x]);
  double mu4 = std::pow(base_acc.value(), 4.0);

  std::vector<double> d_n(N);
  for (uint64_t n = 1; n <= N; ++n) d_n[n - 1] = dens[sequence_eval_mod(s, n, P)];

  std::vector<KhintchineRow> rows;
  for (double eps : eps_grid) {
    uint64_t good = 0;
    for (double d : d_n)
      if (d >= mu4 - eps) ++good;
    rows.push_back({eps, static_cast<double>(good) / static_cast<double>(N)});
  }
  for (size_t i = 1; i < rows.size(); ++i)
    if (rows[i - 1].eps <= rows[i].eps && rows[i - 1].fraction > rows[i].fraction + 1e-15)
      throw ValidationError("khintchine_report: fractions not monotone in eps");
  return rows;
}

}  // namespace lab
