#include "lab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lab/seminorms.hpp"

namespace lab {

namespace {

std::string classify_trend(const std::vector<IdentityRecord>& records) {
  if (records.size() < 2) return "flat";
  double first = records.front().abs_diff, last = records.back().abs_diff;
  double scale = std::max({first, last, 1e-15});
  if (last < first - 0.05 * scale) return "decreasing";
  if (last > first + 0.05 * scale) return "increasing";
  return "flat";
}

// integral f0 . T1^r f1 . T2^r f2 dmu for every residue r mod the joint
// period
std::vector<cplx> residue_table(const FiniteSystem& sys, const Observable& f0,
                                const Observable& f1, const Observable& f2, long long& period) {
  if (sys.gens() < 2) throw ValidationError("compare_averages: two generators required");
  long long P1 = perm_order(sys.maps[0]), P2 = perm_order(sys.maps[1]);
  period = std::lcm(P1, P2);
  if (period > 2'000'000) throw BudgetError("residue table: joint period too large");
  std::vector<cplx> val(period);
  std::vector<int> t1(sys.m), t2(sys.m);
  std::iota(t1.begin(), t1.end(), 0);
  std::iota(t2.begin(), t2.end(), 0);
  for (long long r = 0; r < period; ++r) {
    KahanCSum acc;
    for (int x = 0; x < sys.m; ++x)
      acc.add(sys.weights[x] * f0.values[x] * f1.values[t1[x]] * f2.values[t2[x]]);
    val[r] = acc.value();
    t1 = compose(sys.maps[0], t1);
    t2 = compose(sys.maps[1], t2);
  }
  return val;
}

cplx histogram_average(const std::vector<uint64_t>& hist, const std::vector<cplx>& val,
                       uint64_t total) {
  KahanCSum acc;
  for (size_t r = 0; r < hist.size(); ++r)
    if (hist[r]) acc.add(static_cast<double>(hist[r]) * val[r]);
  return acc.value() / static_cast<double>(total);
}

}  // namespace

IdentityReport compare_averages(const FiniteSystem& sys, const Observable& f0,
                                const Observable& f1, const Observable& f2,
                                const SequenceSpec& s, const std::vector<uint64_t>& Ns,
                                const std::optional<Windows>& windows) {
  long long P = 0;
  std::vector<cplx> val = residue_table(sys, f0, f1, f2, P);
  IdentityReport rep;

  if (windows) {
    for (const auto& [M, N] : *windows) {
      if (N <= M) throw ValidationError("compare_averages: empty window");
      std::vector<uint64_t> ha(P, 0), hi(P, 0);
      for (uint64_t n = M; n < N; ++n) {
        ++ha[sequence_eval_mod(s, n, P)];
        ++hi[n % P];
      }
      uint64_t len = N - M;
      IdentityRecord rec;
      rec.N = N;
      rec.avg_a = histogram_average(ha, val, len);
      rec.avg_id = histogram_average(hi, val, len);
      rec.abs_diff = std::abs(rec.avg_a - rec.avg_id);
      rep.records.push_back(rec);
    }
  } else {
    std::vector<uint64_t> ladder = Ns;
    std::sort(ladder.begin(), ladder.end());
    uint64_t maxN = ladder.empty() ? 0 : ladder.back();
    using Hist = std::vector<uint64_t>;
    // per-chunk residue histograms merge exactly; checkpoints replayed
    // from cumulative counts
    std::vector<Hist> checkpoints;
    Hist ha(P, 0), hi(P, 0);
    size_t next = 0;
    for (uint64_t n = 1; n <= maxN; ++n) {
      ++ha[sequence_eval_mod(s, n, P)];
      ++hi[n % P];
      while (next < ladder.size() && ladder[next] == n) {
        IdentityRecord rec;
        rec.N = n;
        rec.avg_a = histogram_average(ha, val, n);
        rec.avg_id = histogram_average(hi, val, n);
        rec.abs_diff = std::abs(rec.avg_a - rec.avg_id);
        rep.records.push_back(rec);
        ++next;
      }
    }
  }
  rep.trend = classify_trend(rep.records);
  rep.final_diff = rep.records.empty() ? 0.0 : rep.records.back().abs_diff;
  return rep;
}

std::vector<std::pair<int, IdentityReport>> compare_factorial(
    const FiniteSystem& sys, const Observable& f0, const Observable& f1, const Observable& f2,
    const PolynomialZ& p, const std::vector<int>& ks, uint64_t N) {
  long long P = 0;
  std::vector<cplx> val = residue_table(sys, f0, f1, f2, P);
  std::vector<std::pair<int, IdentityReport>> out;
  for (int k : ks) {
    SequenceSpec scheme = SequenceSpec::factorial_scheme(p, k);
    long long kf = static_cast<long long>(scheme.k_factorial % P);
    std::vector<uint64_t> ha(P, 0), hb(P, 0);
    for (uint64_t n = 1; n <= N; ++n) {
      ++ha[sequence_eval_mod(scheme, n, P)];
      long long lin = kf == 0 ? 0 : static_cast<long long>(
                                        (static_cast<__int128>(kf) * (n % P)) % P);
      ++hb[lin];
    }
    IdentityReport rep;
    IdentityRecord rec;
    rec.N = N;
    rec.avg_a = histogram_average(ha, val, N);
    rec.avg_id = histogram_average(hb, val, N);
    rec.abs_diff = std::abs(rec.avg_a - rec.avg_id);
    rep.records.push_back(rec);
    rep.trend = "flat";
    rep.final_diff = rec.abs_diff;
    out.emplace_back(k, rep);
  }
  return out;
}

std::pair<double, double> linear_control_check(const FiniteSystem& sys, const Observable& f0,
                                               const Observable& f1, const Observable& f2) {
  if (sys.gens() != 2) throw ValidationError("linear_control_check: exactly two generators");
  for (const Observable* f : {&f0, &f1, &f2})
    if (f->sup_bound > 1.0 + 1e-9)
      throw ValidationError("linear_control_check: observables must be 1-bounded");
  long long P = 0;
  std::vector<cplx> val = residue_table(sys, f0, f1, f2, P);
  KahanCSum acc;
  for (long long r = 0; r < P; ++r) acc.add(val[r]);
  double lhs = std::abs(acc.value() / static_cast<double>(P));

  int g = sys.gens();
  auto word = [&](std::initializer_list<std::pair<int, int>> factors) {
    TransformationWord w;
    w.exponents.assign(g, 0);
    for (auto [j, e] : factors) w.exponents[j] += e;
    return w;
  };
  TransformationWord T1 = word({{0, 1}});
  TransformationWord T2 = word({{1, 1}});
  TransformationWord T2T1inv = word({{1, 1}, {0, -1}});
  double s0 = box_seminorm(sys, f0, SeminormSpec{{T1, T2}});
  double s1 = box_seminorm(sys, f1, SeminormSpec{{T1, T2T1inv}});
  double s2 = box_seminorm(sys, f2, SeminormSpec{{T2T1inv, T2}});
  return {lhs, std::min({s0, s1, s2})};
}

WeylReport weyl_sum(const SequenceSpec& s, Frac128 beta, const std::vector<uint64_t>& Ns) {
  WeylReport rep;
  rep.beta = beta;
  std::vector<uint64_t> ladder = Ns;
  std::sort(ladder.begin(), ladder.end());
  uint64_t maxN = ladder.empty() ? 0 : ladder.back();
  KahanCSum acc;
  size_t next = 0;
  BigInt limit = BigInt(1) << 63;
  for (uint64_t n = 1; n <= maxN; ++n) {
    BigInt a = sequence_eval(s, n);
    if (a >= limit || -a >= limit)
      throw PrecisionError("weyl_sum: |a(n)| exceeds the certified 2^63 range");
    long long av = static_cast<long long>(a);
    acc.add(e(beta.mul_i64(av).to_double()));
    while (next < ladder.size() && ladder[next] == n) {
      rep.magnitudes.emplace_back(n, std::abs(acc.value()) / static_cast<double>(n));
      ++next;
    }
  }
  // trend across the ladder
  if (rep.magnitudes.empty()) {
    rep.classification = "inconclusive";
    return rep;
  }
  double first = rep.magnitudes.front().second, last = rep.magnitudes.back().second;
  double prev = rep.magnitudes.size() >= 2 ? rep.magnitudes[rep.magnitudes.size() - 2].second
                                           : first;
  if (last < 0.05 && last <= first + 1e-12) {
    rep.classification = "tends_to_zero";
  } else if (last >= 0.1 && std::abs(last - prev) <= 0.05 * std::max(last, prev)) {
    rep.classification = "tends_to_positive";
    rep.limit_estimate = last;
  } else {
    rep.classification = "inconclusive";
  }
  return rep;
}

TrigPoly TrigPoly::parse(const std::string& text) {
  TrigPoly F;
  std::string term;
  auto flush = [&](const std::string& t) {
    if (t.empty()) return;
    std::istringstream in(t);
    double re, im;
    int kx, ky;
    if (!(in >> re >> im >> kx >> ky))
      throw ValidationError("trig poly: expected 're im kx ky', got '" + t + "'");
    F.terms.push_back({{re, im}, kx, ky});
  };
  for (char c : text) {
    if (c == ';') {
      flush(term);
      term.clear();
    } else {
      term.push_back(c);
    }
  }
  flush(term);
  if (F.terms.empty()) throw ValidationError("trig poly: no terms");
  return F;
}

cplx TrigPoly::eval(double x, double y) const {
  KahanCSum acc;
  for (const auto& t : terms) acc.add(t.c * e(t.kx * x + t.ky * y));
  return acc.value();
}

IdentityReport nil_orbit_average(const SkewProductSystem& skew, const TrigPoly& F,
                                 const SequenceSpec& s, const std::vector<uint64_t>& Ns) {
  IdentityReport rep;
  std::vector<uint64_t> ladder = Ns;
  std::sort(ladder.begin(), ladder.end());
  uint64_t maxN = ladder.empty() ? 0 : ladder.back();
  KahanCSum acc_a, acc_id;
  size_t next = 0;
  for (uint64_t n = 1; n <= maxN; ++n) {
    BigInt a = sequence_eval(s, n);
    if (a > 10'000'000'000'000ll || a < -10'000'000'000'000ll)
      throw PrecisionError("nil_orbit_average: a(n) exceeds the skew orbit range");
    auto [xa, ya] = skew.orbit_point(static_cast<long long>(a));
    auto [xi, yi] = skew.orbit_point(static_cast<long long>(n));
    acc_a.add(F.eval(xa, ya));
    acc_id.add(F.eval(xi, yi));
    while (next < ladder.size() && ladder[next] == n) {
      IdentityRecord rec;
      rec.N = n;
      rec.avg_a = acc_a.value() / static_cast<double>(n);
      rec.avg_id = acc_id.value() / static_cast<double>(n);
      rec.abs_diff = std::abs(rec.avg_a - rec.avg_id);
      rep.records.push_back(rec);
      ++next;
    }
  }
  rep.trend = classify_trend(rep.records);
  rep.final_diff = rep.records.empty() ? 0.0 : rep.records.back().abs_diff;
  return rep;
}

}  // namespace lab
