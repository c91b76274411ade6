#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lab {

using cplx = std::complex<double>;

// Error taxonomy. The CLI maps ValidationError (and subclasses) to exit
// code 2, BudgetError/PrecisionError to exit code 3.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoSolutionError : ValidationError {
  using ValidationError::ValidationError;
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// e(t) = exp(2*pi*i*t)
inline cplx e(double t) { return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)}; }

// Neumaier compensated accumulator; canonical insertion order is the
// caller's responsibility.
struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

struct KahanCSum {
  KahanSum re, im;
  void add(cplx z) {
    re.add(z.real());
    im.add(z.imag());
  }
  cplx value() const { return {re.value(), im.value()}; }
};

// Counter-based deterministic RNG: a splitmix64 finalizer applied to
// (key, counter). Substreams are cheap: Rng(seed, stream_tag).
struct Rng {
  uint64_t key;
  uint64_t ctr = 0;

  explicit Rng(uint64_t seed, uint64_t stream = 0) {
    key = mix(seed + 0x9e3779b97f4a7c15ull * (stream + 1));
  }
  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  uint64_t next_u64() { return mix(key ^ (0xd1342543de82ef95ull * ++ctr)); }
  // uniform in [0,1)
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }
  double next_pm1() { return (next_u64() & 1) ? 1.0 : -1.0; }
  cplx next_unimodular() { return e(next_unit()); }
  // uniform integer in [0, n)
  uint64_t next_below(uint64_t n) { return next_u64() % n; }
};

// Global operation budget for the combinatorially explosive kernels.
uint64_t op_budget();
void set_op_budget(uint64_t ops);
// Throws BudgetError when the estimated cost exceeds the budget.
void charge_budget(uint64_t estimated_ops, const char* what);

// Fixed-point fraction in [0,1) with 128 fractional bits; addition and
// integer multiples wrap mod 1 exactly (two's complement wraparound).
struct Frac128 {
  unsigned __int128 v = 0;

  static Frac128 parse(const std::string& text);  // decimal, p/q, or sqrt2m1
  static Frac128 from_rational(long long p, unsigned long long q);
  static Frac128 from_decimal(const std::string& digits);
  static Frac128 sqrt2_minus_1();

  Frac128 operator+(Frac128 o) const { return Frac128{static_cast<unsigned __int128>(v + o.v)}; }
  // frac(n * this) for unsigned n
  Frac128 mul_u128(unsigned __int128 n) const;
  // frac(n * this) for signed n
  Frac128 mul_i64(long long n) const;
  double to_double() const {
    return static_cast<double>(static_cast<uint64_t>(v >> 64)) * 0x1.0p-64 +
           static_cast<double>(static_cast<uint64_t>(v)) * 0x1.0p-128;
  }
};

// Deterministic chunked reduction: chunk boundaries depend only on
// (n, chunk), never on the worker count, and partial results are
// combined in chunk order, so outputs are byte-identical for any
// number of workers.
template <class T, class PerChunk, class Combine>
T chunked_reduce(uint64_t n, uint64_t chunk, int workers, T init, PerChunk per_chunk,
                 Combine combine) {
  if (n == 0) return init;
  if (chunk == 0) chunk = 1;
  uint64_t nchunks = (n + chunk - 1) / chunk;
  std::vector<T> parts(nchunks, init);
  if (workers <= 1 || nchunks == 1) {
    for (uint64_t i = 0; i < nchunks; ++i)
      parts[i] = per_chunk(i * chunk, std::min(n, (i + 1) * chunk));
  } else {
    std::vector<std::thread> pool;
    std::atomic<uint64_t> next{0};
    int use = std::min<uint64_t>(workers, nchunks);
    for (int w = 0; w < use; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          uint64_t i = next.fetch_add(1);
          if (i >= nchunks) return;
          parts[i] = per_chunk(i * chunk, std::min(n, (i + 1) * chunk));
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  T acc = init;
  for (uint64_t i = 0; i < nchunks; ++i) acc = combine(acc, parts[i]);
  return acc;
}

int global_workers();
void set_global_workers(int w);

}  // namespace lab
