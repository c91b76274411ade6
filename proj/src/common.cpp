#include "lab/common.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace lab {

using boost::multiprecision::cpp_int;

namespace {
uint64_t g_budget = 4'000'000'000ull;
int g_workers = 1;

unsigned __int128 low128(const cpp_int& x) {
  cpp_int m = x & ((cpp_int(1) << 128) - 1);
  unsigned __int128 r = 0;
  for (int i = 0; i < 2; ++i) {
    r |= static_cast<unsigned __int128>(static_cast<uint64_t>((m >> (64 * i)) & 0xffffffffffffffffull))
         << (64 * i);
  }
  return r;
}

cpp_int isqrt_floor(const cpp_int& n) {
  if (n < 0) throw ValidationError("isqrt of negative value");
  return boost::multiprecision::sqrt(n);
}
}  // namespace

uint64_t op_budget() { return g_budget; }
void set_op_budget(uint64_t ops) { g_budget = ops; }

void charge_budget(uint64_t estimated_ops, const char* what) {
  if (estimated_ops > g_budget)
    throw BudgetError(std::string(what) + ": estimated cost " + std::to_string(estimated_ops) +
                      " ops exceeds budget " + std::to_string(g_budget));
}

int global_workers() { return g_workers; }
void set_global_workers(int w) { g_workers = w < 1 ? 1 : w; }

Frac128 Frac128::from_rational(long long p, unsigned long long q) {
  if (q == 0) throw ValidationError("Frac128: zero denominator");
  bool neg = p < 0;
  cpp_int num = neg ? cpp_int(-(p + 1)) + 1 : cpp_int(p);
  num %= q;
  cpp_int scaled = (num << 128) / q;
  Frac128 f{low128(scaled)};
  if (neg && f.v != 0) f.v = static_cast<unsigned __int128>(0) - f.v;
  return f;
}

Frac128 Frac128::from_decimal(const std::string& text) {
  // exact: digits / 10^k scaled to 2^128
  std::string s = text;
  bool neg = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    neg = s[0] == '-';
    s.erase(0, 1);
  }
  auto dot = s.find('.');
  std::string ip = dot == std::string::npos ? s : s.substr(0, dot);
  std::string fp = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (ip.empty() && fp.empty()) throw ValidationError("Frac128: empty decimal '" + text + "'");
  for (char c : ip + fp)
    if (!isdigit(static_cast<unsigned char>(c)))
      throw ValidationError("Frac128: bad decimal '" + text + "'");
  cpp_int num = 0, den = 1;
  for (char c : fp) {
    num = num * 10 + (c - '0');
    den *= 10;
  }
  cpp_int scaled = (num << 128) / den;
  Frac128 f{low128(scaled)};
  if (neg && f.v != 0) f.v = static_cast<unsigned __int128>(0) - f.v;
  return f;
}

Frac128 Frac128::sqrt2_minus_1() {
  // floor(sqrt(2)*2^128) - 2^128
  cpp_int r = isqrt_floor(cpp_int(2) << 256);
  r -= cpp_int(1) << 128;
  return Frac128{low128(r)};
}

Frac128 Frac128::parse(const std::string& text) {
  if (text == "sqrt2m1") return sqrt2_minus_1();
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    long long p = std::stoll(text.substr(0, slash));
    unsigned long long q = std::stoull(text.substr(slash + 1));
    return from_rational(p, q);
  }
  return from_decimal(text);
}

Frac128 Frac128::mul_u128(unsigned __int128 n) const {
  // low 128 bits of the 256-bit product n*v
  uint64_t a0 = static_cast<uint64_t>(n), a1 = static_cast<uint64_t>(n >> 64);
  uint64_t b0 = static_cast<uint64_t>(v), b1 = static_cast<uint64_t>(v >> 64);
  unsigned __int128 lo = static_cast<unsigned __int128>(a0) * b0;
  unsigned __int128 mid = static_cast<unsigned __int128>(a0) * b1 +
                          static_cast<unsigned __int128>(a1) * b0;
  return Frac128{static_cast<unsigned __int128>(lo + (mid << 64))};
}

Frac128 Frac128::mul_i64(long long n) const {
  if (n >= 0) return mul_u128(static_cast<unsigned __int128>(n));
  Frac128 p = mul_u128(static_cast<unsigned __int128>(-(n + 1)) + 1);
  return Frac128{static_cast<unsigned __int128>(0) - p.v};
}

}  // namespace lab
