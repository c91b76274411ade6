#include "lab/sequences.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace lab {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using Float50 = boost::multiprecision::cpp_bin_float_50;

// ---------------------------------------------------------------- PolynomialZ

void PolynomialZ::trim() {
  while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
}

PolynomialZ PolynomialZ::parse(const std::string& text) {
  PolynomialZ p;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    try {
      size_t pos = 0;
      long long c = std::stoll(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      p.coeffs.push_back(c);
    } catch (const std::exception&) {
      throw ValidationError("polynomial: bad coefficient '" + tok + "'");
    }
  }
  p.trim();
  return p;
}

PolynomialZ PolynomialZ::derivative() const {
  PolynomialZ d;
  for (size_t i = 1; i < coeffs.size(); ++i)
    d.coeffs.push_back(coeffs[i] * static_cast<long long>(i));
  d.trim();
  return d;
}

std::string PolynomialZ::to_string() const {
  if (coeffs.empty()) return "0";
  std::ostringstream out;
  for (size_t i = 0; i < coeffs.size(); ++i) {
    if (i) out << ' ';
    out << coeffs[i];
  }
  return out.str();
}

BigInt poly_eval(const PolynomialZ& p, const BigInt& n) {
  BigInt acc = 0;
  for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * n + *it;
  return acc;
}

namespace {
long long mulmod_ll(long long a, long long b, long long q) {
  return static_cast<long long>(static_cast<__int128>(a) * b % q);
}
}  // namespace

long long poly_eval_mod(const PolynomialZ& p, long long n, long long q) {
  if (q < 1) throw ValidationError("poly_eval_mod: modulus must be >= 1");
  long long nn = ((n % q) + q) % q;
  long long acc = 0;
  for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) {
    acc = mulmod_ll(acc, nn, q);
    acc = ((acc + *it) % q + q) % q;
  }
  return acc;
}

// ------------------------------------------------------------------ HardyExpr

HardyExpr HardyExpr::parse(const std::string& text) {
  // terms separated by '+' or '-'; each term c*t^e[*log^k], pieces optional
  HardyExpr h;
  std::string s = text;
  std::vector<std::pair<int, std::string>> parts;  // (sign, term text)
  int sign = 1;
  std::string cur;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if ((c == '+' || c == '-') && !cur.empty() && cur.back() != '^' && cur.back() != 'e' &&
        cur.back() != 'E') {
      parts.emplace_back(sign, cur);
      sign = c == '-' ? -1 : 1;
      cur.clear();
    } else if (c == '-' && cur.empty() && parts.empty()) {
      sign = -sign;
    } else if (!isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.emplace_back(sign, cur);
  for (auto& [sg, term] : parts) {
    HardyTerm t;
    t.coeff = 1.0;
    t.coeff_text = "1";
    std::vector<std::string> factors;
    std::string f;
    for (char c : term) {
      if (c == '*') {
        factors.push_back(f);
        f.clear();
      } else
        f.push_back(c);
    }
    if (!f.empty()) factors.push_back(f);
    if (factors.empty()) throw ValidationError("hardy: empty term in '" + text + "'");
    for (const auto& fac : factors) {
      if (fac.rfind("t^", 0) == 0) {
        t.exponent = std::stod(fac.substr(2));
      } else if (fac == "t") {
        t.exponent = 1.0;
      } else if (fac.rfind("log^", 0) == 0) {
        t.log_power = std::stoi(fac.substr(4));
      } else if (fac == "log") {
        t.log_power = 1;
      } else {
        try {
          size_t pos = 0;
          t.coeff = std::stod(fac, &pos);
          if (pos != fac.size()) throw std::invalid_argument(fac);
          t.coeff_text = fac;
        } catch (const std::exception&) {
          throw ValidationError("hardy: bad factor '" + fac + "'");
        }
      }
    }
    if (sg < 0) {
      t.coeff = -t.coeff;
      t.coeff_text = "-" + t.coeff_text;
    }
    h.terms.push_back(t);
  }
  h.validate();
  return h;
}

void HardyExpr::validate() const {
  if (terms.empty()) throw ValidationError("hardy: at least one term required");
  for (const auto& t : terms) {
    if (!std::isfinite(t.exponent) || t.exponent < 0)
      throw ValidationError("hardy: exponents must be finite and nonnegative");
    if (t.log_power < 0) throw ValidationError("hardy: log powers must be nonnegative");
  }
  // eventual monotonicity, checked numerically on [1, 1e4]
  auto val = [&](double x) {
    double v = 0;
    for (const auto& t : terms)
      v += t.coeff * std::pow(x, t.exponent) * std::pow(std::log(x), t.log_power);
    return v;
  };
  int last_violation = 0;
  double prev = val(1.0);
  for (int x = 2; x <= 10000; ++x) {
    double v = val(static_cast<double>(x));
    if (v < prev - 1e-9 * std::max(1.0, std::abs(prev))) last_violation = x;
    prev = v;
  }
  if (last_violation > 9000)
    throw ValidationError("hardy: expression not eventually monotone on [1, 1e4]");
}

std::string HardyExpr::to_string() const {
  std::ostringstream out;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (i) out << " + ";
    out << terms[i].coeff << "*t^" << terms[i].exponent;
    if (terms[i].log_power) out << "*log^" << terms[i].log_power;
  }
  return out.str();
}

// ------------------------------------------------------------------ integer roots

namespace {

// floor(X^{1/q}) for q in {2,3,4}, X < 2^126
unsigned __int128 iroot_u128(unsigned __int128 x, int q) {
  if (x == 0) return 0;
  long double est = powl(static_cast<long double>(x), 1.0L / q);
  unsigned __int128 r = static_cast<unsigned __int128>(est);
  auto pw = [&](unsigned __int128 b) {
    unsigned __int128 acc = 1;
    for (int i = 0; i < q; ++i) acc *= b;
    return acc;
  };
  while (r > 0 && pw(r) > x) --r;
  while (pw(r + 1) <= x) ++r;
  return r;
}

cpp_int iroot_big(const cpp_int& x, int q) {
  if (x < 0) throw ValidationError("iroot of negative value");
  if (x == 0) return 0;
  if (q == 2) return boost::multiprecision::sqrt(x);
  unsigned bits = msb(x) + 1;
  cpp_int r = cpp_int(1) << (bits / q + 1);
  // Newton for floor roots
  for (;;) {
    cpp_int rq1 = boost::multiprecision::pow(r, q - 1);
    cpp_int next = ((q - 1) * r + x / rq1) / q;
    if (next >= r) break;
    r = next;
  }
  while (boost::multiprecision::pow(r, q) > x) --r;
  while (boost::multiprecision::pow(r + 1, q) <= x) ++r;
  return r;
}

cpp_rational rational_from_decimal(const std::string& text) {
  std::string s = text;
  bool neg = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    neg = s[0] == '-';
    s.erase(0, 1);
  }
  // scientific notation falls back to exact double conversion
  if (s.find('e') != std::string::npos || s.find('E') != std::string::npos) {
    cpp_rational r(std::stod(text));
    return r;
  }
  auto dot = s.find('.');
  std::string ip = dot == std::string::npos ? s : s.substr(0, dot);
  std::string fp = dot == std::string::npos ? "" : s.substr(dot + 1);
  cpp_int num = 0, den = 1;
  for (char c : ip) num = num * 10 + (c - '0');
  for (char c : fp) {
    num = num * 10 + (c - '0');
    den *= 10;
  }
  cpp_rational r(num, den);
  return neg ? -r : r;
}

cpp_rational exact_coeff(const HardyTerm& t) {
  if (!t.coeff_text.empty()) {
    for (char c : t.coeff_text)
      if (!isdigit(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '+' &&
          c != 'e' && c != 'E')
        return cpp_rational(t.coeff);
    return rational_from_decimal(t.coeff_text);
  }
  return cpp_rational(t.coeff);  // doubles are exact rationals
}

BigInt floor_rational(const cpp_rational& r) {
  cpp_int num = numerator(r), den = denominator(r);
  cpp_int q = num / den;
  if (num % den != 0 && ((num < 0) != (den < 0))) --q;
  return q;
}

// smallest b in {1,2,3,4} with e*b integral (1e-9 window), or 0
int small_denominator(double e) {
  for (int b = 1; b <= 4; ++b) {
    double eb = e * b;
    if (std::abs(eb - std::llround(eb)) < 1e-9) return b;
  }
  return 0;
}

struct RootTerm {
  cpp_rational c;
  long long p;
  int q;
};

// value >= r, where value = A + c * X^{1/q} with X = n^p >= 0
bool value_ge(const cpp_rational& A, const RootTerm* root, const cpp_int& X,
              const cpp_rational& r) {
  if (!root) return A >= r;
  cpp_rational B = r - A;
  const cpp_rational& c = root->c;
  int q = root->q;
  auto rpow = [&](const cpp_rational& b) {
    cpp_rational acc = 1;
    for (int i = 0; i < q; ++i) acc *= b;
    return acc;
  };
  if (c >= 0) {
    if (B <= 0) return true;
    return rpow(c) * X >= rpow(B);
  }
  // c < 0: need |c| X^{1/q} <= -B
  cpp_rational nb = -B;
  if (nb < 0) return false;
  return rpow(-c) * X <= rpow(nb);
}

}  // namespace

BigInt hardy_eval(const HardyExpr& h, uint64_t n) {
  if (n < 1) throw ValidationError("hardy_eval: n must be >= 1");

  // fast path: a single unit-coefficient t^{p/q} term
  if (h.terms.size() == 1 && h.terms[0].log_power == 0) {
    const auto& t = h.terms[0];
    int q = small_denominator(t.exponent);
    if (q >= 2 && t.coeff == 1.0) {
      long long p = std::llround(t.exponent * q);
      if (p <= 4 && n < (1ull << 31)) {
        unsigned __int128 x = 1;
        for (int i = 0; i < p; ++i) x *= n;
        unsigned __int128 r = iroot_u128(x, q);
        return (BigInt(static_cast<uint64_t>(r >> 64)) << 64) | static_cast<uint64_t>(r);
      }
      cpp_int x = boost::multiprecision::pow(cpp_int(n), static_cast<unsigned>(p));
      return iroot_big(x, q);
    }
  }

  cpp_rational A = 0;
  std::optional<RootTerm> root;
  bool float_path = false;
  for (const auto& t : h.terms) {
    if (t.coeff == 0.0) continue;
    if (t.log_power > 0) {
      if (n == 1) continue;  // log 1 = 0, term exactly vanishes
      float_path = true;
      continue;
    }
    int q = small_denominator(t.exponent);
    if (q == 1) {
      long long p = std::llround(t.exponent);
      A += exact_coeff(t) * cpp_rational(boost::multiprecision::pow(cpp_int(n),
                                                                    static_cast<unsigned>(p)));
    } else if (q >= 2 && !root) {
      root = RootTerm{exact_coeff(t), std::llround(t.exponent * q), q};
    } else {
      float_path = true;
    }
  }

  if (!float_path) {
    if (!root) return floor_rational(A);
    cpp_int X = boost::multiprecision::pow(cpp_int(n), static_cast<unsigned>(root->p));
    // candidate floor from doubles, then exact adjustment
    double est = static_cast<double>(A) +
                 static_cast<double>(root->c) * std::pow(static_cast<double>(n),
                                                         static_cast<double>(root->p) / root->q);
    BigInt m(static_cast<long long>(std::floor(est)));
    while (!value_ge(A, &*root, X, cpp_rational(cpp_int(m)))) --m;
    while (value_ge(A, &*root, X, cpp_rational(cpp_int(m) + 1))) ++m;
    return m;
  }

  // certified extended-precision float path
  Float50 v = 0, abssum = 0;
  Float50 logn = log(Float50(n));
  for (const auto& t : h.terms) {
    if (t.coeff == 0.0) continue;
    if (t.log_power > 0 && n == 1) continue;
    Float50 term = t.coeff_text.empty() ? Float50(t.coeff) : Float50(t.coeff_text);
    term *= pow(Float50(n), Float50(t.exponent));
    for (int i = 0; i < t.log_power; ++i) term *= logn;
    v += term;
    abssum += abs(term);
  }
  Float50 err = (abssum + 1) * Float50("1e-40");
  Float50 lo = floor(v - err), hi = floor(v + err);
  if (lo != hi)
    throw PrecisionError("hardy_eval: cannot certify floor of " + h.to_string() + " at n=" +
                         std::to_string(n));
  return BigInt(cpp_int(lo));
}

// ---------------------------------------------------------------- SequenceSpec

BigInt factorial(int k) {
  if (k < 1) throw ValidationError("factorial: k must be >= 1");
  BigInt f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

SequenceSpec SequenceSpec::identity() {
  SequenceSpec s;
  s.kind = Kind::Identity;
  return s;
}

SequenceSpec SequenceSpec::polynomial(PolynomialZ p) {
  SequenceSpec s;
  s.kind = Kind::Polynomial;
  s.poly = std::move(p);
  return s;
}

SequenceSpec SequenceSpec::hardy_seq(HardyExpr h) {
  SequenceSpec s;
  s.kind = Kind::Hardy;
  s.hardy = std::move(h);
  return s;
}

SequenceSpec SequenceSpec::factorial_scheme(PolynomialZ base, int k, std::optional<uint64_t> nk) {
  SequenceSpec s;
  s.kind = Kind::Factorial;
  s.poly = std::move(base);
  s.k = k;
  s.k_factorial = factorial(k);
  s.n_k = nk ? *nk : find_nk(s.poly, k);
  if (poly_eval(s.poly, BigInt(s.n_k)) % s.k_factorial != 0)
    throw ValidationError("factorial scheme: k! does not divide base(n_k)");
  return s;
}

SequenceSpec SequenceSpec::parse(const std::string& text) {
  auto trimmed = text;
  auto strip = [](std::string& s) {
    while (!s.empty() && isspace(static_cast<unsigned char>(s.front()))) s.erase(0, 1);
    while (!s.empty() && isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  };
  strip(trimmed);
  if (trimmed == "id") return identity();
  if (trimmed.rfind("poly:", 0) == 0) return polynomial(PolynomialZ::parse(trimmed.substr(5)));
  if (trimmed.rfind("hardy:", 0) == 0) return hardy_seq(HardyExpr::parse(trimmed.substr(6)));
  if (trimmed.rfind("factorial:", 0) == 0) {
    std::string rest = trimmed.substr(10);
    auto bpos = rest.find("base=");
    auto kpos = rest.find("k=");
    if (bpos == std::string::npos || kpos == std::string::npos || kpos < bpos)
      throw ValidationError("factorial spec: expected 'factorial: base=<poly> k=<int>'");
    std::string base = rest.substr(bpos + 5, kpos - bpos - 5);
    int k = std::stoi(rest.substr(kpos + 2));
    return factorial_scheme(PolynomialZ::parse(base), k);
  }
  throw ValidationError("unrecognized sequence spec '" + text + "'");
}

std::string SequenceSpec::to_string() const {
  switch (kind) {
    case Kind::Identity: return "id";
    case Kind::Polynomial: return "poly: " + poly.to_string();
    case Kind::Hardy: return "hardy: " + hardy.to_string();
    case Kind::Factorial:
      return "factorial: base=" + poly.to_string() + " k=" + std::to_string(k) +
             " n_k=" + std::to_string(n_k);
  }
  return "?";
}

BigInt sequence_eval(const SequenceSpec& s, uint64_t n) {
  if (n < 1) throw ValidationError("sequence_eval: n must be >= 1");
  switch (s.kind) {
    case SequenceSpec::Kind::Identity: return BigInt(n);
    case SequenceSpec::Kind::Polynomial: return poly_eval(s.poly, BigInt(n));
    case SequenceSpec::Kind::Hardy: return hardy_eval(s.hardy, n);
    case SequenceSpec::Kind::Factorial:
      return poly_eval(s.poly, s.k_factorial * n + s.n_k);
  }
  throw ValidationError("sequence_eval: bad kind");
}

long long sequence_eval_mod(const SequenceSpec& s, uint64_t n, long long q) {
  if (q < 1) throw ValidationError("sequence_eval_mod: modulus must be >= 1");
  switch (s.kind) {
    case SequenceSpec::Kind::Identity: return static_cast<long long>(n % q);
    case SequenceSpec::Kind::Polynomial:
      return poly_eval_mod(s.poly, static_cast<long long>(n % q), q);
    case SequenceSpec::Kind::Factorial: {
      long long kf = static_cast<long long>(s.k_factorial % q);
      long long arg = (mulmod_ll(kf, static_cast<long long>(n % q), q) +
                       static_cast<long long>(s.n_k % q)) % q;
      return poly_eval_mod(s.poly, arg, q);
    }
    case SequenceSpec::Kind::Hardy: {
      BigInt v = hardy_eval(s.hardy, n);
      BigInt r = v % q;
      if (r < 0) r += q;
      return static_cast<long long>(r);
    }
  }
  throw ValidationError("sequence_eval_mod: bad kind");
}

// ------------------------------------------------------------- intersectivity

namespace {
std::vector<long long> primes_up_to(long long bound) {
  std::vector<bool> sieve(bound + 1, true);
  std::vector<long long> ps;
  for (long long i = 2; i <= bound; ++i) {
    if (!sieve[i]) continue;
    ps.push_back(i);
    for (long long j = i * i; j <= bound; j += i) sieve[j] = false;
  }
  return ps;
}

// all roots of p mod m given roots mod m/l (candidates r + t*(m/l))
std::vector<long long> lift_roots(const PolynomialZ& p, const std::vector<long long>& roots,
                                  long long m_prev, long long l) {
  long long m = m_prev * l;
  std::vector<long long> out;
  for (long long r : roots) {
    for (long long t = 0; t < l; ++t) {
      long long cand = r + t * m_prev;
      if (poly_eval_mod(p, cand, m) == 0) out.push_back(cand);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}
}  // namespace

IntersectivityVerdict is_intersective_bounded(const PolynomialZ& p, long long prime_bound,
                                              int lift_bound) {
  if (p.is_zero()) throw ValidationError("is_intersective_bounded: zero polynomial");
  if (prime_bound < 2 || lift_bound < 1)
    throw ValidationError("is_intersective_bounded: bad bounds");
  PolynomialZ dp = p.derivative();
  for (long long l : primes_up_to(prime_bound)) {
    std::vector<long long> roots;
    for (long long r = 0; r < l; ++r)
      if (poly_eval_mod(p, r, l) == 0) roots.push_back(r);
    if (roots.empty())
      return IntersectivityVerdict{true, l, prime_bound, lift_bound};
    // a nonsingular root lifts to every power (Hensel); this prime can
    // never obstruct
    bool nonsingular = false;
    for (long long r : roots)
      if (poly_eval_mod(dp, r, l) != 0) nonsingular = true;
    if (nonsingular) continue;
    long long m = l;
    for (int e = 2; e <= lift_bound; ++e) {
      roots = lift_roots(p, roots, m, l);
      m *= l;
      if (roots.empty()) return IntersectivityVerdict{true, m, prime_bound, lift_bound};
      if (roots.size() > 4096)
        throw BudgetError("is_intersective_bounded: root explosion at prime " +
                          std::to_string(l));
    }
  }
  return IntersectivityVerdict{false, 0, prime_bound, lift_bound};
}

uint64_t find_nk(const PolynomialZ& p, int k) {
  if (p.is_zero()) throw ValidationError("find_nk: zero polynomial");
  BigInt kfac = factorial(k);
  if (kfac <= 10'000'000) {
    long long m = static_cast<long long>(kfac);
    for (long long n = 0; n < m; ++n)
      if (poly_eval_mod(p, n, m) == 0) return static_cast<uint64_t>(n);
    throw NoSolutionError("find_nk: no residue with k! | p(n) for k=" + std::to_string(k));
  }
  // CRT over maximal prime powers of k!
  struct PrimePower {
    long long l;
    long long pe;
    std::vector<long long> roots;
  };
  std::vector<PrimePower> pps;
  for (long long l : primes_up_to(k)) {
    long long a = 0, pw = l;
    while (pw <= k) {
      a += k / pw;
      if (pw > k / l) break;
      pw *= l;
    }
    long long pe = 1;
    std::vector<long long> roots;
    for (long long r = 0; r < l; ++r)
      if (poly_eval_mod(p, r, l) == 0) roots.push_back(r);
    pe = l;
    for (long long e = 2; e <= a; ++e) {
      roots = lift_roots(p, roots, pe, l);
      pe *= l;
      if (roots.empty()) break;
      if (roots.size() > 4096) throw BudgetError("find_nk: root explosion");
    }
    if (roots.empty())
      throw NoSolutionError("find_nk: no root mod " + std::to_string(l) + "^" +
                            std::to_string(a));
    pps.push_back({l, pe, roots});
  }
  // combine, keeping the minimum
  std::vector<BigInt> residues{0};
  BigInt mod = 1;
  uint64_t combos = 1;
  for (const auto& pp : pps) {
    combos *= pp.roots.size();
    if (combos > 2'000'000) throw BudgetError("find_nk: CRT combination explosion");
    std::vector<BigInt> next;
    next.reserve(residues.size() * pp.roots.size());
    BigInt m_inv;
    {
      // inverse of mod modulo pe (coprime by construction)
      long long m_red = static_cast<long long>(mod % pp.pe);
      long long t = 0, newt = 1, r = pp.pe, newr = m_red;
      while (newr != 0) {
        long long qq = r / newr;
        long long tmp = t - qq * newt;
        t = newt;
        newt = tmp;
        tmp = r - qq * newr;
        r = newr;
        newr = tmp;
      }
      m_inv = BigInt(((t % pp.pe) + pp.pe) % pp.pe);
    }
    for (const auto& r1 : residues) {
      for (long long r2 : pp.roots) {
        BigInt diff = ((BigInt(r2) - r1) % pp.pe + pp.pe) % pp.pe;
        next.push_back(r1 + mod * ((diff * m_inv) % pp.pe));
      }
    }
    mod *= pp.pe;
    residues = std::move(next);
  }
  BigInt best = *std::min_element(residues.begin(), residues.end());
  return static_cast<uint64_t>(best);
}

// --------------------------------------------------------------- log-away

namespace {
// best rational approximation p/q of x with q <= qmax (continued fractions)
std::pair<long long, long long> best_rational(double x, long long qmax) {
  long long p0 = 1, q0 = 0, p1 = static_cast<long long>(std::floor(x)), q1 = 1;
  double frac = x - std::floor(x);
  while (q1 <= qmax) {
    if (frac < 1e-15) break;
    double inv = 1.0 / frac;
    long long a = static_cast<long long>(std::floor(inv));
    frac = inv - std::floor(inv);
    long long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > qmax) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  return {p1, q1};
}

long long llgcd(long long a, long long b) {
  while (b) {
    a %= b;
    std::swap(a, b);
  }
  return a < 0 ? -a : a;
}
}  // namespace

LogAwayVerdict classify_log_away(const HardyExpr& h) {
  // merge by (exponent, log_power)
  std::map<std::pair<long long, int>, double> merged;  // key: (round(e*1e9), k)
  for (const auto& t : h.terms) {
    auto key = std::make_pair(std::llround(t.exponent * 1e9), t.log_power);
    merged[key] += t.coeff;
  }
  struct Entry {
    double e;
    int k;
    double c;
  };
  std::vector<Entry> nonabs, profile, negligible;
  for (const auto& [key, c] : merged) {
    if (c == 0.0) continue;
    double e = key.first / 1e9;
    int k = key.second;
    bool integer_e = std::abs(e - std::llround(e)) < 1e-9;
    if (!integer_e) {
      nonabs.push_back({e, k, c});
    } else if (std::llround(e) >= 1) {
      if (k >= 1)
        nonabs.push_back({e, k, c});
      else
        profile.push_back({e, k, c});
    } else {  // e == 0
      if (k >= 2)
        nonabs.push_back({e, k, c});
      else
        negligible.push_back({e, k, c});
    }
  }
  LogAwayVerdict out;
  if (!nonabs.empty()) {
    out.kind = LogAwayVerdict::Kind::Satisfied;
    return out;
  }
  if (profile.empty()) {
    // a(t) = c0 + c1 log t = O(log t): violated with the constant profile
    out.kind = LogAwayVerdict::Kind::Violated;
    double c0 = 0;
    for (const auto& en : negligible)
      if (en.k == 0) c0 = en.c;
    if (c0 != 0) {
      out.c = c0;
      out.p.coeffs = {1};
    } else {
      out.c = 0;
      out.p = PolynomialZ::zero();
    }
    return out;
  }
  // Coefficient ratios are classified at double precision: a ratio with a
  // rational approximation p/q, q <= 1e4, within 1e-10 is treated as that
  // rational; a ratio staying 1e-4 away from every rational with q <= 32
  // is treated as irrational; anything in between is Unknown.
  std::sort(profile.begin(), profile.end(), [](const Entry& a, const Entry& b) { return a.e > b.e; });
  double lead = profile[0].c;
  const long long qmax = 10000;
  std::vector<std::pair<long long, long long>> ratios;
  bool any_irrational = false, any_ambiguous = false;
  for (const auto& en : profile) {
    double r = en.c / lead;
    auto [pn, qn] = best_rational(r, qmax);
    double err = std::abs(r - static_cast<double>(pn) / qn);
    if (err <= 1e-10) {
      long long g = llgcd(pn, qn);
      ratios.emplace_back(pn / g, qn / g);
      continue;
    }
    double small_dist = 1.0;
    for (long long q = 1; q <= 32; ++q) {
      double nearest = std::llround(r * q) / static_cast<double>(q);
      small_dist = std::min(small_dist, std::abs(r - nearest));
    }
    if (small_dist > 1e-4)
      any_irrational = true;
    else
      any_ambiguous = true;
  }
  if (any_ambiguous) {
    out.kind = LogAwayVerdict::Kind::Unknown;
    return out;
  }
  if (any_irrational) {
    out.kind = LogAwayVerdict::Kind::Satisfied;
    return out;
  }
  long long den = 1;
  for (auto [pn, qn] : ratios) den = den / llgcd(den, qn) * qn;
  int deg = static_cast<int>(std::llround(profile[0].e));
  out.p.coeffs.assign(deg + 1, 0);
  for (size_t i = 0; i < profile.size(); ++i) {
    int d = static_cast<int>(std::llround(profile[i].e));
    out.p.coeffs[d] = ratios[i].first * (den / ratios[i].second);
  }
  out.p.trim();
  out.c = lead / den;
  out.kind = LogAwayVerdict::Kind::Violated;
  return out;
}

// ---------------------------------------------------------- residue histogram

std::vector<uint64_t> residue_distribution(const SequenceSpec& s, long long q, uint64_t N) {
  if (q < 1 || N < 1) throw ValidationError("residue_distribution: q, N must be >= 1");
  using Hist = std::vector<uint64_t>;
  auto per_chunk = [&](uint64_t lo, uint64_t hi) {
    Hist h(q, 0);
    for (uint64_t n = lo + 1; n <= hi; ++n) ++h[sequence_eval_mod(s, n, q)];
    return h;
  };
  auto combine = [&](Hist a, const Hist& b) {
    if (a.empty()) a.assign(q, 0);
    for (long long i = 0; i < q; ++i) a[i] += b[i];
    return a;
  };
  return chunked_reduce<Hist>(N, 1 << 14, global_workers(), Hist(q, 0), per_chunk, combine);
}

}  // namespace lab
