#include "alf/combinatorics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <thread>

namespace alf {

namespace {

using u64 = unsigned long long;
constexpr u64 kP = (1ULL << 61) - 1;
constexpr int kHashPoints = 3;
using Hash = std::array<u64, kHashPoints>;

u64 mulmod(u64 a, u64 b) { return static_cast<u64>((unsigned __int128)a * b % kP); }
u64 addmod(u64 a, u64 b) { return (a + b) % kP; }
u64 submod(u64 a, u64 b) { return (a + kP - b) % kP; }
u64 powmod(u64 a, u64 e) {
  u64 r = 1;
  for (; e; e >>= 1, a = mulmod(a, a))
    if (e & 1) r = mulmod(r, a);
  return r;
}
u64 invmod(u64 a) { return powmod(a, kP - 2); }

// g^k != 1 for k <= 64 at each of these
constexpr std::array<u64, kHashPoints> kG{1234567890123ULL, 987654321987ULL, 55555555555ULL};

u64 nut_value_mod(int eps, int a, int b, u64 g) {
  u64 ga = powmod(g, a), gb = powmod(g, b);
  u64 num = mulmod(addmod(ga, 1), addmod(gb, 1));
  u64 den = mulmod(submod(ga, 1), submod(gb, 1));
  u64 v = mulmod(num, invmod(den));
  return eps > 0 ? v : submod(0, v);
}

// sign - sgn(e) - 4 g (e - s) / (g - 1)^2
Hash target_hash(int sign, int e, int s) {
  Hash h{};
  for (int k = 0; k < kHashPoints; ++k) {
    u64 g = kG[k];
    u64 gm1 = submod(g, 1);
    u64 frac = mulmod(mulmod(4, g), invmod(mulmod(gm1, gm1)));
    long long c = e - s;
    u64 cm = c >= 0 ? static_cast<u64>(c) % kP : submod(0, static_cast<u64>(-c) % kP);
    long long base = sign - sgn(e);
    u64 bm = base >= 0 ? static_cast<u64>(base) : submod(0, static_cast<u64>(-base));
    h[k] = submod(bm, mulmod(frac, cm));
  }
  return h;
}

struct Half {
  Hash sum{};
  std::array<unsigned char, 8> idx{};
  int size = 0;
};

template <class F>
void for_each_multiset(int n_types, int size, F&& f) {
  std::vector<int> idx(size, 0);
  if (size == 0) {
    f(idx);
    return;
  }
  while (true) {
    f(idx);
    int k = size - 1;
    while (k >= 0 && idx[k] == n_types - 1) --k;
    if (k < 0) return;
    ++idx[k];
    for (int j = k + 1; j < size; ++j) idx[j] = idx[k];
  }
}

double multiset_count(int n_types, int size) {
  double c = 1;
  for (int i = 0; i < size; ++i) c = c * (n_types + i) / (i + 1);
  return c;
}

std::string nut_str(const NutData& n) {
  std::ostringstream os;
  os << "(" << (n.eps > 0 ? "+" : "-") << "," << n.w1 << "," << n.w2 << ")";
  return os.str();
}

}  // namespace

std::array<unsigned long long, 3> hash_points() { return kG; }
unsigned long long hash_modulus() { return kP; }

int sgn(int v) { return (v > 0) - (v < 0); }

int FixedPointConfig::euler_char() const {
  int c = n_nuts();
  for (const auto& b : bolts) c += b.euler_char;
  return c;
}

int FixedPointConfig::signature() const {
  int s = sgn(e);
  for (const auto& n : nuts) s += n.eps;
  return s;
}

int FixedPointConfig::max_weight() const {
  int w = 1;
  for (const auto& n : nuts) w = std::max({w, n.w1, n.w2});
  return w;
}

int FixedPointConfig::bolt_self_intersection() const {
  int s = 0;
  for (const auto& b : bolts) s += b.self_intersection;
  return s;
}

void FixedPointConfig::canonicalize() {
  for (auto& n : nuts)
    if (n.w1 > n.w2) std::swap(n.w1, n.w2);
  std::sort(nuts.begin(), nuts.end());
  std::sort(bolts.begin(), bolts.end());
}

std::string FixedPointConfig::str() const {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < nuts.size(); ++i) os << (i ? "," : "") << nut_str(nuts[i]);
  os << "}";
  if (!bolts.empty()) {
    os << " bolts[";
    for (size_t i = 0; i < bolts.size(); ++i)
      os << (i ? "," : "") << "(" << bolts[i].euler_char << "," << bolts[i].self_intersection
         << ")";
    os << "]";
  }
  os << " e=" << e;
  return os.str();
}

void validate(const FixedPointConfig& cfg) {
  for (const auto& n : cfg.nuts) {
    if (n.eps != 1 && n.eps != -1) throw ConfigError("nut orientation must be +1 or -1");
    if (n.w1 < 1 || n.w2 < 1) throw ConfigError("nut weights must be positive: " + nut_str(n));
    if (std::gcd(n.w1, n.w2) != 1) throw ConfigError("nut weights not coprime: " + nut_str(n));
  }
  for (const auto& b : cfg.bolts)
    if (b.euler_char % 2 != 0) throw ConfigError("bolt Euler characteristic must be even");
}

IntRationalFunction g_signature_rhs(const FixedPointConfig& cfg) {
  validate(cfg);
  IntRationalFunction sum(sgn(cfg.e));
  for (const auto& n : cfg.nuts) {
    IntPolynomial num = IntPolynomial::binomial(n.w1, 1) * IntPolynomial::binomial(n.w2, 1);
    IntPolynomial den = IntPolynomial::binomial(n.w1, -1) * IntPolynomial::binomial(n.w2, -1);
    sum = sum + IntRationalFunction(num * BigInt(n.eps), den);
  }
  int c = cfg.e - cfg.bolt_self_intersection();
  if (c != 0) {
    IntPolynomial gm1 = IntPolynomial::binomial(1, -1);
    sum = sum + IntRationalFunction(IntPolynomial::monomial(1, BigInt(4 * c)), gm1 * gm1);
  }
  return sum;
}

SignatureCertificate check_signature_identity(const FixedPointConfig& cfg, int claimed_sign) {
  validate(cfg);
  const int n = cfg.n_nuts();
  std::vector<IntPolynomial> factors;  // pair per nut, then (g - 1)^2
  for (const auto& nut : cfg.nuts) {
    factors.push_back(IntPolynomial::binomial(nut.w1, -1));
    factors.push_back(IntPolynomial::binomial(nut.w2, -1));
  }
  IntPolynomial gm1 = IntPolynomial::binomial(1, -1);
  factors.push_back(gm1);
  factors.push_back(gm1);

  auto product_except = [&](int skip) {
    IntPolynomial p(1);
    for (int k = 0; k < static_cast<int>(factors.size()) / 2; ++k)
      if (k != skip) p = p * (factors[2 * k] * factors[2 * k + 1]);
    return p;
  };

  SignatureCertificate cert;
  cert.denominator = product_except(-1);
  IntPolynomial res = cert.denominator * BigInt(sgn(cfg.e) - claimed_sign);
  for (int i = 0; i < n; ++i) {
    const auto& nut = cfg.nuts[i];
    IntPolynomial num = IntPolynomial::binomial(nut.w1, 1) * IntPolynomial::binomial(nut.w2, 1);
    res += num * product_except(i) * BigInt(nut.eps);
  }
  int c = cfg.e - cfg.bolt_self_intersection();
  if (c != 0) res += IntPolynomial::monomial(1, BigInt(4 * c)) * product_except(n);
  cert.residual = res;
  cert.holds = res.is_zero();
  return cert;
}

JangVerdict jang_lemma_checks(const FixedPointConfig& cfg) {
  JangVerdict v;
  const auto& nuts = cfg.nuts;
  std::map<int, int> count;
  for (const auto& n : nuts) {
    ++count[n.w1];
    ++count[n.w2];
  }
  for (const auto& [w, c] : count) {
    if (w > 1 && c % 2 != 0) {
      v.weight_balance = false;
      v.violations.push_back("weight balance: weight " + std::to_string(w) + " occurs " +
                             std::to_string(c) + " times");
    }
  }

  // slots (other weight, weight) of a nut
  auto slots = [](const NutData& n) {
    std::vector<std::pair<int, int>> s{{n.w2, n.w1}};
    if (n.w2 != n.w1) s.push_back({n.w1, n.w2});
    return s;
  };

  for (size_t i = 0; i < nuts.size(); ++i) {
    for (auto [a, w] : slots(nuts[i])) {
      if (w <= 1) continue;
      bool found = false;
      for (size_t j = 0; j < nuts.size() && !found; ++j) {
        if (j == i) continue;
        for (auto [b, wq] : slots(nuts[j])) {
          if (wq != w) continue;
          int r = nuts[j].eps == nuts[i].eps ? (a + b) % w : (a - b) % w;
          if (r == 0) found = true;
        }
      }
      if (!found) {
        v.companion = false;
        v.violations.push_back("companion: no partner for weight " + std::to_string(w) +
                               " of nut " + nut_str(nuts[i]));
      }
    }
  }

  int wmax = cfg.max_weight();
  if (wmax > 1) {
    for (size_t i = 0; i < nuts.size(); ++i) {
      if (nuts[i].w2 != wmax) continue;
      int a = nuts[i].w1;
      bool found = false;
      for (size_t j = 0; j < nuts.size() && !found; ++j) {
        if (j == i || nuts[j].w2 != wmax) continue;
        int b = nuts[j].w1;
        found = nuts[j].eps == nuts[i].eps ? (wmax == a + b) : (a == b);
      }
      if (!found) {
        v.highest_weight = false;
        v.violations.push_back("highest weight: no partner for nut " + nut_str(nuts[i]));
      }
    }
  }
  return v;
}

std::array<Rational, 2> z_values(const NutData& nut) {
  int a = std::min(nut.w1, nut.w2), b = std::max(nut.w1, nut.w2);
  Rational ia(1, a), ib(1, b);
  return {nut.eps * ia + ib, -nut.eps * ia + ib};
}

PhiValues phi_values(const FixedPointConfig& cfg) {
  PhiValues p;
  p.w = cfg.max_weight();
  Rational base = Rational(-2, p.w) + cfg.euler_char() - cfg.n_nuts();
  p.plus = base;
  p.minus = base;
  for (const auto& n : cfg.nuts) {
    auto z = z_values(n);
    p.plus += z[0];
    p.minus += z[1];
  }
  return p;
}

std::vector<FixedPointConfig> enumerate_configs(const EnumerationOptions& opts) {
  if (opts.n_max < 0 || opts.w_max < 1) throw ConfigError("bounds must be n_max >= 0, w_max >= 1");
  if (opts.w_max > 64) throw SearchSpaceError("max weight above 64 is not supported");

  std::vector<NutData> types;
  for (int eps : {-1, 1})
    for (int a = 1; a <= opts.w_max; ++a)
      for (int b = a; b <= opts.w_max; ++b)
        if (std::gcd(a, b) == 1) types.push_back({eps, a, b});
  std::sort(types.begin(), types.end());
  const int T = static_cast<int>(types.size());
  if (T > 255) throw SearchSpaceError("too many nut types for the index encoding");
  std::vector<Hash> tval(T);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < kHashPoints; ++k)
      tval[t][k] = nut_value_mod(types[t].eps, types[t].w1, types[t].w2, kG[k]);

  // bolt multisets grouped by (sum chi, sum B.B)
  std::vector<BoltData> btypes;
  if (opts.with_bolts) {
    for (int chi : opts.bolts.euler_chars)
      for (int s = -opts.bolts.max_abs_self_intersection; s <= opts.bolts.max_abs_self_intersection;
           ++s)
        btypes.push_back({chi, s});
    std::sort(btypes.begin(), btypes.end());
  }
  std::map<std::pair<int, int>, std::vector<std::vector<BoltData>>> bolt_groups;
  int max_bolts = opts.with_bolts ? opts.bolts.max_bolts : 0;
  for (int nb = 0; nb <= max_bolts; ++nb) {
    for_each_multiset(static_cast<int>(btypes.size()), nb, [&](const std::vector<int>& idx) {
      std::vector<BoltData> set;
      int chi = 0, s = 0;
      for (int i : idx) {
        set.push_back(btypes[i]);
        chi += btypes[i].euler_char;
        s += btypes[i].self_intersection;
      }
      int n = opts.chi - chi;
      if (n >= 0 && n <= opts.n_max) bolt_groups[{n, s}].push_back(set);
    });
  }

  for (const auto& [key, sets] : bolt_groups) {
    int n = key.first;
    double work = multiset_count(T, n / 2) + multiset_count(T, n - n / 2);
    if (work > static_cast<double>(opts.max_search))
      throw SearchSpaceError("search space of " + std::to_string(static_cast<long long>(work)) +
                             " half-multisets exceeds the cap " +
                             std::to_string(opts.max_search));
  }

  auto build = [&](int size) {
    std::vector<Half> out;
    for_each_multiset(T, size, [&](const std::vector<int>& idx) {
      Half h;
      h.size = size;
      for (int i = 0; i < size; ++i) {
        h.idx[i] = static_cast<unsigned char>(idx[i]);
        for (int k = 0; k < kHashPoints; ++k) h.sum[k] = addmod(h.sum[k], tval[idx[i]][k]);
      }
      out.push_back(h);
    });
    return out;
  };
  std::map<int, std::vector<Half>> halves;
  auto half_table = [&](int size) -> const std::vector<Half>& {
    auto it = halves.find(size);
    if (it == halves.end()) it = halves.emplace(size, build(size)).first;
    return it->second;
  };
  std::map<int, std::vector<Half>> sorted_left;
  auto left_table = [&](int size) -> const std::vector<Half>& {
    auto it = sorted_left.find(size);
    if (it == sorted_left.end()) {
      std::vector<Half> v = half_table(size);
      std::sort(v.begin(), v.end(), [](const Half& x, const Half& y) { return x.sum < y.sum; });
      it = sorted_left.emplace(size, std::move(v)).first;
    }
    return it->second;
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<FixedPointConfig> result;

  for (const auto& [key, bolt_sets] : bolt_groups) {
    const auto [n, s] = key;
    const int hl = n / 2, hr = n - hl;
    const auto& left = left_table(hl);
    const auto& right = half_table(hr);
    const Hash target = target_hash(opts.sign, opts.e, s);

    // nut multisets whose hashed signature sum hits the target
    std::vector<std::vector<std::vector<int>>> found(threads);
    auto worker = [&](unsigned tid) {
      for (size_t r = tid; r < right.size(); r += threads) {
        const Half& R = right[r];
        Hash need;
        for (int k = 0; k < kHashPoints; ++k) need[k] = submod(target[k], R.sum[k]);
        auto lo = std::lower_bound(left.begin(), left.end(), need,
                                   [](const Half& x, const Hash& v) { return x.sum < v; });
        int rmin = hr > 0 ? R.idx[0] : T;
        for (auto it = lo; it != left.end() && it->sum == need; ++it) {
          if (hl > 0 && it->idx[hl - 1] > rmin) continue;
          std::vector<int> all;
          for (int i = 0; i < hl; ++i) all.push_back(it->idx[i]);
          for (int i = 0; i < hr; ++i) all.push_back(R.idx[i]);
          found[tid].push_back(std::move(all));
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& th : pool) th.join();

    std::vector<std::vector<int>> hits;
    for (auto& f : found) hits.insert(hits.end(), f.begin(), f.end());
    std::sort(hits.begin(), hits.end());

    for (const auto& h : hits) {
      FixedPointConfig nuts_only;
      nuts_only.e = opts.e;
      for (int i : h) nuts_only.nuts.push_back(types[i]);
      nuts_only.bolts = bolt_sets.front();  // same B.B sum for every set in the group
      if (!check_signature_identity(nuts_only, opts.sign).holds) continue;
      if (!jang_lemma_checks(nuts_only).pass()) continue;
      for (const auto& bs : bolt_sets) {
        FixedPointConfig cfg = nuts_only;
        cfg.bolts = bs;
        cfg.canonicalize();
        result.push_back(std::move(cfg));
      }
    }
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

std::array<int, 3> topology_invariants(const std::string& topology) {
  if (topology == "kerr") return {2, 0, 0};
  if (topology == "taubbolt") return {2, 1, 1};
  if (topology == "chenteo") return {3, 1, 0};
  throw ConfigError("unknown topology '" + topology + "' (kerr | taubbolt | chenteo)");
}

std::string chenteo_branch(const FixedPointConfig& cfg) {
  const auto& nuts = cfg.nuts;
  if (nuts.empty()) return "no nuts";
  int w = cfg.max_weight();
  if (w == 1) return "all weights {1,1}";
  auto sign_char = [](int eps) { return eps > 0 ? std::string("+") : std::string("-"); };

  for (size_t i = 0; i < nuts.size(); ++i) {
    if (nuts[i].w2 != w) continue;
    for (size_t j = 0; j < nuts.size(); ++j)
      if (j != i && nuts[j].w2 == w && nuts[j].w1 == nuts[i].w1 && nuts[j].eps == -nuts[i].eps)
        return "highest weight paired with opposite orientation";
  }
  for (size_t i = 0; i < nuts.size(); ++i) {
    if (nuts[i].w2 != w) continue;
    for (size_t j = 0; j < nuts.size(); ++j) {
      if (j == i || nuts[j].w2 != w || nuts[j].eps != nuts[i].eps) continue;
      if (nuts[i].w1 + nuts[j].w1 != w) continue;
      int b = std::max(nuts[i].w1, nuts[j].w1), a = std::min(nuts[i].w1, nuts[j].w1);
      int e1 = nuts[i].eps;
      std::string p = sign_char(e1), m = sign_char(-e1);
      if (a == b) return "a=b=1, " + p;
      std::string head = "{" + p + ",b,a+b},{" + p + ",a,a+b},";
      for (size_t k = 0; k < nuts.size(); ++k) {
        if (k == i || k == j) continue;
        const auto& q = nuts[k];
        if (q.eps == e1 && q.w1 == b - a && q.w2 == b) return head + "{" + p + ",b-a,b}";
        if (q.eps == e1 && q.w1 == b && q.w2 == 2 * b - a) return head + "{" + p + ",b,2b-a}";
        if (q.eps == -e1 && q.w1 == a && q.w2 == b) return head + "{" + m + ",a,b}";
      }
      return head + "no third nut";
    }
  }
  return "no highest-weight partner";
}

CaseReport case_analysis(const std::string& topology, int w_max, int n_max,
                         const BoltBounds& bolts, unsigned threads) {
  auto inv = topology_invariants(topology);
  CaseReport rep;
  rep.topology = topology;
  rep.chi = inv[0];
  rep.sign = inv[1];
  rep.e = inv[2];
  rep.w_max = w_max;
  rep.n_max = n_max;

  EnumerationOptions o;
  o.chi = rep.chi;
  o.sign = rep.sign;
  o.e = rep.e;
  o.n_max = n_max;
  o.w_max = w_max;
  o.with_bolts = true;
  o.bolts = bolts;
  o.threads = threads;
  const bool minus_only = topology == "chenteo";

  for (auto& cfg : enumerate_configs(o)) {
    CaseEntry en;
    en.phi = phi_values(cfg);
    en.config = std::move(cfg);
    const auto& p = en.phi;
    if (p.plus < 0 || p.minus < 0) {
      en.status = "eliminated";
      en.reason = p.plus < 0 ? "Phi+ < 0" : "Phi- < 0";
    } else if (p.minus != 0 || (!minus_only && p.plus != 0)) {
      en.status = "counterexample";
      en.reason = p.minus != 0 ? "Phi- > 0" : "Phi+ > 0";
    } else {
      en.status = "survives";
    }
    if (minus_only) en.branch = chenteo_branch(en.config);
    ++rep.n_admissible;
    if (en.config.bolts.empty())
      ++rep.n_nuts_only;
    else
      ++rep.n_with_bolts;
    if (en.status == "eliminated") ++rep.n_eliminated;
    if (en.status == "survives") ++rep.n_survivors;
    if (en.status == "counterexample") ++rep.n_counterexamples;
    if (!en.branch.empty() && en.status != "counterexample")
      ++rep.branches[en.branch][en.status == "survives" ? 0 : 1];
    rep.entries.push_back(std::move(en));
  }
  return rep;
}

}  // namespace alf
