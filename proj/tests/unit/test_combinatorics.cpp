#include <doctest.h>

#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "alf/combinatorics.hpp"

using namespace alf;

namespace {

using NutList = std::vector<std::array<int, 3>>;

std::set<NutList> read_golden(const std::string& name) {
  std::ifstream in(std::string(ALF_GOLDEN_DIR) + "/" + name);
  REQUIRE(in);
  std::set<NutList> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.insert(nlohmann::json::parse(line).get<NutList>());
  }
  return out;
}

std::set<NutList> enumerated(int chi, int sign, int w_max) {
  EnumerationOptions o;
  o.chi = chi;
  o.sign = sign;
  o.w_max = w_max;
  std::set<NutList> out;
  for (const auto& c : enumerate_configs(o)) {
    NutList l;
    for (const auto& n : c.nuts) l.push_back({n.eps, n.w1, n.w2});
    std::sort(l.begin(), l.end());
    out.insert(l);
  }
  return out;
}

FixedPointConfig cfg(std::vector<NutData> nuts, int e = 0, std::vector<BoltData> bolts = {}) {
  FixedPointConfig c;
  c.nuts = std::move(nuts);
  c.bolts = std::move(bolts);
  c.e = e;
  return c;
}

// the right-hand side written out term by term, at a rational point
Rational rhs_at(const FixedPointConfig& c, const Rational& g) {
  Rational s = 0;
  for (const auto& n : c.nuts) {
    Rational ga = 1, gb = 1;
    for (int i = 0; i < n.w1; ++i) ga *= g;
    for (int i = 0; i < n.w2; ++i) gb *= g;
    s += Rational(n.eps) * (ga + 1) * (gb + 1) / ((ga - 1) * (gb - 1));
  }
  int bb = 0;
  for (const auto& b : c.bolts) bb += b.self_intersection;
  s += Rational(4) * g / ((g - 1) * (g - 1)) * Rational(c.e - bb);
  s += Rational((c.e > 0) - (c.e < 0));
  return s;
}

}  // namespace

TEST_CASE("two-nut family matches the golden set") {
  CHECK(enumerated(2, 0, 6) == read_golden("two_nut_pairs_w6.jsonl"));
}

TEST_CASE("three-nut chains match the golden sets for both signatures") {
  CHECK(enumerated(3, 1, 6) == read_golden("three_nut_chains_w6_plus.jsonl"));
  CHECK(enumerated(3, -1, 6) == read_golden("three_nut_chains_w6_minus.jsonl"));
}

TEST_CASE("fewer than two nuts leaves nothing for chi = 2, sign = 0") {
  EnumerationOptions o;
  o.n_max = 1;
  CHECK(enumerate_configs(o).empty());
}

TEST_CASE("signature right-hand side: closed forms") {
  auto single = g_signature_rhs(cfg({{1, 1, 1}}));
  IntPolynomial gp1 = IntPolynomial::binomial(1, 1), gm1 = IntPolynomial::binomial(1, -1);
  CHECK(single.num() == gp1 * gp1);
  CHECK(single.den() == gm1 * gm1);
  auto pair = g_signature_rhs(cfg({{1, 2, 5}, {-1, 2, 5}}));
  REQUIRE(pair.is_constant());
  CHECK(pair.constant_value() == 0);
}

TEST_CASE("signature certificates on the worked examples") {
  CHECK(check_signature_identity(cfg({{1, 1, 2}, {-1, 1, 2}}), 0).holds);
  auto bad = check_signature_identity(cfg({{1, 1, 2}, {-1, 1, 3}}), 0);
  CHECK_FALSE(bad.holds);
  CHECK_FALSE(bad.residual.is_zero());
  // rhs at g = 2 and g = 3 differ, so the sum is not constant
  auto c = cfg({{1, 1, 2}, {-1, 1, 3}});
  CHECK(rhs_at(c, 2) != rhs_at(c, 3));
  // chains carry the sign of their two outer nuts
  CHECK(check_signature_identity(cfg({{-1, 1, 2}, {1, 1, 3}, {1, 2, 3}}), 1).holds);
  CHECK(check_signature_identity(cfg({{1, 1, 2}, {-1, 1, 3}, {-1, 2, 3}}), -1).holds);
  CHECK_FALSE(check_signature_identity(cfg({{1, 1, 2}, {-1, 1, 3}, {-1, 2, 3}}), 1).holds);
}

TEST_CASE("exact certificate agrees with five-point rational evaluation on random data") {
  std::mt19937 rng(20261017);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const std::vector<Rational> pts{Rational(2), Rational(3), Rational(5, 2), Rational(-7, 3),
                                  Rational(11, 4)};
  int holds = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    FixedPointConfig c;
    // half the trials start from a cancelling pair so that true identities occur
    if (trial % 2 == 0) {
      int a = uni(1, 5), b = uni(1, 5);
      while (std::gcd(a, b) != 1) b = uni(1, 5);
      c.nuts = {{1, a, b}, {-1, a, b}};
    }
    int extra = uni(0, 2);
    for (int k = 0; k < extra; ++k) {
      int a = uni(1, 6), b = uni(1, 6);
      while (std::gcd(a, b) != 1) b = uni(1, 6);
      c.nuts.push_back({uni(0, 1) ? 1 : -1, std::min(a, b), std::max(a, b)});
    }
    for (int k = uni(0, 1); k > 0; --k) c.bolts.push_back({2 * uni(-1, 1), uni(-2, 2)});
    // e = B.B keeps the g / (g - 1)^2 term from spoiling the cancelling pair
    c.e = uni(0, 1) ? c.bolt_self_intersection() : uni(-1, 1);
    int claimed = c.signature() + (uni(0, 3) == 0 ? uni(-1, 1) : 0);
    bool by_points = true;
    for (const auto& g : pts) by_points = by_points && rhs_at(c, g) == Rational(claimed);
    auto cert = check_signature_identity(c, claimed);
    CHECK(cert.holds == by_points);
    CHECK(cert.holds == cert.residual.is_zero());
    // at g = 0 the sum is the signature
    CHECK(rhs_at(c, 0) == Rational(c.signature()));
    holds += cert.holds;
  }
  CHECK(holds > 100);
}

TEST_CASE("prefilter points are not roots of unity of small order") {
  const unsigned long long p = hash_modulus();
  CHECK(p == (1ULL << 61) - 1);
  for (unsigned long long g : hash_points()) {
    unsigned __int128 acc = 1;
    for (int k = 1; k <= 64; ++k) {
      acc = acc * g % p;
      CHECK(static_cast<unsigned long long>(acc) != 1ULL);
    }
  }
}

TEST_CASE("Jang lemmas") {
  CHECK(jang_lemma_checks(cfg({{1, 1, 2}, {-1, 1, 2}})).pass());
  auto lone = jang_lemma_checks(cfg({{1, 1, 2}}));
  CHECK_FALSE(lone.weight_balance);
  CHECK_FALSE(lone.violations.empty());
  CHECK(jang_lemma_checks(cfg({{1, 1, 1}, {-1, 1, 2}, {-1, 1, 2}})).pass());
}

TEST_CASE("Z and Phi values") {
  auto z = z_values({1, 1, 1});
  CHECK(z[0] == 2);
  CHECK(z[1] == 0);
  auto kerr = phi_values(cfg({{1, 1, 1}, {-1, 1, 1}}));
  CHECK(kerr.plus == 0);
  CHECK(kerr.minus == 0);
  auto bolt = phi_values(cfg({}, 1, {{2, 1}}));
  CHECK(bolt.w == 1);
  CHECK(bolt.plus == 0);
  CHECK(bolt.minus == 0);
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(validate(cfg({{1, 2, 4}})), ConfigError);
  CHECK_THROWS_AS(validate(cfg({{0, 1, 1}})), ConfigError);
  CHECK_THROWS_AS(validate(cfg({}, 0, {{1, 0}})), ConfigError);
  EnumerationOptions o;
  o.w_max = 100;
  CHECK_THROWS_AS(enumerate_configs(o), SearchSpaceError);
}

TEST_CASE("case analyses at small bounds have no counterexamples") {
  for (const char* t : {"kerr", "taubbolt", "chenteo"}) {
    CaseReport r = case_analysis(t, 6, 5);
    CHECK_MESSAGE(r.n_counterexamples == 0, t);
    CHECK(r.n_admissible == r.n_survivors + r.n_eliminated + r.n_counterexamples);
    CHECK(r.n_survivors > 0);
  }
  CHECK(topology_invariants("chenteo") == std::array<int, 3>{3, 1, 0});
  CHECK_THROWS(topology_invariants("nope"));
}

TEST_CASE("Chen-Teo branch labels") {
  CHECK(chenteo_branch(cfg({{-1, 1, 2}, {1, 1, 3}, {1, 2, 3}})) == "{+,b,a+b},{+,a,a+b},{-,a,b}");
  CHECK(chenteo_branch(cfg({{-1, 1, 1}, {1, 1, 2}, {1, 1, 2}})).rfind("a=b=1", 0) == 0);
}
