#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "alf/intpoly.hpp"

namespace alf {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SearchSpaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// weights kept as w1 <= w2
struct NutData {
  int eps = 1;
  int w1 = 1, w2 = 1;
  auto operator<=>(const NutData&) const = default;
};

struct BoltData {
  int euler_char = 2;
  int self_intersection = 0;
  auto operator<=>(const BoltData&) const = default;
};

struct FixedPointConfig {
  std::vector<NutData> nuts;
  std::vector<BoltData> bolts;
  int e = 0;

  int n_nuts() const { return static_cast<int>(nuts.size()); }
  int euler_char() const;        // n_nuts + sum chi[B]
  int signature() const;         // sum eps + sgn(e)
  int max_weight() const;        // 1 without nuts
  int bolt_self_intersection() const;
  // sorts nuts by (eps, w1, w2) and bolts by (chi, B.B); orders each nut's weights
  void canonicalize();
  std::string str() const;
  auto operator<=>(const FixedPointConfig&) const = default;
};

int sgn(int v);
// throws ConfigError for non-coprime or non-positive weights, eps not +-1, odd chi[B]
void validate(const FixedPointConfig& cfg);

IntRationalFunction g_signature_rhs(const FixedPointConfig& cfg);

struct SignatureCertificate {
  bool holds = false;
  IntPolynomial denominator;  // prod (g^w - 1) over all nut weights, times (g - 1)^2
  IntPolynomial residual;     // denominator * (rhs - claimed); zero iff holds
};
SignatureCertificate check_signature_identity(const FixedPointConfig& cfg, int claimed_sign);

struct JangVerdict {
  bool weight_balance = true;
  bool companion = true;
  bool highest_weight = true;
  std::vector<std::string> violations;
  bool pass() const { return weight_balance && companion && highest_weight; }
};
JangVerdict jang_lemma_checks(const FixedPointConfig& cfg);

// Z+(P), Z-(P)
std::array<Rational, 2> z_values(const NutData& nut);
struct PhiValues {
  int w = 1;
  Rational plus, minus;
};
PhiValues phi_values(const FixedPointConfig& cfg);

struct BoltBounds {
  std::vector<int> euler_chars{2, 0, -2};
  int max_abs_self_intersection = 8;
  int max_bolts = 2;
};

struct EnumerationOptions {
  int chi = 2, sign = 0, e = 0;
  int n_max = 6;
  int w_max = 6;
  bool with_bolts = false;
  BoltBounds bolts;
  std::uint64_t max_search = 50'000'000;  // cap on half-multiset table entries
  unsigned threads = 0;                    // 0: hardware concurrency
};

// Evaluation points of the modular prefilter used by enumerate_configs, and its prime
// modulus 2^61 - 1. Every hit is re-checked exactly.
std::array<unsigned long long, 3> hash_points();
unsigned long long hash_modulus();

// Canonically sorted, duplicate-free. Admissible means the Euler characteristic
// matches, the signature identity holds exactly and the Jang lemmas pass.
std::vector<FixedPointConfig> enumerate_configs(const EnumerationOptions& opts);

struct CaseEntry {
  FixedPointConfig config;
  PhiValues phi;
  std::string status;  // "survives" | "eliminated" | "counterexample"
  std::string reason;
  std::string branch;  // chenteo: branch of the highest-weight argument
};

struct CaseReport {
  std::string topology;
  int chi = 0, sign = 0, e = 0;
  int w_max = 0, n_max = 0;
  std::vector<CaseEntry> entries;
  int n_admissible = 0, n_survivors = 0, n_eliminated = 0, n_counterexamples = 0;
  int n_nuts_only = 0, n_with_bolts = 0;
  // branch -> {survives, eliminated}
  std::map<std::string, std::array<int, 2>> branches;
};

// topology: kerr | taubbolt | chenteo
CaseReport case_analysis(const std::string& topology, int w_max, int n_max,
                         const BoltBounds& bolts = {}, unsigned threads = 0);
// (chi, sign, e) fixed by a topology name
std::array<int, 3> topology_invariants(const std::string& topology);
// the highest-weight branch a Chen-Teo configuration falls in
std::string chenteo_branch(const FixedPointConfig& cfg);

}  // namespace alf
