#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alf/concomitants.hpp"
#include "alf/quotient.hpp"

namespace alf {

// Everything an identity evaluator may need at one sampled point.
struct PointContext {
  const MetricModel* model = nullptr;
  Point point{};
  Concomitants c;
  std::array<ErnstCalibration, 2> cal;
  double omega_alt = 0.0;         // twist potential along the second path
  bool quotient_ok = false;
  std::string quotient_reason;
  QuotientFields q;
  std::array<std::vector<DdkwSample>, 2> ddkw;  // one per ddkw_alphas() entry, when the side allows
  std::array<double, 16> g0{}, gi0{};
  // degree-0 magnitudes used for natural residual scales
  double lam = 0.0, norm_xi = 0.0, norm_F = 0.0, norm_W = 0.0;
  double norm_dF = 0.0;          // |nabla F|
  double norm_hess_lam = 0.0;    // |nabla nabla lambda|
  double norm_dtwist = 0.0;      // |nabla omega_a|
  double div_scale_lam = 0.0, div_scale_twist = 0.0;  // pieces of div grad lambda, div omega
  double div_scale_u = 0.0;      // pieces of div (grad lambda / lambda^2)
  std::array<double, 2> norm_Fs{0, 0}, norm_Ws{0, 0};
  std::array<double, 2> norm_S_parts{0, 0};  // |W+-| + 6 |F F - F^2 I / 3| / |1 - E|
};

const std::vector<double>& ddkw_alphas();

PointContext make_context(const MetricModel& model, const Point& p, int order,
                          const std::array<ErnstCalibration, 2>& cal);

// Outcome of one identity at one point and side. For equalities abs is the max
// component of LHS - RHS and scale the largest additive term (or the natural scale
// of the identity when every term vanishes identically, e.g. on type-D sides).
// For inequalities abs is the violation max(0, -value).
struct IdentityEval {
  bool applicable = true;
  std::string reason;
  double abs = 0.0;
  double scale = 0.0;
  double value = 0.0;
};

struct IdentitySpec {
  std::string id;
  std::string kind;      // algebraic | differential | inequality | geometric
  std::string statement;
  int order = 4;         // jet order required
  bool per_side = true;
  double tolerance = 1e-8;
  std::function<IdentityEval(const PointContext&, int side)> eval;
};

const std::vector<IdentitySpec>& identity_registry();
std::vector<std::string> registry_ids();
const IdentitySpec& find_identity(const std::string& id);
// ids whose prefix (before the first '.') matches, or the full registry for "all"
std::vector<IdentitySpec> select_suite(const std::string& name);

struct SideResult {
  std::string side;       // "+", "-" or "both"
  int n_evaluated = 0;
  int n_skipped = 0;
  std::string skip_reason;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  double scale = 0.0;     // scale at the worst point
  Point worst_point{};
  bool pass = false;
};

struct VerificationReport {
  std::string metric;
  std::map<std::string, double> params;
  std::string identity;
  std::string kind;
  std::string label_convention;  // "chart" or "flipped"
  std::vector<SideResult> sides;
  int n_points = 0;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  double scale = 0.0;
  double tolerance = 1e-8;
  double floor = 1e-14;
  bool pass = false;
  std::string status;  // "pass", "fail" or "skipped: <reason>"
  std::uint64_t seed = 0;
};

struct SuiteOptions {
  int order = 4;
  double tolerance = 1e-8;   // overrides the per-identity tolerance when > 0 and stricter
  double floor = 1e-14;
  double lambda_min = 0.05;
  bool both_labels = true;
  unsigned threads = 0;      // 0: hardware concurrency
};

std::vector<VerificationReport> run_suite(const MetricModel& model,
                                          const std::vector<IdentitySpec>& suite, int n_points,
                                          std::uint64_t seed, const SuiteOptions& opts = {});

// Volume-form contraction identities at one point.
struct EpsilonReport {
  double single_contraction = 0.0;  // max residual, one index contracted
  double double_contraction = 0.0;  // two indices contracted
  double full_contraction = 0.0;    // |eps.eps - 24|
  bool pass = false;
};
EpsilonReport epsilon_identity_suite(const CurvatureBundle& b, double tolerance = 1e-10);

struct DecaySeries {
  std::string quantity;   // "1-lambda", "omega", "|nabla xi|", "F+^2", "F-^2"
  double target = 0.0;
  double slope = 0.0;
  bool identically_zero = false;
  // slope sits near target - k for an integer k >= 1: the coefficient at the
  // target order vanishes (zero NUT charge for omega)
  bool faster = false;
  bool pass = false;
  std::vector<double> r, values;
};

struct DecayReport {
  std::string metric;
  double theta = 0.0;
  std::vector<DecaySeries> series;
  std::array<double, 2> r4F2_limit{0, 0};
  std::array<double, 2> b_squared{0, 0};
  std::array<double, 2> limit_rel_err{0, 0};
  bool pass = false;
};
DecayReport asymptotic_decay_suite(const MetricModel& model);

// Fraction of differential identities that fail on a perturbed copy of the model.
struct MutationReport {
  double amplitude = 0.0;
  int n_differential = 0;
  int n_failed = 0;
  std::vector<std::string> survivors;
  double fraction() const { return n_differential ? double(n_failed) / n_differential : 0.0; }
};
MutationReport mutation_check(const MetricModel& model, double amplitude, int n_points,
                              std::uint64_t seed, const SuiteOptions& opts = {});

}  // namespace alf
