#include <doctest.h>

#include <algorithm>
#include <set>

#include "alf/identities.hpp"

using namespace alf;

TEST_CASE("registry ids are unique and cover every identity family") {
  auto ids = registry_ids();
  std::set<std::string> uniq(ids.begin(), ids.end());
  CHECK(uniq.size() == ids.size());
  const std::vector<std::string> required{
      "alg.f2-mu-nu", "alg.ernst-split", "alg.current-combined", "diff.nabla-f",
      "diff.ernst-equation", "diff.twist-closed", "diff.conserved-translation",
      "diff.conserved-dilation", "diff.conserved-ehlers", "diff.nabla-plus-gamma",
      "ms.modified-laplace:0.5", "ms.modified-laplace:1", "ms.modified-laplace:2",
      "ms.modified-laplace:3", "ms.p-squares", "div.psi:0.5", "div.psi:1", "div.psi:2",
      "div.psi:3", "pos.V:0.5", "pos.V:1", "pos.V:2", "quot.dictionary",
      "quot.twist-divergence", "quot.ddkw:0", "quot.ddkw:1", "quot.ddkw:3",
      "eps.contract-one", "eps.contract-two", "eps.full-contraction"};
  for (const auto& id : required) CHECK_MESSAGE(uniq.count(id) == 1, id);
  for (const auto& spec : identity_registry()) {
    CHECK(!spec.statement.empty());
    CHECK(std::set<std::string>{"algebraic", "differential", "inequality", "geometric"}.count(spec.kind) == 1);
    CHECK(spec.order >= 2);
  }
}

TEST_CASE("suite selection") {
  auto div = select_suite("div");
  CHECK(div.size() == 4);
  CHECK(select_suite("all").size() == registry_ids().size());
  CHECK(select_suite("ms.p-squares").size() == 1);
  CHECK_THROWS(find_identity("no.such-identity"));
}

TEST_CASE("Schwarzschild replay: everything passes or is skipped with a reason") {
  MetricModel m = make_model("schwarzschild");
  auto reports = run_suite(m, select_suite("all"), 20, 7);
  int evaluated = 0;
  for (const auto& r : reports) {
    if (r.status.rfind("skipped", 0) == 0) {
      CHECK(r.status.size() > 9);
      continue;
    }
    ++evaluated;
    CHECK_MESSAGE(r.pass, r.identity << " " << r.max_rel_residual);
    CHECK(r.max_rel_residual < 1e-8);
  }
  CHECK(evaluated > 40);
}

TEST_CASE("identity suite is deterministic for a fixed seed") {
  MetricModel m = make_model("taub-nut");
  auto a = run_suite(m, select_suite("diff"), 8, 3);
  auto b = run_suite(m, select_suite("diff"), 8, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].max_abs_residual == b[i].max_abs_residual);
    CHECK(a[i].status == b[i].status);
  }
}

TEST_CASE("a perturbed Kerr metric breaks the differential identities") {
  MutationReport r = mutation_check(make_model("kerr"), 1e-3, 10, 2);
  CHECK(r.n_differential > 10);
  CHECK(r.fraction() >= 0.9);
}

TEST_CASE("decay exponents along a ray") {
  DecayReport d = asymptotic_decay_suite(make_model("schwarzschild"));
  CHECK(d.pass);
  for (const auto& s : d.series) {
    if (s.identically_zero) continue;
    CHECK_MESSAGE(std::abs(s.slope - s.target) <= 0.1, s.quantity);
  }
  // Kerr: omega falls off one order faster than the generic rate
  DecayReport k = asymptotic_decay_suite(make_model("kerr"));
  CHECK(k.pass);
  auto it = std::find_if(k.series.begin(), k.series.end(),
                         [](const DecaySeries& s) { return s.quantity == "omega"; });
  REQUIRE(it != k.series.end());
  CHECK(it->faster);
  CHECK(it->slope == doctest::Approx(-2.0).epsilon(0.05));
  for (int s = 0; s < 2; ++s) CHECK(k.limit_rel_err[s] < 0.01);
}
