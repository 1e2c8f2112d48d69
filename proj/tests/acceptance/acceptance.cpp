// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.

#include "confein/catalog.hpp"
#include "confein/checkers.hpp"
#include "confein/errors.hpp"
#include "confein/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace confein;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [" << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const char* title, const std::function<void(Criterion&)>& body) {
  Criterion c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << " [exception: " << e.what() << "]";
  }
  if (!c.ok) ++failures;
  std::printf("%s %d %s%s\n", c.ok ? "PASS" : "FAIL", id, title, c.detail.str().c_str());
  std::fflush(stdout);
}

bool near_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const BlockMetricSpec& blocks(const Scenario& s) { return *s.conformal->blocks; }

}  // namespace

int main() {
  report(1, "curvature golden values, dims 2-4, 200 samples, sup < 1e-9, < 5 s", [](Criterion& c) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::size_t n = 2; n <= 4; ++n) {
      const double k = static_cast<double>(n - 1);
      for (auto [kind, lambda] : {std::pair{MetricKind::Euclidean, 0.0}, std::pair{MetricKind::Sphere, k},
                                  std::pair{MetricKind::Hyperbolic, -k}}) {
        const MetricSpec g = builtin_metric(kind, n);
        const CurvatureEngine e(g);
        for (const Point& p : sample(g.chart(), {.count = 200})) {
          const CurvatureData d = e.curvature(p);
          worst = std::max(worst, normalized_sup(d.ricci - lambda * d.metric, d.metric));
        }
      }
    }
    const double dt = seconds_since(t0);
    c.detail << " sup=" << fmt(worst) << " time=" << fmt(dt) << "s";
    c.require(worst < 1e-9, "residual");
    c.require(dt < 5.0, "runtime");
  });

  report(2, "conformal formula oracle on 10 catalog pairs, sup < 1e-9", [](Criterion& c) {
    const auto pairs = oracle_pairs();
    c.require(pairs.size() == 10, "pair count");
    double worst = 0.0;
    for (const auto& [name, spec] : pairs) {
      const OracleResult r = conformal_oracle_check(spec, {}, 1e-9);
      worst = std::max({worst, r.ricci.sup_residual, r.scalar.sup_residual, r.connection.sup_residual});
      c.require(r.ricci.passed && r.scalar.passed && r.connection.passed, name);
    }
    c.detail << " sup=" << fmt(worst);
  });

  report(3, "thm2_flat grid: Einstein, lambda = (n-1)R^2, spread < 1e-8, a_bar = 0, b_bar = -1",
         [](Criterion& c) {
           double worst_lambda = 0.0, worst_spread = 0.0, worst_const = 0.0;
           for (auto [n1, n2] : {std::pair{1, 2}, std::pair{2, 2}, std::pair{2, 3}}) {
             for (double R : {0.5, 1.0, 2.0}) {
               const Scenario s = instantiate("thm2_flat", {{"n1", n1}, {"n2", n2}, {"R", R}});
               const double n = n1 + n2;
               const EinsteinEstimate e = einstein_check(conformal_metric(*s.conformal, s.plan), s.plan);
               const double expected = (n - 1.0) * R * R;
               const std::string tag = std::to_string(n1) + "x" + std::to_string(n2) + " R=" + fmt(R);
               c.require(e.passed, tag + " einstein");
               worst_lambda = std::max(worst_lambda, std::abs(e.lambda_hat - expected) / expected);
               worst_spread = std::max(worst_spread, e.lambda_spread);
               c.require(std::abs(e.lambda_hat - expected) <= 1e-6 * expected, tag + " lambda");
               c.require(e.lambda_spread < 1e-8, tag + " spread");
               const Case2Result k = case2_check(blocks(s).factor(0), blocks(s).factor(1), *s.phi1,
                                                 *s.phi2, s.plan);
               worst_const = std::max({worst_const, std::abs(k.constants.a_bar),
                                       std::abs(k.constants.b_bar + 1.0)});
               c.require(std::abs(k.constants.a_bar) <= 1e-6, tag + " a_bar");
               c.require(std::abs(k.constants.b_bar + 1.0) <= 1e-6, tag + " b_bar");
             }
           }
           c.detail << " lambda_rel=" << fmt(worst_lambda) << " spread=" << fmt(worst_spread)
                    << " const=" << fmt(worst_const);
         });

  report(4, "mixed-Ricci-flat verdict agrees with split residual on 6 + 4 instances", [](Criterion& c) {
    const auto inst = split_instances();
    int pos = 0, neg = 0;
    for (const SplitInstance& i : inst) {
      (i.splits ? pos : neg)++;
      const bool mixed = mixed_ricci_flat_check(i.blocks, i.phi, {}).passed;
      const bool split = split_factor(i.blocks, i.phi, std::nullopt, {}).residual.passed;
      c.require(mixed == split, i.name + " disagree");
      c.require(mixed == i.splits, i.name + " unexpected");
    }
    c.require(pos == 6 && neg == 4, "instance counts");
    c.detail << " positive=" << pos << " negative=" << neg;
  });

  report(5, "Laplacian fit on sphere_hyperbolic recovers a_i, b_i and both scalar identities",
         [](Criterion& c) {
           double worst = 0.0, worst_s = 0.0, worst_sbar = 0.0;
           for (double b : {-0.5, 0.0, 0.3}) {
             const Scenario s = instantiate("sphere_hyperbolic", {{"b", b}});
             const MetricSpec& g1 = blocks(s).factor(0);
             const MetricSpec& g2 = blocks(s).factor(1);
             const double n1 = static_cast<double>(g1.dim());
             const double n2 = static_cast<double>(g2.dim());
             const double n = n1 + n2;
             const Lemma2Fit f = lemma2_fit(g1, g2, *s.phi1, *s.phi2, s.plan);
             const std::string tag = "b=" + fmt(b);
             for (auto [got, want] : {std::pair{f.a1, n1}, std::pair{f.a2, -n2}, std::pair{f.b1, n1 * b},
                                      std::pair{f.b2, n2 * b}}) {
               worst = std::max(worst, std::abs(got - want));
               c.require(std::abs(got - want) <= 1e-6, tag + " fit constant");
             }
             const double ds = std::abs(f.s - (n - 1.0) * (f.a1 + f.a2));
             worst_s = std::max(worst_s, ds);
             c.require(ds < 1e-8, tag + " s identity");
             // s-bar sampled pointwise from the direct curvature of the rescaled metric.
             const CurvatureEngine bar(conformal_metric(*s.conformal, s.plan));
             for (const Point& p : sample(s.conformal->base.chart(), s.plan)) {
               const double d = std::abs(bar.curvature(p).scalar - (n - 1.0) * (f.c1 + f.c2));
               worst_sbar = std::max(worst_sbar, d);
             }
             c.require(worst_sbar < 1e-6, tag + " s-bar identity");
           }
           c.detail << " fit=" << fmt(worst) << " s=" << fmt(worst_s) << " sbar=" << fmt(worst_sbar);
         });

  report(6, "structured verdicts equal direct Einstein verdicts on every scenario; case-II relations < 1e-8",
         [](Criterion& c) {
           int compared = 0;
           double worst_relation = 0.0;
           for (const std::string& name : scenario_names()) {
             const Scenario s = instantiate(name);
             if (s.warped) {
               const Case1Result r = case1_check(*s.warped, s.plan);
               c.require(r.verdicts_agree, name + " case1");
               ++compared;
             }
             if (s.conformal && s.conformal->blocks && s.conformal->blocks->factor_count() == 2) {
               const DichotomyResult t = dichotomy_check(*s.conformal->blocks, s.conformal->phi, s.plan);
               c.require(t.verdicts_agree, name + " dichotomy");
               ++compared;
             }
             if (s.phi1 && s.phi2 && s.conformal->blocks) {
               const auto& bl = *s.conformal->blocks;
               try {
                 const Case2Result r = case2_check(bl.factor(0), bl.factor(1), *s.phi1, *s.phi2, s.plan);
                 c.require(r.verdicts_agree, name + " case2");
                 ++compared;
                 if (r.direct.passed) {
                   int relations = 0;
                   for (const ResidualReport& rep : r.checks) {
                     const std::string& k = rep.check_name;
                     if (k.find("shift") != std::string::npos || k.find("ratio") != std::string::npos ||
                         k.find("split") != std::string::npos || k.find("balance") != std::string::npos) {
                       ++relations;
                       worst_relation = std::max(worst_relation, rep.sup_residual);
                       c.require(rep.sup_residual < 1e-8, name + " " + k);
                     }
                   }
                   c.require(relations == 6, name + " relation count");
                 }
               } catch (const Error& e) {
                 c.require(e.code() == ErrorCode::ConstantSummand, name + " case2 error");
               }
             }
           }
           c.detail << " comparisons=" << compared << " relations_sup=" << fmt(worst_relation);
         });

  report(7, "warped_sphere lambda = p for p = 2, 3; mo_cylinder Einstein with lambda = 5", [](Criterion& c) {
    for (double p : {2.0, 3.0}) {
      const Scenario s = instantiate("warped_sphere", {{"p", p}});
      const Case1Result r = case1_check(*s.warped, s.plan);
      c.detail << " p=" << p << ":" << r.direct.lambda_hat;
      c.require(r.passed && r.direct.passed, "warped_sphere verdict");
      c.require(near_rel(r.direct.lambda_hat, p, 1e-6), "warped_sphere lambda");
    }
    const Scenario m = instantiate("mo_cylinder");
    const EinsteinEstimate e = einstein_check(conformal_metric(*m.conformal, m.plan), m.plan);
    c.detail << " mo_cylinder:" << e.lambda_hat;
    c.require(e.passed, "mo_cylinder verdict");
    c.require(near_rel(e.lambda_hat, 5.0, 1e-6), "mo_cylinder lambda");
  });

  report(8, "twisted identity < 1e-12; doubly twisted Einstein but not warped", [](Criterion& c) {
    const Scenario t = instantiate("twisted_split");
    const ResidualReport id =
        metric_identity_check("twisted", *t.twisted, conformal_metric(*t.conformal, t.plan), t.plan, 1e-12);
    c.detail << " identity=" << fmt(id.sup_residual);
    c.require(id.passed, "twisted identity");
    const Scenario d = instantiate("doubly_twisted_einstein");
    const EinsteinEstimate e = einstein_check(doubly_twisted_metric(*d.doubly_twisted), d.plan);
    c.require(e.passed, "doubly twisted Einstein");
    c.require(!warped_form_check(*d.doubly_twisted, d.plan).passed, "warped form should fail");
  });

  report(9, "full suite twice: identical reports apart from timestamp, < 60 s", [](Criterion& c) {
    const auto t0 = Clock::now();
    std::vector<std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
      std::size_t i = 0;
      for (const std::string& name : scenario_names()) {
        RunConfig cfg;
        cfg.scenario = name;
        RunOutcome r = run(cfg);
        c.require(r.exit_code == 0, name + " exit " + std::to_string(r.exit_code));
        r.report.erase("generated_at");
        const std::string text = r.report.dump();
        if (pass == 0) {
          first.push_back(text);
        } else {
          c.require(first[i] == text, name + " differs");
        }
        ++i;
      }
    }
    const double dt = seconds_since(t0);
    c.detail << " time=" << fmt(dt) << "s";
    c.require(dt < 60.0, "runtime");
  });

  return failures == 0 ? 0 : 1;
}
