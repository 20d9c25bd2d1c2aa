#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fftmor/geometry.hpp"
#include "fftmor/postproc.hpp"

using namespace fftmor;

namespace {

const std::vector<Material> kElastic{ElasticParams{1.0, 1.0}, ElasticParams{2.0, 2.0}};

MacroTensor<2> paper_load() {
  MacroTensor<2> e;
  e[0] = 0.01;
  e[1] = -0.01;
  return e;
}

SolveResult<2> scaled(const SolveResult<2>& r, double factor) {
  SolveResult<2> out = r;
  for (auto& v : out.stress.data()) v *= factor;
  return out;
}

struct CircleCase {
  PhaseMap<2> pm;
  SolveResult<2> ref;
};

const CircleCase& circle128() {
  static const CircleCase c = [] {
    CircleCase out;
    out.pm = generate_geometry<2>(Circle{{0.5, 0.5, 0.5}, 0.25}, Grid<2>({128, 128}));
    out.ref = basic_scheme_solve(out.pm, kElastic, paper_load(), full_mask(out.pm.grid));
    return out;
  }();
  return c;
}

SolveResult<2> reduced(const CircleCase& c, PatternKind kind, double R) {
  const auto mask = kind == PatternKind::adapted ? adapted_mask(c.pm, R) : radial_mask(c.pm.grid, R);
  return basic_scheme_solve(c.pm, kElastic, paper_load(), mask);
}

}  // namespace

TEST(MacroError, SelfScalingAndZeroReference) {
  const auto& c = circle128();
  EXPECT_EQ(macro_error(c.ref, c.ref), 0.0);
  EXPECT_NEAR(macro_error(scaled(c.ref, 1.02), c.ref), 0.02, 1e-12);
  EXPECT_THROW(macro_error(c.ref, scaled(c.ref, 0.0)), std::invalid_argument);
}

TEST(MicroError, SelfScalingAndExclusion) {
  const auto& c = circle128();
  EXPECT_EQ(micro_error(c.ref, c.ref), 0.0);
  EXPECT_NEAR(micro_error(scaled(c.ref, 1.05), c.ref), 0.05, 1e-13);

  Grid<2> g({2, 2});
  SolveResult<2> ref, sol;
  ref.stress = SymTensorField<2>(g);
  sol.stress = SymTensorField<2>(g);
  SymTensor<2> t;
  t[0] = 1.0;
  ref.stress.set(0, t);
  ref.stress.set(1, t);
  sol.stress.set(0, t * 1.1);
  sol.stress.set(1, t * 1.3);
  sol.stress.set(2, t);  // unloaded reference voxels are dropped
  const auto d = micro_error_detail(sol, ref);
  EXPECT_EQ(d.excluded, 2u);
  EXPECT_NEAR(d.value, 0.2, 1e-14);
  EXPECT_THROW(micro_error(sol, scaled(ref, 0.0)), std::invalid_argument);
}

TEST(ErrorMetrics, InvariantUnderComponentPermutation) {
  const auto& c = circle128();
  const auto sol = reduced(c, PatternKind::adapted, 3.06);
  // swap the 11 and 22 slots in both results
  auto swap = [](SolveResult<2> r) {
    auto a = r.stress.component(0), b = r.stress.component(1);
    std::swap_ranges(a.begin(), a.end(), b.begin());
    return r;
  };
  EXPECT_NEAR(macro_error(swap(sol), swap(c.ref)), macro_error(sol, c.ref), 1e-15);
  EXPECT_NEAR(micro_error(swap(sol), swap(c.ref)), micro_error(sol, c.ref), 1e-15);
}

TEST(StressDifference, ZeroAndConstantOffset) {
  const auto& c = circle128();
  for (double v : stress_difference_field(c.ref, c.ref).values) EXPECT_EQ(v, 0.0);
  auto shifted = c.ref;
  for (auto& v : shifted.stress.component(0)) v += 0.25;
  for (double v : stress_difference_field(shifted, c.ref).values) EXPECT_NEAR(v, 0.25, 1e-15);
  for (double v : stress_difference_field(shifted, c.ref, 2).values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(stress_difference_field(shifted, c.ref, 3), std::out_of_range);
}

TEST(StressDifference, PeakAtInterface) {
  const auto& c = circle128();
  const auto sol = reduced(c, PatternKind::adapted, 1.54);
  const auto d = stress_difference_field(sol, c.ref);
  const auto peak = std::max_element(d.values.begin(), d.values.end()) - d.values.begin();
  const auto idx = c.pm.grid.unflat(static_cast<std::size_t>(peak));
  const double x = c.pm.grid.center(0, idx[0]) - 0.5, y = c.pm.grid.center(1, idx[1]) - 0.5;
  const double dist_voxels = std::abs(std::hypot(x, y) - 0.25) * 128.0;
  EXPECT_LE(dist_voxels, 2.0 + 0.5) << "peak at " << idx[0] << "," << idx[1];
}

TEST(CompatibilityStep, FixedPointIsUnchanged) {
  const auto& c = circle128();
  SolveSettings tight;
  tight.tol_eps = 1e-12;
  const auto ref = basic_scheme_solve(c.pm, kElastic, paper_load(), full_mask(c.pm.grid), tight);
  ASSERT_TRUE(ref.converged());
  const auto out = compatibility_step(ref, c.pm, kElastic, paper_load());
  EXPECT_LE(field_l2_distance(out.strain, ref.strain), 1e-10 * field_l2_norm(ref.strain));
  EXPECT_LE(field_l2_distance(out.stress, ref.stress), 1e-10 * field_l2_norm(ref.stress));
}

TEST(CompatibilityStep, DcOnlyInputMatchesFirstReferenceIteration) {
  const auto& c = circle128();
  const auto dc = basic_scheme_solve(c.pm, kElastic, paper_load(), FrequencyMask<2>(c.pm.grid, {0}, 0.01));
  ASSERT_TRUE(dc.converged());
  for (double v : dc.strain.component(0)) ASSERT_NEAR(v, 0.01, 1e-15);
  SymTensorField<2> first;
  const IterationObserver<2> grab = [&](int, int it, const SymTensorField<2>& e) {
    if (it == 1) first = e;
  };
  basic_scheme_solve(c.pm, kElastic, paper_load(), full_mask(c.pm.grid), SolveSettings{}, grab);
  const auto out = compatibility_step(dc, c.pm, kElastic, paper_load());
  EXPECT_LE(field_l2_distance(out.strain, first), 1e-13 * field_l2_norm(first));
}

TEST(CompatibilityStep, ReducesAdaptedMicroError) {
  const auto& c = circle128();
  const auto sol = reduced(c, PatternKind::adapted, 1.54);
  const auto out = compatibility_step(sol, c.pm, kElastic, paper_load());
  EXPECT_LT(micro_error(out, c.ref), micro_error(sol, c.ref));
  EXPECT_EQ(out.iterations, std::vector<int>{1});
}

TEST(CompatibilityStep, PlasticHistoryIsNotAdvanced) {
  Grid<2> g({32, 32});
  const auto pm = generate_geometry<2>(Circle{{0.5, 0.5, 0.5}, 0.25}, g);
  std::vector<Material> mats{PlasticParams{{1.0, 1.0}, 0.01, 0.01}, ElasticParams{2.0, 2.0}};
  SolveSettings s;
  s.load_steps = 4;
  const auto sol = basic_scheme_solve(pm, mats, paper_load(), adapted_mask(pm, 6.02), s);
  ASSERT_TRUE(sol.converged());
  const auto out = compatibility_step(sol, pm, mats, paper_load());
  ASSERT_EQ(out.plastic.size(), sol.plastic.size());
  for (std::size_t i = 0; i < sol.plastic.size(); ++i) {
    EXPECT_EQ(out.plastic[i].eps_p_acc, sol.plastic[i].eps_p_acc);
    for (int k = 0; k < 6; ++k) EXPECT_EQ(out.plastic[i].eps_p[k], sol.plastic[i].eps_p[k]);
  }
}

TEST(ErrorTrend, NonIncreasingInR) {
  const auto& c = circle128();
  const std::vector<double> Rs{1.54, 3.06, 6.02, 11.64, 21.66, 36.79};
  for (auto kind : {PatternKind::radial, PatternKind::adapted}) {
    std::vector<double> e;
    for (double R : Rs) e.push_back(micro_error(reduced(c, kind, R), c.ref));
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
      EXPECT_LE(e[i + 1], 1.1 * e[i]) << to_string(kind) << " R=" << Rs[i + 1];
  }
}

TEST(ErrorTrend, AdaptedBeatsFixedAtSmallROnEveryGeometry) {
  Grid<2> g({64, 64});
  const std::map<std::string, GeometrySpec> shapes{
      {"circle", Circle{{0.5, 0.5, 0.5}, 0.25}},
      {"annulus", Annulus{{0.5, 0.5, 0.5}, 0.15, 0.3}},
      {"ellipse", Ellipse{{0.5, 0.5, 0.5}, {0.35, 0.15, 0.15}, 0.5}},
      {"square", Square{{0.5, 0.5, 0.5}, 0.4}},
      {"multi_circle", MultiCircle{}},
  };
  for (const auto& [name, spec] : shapes) {
    const auto pm = generate_geometry<2>(spec, g);
    const auto ref = basic_scheme_solve(pm, kElastic, paper_load(), full_mask(g));
    for (double R : {1.54, 3.06, 6.02}) {
      const auto a = basic_scheme_solve(pm, kElastic, paper_load(), adapted_mask(pm, R));
      const auto f = basic_scheme_solve(pm, kElastic, paper_load(), radial_mask(g, R));
      EXPECT_LT(micro_error(a, ref), micro_error(f, ref)) << name << " R=" << R;
    }
  }
}
