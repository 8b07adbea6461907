#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "weylflow/flow.hpp"

using namespace weylflow;

TEST_CASE("shrinking round sphere follows the linear exact solution") {
  FlowFamily fam = FlowFamily::round_sphere(4);
  FlowTrajectory traj = integrate_flow(fam, std::vector<double>{1.0}, 1e-3, 100);
  for (size_t i = 0; i < traj.times.size(); ++i)
    CHECK(std::abs(traj.states[i][0] - (1.0 - 6.0 * traj.times[i])) <= 1e-12);
  REQUIRE(traj.blowup_time.has_value());
  CHECK(*traj.blowup_time == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
}

TEST_CASE("equal product spheres shrink together, cylinders keep the flat factor") {
  FlowFamily prod = FlowFamily::product_spheres(2, 2);
  FlowTrajectory traj = integrate_flow(prod, std::vector<double>{1.0, 1.0}, 1e-3, 200);
  for (size_t i = 0; i < traj.times.size(); ++i) {
    CHECK(std::abs(traj.states[i][0] - (1.0 - 2.0 * traj.times[i])) <= 1e-12);
    CHECK(std::abs(traj.states[i][1] - (1.0 - 2.0 * traj.times[i])) <= 1e-12);
  }
  REQUIRE(traj.blowup_time.has_value());
  CHECK(*traj.blowup_time == doctest::Approx(0.5).epsilon(1e-10));

  FlowFamily cyl = FlowFamily::cylinder(4);
  FlowTrajectory ct = integrate_flow(cyl, std::vector<double>{1.0, 1.0}, 1e-3, 100);
  for (size_t i = 0; i < ct.times.size(); ++i) {
    CHECK(ct.states[i][0] == doctest::Approx(1.0));
    CHECK(std::abs(ct.states[i][1] - (1.0 - 4.0 * ct.times[i])) <= 1e-12);
  }
}

TEST_CASE("embedding the reduced state reproduces -2 Ric") {
  std::vector<double> pt = {0.12, -0.2, 0.16, 0.1};
  CHECK(reduction_residual(FlowFamily::round_sphere(4), std::vector<double>{0.8}, pt) <= 1e-9);
  CHECK(reduction_residual(FlowFamily::product_spheres(2, 2), std::vector<double>{0.9, 0.7}, pt) <=
        1e-9);
  CHECK(reduction_residual(FlowFamily::cylinder(4), std::vector<double>{1.1, 0.6}, pt) <= 1e-9);
  // also at interior trajectory states
  FlowFamily fam = FlowFamily::product_spheres(2, 2);
  FlowTrajectory traj = integrate_flow(fam, std::vector<double>{1.0, 1.3}, 1e-2, 20);
  for (size_t i = 0; i < traj.states.size(); i += 5)
    CHECK(reduction_residual(fam, traj.states[i], pt) <= 1e-9);
}

TEST_CASE("integration stops early when a scale collapses") {
  FlowFamily fam = FlowFamily::round_sphere(4);
  FlowTrajectory traj = integrate_flow(fam, std::vector<double>{1.0}, 1e-3, 1000);
  CHECK(traj.stopped_early);
  REQUIRE(traj.blowup_time.has_value());
  CHECK(*traj.blowup_time == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
  CHECK(traj.t_end() < 1.0 / 6.0);
}

TEST_CASE("flow input validation") {
  FlowFamily fam = FlowFamily::round_sphere(4);
  CHECK_THROWS_AS((void)integrate_flow(fam, std::vector<double>{1.0}, -1e-3, 10), FlowError);
  CHECK_THROWS_AS((void)integrate_flow(fam, std::vector<double>{-1.0}, 1e-3, 10), FlowError);
  CHECK_THROWS_AS((void)integrate_flow(fam, std::vector<double>{1.0, 2.0}, 1e-3, 10), FlowError);
  CHECK_THROWS_AS((void)FlowFamily::product_spheres(5, 5), FlowError);
}

TEST_CASE("dense state evaluation matches the linear solution between nodes") {
  FlowFamily fam = FlowFamily::round_sphere(4);
  FlowTrajectory traj = integrate_flow(fam, std::vector<double>{1.0}, 1e-2, 10);
  for (double t : {0.0049, 0.0371, 0.0999}) {
    auto s = traj.state_at(t);
    CHECK(std::abs(s[0] - (1.0 - 6.0 * t)) <= 1e-12);
  }
  CHECK_THROWS_AS((void)traj.state_at(0.2), FlowError);
}

TEST_CASE("time differences of curvature match exact solutions") {
  FlowFamily fam = FlowFamily::round_sphere(4);
  FlowTrajectory traj = integrate_flow(fam, std::vector<double>{1.0}, 1e-3, 100);
  std::vector<double> pt = {0.1, -0.05, 0.2, 0.12};

  // scalar curvature: R(t) = 12 / (1 - 6 t)
  auto scalar_q = [&](std::span<const double> s) {
    MetricChart chart = fam.chart(s);
    JetCurvature jc(chart, pt, 2, false);
    Tensor t(4, std::vector<Variance>{});
    t.data()[0] = jc.scalar.value();
    return t;
  };
  // step scaled by the remaining time to the singularity
  const double t0 = 0.05, h = 1e-3 * (1.0 / 6.0 - t0);
  Tensor dR = fd_time_derivative(traj, scalar_q, t0, h);
  const double exact = 72.0 / std::pow(1 - 6 * t0, 2);
  CHECK(std::abs(dR.data()[0] - exact) <= 1e-5 * exact);

  // defining equation: d/dt g = -2 Ric, exact for a state-linear chart
  auto metric_q = [&](std::span<const double> s) { return fam.chart(s).metric(pt); };
  Tensor dg = fd_time_derivative(traj, metric_q, t0, h);
  MetricChart chart0 = fam.chart(traj.state_at(t0));
  JetCurvature jc(chart0, pt, 2, false);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(std::abs(dg(i, j) + 2 * jc.ric[static_cast<size_t>(i) * 4 + j].value()) <= 1e-9);

  // constants differentiate to zero
  auto const_q = [&](std::span<const double>) {
    Tensor t(4, std::vector<Variance>{});
    t.data()[0] = 3.25;
    return t;
  };
  CHECK(max_abs(fd_time_derivative(traj, const_q, t0, h)) == 0.0);

  CHECK_THROWS_AS((void)fd_time_derivative(traj, scalar_q, 0.0, 1e-3), FlowError);
}

TEST_CASE("type I diagnostic: shrinking sphere stabilizes at sqrt(6)/3") {
  FlowFamily fam = FlowFamily::round_sphere(4);
  FlowTrajectory traj = integrate_flow(fam, std::vector<double>{1.0}, 1e-5, 20000);
  SingularityReport rep = singularity_type(traj);
  CHECK(rep.kind == SingularityKind::TypeI);
  CHECK(rep.limit == doctest::Approx(std::sqrt(6.0) / 3.0).epsilon(2e-3));
}

TEST_CASE("type I diagnostic: equal product spheres stabilize at sqrt(2)") {
  FlowFamily fam = FlowFamily::product_spheres(2, 2);
  FlowTrajectory traj = integrate_flow(fam, std::vector<double>{1.0, 1.0}, 1e-5, 60000);
  SingularityReport rep = singularity_type(traj);
  CHECK(rep.kind == SingularityKind::TypeI);
  // |Rm|^2 = 8/a^4 on two equal 2-sphere factors, T - t = a^2/2
  CHECK(rep.limit == doctest::Approx(std::sqrt(2.0)).epsilon(2e-3));
}

TEST_CASE("type I diagnostic: the cylinder neck stabilizes at sqrt(3)/2") {
  // |Rm|^2 = 2(n-1)(n-2) K^2 on the sphere factor and T - t = r^2/(2(n-2)),
  // so (T-t)|Rm| = sqrt((n-1)/(2(n-2)))
  FlowFamily fam = FlowFamily::cylinder(4);
  FlowTrajectory traj = integrate_flow(fam, std::vector<double>{1.0, 1.0}, 1e-5, 30000);
  SingularityReport rep = singularity_type(traj);
  CHECK(rep.kind == SingularityKind::TypeI);
  CHECK(rep.limit == doctest::Approx(std::sqrt(0.75)).epsilon(2e-3));
}

TEST_CASE("static flat tori report no singularity, short runs are inconclusive") {
  FlowFamily fam = FlowFamily::product_spheres(1, 1);
  FlowTrajectory traj = integrate_flow(fam, std::vector<double>{1.0, 1.0}, 1e-3, 50);
  SingularityReport rep = singularity_type(traj);
  CHECK(rep.kind == SingularityKind::NoSingularity);

  FlowFamily sph = FlowFamily::round_sphere(4);
  FlowTrajectory shorttraj = integrate_flow(sph, std::vector<double>{1.0}, 1e-3, 50);
  SingularityReport rep2 = singularity_type(shorttraj);
  CHECK(rep2.kind == SingularityKind::Inconclusive);
}
