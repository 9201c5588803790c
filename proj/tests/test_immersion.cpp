#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tubecomp/errors.hpp"
#include "tubecomp/immersion.hpp"

using namespace tubecomp;
using std::numbers::pi;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// A random interior parameter point of the chart box.
Vec random_param(const ImmersionChart& chart, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(0.05, 0.95);
  Vec x(chart.n());
  for (int i = 0; i < chart.n(); ++i) {
    const Axis& a = chart.axes()[i];
    x(i) = a.lower + ud(rng) * (a.upper - a.lower);
  }
  return x;
}

std::vector<ImmersionChart> all_builtins() {
  std::vector<ImmersionChart> charts;
  charts.push_back(ImmersionChart::builtin("sphere", {2, 2.0}, Ambient::euclidean(3)));
  charts.push_back(ImmersionChart::builtin("sphere", {2, 1.0}, Ambient::euclidean(4)));
  charts.push_back(ImmersionChart::builtin("sphere", {3, 1.5}, Ambient::euclidean(4)));
  charts.push_back(ImmersionChart::builtin("circle3", {1.5}, Ambient::euclidean(3)));
  charts.push_back(ImmersionChart::builtin("torus_rev", {2.0, 1.0}, Ambient::euclidean(3)));
  charts.push_back(ImmersionChart::builtin("flat_torus4", {1.0, 0.7}, Ambient::euclidean(4)));
  charts.push_back(ImmersionChart::builtin("great_subsphere", {2, 1}, Ambient::space_form(3, 1.0)));
  charts.push_back(ImmersionChart::builtin("small_subsphere", {2, 2, 0.6}, Ambient::space_form(4, 1.0)));
  charts.push_back(ImmersionChart::builtin("small_subsphere", {2, 1, 0.6}, Ambient::space_form(3, -1.0)));
  charts.push_back(ImmersionChart::builtin("cone_cross_section", {3, 0.8, 1.2}, Ambient::warped_cone(3, 0.8)));
  return charts;
}

}  // namespace

TEST_SUITE("immersion") {
  TEST_CASE("expression parser") {
    ExpressionList circle = ExpressionList::parse("2*cos(x1), 2*sin(x1), 0", 1, 3);
    double x = 0.7, out[3];
    circle.evaluate(&x, out);
    CHECK(out[0] == doctest::Approx(2 * std::cos(0.7)).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(2 * std::sin(0.7)).epsilon(1e-15));
    CHECK(out[2] == 0.0);

    ExpressionList ops = ExpressionList::parse("-x1^2, 2^3^2, pow(x1, 3) / 4 - sqrt(x1) + exp(x1) - cosh(x1) + sinh(x1), pi + e", 1);
    double y = 1.3, r[4];
    ops.evaluate(&y, r);
    CHECK(r[0] == doctest::Approx(-1.69).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(512.0).epsilon(1e-15));
    CHECK(r[2] == doctest::Approx(std::pow(1.3, 3) / 4 - std::sqrt(1.3) + std::exp(1.3) - std::cosh(1.3) + std::sinh(1.3))
                      .epsilon(1e-14));
    CHECK(r[3] == doctest::Approx(pi + std::numbers::e).epsilon(1e-15));

    try {
      ExpressionList::parse("sin(x1", 1);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.column() == 7);
      CHECK(std::string(e.what()).find("expected ')'") != std::string::npos);
    }
    CHECK_THROWS_AS(ExpressionList::parse("x1 +", 1), ParseError);
    CHECK_THROWS_AS(ExpressionList::parse("x3", 2), ParseError);
    CHECK_THROWS_AS(ExpressionList::parse("tan(x1)", 1), ParseError);
    CHECK_THROWS_AS(ExpressionList::parse("x1, x1", 1, 3), ArityError);
    CHECK_THROWS_AS(ImmersionChart::from_expression(Ambient::euclidean(3), "cos(x1), sin(x1)",
                                                    {Axis{0, 2 * pi, true}}),
                    ArityError);
  }

  TEST_CASE("jet arithmetic matches finite differences") {
    ExpressionList f = ExpressionList::parse("sin(x1*x2) / (2 + cos(x2)) + pow(x1, x2) - sqrt(1 + x1^2)", 2, 1);
    Vec x = vec({0.8, 1.3});
    Jet2 in[2] = {Jet2::variable(x(0), 0), Jet2::variable(x(1), 1)};
    Jet2 out;
    f.evaluate(in, &out);
    auto val = [&](double a, double b) {
      double xs[2] = {a, b}, o;
      f.evaluate(xs, &o);
      return o;
    };
    const double h = 1e-4;
    CHECK(out.v == doctest::Approx(val(x(0), x(1))).epsilon(1e-15));
    CHECK(std::abs(out.g[0] - (val(x(0) + h, x(1)) - val(x(0) - h, x(1))) / (2 * h)) < 1e-7);
    CHECK(std::abs(out.g[1] - (val(x(0), x(1) + h) - val(x(0), x(1) - h)) / (2 * h)) < 1e-7);
    const double hxy = (val(x(0) + h, x(1) + h) - val(x(0) + h, x(1) - h) - val(x(0) - h, x(1) + h) +
                        val(x(0) - h, x(1) - h)) /
                       (4 * h * h);
    CHECK(std::abs(out.h[0][1] - hxy) < 1e-5);
    CHECK(out.h[0][1] == out.h[1][0]);
    const double hxx = (val(x(0) + h, x(1)) - 2 * val(x(0), x(1)) + val(x(0) - h, x(1))) / (h * h);
    CHECK(std::abs(out.h[0][0] - hxx) < 1e-5);
  }

  TEST_CASE("expression torus matches the built-in") {
    ImmersionChart expr = ImmersionChart::from_expression(
        Ambient::euclidean(3), "(2+cos(x2))*cos(x1), (2+cos(x2))*sin(x1), sin(x2)",
        {Axis{0, 2 * pi, true}, Axis{0, 2 * pi, true}});
    ImmersionChart built = ImmersionChart::builtin("torus_rev", {2.0, 1.0}, Ambient::euclidean(3));
    std::mt19937_64 rng(3);
    for (int s = 0; s < 20; ++s) {
      Vec x = random_param(built, rng);
      ChartJet a = expr.jet(x), b = built.jet(x);
      CHECK((a.value - b.value).norm() < 1e-14);
      CHECK((a.jacobian - b.jacobian).norm() < 1e-14);
      for (int c = 0; c < 3; ++c) CHECK((a.hessians[c] - b.hessians[c]).norm() < 1e-13);
    }
  }

  TEST_CASE("dual derivatives agree with central differences on all built-ins") {
    std::mt19937_64 rng(5);
    for (ImmersionChart chart : all_builtins()) {
      ImmersionChart fd = chart;
      fd.set_derivative_mode(DerivativeMode::FiniteDifference, 1e-5);
      for (int s = 0; s < 5; ++s) {
        Vec x = random_param(chart, rng);
        ChartJet a = chart.jet(x);
        Vec p = chart.point(x);
        // Independent first-derivative oracle at the specified step.
        for (int i = 0; i < chart.n(); ++i) {
          Vec e = Vec::Zero(chart.n());
          e(i) = 1e-5;
          Vec d = (chart.point(x + e) - chart.point(x - e)) / 2e-5;
          CHECK((a.jacobian.col(i) - d).lpNorm<Eigen::Infinity>() < 1e-7);
        }
        ChartJet b = fd.jet(x);
        CHECK((a.value - p).norm() == 0.0);
        CHECK((a.jacobian - b.jacobian).lpNorm<Eigen::Infinity>() < 1e-7);
        for (int c = 0; c < chart.ambient().coord_dim(); ++c)
          CHECK((a.hessians[c] - b.hessians[c]).lpNorm<Eigen::Infinity>() < 1e-5);
      }
    }
  }

  TEST_CASE("built-in points lie on the ambient and periodic axes close") {
    std::mt19937_64 rng(7);
    for (const ImmersionChart& chart : all_builtins()) {
      for (int s = 0; s < 5; ++s) {
        Vec x = random_param(chart, rng);
        CHECK_NOTHROW(chart.ambient().check_point(chart.point(x)));
        for (int i = 0; i < chart.n(); ++i) {
          const Axis& a = chart.axes()[i];
          if (!a.periodic) continue;
          Vec y = x;
          y(i) += a.upper - a.lower;
          CHECK((chart.point(y) - chart.point(x)).norm() < 1e-10);
          CHECK((chart.wrap(y) - x).norm() < 1e-12);
        }
      }
    }
  }

  TEST_CASE("builtin validation") {
    CHECK_THROWS_AS(ImmersionChart::builtin("torus_rev", {2.0, 1.0}, Ambient::euclidean(4)), DimensionError);
    try {
      ImmersionChart::builtin("great_subsphere", {2, 2}, Ambient::space_form(3, 1.0));
      FAIL("expected a dimension error");
    } catch (const DimensionError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("n + m = 4") != std::string::npos);
      CHECK(msg.find("k = 3") != std::string::npos);
    }
    CHECK_THROWS_AS(ImmersionChart::builtin("sphere", {2}, Ambient::euclidean(3)), ArityError);
    CHECK_THROWS_AS(ImmersionChart::builtin("nosuch", {}, Ambient::euclidean(3)), DomainError);
    CHECK_THROWS_AS(ImmersionChart::builtin("sphere", {2, 1.0}, Ambient::space_form(3, 1.0)), DomainError);
    CHECK_THROWS_AS(ImmersionChart::builtin("cone_cross_section", {3, 0.5, 1.0}, Ambient::warped_cone(3, 0.8)),
                    DomainError);
    CHECK_THROWS_AS(ImmersionChart::builtin("small_subsphere", {2, 1, 4.0}, Ambient::space_form(3, 1.0)),
                    DomainError);
    CHECK(ImmersionChart::builtin_names().size() == 7);
  }

  TEST_CASE("degenerate immersion") {
    ImmersionChart chart = ImmersionChart::from_expression(Ambient::euclidean(3), "x1^2, x1^3, x2",
                                                           {Axis{-1, 1, false}, Axis{0, 1, false}});
    CHECK_THROWS_AS(shape_data(chart, vec({0.0, 0.5})), DegenerateError);
    CHECK_NOTHROW(shape_data(chart, vec({0.5, 0.5})));
  }

  TEST_CASE("shape data invariants on all built-ins") {
    std::mt19937_64 rng(11);
    for (const ImmersionChart& chart : all_builtins()) {
      const Ambient& M = chart.ambient();
      for (int s = 0; s < 5; ++s) {
        Vec x = random_param(chart, rng);
        ShapeData sd = shape_data(chart, x);
        const Vec& p = sd.point;
        CHECK((sd.metric - sd.metric.transpose()).norm() == 0.0);
        CHECK(min_eigenvalue(sd.metric) > 0.0);
        for (int a = 0; a < sd.m(); ++a) {
          CHECK((sd.second[a] - sd.second[a].transpose()).norm() == 0.0);
          for (int b = 0; b < sd.m(); ++b)
            CHECK(std::abs(M.inner(p, sd.normals.col(a), sd.normals.col(b)) - (a == b ? 1.0 : 0.0)) < 1e-10);
          for (int i = 0; i < sd.n(); ++i) CHECK(std::abs(M.inner(p, sd.normals.col(a), sd.tangents.col(i))) < 1e-10);
        }
        // H from the trace of h, recomputed independently.
        Vec H = Vec::Zero(M.coord_dim());
        for (int a = 0; a < sd.m(); ++a) {
          double tr = 0.0;
          for (int i = 0; i < sd.n(); ++i)
            for (int j = 0; j < sd.n(); ++j) tr += sd.metric_inv(i, j) * sd.second[a](i, j);
          H += tr / sd.n() * sd.normals.col(a);
        }
        CHECK((H - sd.mean_curvature).lpNorm<Eigen::Infinity>() < 1e-9);
        // The orthonormal tangent basis really is orthonormal.
        Mat E = sd.tangents * sd.tangent_basis;
        for (int i = 0; i < sd.n(); ++i)
          for (int j = 0; j < sd.n(); ++j)
            CHECK(std::abs(M.inner(p, E.col(i), E.col(j)) - (i == j ? 1.0 : 0.0)) < 1e-12);
      }
    }
  }

  TEST_CASE("round sphere of radius 2") {
    ImmersionChart chart = ImmersionChart::builtin("sphere", {2, 2.0}, Ambient::euclidean(3));
    Vec x = vec({1.1, 0.4});
    ShapeData sd = shape_data(chart, x);
    Vec out = sd.point / sd.point.norm();
    CHECK(sd.mean_curvature.norm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((sd.mean_curvature + 0.5 * out).norm() < 1e-12);
    // FD oracle: second derivative of a unit-speed great circle through the point.
    Vec t = sd.tangents.col(1).normalized();
    auto curve = [&](double s) { return Vec(2.0 * (std::cos(s / 2.0) * out + std::sin(s / 2.0) * t)); };
    const double hs = 1e-3;
    Vec acc = (curve(hs) - 2 * curve(0) + curve(-hs)) / (hs * hs);
    CHECK(acc.dot(out) == doctest::Approx(-0.5).epsilon(1e-6));

    Vec xi_out = sd.normal_coefficients(chart.ambient(), out);
    CHECK(xi_out.norm() == doctest::Approx(1.0).epsilon(1e-12));
    Vec k = principal_curvatures(sd, xi_out);
    CHECK(k(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(k(1) == doctest::Approx(0.5).epsilon(1e-12));
    Vec kin = principal_curvatures(sd, -xi_out);
    CHECK(kin(0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(kin(1) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK_THROWS_AS(principal_curvatures(sd, 1.01 * xi_out), DomainError);
  }

  TEST_CASE("flat torus in euclidean 4-space") {
    ImmersionChart chart = ImmersionChart::builtin("flat_torus4", {1.0, 1.0}, Ambient::euclidean(4));
    ShapeData sd = shape_data(chart, vec({0.3, 2.1}));
    CHECK((sd.metric - Mat::Identity(2, 2)).norm() < 1e-14);
    // Each unit circle contributes h(e_i, e_i) of norm 1 in orthogonal normal directions, so
    // H = (h(e_1, e_1) + h(e_2, e_2)) / 2 has norm sqrt(2) / 2.
    Vec direct = -0.5 * (Vec(4) << std::cos(0.3), std::sin(0.3), std::cos(2.1), std::sin(2.1)).finished();
    CHECK((sd.mean_curvature - direct).norm() < 1e-12);
    CHECK(sd.mean_curvature.norm() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    HRank hr = h_rank_and_xi(sd);
    CHECK(hr.rank == 2);
  }

  TEST_CASE("totally geodesic great subspheres") {
    for (auto [n, m] : {std::pair{2, 1}, std::pair{2, 2}, std::pair{1, 2}, std::pair{3, 1}}) {
      ImmersionChart chart = ImmersionChart::builtin("great_subsphere", {double(n), double(m)},
                                                     Ambient::space_form(n + m, 1.0));
      std::mt19937_64 rng(n * 10 + m);
      for (int s = 0; s < 3; ++s) {
        ShapeData sd = shape_data(chart, random_param(chart, rng));
        for (const Mat& h : sd.second) CHECK(h.norm() <= 1e-9);
        CHECK(k_star(sd) == 0.0);
        Vec xi = Vec::Zero(m);
        xi(0) = 1.0;
        CHECK(classify_normal(sd, xi).label == NormalClass::M);
        CHECK(principal_curvatures(sd, xi).cwiseAbs().maxCoeff() <= 1e-9);
        SigmaPlusProbe probe = sigma_plus_probe(sd);
        CHECK_FALSE(probe.positive);
        CHECK(std::abs(probe.value) <= 1e-9);
      }
    }
  }

  TEST_CASE("small subsphere principal curvatures") {
    // Geodesic sphere of radius r: kappa = cot_delta(r) for the normal pointing away from the center.
    for (double delta : {1.0, -1.0}) {
      const double r = 0.6;
      ImmersionChart chart = ImmersionChart::builtin("small_subsphere", {2, 1, r}, Ambient::space_form(3, delta));
      ShapeData sd = shape_data(chart, vec({1.0, 0.5}));
      const double expected = delta > 0 ? 1.0 / std::tan(r) : 1.0 / std::tanh(r);
      Vec k = principal_curvatures(sd, Vec::Constant(1, 1.0));
      CHECK(std::abs(std::abs(k(0)) - expected) < 1e-10);
      CHECK(std::abs(k(1) - k(0)) < 1e-10);
      CHECK(chart.ambient().norm(sd.point, sd.mean_curvature) == doctest::Approx(expected).epsilon(1e-10));
    }
  }

  TEST_CASE("k_star examples") {
    for (double R : {1.0, 2.0}) {
      ImmersionChart chart = ImmersionChart::builtin("sphere", {2, R}, Ambient::euclidean(3));
      ShapeData sd = shape_data(chart, vec({0.9, 2.0}));
      CHECK(k_star(sd) == doctest::Approx(2.0 / (R * R)).epsilon(1e-12));
    }
    ImmersionChart s3 = ImmersionChart::builtin("sphere", {3, 1.5}, Ambient::euclidean(4));
    CHECK(k_star(shape_data(s3, vec({0.7, 1.2, 4.0}))) == doctest::Approx(2.0 / std::pow(1.5, 3)).epsilon(1e-12));
    for (double R : {1.0, 1.5, 3.0}) {
      ImmersionChart circle = ImmersionChart::builtin("circle3", {R}, Ambient::euclidean(3));
      ShapeData sd = shape_data(circle, vec({0.77}));
      CHECK(k_star(sd) == doctest::Approx(4.0 / R).epsilon(1e-12));
    }
    // m = 3: a circle in R^4, K* = |S^1| integral of |<h, xi>| = 2 pi * (1/R) * mean |cos| over S^2 = 2 pi / R.
    ImmersionChart c4 = ImmersionChart::from_expression(Ambient::euclidean(4), "2*cos(x1), 2*sin(x1), 0, 0",
                                                        {Axis{0, 2 * pi, true}});
    CHECK(k_star(shape_data(c4, vec({0.4}))) == doctest::Approx(pi).epsilon(1e-10));
    // m = 3 surface: unit S^2 in a hyperplane of R^5 has det<h, xi> = <nu, xi>^2, so K* = 4 pi / 3.
    ImmersionChart s5 = ImmersionChart::builtin("sphere", {2, 1.0}, Ambient::euclidean(5));
    CHECK(k_star(shape_data(s5, vec({1.2, 0.3}))) == doctest::Approx(4 * pi / 3).epsilon(1e-10));

  }

  TEST_CASE("k_star frame invariance") {
    std::mt19937_64 rng(13);
    std::vector<ImmersionChart> charts;
    charts.push_back(ImmersionChart::builtin("flat_torus4", {1.0, 0.7}, Ambient::euclidean(4)));
    charts.push_back(ImmersionChart::builtin("sphere", {2, 1.0}, Ambient::euclidean(4)));
    charts.push_back(ImmersionChart::from_expression(Ambient::euclidean(4),
                                                     "cos(x1), sin(x1), 0.5*cos(2*x1), 0.3*sin(3*x1)",
                                                     {Axis{0, 2 * pi, true}}));
    charts.push_back(ImmersionChart::builtin("small_subsphere", {2, 2, 0.6}, Ambient::space_form(4, 1.0)));
    for (const ImmersionChart& chart : charts) {
      for (int s = 0; s < 3; ++s) {
        ShapeData sd = shape_data(chart, random_param(chart, rng));
        const double base = k_star(sd);
        // Random rotation of the normal frame.
        Mat Q = Eigen::HouseholderQR<Mat>(oracle::random_gaussian(rng, sd.m() * sd.m()).reshaped(sd.m(), sd.m()))
                    .householderQ();
        ShapeData rotated = sd;
        rotated.normals = sd.normals * Q;
        for (int a = 0; a < sd.m(); ++a) {
          rotated.second[a] = Mat::Zero(sd.n(), sd.n());
          for (int b = 0; b < sd.m(); ++b) rotated.second[a] += Q(b, a) * sd.second[b];
        }
        CHECK(std::abs(k_star(rotated) - base) <= 1e-9 * std::max(1.0, base));
        // Reparametrization of the tangent basis: x -> A x changes g and h by congruence.
        Mat A = Mat::Identity(sd.n(), sd.n()) + 0.3 * oracle::random_gaussian(rng, sd.n() * sd.n()).reshaped(sd.n(), sd.n());
        ShapeData repar = sd;
        repar.metric = A.transpose() * sd.metric * A;
        Eigen::LLT<Mat> llt(repar.metric);
        repar.metric_chol = llt.matrixL();
        repar.tangent_basis = repar.metric_chol.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(sd.n(), sd.n()));
        for (int a = 0; a < sd.m(); ++a) repar.second[a] = A.transpose() * sd.second[a] * A;
        CHECK(std::abs(k_star(repar) - base) <= 1e-9 * std::max(1.0, base));
      }
    }
  }

  TEST_CASE("antipodal and trace identities") {
    std::mt19937_64 rng(17);
    for (const ImmersionChart& chart : all_builtins()) {
      for (int s = 0; s < 4; ++s) {
        ShapeData sd = shape_data(chart, random_param(chart, rng), false);
        Vec xi = oracle::random_unit(rng, sd.m());
        Vec k = principal_curvatures(sd, xi);
        Vec km = principal_curvatures(sd, -xi);
        const int n = sd.n();
        for (int i = 0; i < n; ++i) CHECK(std::abs(km(i) + k(n - 1 - i)) < 1e-10);
        CHECK(std::abs(std::abs(k.prod()) - std::abs(km.prod())) < 1e-10);
        const double H_xi = chart.ambient().inner(sd.point, sd.mean_curvature, sd.normal_vector(xi));
        CHECK(std::abs(k.sum() + n * H_xi) < 1e-9);
      }
    }
  }

  TEST_CASE("normal classification") {
    ImmersionChart chart = ImmersionChart::builtin("sphere", {2, 1.0}, Ambient::euclidean(3));
    ShapeData sd = shape_data(chart, vec({0.5, 0.5}));
    Vec out = sd.normal_coefficients(chart.ambient(), sd.point.normalized());
    NormalClassification c = classify_normal(sd, out);
    CHECK(c.label == NormalClass::L);
    CHECK(c.kappa_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.tolerance == 1e-8);
    CHECK(classify_normal(sd, -out).label == NormalClass::N);
    CHECK(normal_class_letter(NormalClass::M) == 'M');
  }

  TEST_CASE("sigma plus probe") {
    ImmersionChart sphere = ImmersionChart::builtin("sphere", {2, 2.0}, Ambient::euclidean(3));
    ShapeData sd = shape_data(sphere, vec({1.0, 1.0}));
    SigmaPlusProbe p = sigma_plus_probe(sd);
    CHECK(p.positive);
    CHECK(p.value == doctest::Approx(0.5).epsilon(1e-12));
    Vec out = sd.normal_coefficients(sphere.ambient(), sd.point.normalized());
    CHECK((p.xi - out).norm() < 1e-12);

    // Round S^2 in a hyperplane of R^4: the in-hyperplane outward normal, value 1/R.
    ImmersionChart s4 = ImmersionChart::builtin("sphere", {2, 1.0}, Ambient::euclidean(4));
    ShapeData sd4 = shape_data(s4, vec({0.8, 2.2}));
    SigmaPlusProbe p4 = sigma_plus_probe(sd4);
    CHECK(p4.positive);
    CHECK(p4.value == doctest::Approx(1.0).epsilon(1e-6));

    // Torus inner equator (cos v = -1): kappa = -1/(R - r) and 1/r for the outward normal, so
    // every normal has a negative principal curvature.
    ImmersionChart torus = ImmersionChart::builtin("torus_rev", {2.0, 1.0}, Ambient::euclidean(3));
    ShapeData st = shape_data(torus, vec({0.3, pi}));
    SigmaPlusProbe pt = sigma_plus_probe(st);
    CHECK_FALSE(pt.positive);
    CHECK(pt.value < 0.0);
    Vec k = principal_curvatures(st, Vec::Constant(1, 1.0));
    CHECK(std::abs(std::abs(k(0)) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(k(1)) - 1.0) < 1e-12);
    CHECK(k(0) * k(1) < 0.0);
    // Outer equator: convex.
    ShapeData so = shape_data(torus, vec({0.3, 0.0}));
    CHECK(sigma_plus_probe(so).positive);
  }

  TEST_CASE("second fundamental form rank") {
    ImmersionChart s3 = ImmersionChart::builtin("sphere", {2, 2.0}, Ambient::euclidean(3));
    HRank r3 = h_rank_and_xi(shape_data(s3, vec({1.0, 1.0})));
    CHECK(r3.rank == 1);
    ImmersionChart s4 = ImmersionChart::builtin("sphere", {2, 1.0}, Ambient::euclidean(4));
    ShapeData sd = shape_data(s4, vec({0.8, 2.2}));
    HRank r4 = h_rank_and_xi(sd);
    CHECK(r4.rank == 1);
    Vec out = sd.normal_vector(r4.xi);
    Vec expected = sd.point.normalized();
    CHECK((out - expected).norm() < 1e-12);
    CHECK(principal_curvatures(sd, r4.xi)(0) > 0.0);
    // Saddle point of a hypersurface: rank 1 but no orientation is convex.
    ImmersionChart saddle = ImmersionChart::from_expression(Ambient::euclidean(3), "x1, x2, x1^2 - x2^2",
                                                            {Axis{-1, 1, false}, Axis{-1, 1, false}});
    CHECK_THROWS_AS(h_rank_and_xi(shape_data(saddle, vec({0.0, 0.0}))), AmbiguousOrientation);
  }

  TEST_CASE("normal connection of a flat torus vanishes and rotates for a twisted frame") {
    ImmersionChart chart = ImmersionChart::builtin("flat_torus4", {1.0, 1.0}, Ambient::euclidean(4));
    ShapeData sd = shape_data(chart, vec({0.4, 1.1}));
    REQUIRE(sd.has_normal_connection);
    // Independent oracle: differentiate the normals of neighbouring frames directly.
    for (int i = 0; i < 2; ++i) {
      Vec e = Vec::Zero(2);
      e(i) = 1e-5;
      ShapeData p = shape_data(chart, vec({0.4, 1.1}) + e, false);
      ShapeData q = shape_data(chart, vec({0.4, 1.1}) - e, false);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double oracle = sd.normals.col(b).dot((p.normals.col(a) - q.normals.col(a)) / 2e-5);
          CHECK(std::abs(sd.normal_connection[i](b, a) - oracle) < 1e-7);
        }
      Mat G = sd.normal_connection[i];
      CHECK((G + G.transpose()).norm() < 1e-8);
    }
  }

  TEST_CASE("cone cross-section is umbilic") {
    const double a = 0.8, t0 = 1.2;
    ImmersionChart chart = ImmersionChart::builtin("cone_cross_section", {3, a, t0}, Ambient::warped_cone(3, a));
    ShapeData sd = shape_data(chart, vec({1.0, 2.0}));
    // Induced metric is (a t0)^2 times the round metric; kappa = 1/t0 against the outward radial normal.
    Vec out = sd.point.normalized();
    Vec xi = sd.normal_coefficients(chart.ambient(), out);
    Vec k = principal_curvatures(sd, xi);
    CHECK(k(0) == doctest::Approx(1.0 / t0).epsilon(1e-10));
    CHECK(k(1) == doctest::Approx(1.0 / t0).epsilon(1e-10));
    CHECK(k_star(sd) == doctest::Approx(2.0 / (t0 * t0)).epsilon(1e-10));
  }

  TEST_CASE("scalar field") {
    ScalarField zero;
    CHECK(zero.is_zero());
    double v;
    Vec g;
    Mat H;
    zero.evaluate(vec({0.1, 0.2}), v, g, H);
    CHECK(v == 0.0);
    CHECK(g.norm() == 0.0);
    ScalarField f = ScalarField::from_expression("x1^2*x2 + sin(x2)", 2);
    f.evaluate(vec({0.5, 0.3}), v, g, H);
    CHECK(v == doctest::Approx(0.075 + std::sin(0.3)).epsilon(1e-15));
    CHECK(g(0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(g(1) == doctest::Approx(0.25 + std::cos(0.3)).epsilon(1e-15));
    CHECK(H(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(H(1, 1) == doctest::Approx(-std::sin(0.3)).epsilon(1e-15));
    CHECK_THROWS_AS(ScalarField::from_expression("x1, x2", 2), ArityError);
  }
}
