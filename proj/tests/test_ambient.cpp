#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tubecomp/ambient.hpp"
#include "tubecomp/errors.hpp"
#include "tubecomp/model_functions.hpp"

using namespace tubecomp;
using std::numbers::pi;

TEST_SUITE("ambient") {
  TEST_CASE("model functions") {
    CHECK(s_delta(0, 2.5) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(s_delta(1, pi / 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(c_delta(1, pi / 2)) < 1e-15);
    CHECK(s_delta(-1, 1) == doctest::Approx(std::sinh(1.0)).epsilon(1e-15));
    for (double delta : {-1.0, 0.0, 0.7, 1.0, 4.0}) {
      for (int i = 0; i <= 50; ++i) {
        const double r = 0.05 * i;
        const double c = c_delta(delta, r), s = s_delta(delta, r);
        CHECK(std::abs(c * c + delta * s * s - 1.0) < 1e-12);
        // c is the derivative of s.
        const double h = 1e-6;
        if (r > h) CHECK(std::abs((s_delta(delta, r + h) - s_delta(delta, r - h)) / (2 * h) - c) < 1e-8);
      }
    }
    CHECK(sphere_area(3) == doctest::Approx(4 * pi).epsilon(1e-14));
    CHECK(sphere_area(4) == doctest::Approx(2 * pi * pi).epsilon(1e-14));
    CHECK(ball_volume(3) == doctest::Approx(4 * pi / 3).epsilon(1e-14));
    CHECK_THROWS_AS(sphere_area(0), DomainError);
  }

  TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(Ambient::euclidean(1), DomainError);
    CHECK_THROWS_AS(Ambient::space_form(3, 0.0), DomainError);
    CHECK_THROWS_AS(Ambient::warped_cone(3, 1.2), DomainError);
    CHECK_THROWS_AS(Ambient::warped_cone(3, 0.0), DomainError);
    CHECK(Ambient::warped_cone(3, 0.8).describe() == "cone(3,0.8)");
    CHECK(Ambient::space_form(3, 1).describe() == "spaceform(3,1)");
  }

  TEST_CASE("curvature convention self-check") { verify_curvature_convention(); }

  TEST_CASE("euclidean christoffels and curvature vanish") {
    Ambient M = Ambient::euclidean(3);
    Vec p(3);
    p << 0.3, -1.0, 2.0;
    for (double v : M.christoffel_at(p).data) CHECK(v == 0.0);
    for (double v : M.riemann_at(p).data) CHECK(v == 0.0);
  }

  TEST_CASE("space form curvature on random frames") {
    std::mt19937_64 rng(11);
    for (double delta : {1.0, 4.0, -1.0, -0.5}) {
      Ambient M = Ambient::space_form(3, delta);
      for (int trial = 0; trial < 100; ++trial) {
        Vec p = oracle::random_point(M, rng);
        Vec X = oracle::random_tangent(M, p, rng);
        Vec Y = oracle::random_tangent(M, p, rng);
        const double expect = delta * (M.inner(p, X, X) * M.inner(p, Y, Y) - std::pow(M.inner(p, X, Y), 2));
        CHECK(std::abs(M.riemann(p, X, Y, Y, X) - expect) < 1e-9 * std::max(1.0, std::abs(expect)));
        CHECK(M.sectional(p, X, Y) == doctest::Approx(delta).epsilon(1e-9));
      }
      // Frame array: R(E0,E1,E1,E0) = delta.
      Vec p = oracle::random_point(M, rng);
      CHECK(M.riemann_at(p).at(0, 1, 1, 0) == doctest::Approx(delta).epsilon(1e-12));
    }
  }

  TEST_CASE("cone christoffels match finite differences of the metric") {
    for (double a : {1.0, 0.8, 0.5}) {
      Ambient M = Ambient::warped_cone(3, a);
      Vec p(3);
      p << 0.7, -0.4, 1.1;
      auto G = oracle::fd_christoffel(oracle::cone_metric(a), p);
      Tensor T = M.christoffel_at(p);
      for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) CHECK(std::abs(T.at(l, i, j) - G[l](i, j)) < 1e-8);
    }
  }

  TEST_CASE("cone curvature matches finite differences of the metric") {
    std::mt19937_64 rng(5);
    for (double a : {1.0, 0.8, 0.5}) {
      Ambient M = Ambient::warped_cone(3, a);
      for (int trial = 0; trial < 5; ++trial) {
        Vec p = oracle::random_point(M, rng);
        Vec X = oracle::random_gaussian(rng, 3);
        Vec Y = oracle::random_gaussian(rng, 3);
        const double fd = fd_sectional_curvature(oracle::cone_metric(a), p, X, Y);
        const double analytic = M.sectional(p, X, Y);
        CHECK(std::abs(fd - analytic) < 1e-5 * std::max(1.0, std::abs(analytic)));
        if (a == 1.0) CHECK(std::abs(analytic) < 1e-14);
      }
    }
  }

  TEST_CASE("ric_k") {
    std::mt19937_64 rng(3);
    {
      Ambient M = Ambient::space_form(4, 1.0);
      Vec p = oracle::random_point(M, rng);
      Mat F = M.frame(p);
      CHECK(M.ric_k(p, F.col(0), F.middleCols(1, 2)) == doctest::Approx(2.0).epsilon(1e-12));
    }
    {
      Ambient M = Ambient::euclidean(5);
      Mat F = M.frame(Vec::Zero(5));
      CHECK(M.ric_k(Vec::Zero(5), F.col(2), F.middleCols(3, 2)) == 0.0);
    }
    {
      Ambient M = Ambient::warped_cone(3, 0.8);
      for (int trial = 0; trial < 50; ++trial) {
        Vec p = oracle::random_point(M, rng);
        Mat F = M.frame(p);
        // Rotate the frame randomly.
        Eigen::HouseholderQR<Mat> qr(oracle::random_gaussian(rng, 9).reshaped(3, 3));
        Mat Q = qr.householderQ();
        Mat E = F * Q;
        CHECK(M.ric_k(p, E.col(0), E.middleCols(1, 2)) >= -1e-14);
      }
      Vec p = oracle::random_point(M, rng);
      Mat F = M.frame(p);
      Mat bad = F.middleCols(1, 2);
      bad.col(1) *= 1.0 + 1e-8;
      CHECK_THROWS_AS(M.ric_k(p, F.col(0), bad), FrameError);
    }
  }

  TEST_CASE("exp map examples") {
    Ambient E = Ambient::euclidean(3);
    Vec p(3), w(3);
    p << 1, 2, 3;
    w << 0.5, -1, 2;
    CHECK((E.exp_map(p, w) - (p + w)).norm() < 1e-15);

    Ambient S = Ambient::space_form(3, 1.0);
    Vec north = S.base_point();
    Vec v = Vec::Unit(4, 0) * pi;
    CHECK((S.exp_map(north, v) + north).norm() < 1e-14);

    Ambient C = Ambient::warped_cone(3, 0.8);
    Vec q = Vec::Unit(3, 1);
    CHECK((C.exp_map(q, 2.0 * q) - 3.0 * q).norm() < 1e-10);
  }

  TEST_CASE("cone exp matches the developed sector and conserves speed") {
    std::mt19937_64 rng(17);
    for (double a : {0.8, 0.5}) {
      Ambient C = Ambient::warped_cone(3, a);
      for (int trial = 0; trial < 10; ++trial) {
        Vec p = oracle::random_point(C, rng);
        Vec u = p / p.norm();
        // Keep the geodesic away from the apex: outward radial component.
        Vec w = oracle::random_gaussian(rng, 3);
        w += (std::abs(u.dot(w)) + 0.2) * u - u.dot(w) * u;
        GeodesicState s = C.geodesic(p, w, 1.0);
        Vec expect = oracle::cone_exp_developed(a, p, w);
        CHECK((s.point - expect).norm() < 1e-9);
        const double speed0 = C.norm(p, w);
        CHECK(std::abs(C.norm(s.point, s.velocity) - speed0) < 1e-10 * speed0);
      }
    }
  }

  TEST_CASE("cone exp errors near the apex") {
    Ambient C = Ambient::warped_cone(3, 0.8);
    Vec p = Vec::Unit(3, 0);
    CHECK_THROWS_AS(C.exp_map(p, -1.0 * p), ApexError);
    CHECK_THROWS_AS(C.check_point(Vec::Zero(3)), ApexError);
  }

  TEST_CASE("exp differential determinant") {
    Ambient E = Ambient::euclidean(4);
    CHECK(E.exp_differential_det(Vec::Zero(4), Vec::Ones(4)) == 1.0);

    Ambient S = Ambient::space_form(3, 1.0);
    Vec p = S.base_point();
    Vec w = Vec::Unit(4, 1) * (pi / 2);
    CHECK(S.exp_differential_det(p, w) == doctest::Approx(std::pow(2 / pi, 2)).epsilon(1e-14));
    CHECK(S.exp_differential_det(p, w) == doctest::Approx(oracle::fd_exp_jacobian(S, p, w)).epsilon(1e-8));
    CHECK_THROWS_AS(S.exp_differential_det(p, Vec::Unit(4, 1) * 3.2), ConjugateError);

    Ambient H = Ambient::space_form(3, -1.0);
    Vec ph = H.base_point();
    Vec wh = Vec::Unit(4, 0) * 1.3;
    CHECK(H.exp_differential_det(ph, wh) == doctest::Approx(oracle::fd_exp_jacobian(H, ph, wh)).epsilon(1e-8));

    Ambient C = Ambient::warped_cone(3, 0.8);
    Vec pc(3);
    pc << 0.6, 0.8, 0.0;
    Vec radial = 1.5 * pc;
    const double det_radial = C.exp_differential_det(pc, radial);
    CHECK(det_radial == doctest::Approx(oracle::fd_exp_jacobian(C, pc, radial)).epsilon(1e-6));
    // Radial planes are flat, so Exp is an isometry on radial rays.
    CHECK(det_radial == doctest::Approx(1.0).epsilon(1e-8));
    Vec general(3);
    general << 0.3, 0.4, 0.5;
    CHECK(C.exp_differential_det(pc, general) ==
          doctest::Approx(oracle::fd_exp_jacobian(C, pc, general)).epsilon(1e-6));
  }

  TEST_CASE("Jacobi integration matches the space-form closed form") {
    for (double delta : {1.0, -1.0, 4.0}) {
      Ambient M = Ambient::space_form(3, delta);
      Vec p = M.base_point();
      Mat F = M.frame(p);
      const double mu = delta > 0 ? pi / std::sqrt(delta) : 3.0;
      const double r = 0.9 * mu;
      Vec w = r * F.col(0);
      // Fields normal to the geodesic: frame rows 1, 2.
      Mat J0 = Mat::Zero(3, 2), J1 = Mat::Zero(3, 2);
      J0(1, 0) = 1.0;
      J0(2, 1) = 0.3;
      J1(1, 0) = -0.5;
      J1(2, 1) = 1.0;
      std::vector<double> times;
      for (int i = 1; i <= 10; ++i) times.push_back(0.1 * i);
      auto samples = M.jacobi_fields(p, w, J0, J1, times);
      for (const auto& s : samples) {
        const double arc = s.t * r;
        // d/dt = r d/ds, so J'(0) in parameter units is r times the arclength derivative.
        Mat expect = c_delta(delta, arc) * J0 + s_delta(delta, arc) / r * J1;
        CHECK((s.fields - expect).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }

  TEST_CASE("distance examples") {
    Ambient E = Ambient::euclidean(3);
    Vec o = Vec::Zero(3), q(3);
    q << 3, 4, 0;
    CHECK(E.distance(o, q).distance == doctest::Approx(5.0));

    Ambient C = Ambient::warped_cone(3, 0.7);
    Vec th = Vec::Unit(3, 2);
    CHECK(C.distance(0.5 * th, 2.0 * th).distance == doctest::Approx(1.5).epsilon(1e-14));

    Ambient C5 = Ambient::warped_cone(3, 0.5);
    Vec a = Vec::Unit(3, 0), b = -Vec::Unit(3, 0);
    const double d = C5.distance(a, b).distance;
    CHECK(d * d == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("distance velocities shoot to the target") {
    std::mt19937_64 rng(23);
    for (const Ambient& M : {Ambient::space_form(3, 1.0), Ambient::space_form(3, -1.0), Ambient::warped_cone(3, 0.5),
                             Ambient::warped_cone(3, 0.9)}) {
      for (int trial = 0; trial < 10; ++trial) {
        Vec p = oracle::random_point(M, rng);
        Vec q = oracle::random_point(M, rng);
        DistanceResult dr = M.distance(p, q);
        CHECK(M.norm(p, dr.velocity) == doctest::Approx(dr.distance).epsilon(1e-10));
        if (M.kind() == AmbientKind::WarpedCone) {
          const double angle = 2.0 * std::atan2((p / p.norm() - q / q.norm()).norm(), (p / p.norm() + q / q.norm()).norm());
          if (M.cone_parameter() * angle >= pi - 1e-6) continue;
          // Developed-sector oracle for the endpoint.
          CHECK((oracle::cone_exp_developed(M.cone_parameter(), p, dr.velocity) - q).norm() < 1e-10);
        }
        CHECK((M.exp_map(p, dr.velocity) - q).norm() < 1e-8);
      }
    }
  }

  TEST_CASE("cut distance") {
    Ambient E = Ambient::euclidean(4);
    CHECK(std::isinf(E.cut_distance(Vec::Zero(4), Vec::Unit(4, 0))));
    Ambient S = Ambient::space_form(3, 4.0);
    CHECK(S.cut_distance(S.base_point(), Vec::Unit(4, 0)) == doctest::Approx(pi / 2));
    Ambient C = Ambient::warped_cone(3, 0.5);
    Vec p = Vec::Unit(3, 0);
    CHECK(std::isinf(C.cut_distance(p, p)));
    CHECK(C.cut_distance(p, -p) == doctest::Approx(1.0));

    // Shooting oracle: below mu the geodesic is minimizing, above it a shorter path exists.
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
      // Directions with angle beta from radial outward in (a*pi, pi).
      std::uniform_real_distribution<double> ud(0.55 * pi, 0.95 * pi);
      const double beta = ud(rng);
      Vec v = std::cos(beta) * p + std::sin(beta) / 0.5 * Vec::Unit(3, 1);
      const double mu = C.cut_distance(p, v);
      REQUIRE(std::isfinite(mu));
      Vec before = oracle::cone_exp_developed(0.5, p, 0.99 * mu * v);
      Vec after = oracle::cone_exp_developed(0.5, p, 1.01 * mu * v);
      CHECK(C.distance(p, before).distance == doctest::Approx(0.99 * mu).epsilon(1e-10));
      CHECK(C.distance(p, after).distance < 1.01 * mu - 1e-6);
    }
  }

  TEST_CASE("distance Hessians") {
    Ambient E = Ambient::euclidean(3);
    Vec p = Vec::Zero(3), q = 2.0 * Vec::Unit(3, 0);
    Vec ev = symmetric_eigenvalues(E.hessian_distance(p, q));
    CHECK(std::abs(ev(0)) < 1e-14);
    CHECK(ev(1) == doctest::Approx(0.5));
    CHECK(ev(2) == doctest::Approx(0.5));

    Ambient S = Ambient::space_form(3, 1.0);
    Vec ps = S.base_point();
    Vec ws = Vec::Unit(4, 0) * (pi / 2);
    Vec es = symmetric_eigenvalues(S.hessian_distance_toward(ps, ws));
    CHECK(es.cwiseAbs().maxCoeff() < 1e-14);

    // Closed forms against a finite-difference oracle on space forms.
    std::mt19937_64 rng(41);
    for (double delta : {1.0, -1.0}) {
      Ambient M = Ambient::space_form(3, delta);
      for (int trial = 0; trial < 3; ++trial) {
        Vec a = oracle::random_point(M, rng);
        Vec w = oracle::random_tangent(M, a, rng);
        w *= 1.2 / M.norm(a, w);
        Vec b = M.exp_map(a, w);
        auto half_sq = [&](const Vec& z) { return 0.5 * std::pow(M.distance(z, b).distance, 2); };
        Mat fd = oracle::fd_hessian(M, a, half_sq);
        CHECK((M.hessian_distance_squared(a, b) - fd).cwiseAbs().maxCoeff() < 1e-5);
      }
    }

    // Flat cone equals its Euclidean development.
    Ambient flat = Ambient::warped_cone(3, 1.0);
    Vec a(3), b(3);
    a << 1.0, 0.2, -0.3;
    b << -0.4, 1.5, 0.7;
    CHECK((flat.hessian_distance(a, b) - E.hessian_distance(a, b)).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((flat.hessian_distance_squared(a, b) - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-5);

    // Curved cone: radial eigenvalue 0, in-plane transverse value 1/d from the development.
    Ambient C = Ambient::warped_cone(3, 0.6);
    Vec pc = Vec::Unit(3, 0);
    Vec qc(3);
    qc << std::cos(1.0), std::sin(1.0), 0.0;
    qc *= 1.7;
    DistanceResult dr = C.distance(pc, qc);
    Mat Hc = C.hessian_distance(pc, qc);
    Mat F = C.frame(pc);
    Vec dir = C.frame_components(pc, F, dr.velocity / dr.distance);
    CHECK(std::abs(dir.dot(Hc * dir)) < 1e-5);
    Vec plane_normal = C.frame_components(pc, F, Vec::Unit(3, 2) / 0.6);
    Vec in_plane = Eigen::Vector3d(dir).cross(Eigen::Vector3d(plane_normal));
    in_plane.normalize();
    CHECK(in_plane.dot(Hc * in_plane) == doctest::Approx(1.0 / dr.distance).epsilon(1e-5));
  }

  TEST_CASE("hessian radial eigenvalue vanishes on all models") {
    std::mt19937_64 rng(43);
    for (const Ambient& M : {Ambient::euclidean(3), Ambient::space_form(3, 1.0), Ambient::space_form(3, -1.0),
                             Ambient::warped_cone(3, 0.8)}) {
      Vec p = oracle::random_point(M, rng);
      Vec w = oracle::random_tangent(M, p, rng);
      w *= 0.8 / M.norm(p, w);
      Mat H = M.hessian_distance_toward(p, w);
      Vec dir = M.frame_components(p, M.frame(p), w / M.norm(p, w));
      CHECK(std::abs(dir.dot(H * dir)) < 1e-5);
    }
  }

  TEST_CASE("cut locus error") {
    Ambient S = Ambient::space_form(3, 1.0);
    CHECK_THROWS_AS(S.hessian_distance_toward(S.base_point(), Vec::Unit(4, 0) * 3.2), CutLocusError);
  }

  TEST_CASE("asymptotic volume ratio") {
    CHECK(Ambient::euclidean(3).avr() == 1.0);
    CHECK(Ambient::warped_cone(3, 0.5).avr() == doctest::Approx(0.25));
    CHECK_THROWS_AS(Ambient::space_form(3, 1.0).avr(), NotApplicableError);

    std::vector<double> radii{1, 2, 4};
    for (double v : Ambient::euclidean(3).avr_numeric(radii)) CHECK(std::abs(v - 1.0) < 1e-8);

    std::vector<double> cone_radii{0.5, 1, 2, 5, 10};
    auto cone = Ambient::warped_cone(3, 0.5).avr_numeric(cone_radii);
    for (std::size_t i = 0; i < cone.size(); ++i) {
      CHECK(std::abs(cone[i] - 0.25) < 1e-9);
      if (i > 0) CHECK(cone[i] <= cone[i - 1] + 1e-9);
    }

    std::vector<double> sphere_radii{0.5, 1, 2, 3, 4};
    auto sph = Ambient::space_form(3, 1.0).avr_numeric(sphere_radii);
    for (std::size_t i = 1; i < sph.size(); ++i) CHECK(sph[i] <= sph[i - 1] + 1e-9);
    // |B_r| on the unit 3-sphere is pi (2r - sin 2r).
    CHECK(sph[0] == doctest::Approx(pi * (1.0 - std::sin(1.0)) / (ball_volume(3) * 0.125)).epsilon(1e-10));
  }
}
