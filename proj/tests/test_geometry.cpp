#include "support/test_helpers.hpp"

#include <fstream>
#include <sstream>

#include "wcrv/geometry/field_io.hpp"
#include "wcrv/geometry/operators.hpp"

using namespace wcrv;
using wcrv::testing::sphere_256;
using wcrv::testing::zonal_harmonic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("constants are harmonic on every backend") {
  for (const Surface* s : {&sphere_256(), &testing::rp2_512(), &testing::icosphere_4()}) {
    const ScalarField one = ScalarField::constant(*s, 3.7);
    const ScalarField lap = laplacian_apply(*s, one);
    CHECK(lap.values.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("zonal Laplacian reproduces analytic eigenfunctions at second order") {
  // cos s is the degree-1 zonal harmonic (lambda = 2), P2 has lambda = 6.
  for (int degree : {1, 2, 4}) {
    const double lambda = degree * (degree + 1.0);
    double prev_err = 0.0;
    for (int n : {128, 256, 512}) {
      const Surface s = Surface::zonal_sphere(1.0, n);
      const ScalarField u = zonal_harmonic(s, degree);
      const ScalarField lap = laplacian_apply(s, u);
      const double err = (lap.values + lambda * u.values).cwiseAbs().maxCoeff();
      if (prev_err > 0.0) {
        const double order = std::log2(prev_err / err);
        CHECK(order > 1.8);
      }
      prev_err = err;
    }
    CHECK(prev_err < 2e-4 * lambda);
  }
}

TEST_CASE("zonal Laplacian scales with the background curvature") {
  const Surface s = Surface::zonal_sphere(4.0, 256); // radius 1/2
  const ScalarField u = zonal_harmonic(s, 2);
  const ScalarField lap = laplacian_apply(s, u);
  CHECK((lap.values + 24.0 * u.values).cwiseAbs().maxCoeff() < 24.0 * 2e-4);
}

TEST_CASE("projective plane operator sees only even harmonics") {
  const Surface& s = testing::rp2_512();
  const ScalarField u = zonal_harmonic(s, 2);
  const ScalarField lap = laplacian_apply(s, u);
  CHECK((lap.values + 6.0 * u.values).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("Laplacian is exactly self-adjoint in the mass inner product") {
  for (const Surface* s : {&sphere_256(), &testing::rp2_512(), &testing::icosphere_4()}) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 4; ++trial) {
      Eigen::VectorXd u(s->node_count()), v(s->node_count());
      for (int i = 0; i < s->node_count(); ++i) {
        u[i] = gauss(rng);
        v[i] = gauss(rng);
      }
      const Eigen::VectorXd lu = s->laplacian(u);
      const Eigen::VectorXd lv = s->laplacian(v);
      const double asym = std::abs(s->mass_inner(lu, v) - s->mass_inner(u, lv));
      CHECK(asym < 1e-10 * s->mass_norm(u) * s->mass_norm(v) *
                       s->laplacian_matrix().coeffs().abs().maxCoeff());
      // Integral of a Laplacian vanishes (telescoping fluxes).
      CHECK(std::abs(s->mass_inner(lu, Eigen::VectorXd::Ones(s->node_count()))) <
            1e-9 * s->mass_norm(lu) + 1e-12);
    }
  }
}

TEST_CASE("conformal curvature: constants and rescalings") {
  const Surface& s = sphere_256();
  SECTION("identity factor keeps khat") {
    const ScalarField k = gaussian_curvature(s, ScalarField::zero(s));
    CHECK((k.values.array() - 1.0).abs().maxCoeff() < 1e-13);
  }
  SECTION("constant factor rescales curvature") {
    const ScalarField k = gaussian_curvature(s, ScalarField::constant(s, std::log(2.0)));
    CHECK((k.values.array() - 0.25).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("curvature linearization matches finite differences of the nonlinear map") {
  const Surface& s = sphere_256();
  const ScalarField p2 = zonal_harmonic(s, 2);
  const double eps = 1e-6;
  const ScalarField kp = gaussian_curvature(s, ScalarField(s, eps * p2.values));
  const ScalarField km = gaussian_curvature(s, ScalarField(s, -eps * p2.values));
  const Eigen::VectorXd fd = (kp.values - km.values) / (2.0 * eps);
  // dK = -(Lap + 2 khat) x; on P2 that is (6 - 2) P2 = 4 P2.
  const double grid_err = 6.0 * 2e-4; // discrete eigenvalue offset
  CHECK((fd - 4.0 * p2.values).cwiseAbs().maxCoeff() < grid_err + 1e-6);
}

TEST_CASE("areas of the round backgrounds are exact up to rounding") {
  CHECK_THAT(area(sphere_256(), ScalarField::zero(sphere_256())),
             WithinRel(4.0 * M_PI, 1e-12));
  CHECK_THAT(area(testing::rp2_512(), ScalarField::zero(testing::rp2_512())),
             WithinRel(2.0 * M_PI, 1e-12));
  const Surface half = Surface::zonal_sphere(2.0, 128);
  CHECK_THAT(area(half, ScalarField::zero(half)), WithinRel(2.0 * M_PI, 1e-12));
}

TEST_CASE("total curvature equals 2 pi chi for random conformal factors") {
  // Joint oracle for gaussian_curvature + integrate.
  for (int n : {256, 1024}) {
    const Surface s = Surface::zonal_sphere(1.0, n);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const ScalarField x = testing::random_even_field(s, seed, 0.4);
      const ScalarField k = gaussian_curvature(s, x);
      const double total = integrate(s, x, k);
      CHECK_THAT(total, WithinRel(4.0 * M_PI, 1e-6));
    }
  }
  const ScalarField x = testing::random_even_field(testing::rp2_512(), 9, 0.4);
  const ScalarField k = gaussian_curvature(testing::rp2_512(), x);
  CHECK_THAT(integrate(testing::rp2_512(), x, k), WithinRel(2.0 * M_PI, 1e-6));
}

TEST_CASE("gradient norms: analytic differentiation and conformal scaling") {
  const Surface& s = sphere_256();
  const ScalarField u = zonal_harmonic(s, 1); // cos s
  SECTION("constants have zero gradient") {
    const ScalarField g = grad_norm_sq(s, ScalarField::zero(s), ScalarField::constant(s, 2.0));
    CHECK(g.values.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("round metric") {
    const ScalarField g = grad_norm_sq(s, ScalarField::zero(s), u);
    double worst = 0.0;
    for (int i = 0; i < s.node_count(); ++i) {
      const double sin2 = std::pow(std::sin(s.colatitudes()[i]), 2);
      worst = std::max(worst, std::abs(g.values[i] - sin2));
    }
    CHECK(worst < 1.5e-4);
  }
  SECTION("conformal factor scales the inverse metric") {
    const ScalarField g = grad_norm_sq(s, ScalarField::constant(s, std::log(2.0)), u);
    double worst = 0.0;
    for (int i = 0; i < s.node_count(); ++i) {
      const double sin2 = std::pow(std::sin(s.colatitudes()[i]), 2);
      worst = std::max(worst, std::abs(g.values[i] - sin2 / 4.0));
    }
    CHECK(worst < 4e-5);
  }
}

TEST_CASE("icosphere mesh passes structural validation") {
  const Surface& s = testing::icosphere_4();
  CHECK(s.euler_characteristic() == 2);
  CHECK(s.negative_cotan_weight_count() == 0);
  CHECK_THAT(s.total_area(), WithinRel(4.0 * M_PI, 2e-3));
  const ScalarField one = ScalarField::constant(s, 1.0);
  CHECK_THAT(integrate(s, ScalarField::zero(s), one), WithinRel(4.0 * M_PI, 2e-3));
}

TEST_CASE("mesh Laplacian approximates coordinate eigenfunctions") {
  const Surface& s = testing::icosphere_4();
  Eigen::VectorXd z(s.node_count());
  for (int i = 0; i < s.node_count(); ++i) z[i] = s.vertices()[i][2];
  const Eigen::VectorXd lap = s.laplacian(z);
  // z restricted to the unit sphere has -Lap z = 2 z. The cotangent operator
  // converges in the mass-weighted norm, not pointwise at irregular vertices.
  CHECK(s.mass_norm(lap + 2.0 * z) < 2e-2 * s.mass_norm(z));
}

TEST_CASE("degenerate triangles are rejected with the triangle named") {
  std::vector<Eigen::Vector3d> v = {{0, 0, 0}, {1, 0, 0}, {0.5, 0, 0}, {0.5, 1, 0}};
  std::vector<std::array<int, 3>> f = {{0, 1, 2}, {0, 2, 3}, {2, 1, 3}, {0, 3, 1}};
  try {
    Surface::triangle_mesh(v, f, 1.0);
    FAIL("expected DegenerateTriangleError");
  } catch (const DegenerateTriangleError& e) {
    CHECK(e.triangle_index == 0);
  }
}

TEST_CASE("open meshes are rejected") {
  std::vector<Eigen::Vector3d> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<std::array<int, 3>> f = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}};
  CHECK_THROWS_AS(Surface::triangle_mesh(v, f, 1.0), ValidationError);
}

TEST_CASE("OFF and OBJ ingestion round-trips a tetrahedron") {
  const std::string off_text =
      "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
  std::istringstream off_in(off_text);
  const MeshData off = read_off(off_in);
  CHECK(off.vertices.size() == 4);
  CHECK(off.triangles.size() == 4);
  const Surface s_off = Surface::triangle_mesh(off.vertices, off.triangles, 1.0);
  CHECK(s_off.euler_characteristic() == 2);

  const std::string obj_text =
      "# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
      "f 1/1 3/2 2/3\nf 1 2 4\nf 1 4 3\nf 2 3 4\n";
  std::istringstream obj_in(obj_text);
  const MeshData obj = read_obj(obj_in);
  const Surface s_obj = Surface::triangle_mesh(obj.vertices, obj.triangles, 1.0);
  CHECK(s_obj.euler_characteristic() == 2);
}

TEST_CASE("field serialization round-trips through CSV and binary") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(101);
  for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng) * std::pow(10.0, (i % 7) - 3);

  std::stringstream csv;
  write_field_csv(csv, v);
  const Eigen::VectorXd v_csv = read_field_csv(csv);
  REQUIRE(v_csv.size() == v.size());
  CHECK((v_csv - v).cwiseAbs().maxCoeff() == 0.0); // 17 digits round-trip doubles

  std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
  write_field_binary(bin, v);
  const Eigen::VectorXd v_bin = read_field_binary(bin);
  CHECK((v_bin - v).cwiseAbs().maxCoeff() == 0.0);

  std::stringstream bad(std::ios::in | std::ios::out | std::ios::binary);
  bad << "not a field file at all";
  CHECK_THROWS_AS(read_field_binary(bad), ValidationError);
}

TEST_CASE("scalar fields validate length and finiteness") {
  const Surface& s = sphere_256();
  CHECK_THROWS_AS(ScalarField(s, Eigen::VectorXd::Zero(3)), ValidationError);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(s.node_count());
  v[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ScalarField(s, v), ValidationError);
}
