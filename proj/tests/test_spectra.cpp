#include "support/test_helpers.hpp"

#include "wcrv/spectra/eigenpairs.hpp"

using namespace wcrv;
using Catch::Matchers::WithinRel;

TEST_CASE("zonal sphere even-subspace spectrum is 2l(2l+1)") {
  const std::vector<EigenPair> pairs = eigenpairs(testing::sphere_1024(), 4);
  REQUIRE(pairs.size() == 4);
  CHECK(pairs[0].lambda < 1e-8);
  CHECK_THAT(pairs[1].lambda, WithinRel(6.0, 1e-4));
  CHECK_THAT(pairs[2].lambda, WithinRel(20.0, 1e-4));
  CHECK_THAT(pairs[3].lambda, WithinRel(42.0, 1e-4));
  for (const auto& p : pairs) CHECK(p.multiplicity_in_subspace == 1);
}

TEST_CASE("projective plane spectrum is 2j(2j+1)") {
  const std::vector<EigenPair> pairs = eigenpairs(testing::rp2_512(), 3);
  CHECK(pairs[0].lambda < 1e-8);
  CHECK_THAT(pairs[1].lambda, WithinRel(6.0, 1e-4));
  CHECK_THAT(pairs[2].lambda, WithinRel(20.0, 1e-4));
}

TEST_CASE("first eigenpair is the zero mode with constant eigenfunction") {
  for (const Surface* s : {&testing::sphere_256(), &testing::icosphere_4()}) {
    const std::vector<EigenPair> pairs = eigenpairs(*s, 2);
    CHECK(pairs[0].lambda < 1e-7);
    const double mean = s->mass_inner(pairs[0].phi.values,
                                      Eigen::VectorXd::Ones(s->node_count())) /
                        s->total_area();
    CHECK((pairs[0].phi.values.array() - mean).abs().maxCoeff() < 1e-6);
    CHECK(pairs[1].lambda > pairs[0].lambda);
  }
}

TEST_CASE("eigenfunction invariants: residual, normalization, orthogonality") {
  const Surface& s = testing::sphere_256();
  const std::vector<EigenPair> pairs = eigenpairs(s, 4);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const EigenPair& p = pairs[i];
    const Eigen::VectorXd resid = s.laplacian(p.phi.values) + p.lambda * p.phi.values;
    CHECK(s.mass_norm(resid) < 1e-8 * std::max(1.0, p.lambda));
    CHECK_THAT(s.mass_norm(p.phi.values), WithinRel(1.0, 1e-12));
    for (size_t j = 0; j < i; ++j)
      CHECK(std::abs(s.mass_inner(p.phi.values, pairs[j].phi.values)) < 1e-8);
  }
}

TEST_CASE("zonal eigenvalues converge at the discretization order") {
  double prev = 0.0;
  for (int n : {64, 128, 256}) {
    const Surface s = Surface::zonal_sphere(1.0, n);
    const std::vector<EigenPair> pairs = eigenpairs(s, 2);
    const double err = std::abs(pairs[1].lambda - 6.0);
    if (prev > 0.0) CHECK(std::log2(prev / err) > 1.8);
    prev = err;
  }
}

TEST_CASE("admissible eigenvalues on positive curvature: the 2l(2l+1) family") {
  const Surface& s = testing::sphere_1024();
  const std::vector<EigenPair> pairs = eigenpairs(s, 3); // 0, 6, 20
  const std::vector<EigenPair> adm = admissible_lambdas(s, 2, 1.0, pairs);
  REQUIRE(adm.size() == 2);
  CHECK_THAT(adm[0].lambda, WithinRel(6.0, 1e-4));
  CHECK_THAT(adm[1].lambda, WithinRel(20.0, 1e-4));
}

TEST_CASE("admissibility on negative curvature follows the sign condition") {
  // Synthetic pairs on a mesh carrier with khat = -1.
  const Surface s = icosphere(1.0, 1); // geometry carrier only
  const Surface neg = Surface::triangle_mesh(s.vertices(), s.triangles(), -1.0);
  auto mk = [&](double lambda, int mult) {
    EigenPair p;
    p.lambda = lambda;
    p.phi = ScalarField::constant(neg, 1.0 / std::sqrt(neg.total_area()));
    p.multiplicity_in_subspace = mult;
    return p;
  };
  // p = 3: lambda + (p-2) khat = lambda - 1.
  std::vector<EigenPair> pairs = {mk(0.9, 1), mk(1.5, 1), mk(1.7, 2)};
  const auto pos_r = admissible_lambdas(neg, 3, 1.0, pairs);
  REQUIRE(pos_r.size() == 1); // only 1.5: sign ok and simple
  CHECK(pos_r[0].lambda == 1.5);
  const auto neg_r = admissible_lambdas(neg, 3, -1.0, pairs);
  REQUIRE(neg_r.size() == 1); // only 0.9
  CHECK(neg_r[0].lambda == 0.9);
}

TEST_CASE("sign constraints on (p, r, khat) are enforced") {
  const std::vector<EigenPair> none;
  CHECK_THROWS_AS(admissible_lambdas(testing::sphere_256(), 2, -1.0, none),
                  SignConstraintError);
  CHECK_THROWS_AS(admissible_lambdas(testing::sphere_256(), 1, 1.0, none), ValidationError);
}

TEST_CASE("icosphere low spectrum approaches j(j+1) with multiplicities") {
  const Surface& s = testing::icosphere_4();
  const std::vector<EigenPair> pairs = eigenpairs(s, 9); // 0, 2 x3, 6 x5
  CHECK(pairs[0].lambda < 1e-6);
  for (int k = 1; k <= 3; ++k) {
    CHECK_THAT(pairs[k].lambda, WithinRel(2.0, 5e-3));
    CHECK(pairs[k].multiplicity_in_subspace == 3);
  }
  for (int k = 4; k <= 8; ++k) CHECK_THAT(pairs[k].lambda, WithinRel(6.0, 1e-2));
}
