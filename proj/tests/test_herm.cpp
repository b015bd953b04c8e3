#include <cmath>
#include <numbers>

#include "specflow/herm.hpp"
#include "support.hpp"

using namespace testing;
using herm::HermitianMatrix;

TEST_SUITE("herm") {

TEST_CASE("construction validates Hermiticity and finiteness") {
  CMatrix m(2, 2);
  m << 1.0, 2.0, 0.0, 1.0;
  CHECK(error_code_of([&] { HermitianMatrix{m}; }) == ErrorCode::NotHermitian);
  m << 1.0, std::nan(""), std::nan(""), 1.0;
  CHECK(error_code_of([&] { HermitianMatrix{m}; }) == ErrorCode::NonFiniteValue);
  m << 1.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 2.0;
  const HermitianMatrix h(m);
  CHECK(h(0, 1) == Complex(0.0, 1.0));
}

TEST_CASE("eig on the textbook cases") {
  const auto d = herm::eig(diag({3.0, 1.0, 2.0}));
  CHECK(d.values(0) == doctest::Approx(1.0));
  CHECK(d.values(1) == doctest::Approx(2.0));
  CHECK(d.values(2) == doctest::Approx(3.0));

  const auto id = herm::eig(HermitianMatrix::identity(4));
  for (int k = 0; k < 4; ++k) CHECK(id.values(k) == doctest::Approx(1.0));
  CHECK(herm::max_abs(id.vectors.adjoint() * id.vectors - CMatrix::Identity(4, 4)) < 1e-12);

  const auto sw = herm::eig(hm({{0, 1}, {1, 0}}));
  CHECK(sw.values(0) == doctest::Approx(-1.0));
  CHECK(sw.values(1) == doctest::Approx(1.0));
}

TEST_CASE("eig agrees with Eigen's solver on random matrices") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seed % 8);
    const HermitianMatrix m = herm::random_hermitian(d, seed, 2.0);
    const auto ed = herm::eig(m);
    Eigen::SelfAdjointEigenSolver<CMatrix> oracle(m.matrix());
    const double norm = m.matrix().norm();
    CHECK((ed.values - oracle.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + norm));
    // Invariants: unitary vectors, small residual, sorted values.
    CHECK(herm::max_abs(ed.vectors.adjoint() * ed.vectors - CMatrix::Identity(d, d)) < 1e-10);
    CHECK(herm::max_abs(m.matrix() * ed.vectors - ed.vectors * ed.values.asDiagonal()) < 1e-10 * (1.0 + norm));
    CHECK(herm::max_abs(m.matrix() - ed.vectors * ed.values.asDiagonal() * ed.vectors.adjoint()) <
          1e-9 * (1.0 + norm));
    for (Eigen::Index k = 1; k < d; ++k) CHECK(ed.values(k - 1) <= ed.values(k));
  }
}

TEST_CASE("eig is deterministic") {
  const HermitianMatrix m = herm::random_hermitian(6, 99);
  const auto a = herm::eig(m);
  const auto b = herm::eig(m);
  CHECK(a.values == b.values);
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("apply_function") {
  const CMatrix s = herm::apply_function(diag({1.0, 4.0}), [](double x) { return Complex(std::sqrt(x), 0.0); });
  CHECK(herm::max_abs(s - diag({1.0, 2.0}).matrix()) < 1e-14);

  const HermitianMatrix m = herm::random_hermitian(4, 5);
  CHECK(herm::max_abs(herm::apply_function(m, [](double x) { return Complex(x, 0.0); }) - m.matrix()) < 1e-13);

  const CMatrix sq = herm::apply_function(hm({{0, 1}, {1, 0}}), [](double x) { return Complex(x * x, 0.0); });
  CHECK(herm::max_abs(sq - CMatrix::Identity(2, 2)) < 1e-14);

  CHECK(error_code_of([&] {
          herm::apply_function(diag({0.0, 1.0}), [](double x) { return Complex(1.0 / x, 0.0); });
        }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("g_z") {
  CHECK(herm::max_abs(herm::g_z(HermitianMatrix::zero(3), Complex(-2.0, 0.5))) == 0.0);
  CHECK(herm::g_z(scalar(1.0), -1.0)(0, 0).real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  const HermitianMatrix sw = hm({{0, 1}, {1, 0}});
  CHECK(herm::max_abs(herm::g_z(sw, -1.0) - sw.matrix() / std::sqrt(2.0)) < 1e-14);
  CHECK(error_code_of([&] { herm::g_z(sw, 0.5); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { herm::g_z(sw, 0.0); }) == ErrorCode::InvalidArgument);

  // Real z < 0: Hermitian with eigenvalue magnitudes below 1.
  const HermitianMatrix m = herm::random_hermitian(5, 11, 3.0);
  const CMatrix g = herm::g_z(m, -0.7);
  CHECK(herm::max_abs(g - g.adjoint()) < 1e-14);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 1.0);

  // Commutes with unitary conjugation.
  const CMatrix v = herm::random_unitary(5, 12);
  for (Complex z : {Complex(-1.0, 0.0), Complex(-0.3, 2.0), Complex(4.0, -1.0)}) {
    const CMatrix lhs = herm::g_z(m.conjugated(v), z);
    const CMatrix rhs = v * herm::g_z(m, z) * v.adjoint();
    CHECK(herm::max_abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("kappa") {
  CHECK(herm::max_abs(herm::kappa(HermitianMatrix::zero(3), -4.0).matrix() - 2.0 * CMatrix::Identity(3, 3)) < 1e-14);
  CHECK(herm::kappa(scalar(1.0), -1.0)(0, 0).real() == doctest::Approx(std::sqrt(2.0)));
  const HermitianMatrix k = herm::kappa(diag({1.0, -2.0}), -1.0);
  CHECK(k(0, 0).real() == doctest::Approx(std::sqrt(2.0)));
  CHECK(k(1, 1).real() == doctest::Approx(std::sqrt(5.0)));
  CHECK(error_code_of([&] { herm::kappa(scalar(1.0), 0.0); }) == ErrorCode::InvalidArgument);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const HermitianMatrix m = herm::random_hermitian(4, seed, 2.0);
    const double z = -0.1 * static_cast<double>(seed);
    const CMatrix kk = herm::kappa(m, z).matrix();
    CHECK(herm::max_abs(kk * kk - (m.matrix() * m.matrix() - z * CMatrix::Identity(4, 4))) < 1e-10);
    CHECK(herm::eigenvalues(herm::kappa(m, z)).minCoeff() > 0.0);
  }
}

TEST_CASE("trace_norm") {
  CHECK(herm::trace_norm(CMatrix::Zero(3, 3)) == 0.0);
  CHECK(herm::trace_norm(diag({1.0, -2.0}).matrix()) == doctest::Approx(3.0));
  Eigen::VectorXcd u(3);
  u << Complex(1, 1), Complex(0, 2), Complex(-1, 0);
  u.normalize();
  CHECK(herm::trace_norm(u * u.adjoint()) == doctest::Approx(1.0));

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const CMatrix a = herm::random_hermitian(4, seed).matrix() * herm::random_unitary(4, seed + 100);
    const CMatrix b = herm::random_hermitian(4, seed + 200).matrix();
    Eigen::JacobiSVD<CMatrix> svd(a);
    CHECK(herm::trace_norm(a) == doctest::Approx(svd.singularValues().sum()).epsilon(1e-12));
    CHECK(herm::trace_norm(a + b) <= herm::trace_norm(a) + herm::trace_norm(b) + 1e-10);
    // Hermitian input: sum of |eigenvalues|.
    CHECK(herm::trace_norm(b) == doctest::Approx(herm::eigenvalues(HermitianMatrix(b)).cwiseAbs().sum()));
  }
}

TEST_CASE("count_below") {
  const std::vector<double> two{-1.0, 1.0};
  CHECK(herm::count_below(two, 0.0) == 1);
  CHECK(herm::count_below(two, -5.0) == 0);
  const std::vector<double> three{-2.0, -1.0, 3.0};
  CHECK(herm::count_below(three, 2.0) == 2);
  CHECK(error_code_of([&] { herm::count_below(two, 1.0 + 1e-11); }) == ErrorCode::OnEigenvalue);
  const std::vector<double> unsorted{1.0, -1.0};
  CHECK(error_code_of([&] { herm::count_below(unsorted, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("projections and random generators") {
  const CMatrix u = herm::random_unitary(4, 3);
  CHECK(herm::max_abs(u.adjoint() * u - CMatrix::Identity(4, 4)) < 1e-13);
  const HermitianMatrix p = herm::projector(u.leftCols(2));
  CHECK(herm::is_projection(p.matrix()));
  CHECK_FALSE(herm::is_projection(2.0 * p.matrix()));
  CHECK(herm::random_hermitian(3, 42).matrix() == herm::random_hermitian(3, 42).matrix());
  CHECK(herm::random_hermitian(3, 42).matrix() != herm::random_hermitian(3, 43).matrix());
}

}  // TEST_SUITE
