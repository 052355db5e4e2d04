#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "opderiv/blockspace.hpp"
#include "opderiv/fourier.hpp"
#include "test_support.hpp"

using namespace opderiv;
using opderiv::testing::opdist;
using opderiv::testing::random_hermitian;
using opderiv::testing::random_matrix;

namespace {

std::shared_ptr<const BandDecomposition> decompose(const SelfAdjointModel& m) {
  return std::make_shared<const BandDecomposition>(band_decompose(m));
}

}  // namespace

TEST_CASE("embed: identity gives diagonal identity blocks") {
  const auto bd = decompose(SelfAdjointModel::diagonal({0.5, 0.7, 1.2}));
  const auto y = BlockMatrix::embed(Matrix::Identity(3, 3), bd);
  CHECK(opdist(y.block(1, 1), Matrix::Identity(2, 2)) <= 1e-14);
  CHECK(opdist(y.block(2, 2), Matrix::Identity(1, 1)) <= 1e-14);
  CHECK(max_abs(y.block(1, 2)) <= 1e-14);
  CHECK(max_abs(y.block(2, 1)) <= 1e-14);
}

TEST_CASE("embed: circle Toeplitz blocks are the Fourier coefficients") {
  const int L = 4;
  const auto bd = decompose(SelfAdjointModel::circle(L));
  const auto f = fourier_absx();
  const auto y = BlockMatrix::from_laurent(bd, [&](long d) { return f(d); });
  for (int r = -L; r <= L; ++r)
    for (int c = -L; c <= L; ++c)
      CHECK(std::abs(y.block(r, c)(0, 0) - coeffs_absx(r - c)) == 0.0);
}

TEST_CASE("embed/reassemble round trip") {
  const auto bd = decompose(SelfAdjointModel::dense(random_hermitian(8, 5)));
  const Matrix a = random_matrix(8, 6);
  CHECK(opdist(BlockMatrix::embed(a, bd).reassemble(), a) <= 1e-10 * max_abs(a));
}

TEST_CASE("embed rejects mismatched dimensions") {
  const auto bd = decompose(SelfAdjointModel::diagonal({0.0, 1.0}));
  CHECK_THROWS_AS(BlockMatrix::embed(Matrix::Identity(3, 3), bd), ValidationError);
}

TEST_CASE("embed_diagonal is m(D)") {
  const auto bd = decompose(SelfAdjointModel::diagonal({0.5, 0.7, 1.2}));
  const auto md = BlockMatrix::embed_diagonal(bd);
  Matrix d1(2, 2);
  d1 << 0.5, 0.0, 0.0, 0.7;
  CHECK(opdist(md.block(1, 1), d1) <= 1e-14);
  CHECK(md.block(2, 2)(0, 0) == Complex(1.2));

  const auto bdc = decompose(SelfAdjointModel::circle(3));
  const auto mdc = BlockMatrix::embed_diagonal(bdc);
  for (int n = -3; n <= 3; ++n) CHECK(mdc.block(n, n)(0, 0) == Complex(n));

  const Matrix h = random_hermitian(8, 7);
  const auto bdh = decompose(SelfAdjointModel::dense(h));
  CHECK(opdist(BlockMatrix::embed_diagonal(bdh).reassemble(), h) <= 1e-10 * max_abs(h));
}

TEST_CASE("commutator with m(D)") {
  SECTION("m(D) commutes with itself") {
    const auto bd = decompose(SelfAdjointModel::diagonal({0.5, 0.7, 1.2}));
    const auto zero = BlockMatrix::embed_diagonal(bd).commutator_with_d();
    CHECK(max_abs(zero.reassemble()) <= 1e-14);
  }
  SECTION("circle model: entries (r - c) f(r - c)") {
    const int L = 5;
    const auto bd = decompose(SelfAdjointModel::circle(L));
    const auto f = fourier_absx();
    const auto y =
        BlockMatrix::from_laurent(bd, [&](long d) { return f(d); }).commutator_with_d();
    for (int r = -L; r <= L; ++r)
      for (int c = -L; c <= L; ++c)
        CHECK(std::abs(y.block(r, c)(0, 0) - double(r - c) * coeffs_absx(r - c)) <= 1e-15);
  }
  SECTION("finite dimensions: reassembles to Da - aD") {
    const Matrix h = random_hermitian(8, 9);
    const auto bd = decompose(SelfAdjointModel::dense(h));
    const Matrix a = random_matrix(8, 10);
    const Matrix got = BlockMatrix::embed(a, bd).commutator_with_d().reassemble();
    const Matrix want = h * a - a * h;
    CHECK(opdist(got, want) <= 1e-10 * std::max(1.0, max_abs(want)));
  }
}

TEST_CASE("adjoint is an involution compatible with *") {
  const auto bd = decompose(SelfAdjointModel::dense(random_hermitian(6, 12)));
  const Matrix a = random_matrix(6, 13);
  const auto ma = BlockMatrix::embed(a, bd);

  CHECK(opdist(ma.adjoint().reassemble(), a.adjoint()) <= 1e-12);
  CHECK(opdist(ma.adjoint().adjoint().reassemble(), ma.reassemble()) == 0.0);

  // [m(D), m(a)]* = -[m(D), m(a*)]
  const Matrix lhs = ma.commutator_with_d().adjoint().reassemble();
  const Matrix rhs =
      BlockMatrix::embed(a.adjoint().eval(), bd).commutator_with_d().reassemble();
  CHECK(opdist(lhs, (-rhs).eval()) <= 1e-12);
}

TEST_CASE("adjoint on the circle swaps indices and conjugates") {
  const auto bd = decompose(SelfAdjointModel::circle(3));
  const auto f = fourier_sign();
  const auto y = BlockMatrix::from_laurent(bd, [&](long d) { return f(d); });
  const auto ystar = y.adjoint();
  for (int r = -3; r <= 3; ++r)
    for (int c = -3; c <= 3; ++c)
      CHECK(ystar.block(r, c)(0, 0) == std::conj(y.block(c, r)(0, 0)));
}

TEST_CASE("multiply matches dense products") {
  const Matrix h = random_hermitian(8, 20);
  const auto bd = decompose(SelfAdjointModel::dense(h));
  const Matrix a = random_matrix(8, 21);
  const Matrix b = random_matrix(8, 22);
  const auto ma = BlockMatrix::embed(a, bd);
  const auto mb = BlockMatrix::embed(b, bd);
  const auto mi = BlockMatrix::embed(Matrix::Identity(8, 8), bd);

  CHECK(opdist(ma.multiply(mi).reassemble(), a) <= 1e-10 * max_abs(a));
  CHECK(opdist(ma.multiply(mb).reassemble(), a * b) <= 1e-10 * max_abs(a * b));

  const Matrix want = (h * a - a * h) * b;
  CHECK(opdist(ma.commutator_with_d().multiply(mb).reassemble(), want) <=
        1e-10 * std::max(1.0, max_abs(want)));
}

TEST_CASE("multiply is associative on finite supports") {
  const auto bd = decompose(SelfAdjointModel::dense(random_hermitian(6, 30)));
  const auto ma = BlockMatrix::embed(random_matrix(6, 31), bd);
  const auto mb = BlockMatrix::embed(random_matrix(6, 32), bd);
  const auto mc = BlockMatrix::embed(random_matrix(6, 33), bd);
  const Matrix lhs = ma.multiply(mb).multiply(mc).reassemble();
  const Matrix rhs = ma.multiply(mb.multiply(mc)).reassemble();
  CHECK(opdist(lhs, rhs) <= 1e-10 * std::max(1.0, max_abs(lhs)));
}

TEST_CASE("embedding is *-linear") {
  const auto bd = decompose(SelfAdjointModel::dense(random_hermitian(5, 40)));
  const Matrix a = random_matrix(5, 41);
  const Matrix b = random_matrix(5, 42);
  const Complex alpha(0.7, -1.3);
  const auto lhs = BlockMatrix::embed((alpha * a + b).eval(), bd);
  const auto rhs = BlockMatrix::embed(a, bd).scaled(alpha).plus(BlockMatrix::embed(b, bd));
  CHECK(opdist(lhs.reassemble(), rhs.reassemble()) <= 1e-12);
  CHECK(opdist(BlockMatrix::embed(a, bd).adjoint().reassemble(),
               BlockMatrix::embed(a.adjoint().eval(), bd).reassemble()) <= 1e-13);
}

TEST_CASE("mismatched decompositions are rejected") {
  const auto bd1 = decompose(SelfAdjointModel::diagonal({0.5, 1.5}));
  const auto bd2 = decompose(SelfAdjointModel::diagonal({0.5, 2.5}));
  const auto y = BlockMatrix::embed(Matrix::Identity(2, 2), bd1);
  const auto z = BlockMatrix::embed(Matrix::Identity(2, 2), bd2);
  CHECK_THROWS_AS(y.multiply(z), ValidationError);
  CHECK_THROWS_AS(y.plus(z), ValidationError);
}

TEST_CASE("truncate: identity compresses to the window identity") {
  const auto bd = decompose(SelfAdjointModel::circle(4));
  const auto mi = BlockMatrix::from_laurent(bd, [](long d) { return d == 0 ? 1.0 : 0.0; });
  for (int n : {1, 2, 3}) {
    const auto w = mi.truncate(n);
    CHECK(w.mat.rows() == 2 * n);
    CHECK(opdist(w.mat, Matrix::Identity(2 * n, 2 * n)) == 0.0);
    CHECK_FALSE(w.clipped);
  }
}

TEST_CASE("truncate: circle commutator window ((r-c) f(r-c)) on indices 1-n..n") {
  const int L = 8, n = 3;
  const auto bd = decompose(SelfAdjointModel::circle(L));
  const auto f = fourier_absx();
  const auto y = BlockMatrix::from_laurent(bd, [&](long d) { return f(d); }).commutator_with_d();
  const auto w = y.truncate(n);
  REQUIRE(w.labels.size() == 2 * n);
  CHECK(w.labels.front() == 1 - n);
  CHECK(w.labels.back() == n);
  for (Index i = 0; i < w.mat.rows(); ++i)
    for (Index j = 0; j < w.mat.cols(); ++j) {
      const long d = w.labels[static_cast<std::size_t>(i)] -
                     w.labels[static_cast<std::size_t>(j)];
      CHECK(std::abs(w.mat(i, j) - double(d) * coeffs_absx(d)) <= 1e-15);
    }
}

TEST_CASE("truncate: finite model compression equals E_n a E_n") {
  const Matrix h = random_hermitian(8, 50);
  const auto bd = decompose(SelfAdjointModel::dense(h));
  const Matrix a = random_matrix(8, 51);
  const auto ma = BlockMatrix::embed(a, bd);
  for (int n : {1, 2, 3, bd->full_window()}) {
    const auto w = ma.truncate(n);
    const Matrix frame = bd->window_frame(n);
    const Matrix en = frame * frame.adjoint();
    CHECK(opdist(frame * w.mat * frame.adjoint(), en * a * en) <= 1e-12);
  }
}

TEST_CASE("truncation norms are nondecreasing in the window") {
  const auto bd = decompose(SelfAdjointModel::circle(16));
  const auto f = fourier_absx();
  const auto y = BlockMatrix::from_laurent(bd, [&](long d) { return f(d); });
  double prev = 0.0;
  for (int n : {2, 4, 8, 16}) {
    const double norm = operator_norm(y.truncate(n).mat);
    CHECK(norm >= prev - 1e-10);
    prev = norm;
  }
}

TEST_CASE("core approximation: windows exhaust D on occupied bands") {
  const auto model = SelfAdjointModel::circle(6);
  const auto bd = decompose(model);
  const Matrix dd = model.to_dense();
  Vector xi = Vector::Zero(13);
  xi(6 + 2) = 1.0;  // u_2
  xi(6 - 3) = 0.5;  // u_{-3}
  double prev_defect = std::numeric_limits<double>::infinity();
  for (int n : {1, 2, 3, 4, 5}) {
    const Matrix frame = bd->window_frame(n);
    const Matrix en = frame * frame.adjoint();
    const double defect = (dd * xi - dd * (en * xi)).norm() + (xi - en * xi).norm();
    CHECK(defect <= prev_defect + 1e-14);
    prev_defect = defect;
    if (n >= 4) CHECK(defect == 0.0);  // bands {2, -3} covered once n >= 4
  }
}

TEST_CASE("form_eval pairs through the stabilization window") {
  SECTION("identity gives the inner product") {
    const auto bd = decompose(SelfAdjointModel::circle(5));
    const auto mi = BlockMatrix::from_laurent(bd, [](long d) { return d == 0 ? 1.0 : 0.0; });
    CoreVector xi, eta;
    xi.blocks[1] = Vector::Constant(1, Complex(0.5, 0.5));
    xi.blocks[-2] = Vector::Constant(1, Complex(0.0, 1.0));
    eta.blocks[1] = Vector::Constant(1, Complex(1.0, 0.0));
    const auto fv = mi.form_eval(xi, eta);
    CHECK(std::abs(fv.value - Complex(0.5, 0.5)) <= 1e-15);
    CHECK(fv.stabilized_at == 3);  // band -2 forces window n >= 3
  }
  SECTION("finite dim: S([m(D), m(a)]) = <(Da - aD) xi, eta>") {
    const Matrix h = random_hermitian(7, 60);
    const auto model = SelfAdjointModel::dense(h);
    const auto bd = decompose(model);
    const Matrix a = random_matrix(7, 61);
    const auto y = BlockMatrix::embed(a, bd).commutator_with_d();
    std::mt19937 rng(62);
    std::normal_distribution<double> gauss;
    Vector xi(7), eta(7);
    for (Index i = 0; i < 7; ++i) {
      xi(i) = Complex(gauss(rng), gauss(rng));
      eta(i) = Complex(gauss(rng), gauss(rng));
    }
    const auto cx = core_vector_from_ambient(*bd, xi);
    const auto ce = core_vector_from_ambient(*bd, eta);
    const Complex want = (eta.adjoint() * ((h * a - a * h) * xi))(0);
    const auto fv = y.form_eval(cx, ce);
    CHECK(std::abs(fv.value - want) <= 1e-10 * std::max(1.0, std::abs(want)));
  }
  SECTION("recomputing with a larger window does not move the value") {
    const auto bd = decompose(SelfAdjointModel::circle(8));
    const auto f = fourier_absx();
    const auto y =
        BlockMatrix::from_laurent(bd, [&](long d) { return f(d); }).commutator_with_d();
    CoreVector xi, eta;
    xi.blocks[2] = Vector::Constant(1, Complex(1.0, 0.0));
    eta.blocks[-1] = Vector::Constant(1, Complex(0.0, 1.0));
    const auto fv = y.form_eval(xi, eta);
    for (int n : {fv.stabilized_at + 1, fv.stabilized_at + 3}) {
      const auto w = y.truncate(n);
      const Vector xw = y.window_coordinates(xi, n);
      const Vector ew = y.window_coordinates(eta, n);
      const Complex again = (ew.adjoint() * (w.mat * xw))(0);
      CHECK(std::abs(again - fv.value) <= 1e-14);
    }
  }
  SECTION("vectors outside available bands are rejected") {
    const auto bd = decompose(SelfAdjointModel::circle(3));
    const auto mi = BlockMatrix::from_laurent(bd, [](long d) { return d == 0 ? 1.0 : 0.0; });
    CoreVector xi;
    xi.blocks[7] = Vector::Constant(1, 1.0);
    CHECK_THROWS_AS(mi.form_eval(xi, xi), ValidationError);
  }
}

TEST_CASE("debug dump lists nonzero blocks with complex entries") {
  const auto bd = decompose(SelfAdjointModel::diagonal({0.5, 1.5}));
  Matrix a(2, 2);
  a << 0.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 0.0;
  const auto dump = BlockMatrix::embed(a, bd).debug_dump();
  CHECK(dump["schema"] == kSchemaTag);
  REQUIRE(dump["blocks"].contains("(1,2)"));
  CHECK(dump["blocks"]["(1,2)"][0][0][1] == 1.0);
  CHECK_FALSE(dump["blocks"].contains("(1,1)"));
}
