#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "vbroadcast/linalg.hpp"

using namespace vbroadcast;

namespace {

// independent index-formula oracle for F (x) I on three qubit-sized factors:
// basis map |i1 i2 i3> -> |i2 i1 i3>
ComplexMatrix swap_kron_identity_oracle(std::size_t d) {
  ComplexMatrix p(d * d * d, d * d * d);
  for (std::size_t i1 = 0; i1 < d; ++i1)
    for (std::size_t i2 = 0; i2 < d; ++i2)
      for (std::size_t i3 = 0; i3 < d; ++i3)
        p((i2 * d + i1) * d + i3, (i1 * d + i2) * d + i3) = 1.0;
  return p;
}

// brute-force partial trace by explicit digit decomposition, written
// independently of the library's stride bookkeeping
ComplexMatrix partial_trace_oracle(const ComplexMatrix &m,
                                   const std::vector<std::size_t> &dims,
                                   const std::vector<bool> &keep) {
  std::size_t dim_kept = 1;
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (keep[i])
      dim_kept *= dims[i];

  auto decompose = [&](std::size_t flat) {
    std::vector<std::size_t> digits(dims.size());
    for (std::size_t i = dims.size(); i-- > 0;) {
      digits[i] = flat % dims[i];
      flat /= dims[i];
    }
    return digits;
  };
  auto kept_part = [&](const std::vector<std::size_t> &digits) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (keep[i])
        out = out * dims[i] + digits[i];
    return out;
  };

  ComplexMatrix out(dim_kept, dim_kept);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto rd = decompose(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const auto cd = decompose(c);
      bool traced_match = true;
      for (std::size_t i = 0; i < dims.size(); ++i)
        if (!keep[i] && rd[i] != cd[i])
          traced_match = false;
      if (traced_match)
        out(kept_part(rd), kept_part(cd)) += m(r, c);
    }
  }
  return out;
}

ComplexMatrix pauli_z() {
  ComplexMatrix z(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  return z;
}

} // namespace

TEST_CASE("kron: identity case") {
  const ComplexMatrix i2 = ComplexMatrix::identity(2);
  CHECK(max_abs_diff(kron(i2, i2), ComplexMatrix::identity(4)) == 0.0);
}

TEST_CASE("kron: diagonal product Z (x) Z") {
  const ComplexMatrix zz = kron(pauli_z(), pauli_z());
  const double expected[4] = {1.0, -1.0, -1.0, 1.0};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(zz(i, i).real() == doctest::Approx(expected[i]));
    CHECK(zz(i, i).imag() == 0.0);
  }
}

TEST_CASE("kron: F (x) I matches the index-permutation oracle") {
  const ComplexMatrix lhs = kron(swap_operator(2), ComplexMatrix::identity(2));
  CHECK(max_abs_diff(lhs, swap_kron_identity_oracle(2)) == 0.0);
}

TEST_CASE("kron: associativity") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const ComplexMatrix a = random_hermitian(2, rng());
    const ComplexMatrix b = random_hermitian(3, rng());
    const ComplexMatrix c = random_hermitian(2, rng());
    CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) <= 1e-14);
  }
}

TEST_CASE("swap conjugation: F kron(a,b) F = kron(b,a)") {
  std::mt19937_64 rng(12);
  const ComplexMatrix f = swap_operator(3);
  for (int rep = 0; rep < 5; ++rep) {
    const ComplexMatrix a = random_hermitian(3, rng());
    const ComplexMatrix b = random_hermitian(3, rng());
    CHECK(max_abs_diff(f * kron(a, b) * f, kron(b, a)) <= 1e-12);
  }
}

TEST_CASE("partial_trace: Phi marginal is the identity") {
  const SystemLayout layout({{"B", 2}, {"B1", 2}});
  const ComplexMatrix reduced = partial_trace(max_entangled(2), layout, {"B"});
  CHECK(max_abs_diff(reduced, ComplexMatrix::identity(2)) == 0.0);
}

TEST_CASE("partial_trace: product state factorization") {
  std::mt19937_64 rng(13);
  const ComplexMatrix rho = random_ginibre_density(2, rng());
  const ComplexMatrix sigma = random_hermitian(3, rng());
  const SystemLayout layout({{"L", 2}, {"R", 3}});
  const ComplexMatrix reduced = partial_trace(kron(rho, sigma), layout, {"L"});
  ComplexMatrix expected = rho;
  expected *= sigma.trace();
  CHECK(max_abs_diff(reduced, expected) <= 1e-13);
}

TEST_CASE("partial_trace: agrees with the brute-force oracle") {
  std::mt19937_64 rng(14);
  const ComplexMatrix m = random_hermitian(12, rng());
  const SystemLayout layout({{"X", 2}, {"Y", 3}, {"Z", 2}});
  CHECK(max_abs_diff(partial_trace(m, layout, {"Y"}),
                     partial_trace_oracle(m, {2, 3, 2}, {false, true, false})) <=
        1e-13);
  CHECK(max_abs_diff(partial_trace(m, layout, {"X", "Z"}),
                     partial_trace_oracle(m, {2, 3, 2}, {true, false, true})) <=
        1e-13);
}

TEST_CASE("partial_trace: linear and trace preserving on random inputs") {
  std::mt19937_64 rng(15);
  const SystemLayout layouts[] = {SystemLayout({{"A", 2}, {"B", 2}}),
                                  SystemLayout({{"A", 2}, {"B", 3}}),
                                  SystemLayout({{"A", 2}, {"B", 2}, {"C", 2}})};
  for (const auto &layout : layouts) {
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t dim = layout.total_dim();
      const ComplexMatrix x = random_hermitian(dim, rng());
      const ComplexMatrix y = random_hermitian(dim, rng());
      const ComplexMatrix px = partial_trace(x, layout, {"A"});
      CHECK(std::abs(px.trace() - x.trace()) <= 1e-12 * dim);
      ComplexMatrix combo = x;
      combo *= 0.5;
      ComplexMatrix ty = y;
      ty *= 2.0;
      combo += ty;
      ComplexMatrix expected = px;
      expected *= 0.5;
      ComplexMatrix py = partial_trace(y, layout, {"A"});
      py *= 2.0;
      expected += py;
      CHECK(max_abs_diff(partial_trace(combo, layout, {"A"}), expected) <= 1e-12);
    }
  }
}

TEST_CASE("partial_trace: unknown label throws") {
  const SystemLayout layout({{"B", 2}, {"B1", 2}});
  CHECK_THROWS_AS(partial_trace(ComplexMatrix::identity(4), layout, {"Q"}),
                  std::invalid_argument);
}

TEST_CASE("partial_transpose: identity fixed point") {
  const SystemLayout layout({{"B", 2}, {"B1", 2}});
  CHECK(max_abs_diff(partial_transpose(ComplexMatrix::identity(4), layout, "B"),
                     ComplexMatrix::identity(4)) == 0.0);
}

TEST_CASE("partial_transpose: Phi^T_B equals the swap") {
  const SystemLayout layout({{"B", 2}, {"B1", 2}});
  CHECK(max_abs_diff(partial_transpose(max_entangled(2), layout, "B"),
                     swap_operator(2)) == 0.0);
}

TEST_CASE("partial_transpose: involution on a random Hermitian 8x8") {
  const SystemLayout layout({{"B", 2}, {"B1", 2}, {"B2", 2}});
  const ComplexMatrix m = random_hermitian(8, 16);
  const ComplexMatrix twice =
      partial_transpose(partial_transpose(m, layout, "B1"), layout, "B1");
  CHECK(max_abs_diff(twice, m) <= 1e-14);
}

TEST_CASE("swap_operator: d = 1") {
  const ComplexMatrix f = swap_operator(1);
  CHECK(f.rows() == 1);
  CHECK(f(0, 0) == complex_t(1.0, 0.0));
}

TEST_CASE("swap_operator: acts on the basis, F|01> = |10>") {
  const ComplexMatrix f = swap_operator(2);
  // column of |01> = index 1 has its single 1 at row |10> = index 2
  for (std::size_t r = 0; r < 4; ++r)
    CHECK(f(r, 1) == complex_t(r == 2 ? 1.0 : 0.0, 0.0));
  CHECK(max_abs_diff(f * f, ComplexMatrix::identity(4)) == 0.0);
}

TEST_CASE("swap_operator: trace equals d") {
  for (std::size_t d = 2; d <= 5; ++d)
    CHECK(swap_operator(d).trace().real() == doctest::Approx(double(d)));
}

TEST_CASE("max_entangled: d = 1 and d = 2 entries") {
  CHECK(max_entangled(1)(0, 0) == complex_t(1.0, 0.0));
  const ComplexMatrix phi = max_entangled(2);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      const bool hit = (r == 0 || r == 3) && (c == 0 || c == 3);
      CHECK(phi(r, c) == complex_t(hit ? 1.0 : 0.0, 0.0));
    }
}

TEST_CASE("max_entangled: spectrum of Phi_3 is {3, 0 x 8}") {
  const auto vals = herm_eigvals(max_entangled(3));
  CHECK(vals[0] == doctest::Approx(3.0).epsilon(1e-12));
  for (std::size_t i = 1; i < vals.size(); ++i)
    CHECK(std::abs(vals[i]) <= 1e-12);
}

TEST_CASE("herm_eig: known spectra") {
  const auto id = herm_eig(ComplexMatrix::identity(4));
  for (double v : id.eigenvalues)
    CHECK(v == doctest::Approx(1.0));

  const auto f = herm_eig(swap_operator(2));
  CHECK(f.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(f.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(f.eigenvalues[2] == doctest::Approx(1.0));
  CHECK(f.eigenvalues[3] == doctest::Approx(-1.0));

  const auto phi = herm_eig(max_entangled(2));
  CHECK(phi.eigenvalues[0] == doctest::Approx(2.0));
  for (std::size_t i = 1; i < 4; ++i)
    CHECK(std::abs(phi.eigenvalues[i]) <= 1e-12);
}

TEST_CASE("herm_eig: reconstruction and unitarity on random inputs") {
  std::mt19937_64 rng(17);
  for (std::size_t side : {1, 2, 3, 5, 8, 17, 40}) {
    const ComplexMatrix m = random_hermitian(side, rng());
    const EigResult eig = herm_eig(m);
    ComplexMatrix vl(side, side);
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = 0; j < side; ++j)
        vl(i, j) = eig.eigenvectors(i, j) * eig.eigenvalues[j];
    const ComplexMatrix recon = vl * eig.eigenvectors.dagger();
    const double scale = std::max(1.0, m.max_abs());
    CHECK(max_abs_diff(recon, m) <= 1e-9 * scale);
    CHECK(max_abs_diff(eig.eigenvectors.dagger() * eig.eigenvectors,
                       ComplexMatrix::identity(side)) <= 1e-9);
    auto sorted = eig.eigenvalues;
    std::sort(sorted.rbegin(), sorted.rend());
    CHECK(sorted == eig.eigenvalues);
  }
}

TEST_CASE("herm_eig: large reconstruction stays within contract") {
  const ComplexMatrix m = random_hermitian(200, 18);
  const EigResult eig = herm_eig(m);
  ComplexMatrix vl(200, 200);
  for (std::size_t i = 0; i < 200; ++i)
    for (std::size_t j = 0; j < 200; ++j)
      vl(i, j) = eig.eigenvectors(i, j) * eig.eigenvalues[j];
  CHECK(max_abs_diff(vl * eig.eigenvectors.dagger(), m) <=
        1e-9 * std::max(1.0, m.max_abs()));
}

TEST_CASE("herm_eig: extreme scales") {
  for (double scale : {1e-12, 1e12}) {
    ComplexMatrix m = random_hermitian(12, 23);
    m *= scale;
    const EigResult eig = herm_eig(m);
    ComplexMatrix vl(12, 12);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j)
        vl(i, j) = eig.eigenvectors(i, j) * eig.eigenvalues[j];
    CHECK(max_abs_diff(vl * eig.eigenvectors.dagger(), m) <=
          1e-9 * std::max(1.0, m.max_abs()));
  }
}

TEST_CASE("herm_eig: exact projectors with large zero eigenspaces") {
  // rank-r projectors built from random orthonormal columns produce exact
  // cancellation below the diagonal during reduction; the solver must not
  // stall on the resulting noise cascade
  for (std::size_t side : {24, 64}) {
    const ComplexMatrix g = random_hermitian(side, 24 + side);
    const EigResult basis = herm_eig(g);
    const std::size_t rank = side / 3;
    ComplexMatrix proj(side, side);
    for (std::size_t k = 0; k < rank; ++k)
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j)
          proj(i, j) += basis.eigenvectors(i, k) *
                        std::conj(basis.eigenvectors(j, k));
    proj.hermitize();
    const auto vals = herm_eigvals(proj);
    for (std::size_t i = 0; i < rank; ++i)
      CHECK(vals[i] == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t i = rank; i < side; ++i)
      CHECK(std::abs(vals[i]) <= 1e-10);
  }
}

TEST_CASE("herm_eig: rejects non-Hermitian input") {
  ComplexMatrix m(2, 2);
  m(0, 1) = 1.0; // m(1,0) stays 0
  CHECK_THROWS_AS(herm_eig(m), std::invalid_argument);
  CHECK_THROWS_AS(herm_eigvals(m), std::invalid_argument);
}

TEST_CASE("is_psd: identity and its negative") {
  CHECK(is_psd(ComplexMatrix::identity(3), 1e-12));
  ComplexMatrix neg = ComplexMatrix::identity(3);
  neg *= -1.0;
  CHECK_FALSE(is_psd(neg, 1e-12));
}

TEST_CASE("hermitian basis: orthonormal") {
  const std::size_t n = 3;
  for (std::size_t a = 0; a < herm_basis_dim(n); ++a) {
    const ComplexMatrix ea = herm_basis_element(n, a);
    CHECK(ea.herm_defect() <= 1e-15);
    for (std::size_t b = 0; b < herm_basis_dim(n); ++b) {
      const ComplexMatrix prod = ea * herm_basis_element(n, b);
      const double inner = prod.trace().real();
      CHECK(inner == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("hermitian basis: encode/decode round trip") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> coeffs(herm_basis_dim(4));
    for (auto &v : coeffs)
      v = gauss(rng);
    const auto round = herm_encode(herm_decode(coeffs, 4));
    for (std::size_t k = 0; k < coeffs.size(); ++k)
      CHECK(std::abs(round[k] - coeffs[k]) <= 1e-14);
  }
  // decoding the encode of a matrix also returns the matrix
  const ComplexMatrix h = random_hermitian(5, rng());
  CHECK(max_abs_diff(herm_decode(herm_encode(h), 5), h) <= 1e-14);
}

TEST_CASE("real embedding: doubled multiplicities") {
  const ComplexMatrix m = random_hermitian(6, 20);
  const auto complex_vals = herm_eigvals(m);
  const auto embedded_vals = herm_eigvals(real_embedding(m));
  REQUIRE(embedded_vals.size() == 12);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(embedded_vals[2 * i] ==
          doctest::Approx(complex_vals[i]).epsilon(1e-10));
    CHECK(embedded_vals[2 * i + 1] ==
          doctest::Approx(complex_vals[i]).epsilon(1e-10));
  }
}

TEST_CASE("embed: places a two-subsystem operator with identity elsewhere") {
  const SystemLayout layout({{"B", 2}, {"B1", 2}, {"B2", 2}});
  const ComplexMatrix direct = kron(max_entangled(2), ComplexMatrix::identity(2));
  CHECK(max_abs_diff(embed(max_entangled(2), {"B", "B1"}, layout), direct) == 0.0);

  // embedding on (B, B2) must equal conjugating the (B, B1) embedding by the
  // B1 <-> B2 swap
  const ComplexMatrix lhs = embed(max_entangled(2), {"B", "B2"}, layout);
  const ComplexMatrix rhs = swap_conjugate(direct, layout, "B1", "B2");
  CHECK(max_abs_diff(lhs, rhs) == 0.0);
}

TEST_CASE("permute_subsystems: relabeling round trip") {
  const SystemLayout layout({{"A", 2}, {"B", 3}, {"C", 2}});
  const ComplexMatrix m = random_hermitian(12, 21);
  const ComplexMatrix rotated = permute_subsystems(m, layout, {2, 0, 1});
  const SystemLayout rotated_layout = layout.select({2, 0, 1});
  const ComplexMatrix back = permute_subsystems(rotated, rotated_layout, {1, 2, 0});
  CHECK(max_abs_diff(back, m) == 0.0);
}
