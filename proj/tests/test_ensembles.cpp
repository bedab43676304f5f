#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cro/ensembles.hpp"
#include "cro/qcore.hpp"
#include "cro/support.hpp"

using namespace cro;

namespace {

bool equal_up_to_phase(const Matrix2& a, const Matrix2& b) {
    const Complex overlap = (a.adjoint() * b).trace();
    return std::abs(std::abs(overlap) - 2.0) < 1e-9;
}

Matrix random_hermitian(std::int64_t dim, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(dim, dim);
    for (std::int64_t r = 0; r < dim; ++r) {
        for (std::int64_t c = 0; c < dim; ++c) x(r, c) = Complex(rng.normal(), rng.normal());
    }
    return Matrix((x + x.adjoint()) / 2.0);
}

}  // namespace

TEST_CASE("clifford table structure") {
    const auto& table = clifford_table();
    CHECK(table.size() == 24);

    // Identity sits at index 0 and every element is unitary.
    CHECK(equal_up_to_phase(table[0], Matrix2::Identity()));
    for (const auto& u : table) {
        CHECK((u * u.adjoint() - Matrix2::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }

    // Pairwise distinct modulo global phase.
    for (int a = 0; a < 24; ++a) {
        for (int b = a + 1; b < 24; ++b) {
            CHECK_FALSE(equal_up_to_phase(table[static_cast<std::size_t>(a)],
                                          table[static_cast<std::size_t>(b)]));
        }
    }

    // Closure under products (24 x 24 table resolves inside the group).
    for (int a = 0; a < 24; ++a) {
        for (int b = 0; b < 24; ++b) CHECK_NOTHROW(clifford_product_index(a, b));
    }

    // The generators appear at the indices fixed by breadth-first order.
    Matrix2 h;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    Matrix2 s;
    s << 1, 0, 0, Complex(0, 1);
    CHECK(equal_up_to_phase(clifford_1q(1), h));
    CHECK(equal_up_to_phase(clifford_1q(2), s));

    CHECK_THROWS(clifford_1q(24));
    CHECK_THROWS(clifford_1q(-1));

    // Audit export carries all 24 rows.
    const std::string text = clifford_table_text();
    CHECK(std::count(text.begin(), text.end(), '\n') == 25);  // header + 24 rows
}

TEST_CASE("sample_setting uniformity and determinism") {
    std::vector<int> histogram(24, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto setting = sample_setting(1, EnsembleId::clifford1q, substream(99, 0, i));
        ++histogram[static_cast<std::size_t>(setting.clifford_indices[0])];
    }
    const double expected = draws / 24.0;
    const double sigma = std::sqrt(draws * (1.0 / 24.0) * (23.0 / 24.0));
    for (int idx = 0; idx < 24; ++idx) {
        CHECK(std::abs(histogram[static_cast<std::size_t>(idx)] - expected) < 5 * sigma);
    }

    const auto s1 = sample_setting(5, EnsembleId::clifford1q, 42);
    const auto s2 = sample_setting(5, EnsembleId::clifford1q, 42);
    CHECK(s1.clifford_indices == s2.clifford_indices);

    CHECK_THROWS(sample_setting(0, EnsembleId::clifford1q, 1));
}

TEST_CASE("haar sampling produces unitaries") {
    Rng rng(7);
    for (std::int64_t dim : {2, 3, 4, 8}) {
        const Matrix u = haar_unitary(dim, rng);
        CHECK((u * u.adjoint() - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);
    }
    const auto setting = sample_setting(3, EnsembleId::haar1q, 4);
    CHECK(setting.qubit_unitaries.size() == 3);
    for (const auto& u : setting.qubit_unitaries) {
        CHECK((u * u.adjoint() - Matrix2::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }

    // Party settings respect the dimension cap.
    const Partition parties({{0, 1}, {2, 3, 4}});
    const auto party_setting = sample_party_setting(parties, 5);
    CHECK(party_setting.party_unitaries[0].rows() == 4);
    CHECK(party_setting.party_unitaries[1].rows() == 8);
    CHECK_THROWS(sample_party_setting(Partition({{0, 1, 2, 3, 4, 5}, {6}}), 1));
}

TEST_CASE("twirl reproduces the swap construction") {
    // X = sum_{s,s'} -(-2)^{delta} |s,s'><s,s'| twirls to SWAP.
    Matrix x = Matrix::Zero(4, 4);
    for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) x(s * 2 + sp, s * 2 + sp) = (s == sp) ? 2.0 : -1.0;
    }
    const Matrix swap = permutation_operator({1, 0}, 2, 2);
    const TwirlResult clifford = twirl(x, EnsembleId::clifford1q, 2);
    CHECK(clifford.mc_std_error == 0.0);
    CHECK((clifford.value - swap).cwiseAbs().maxCoeff() < 1e-12);

    // Phi^2(|psi><psi|^{x2}) = (I + S)/6 for any single-qubit pure state.
    for (std::uint64_t seed : {3, 4}) {
        const QuantumState psi = make_state(StateKind::pure_random, 1, seed);
        const Matrix proj = psi.to_density();
        Matrix proj2 = Matrix::Zero(4, 4);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) proj2.block(r * 2, c * 2, 2, 2) = proj(r, c) * proj;
        }
        const Matrix expected = (Matrix::Identity(4, 4) + swap) / 6.0;
        CHECK((twirl(proj2, EnsembleId::clifford1q, 2).value - expected).cwiseAbs().maxCoeff() <
              1e-12);
    }

    // Phi^1 depolarizes: tr(A) I / d.
    const Matrix a = random_hermitian(2, 9);
    const Matrix depol = twirl(a, EnsembleId::clifford1q, 1).value;
    CHECK((depol - a.trace() / 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    // Design order: the Clifford group is a 3-design, no further.
    CHECK_NOTHROW(twirl(random_hermitian(8, 10), EnsembleId::clifford1q, 3));
    CHECK_THROWS(twirl(random_hermitian(16, 11), EnsembleId::clifford1q, 4));
}

TEST_CASE("twirl is a projection at t = 2") {
    const Matrix x = random_hermitian(4, 12);
    const Matrix once = twirl(x, EnsembleId::clifford1q, 2).value;
    const Matrix twice = twirl(once, EnsembleId::clifford1q, 2).value;
    CHECK((twice - once).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("clifford twirl matches Monte Carlo Haar twirl") {
    const Matrix x = random_hermitian(4, 13);
    const Matrix exact = twirl(x, EnsembleId::clifford1q, 2).value;
    const TwirlResult mc = twirl(x, EnsembleId::haar1q, 2, 10000, 17);
    CHECK(mc.mc_std_error > 0.0);
    CHECK((mc.value - exact).cwiseAbs().maxCoeff() < 5 * mc.mc_std_error);
}

TEST_CASE("weingarten table invariants") {
    for (int d : {2, 3, 4}) {
        const WeingartenTable wg = weingarten_t2(d);
        CHECK(wg.is_symmetric());
        const double expected = 1.0 / (static_cast<double>(d) * (d + 1.0));  // (d-1)!/(d+1)!
        CHECK(wg.row_sum(0) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(wg.row_sum(1) == doctest::Approx(expected).epsilon(1e-14));
    }

    // The Weingarten expansion reproduces the ensemble twirl at d = 2.
    const Matrix x = random_hermitian(4, 14);
    const Matrix via_wg = twirl_via_weingarten(x, weingarten_t2(2));
    const Matrix via_ensemble = twirl(x, EnsembleId::clifford1q, 2).value;
    CHECK((via_wg - via_ensemble).cwiseAbs().maxCoeff() < 1e-12);

    // And the Haar twirl at d = 3 within Monte Carlo error.
    const Matrix x3 = random_hermitian(9, 15);
    const Matrix via_wg3 = twirl_via_weingarten(x3, weingarten_t2(3));
    const TwirlResult mc3 = twirl_haar_mc(x3, 3, 2, 20000, 16);
    CHECK((via_wg3 - mc3.value).cwiseAbs().maxCoeff() < 5 * mc3.mc_std_error);
}

TEST_CASE("permutation sums match the closed forms") {
    const PermSumReport d2 = verify_perm_sums(2);
    CHECK(d2.sum_s2 == doctest::Approx(18.0));
    CHECK(d2.sum_s3 == doctest::Approx(36.0));
    CHECK(d2.sum_s4 == doctest::Approx(144.0));
    CHECK(d2.ok());

    const PermSumReport d3 = verify_perm_sums(3);
    CHECK(d3.sum_s2 == doctest::Approx(60.0));
    CHECK(d3.sum_s3 == doctest::Approx(108.0));
    CHECK(d3.sum_s4 == doctest::Approx(456.0));
    CHECK(d3.ok());

    CHECK(verify_perm_sums(4).ok());
    CHECK(verify_perm_sums(5).ok());

    // A doctored report must fail the contract.
    PermSumReport bad = d2;
    bad.sum_s4 += 1.0;
    CHECK_FALSE(bad.ok(1e-8));

    CHECK_THROWS(verify_perm_sums(7));
}

TEST_CASE("apply_setting matches explicit matrices") {
    const QuantumState psi = make_state(StateKind::pure_random, 3, 31);
    const auto setting = sample_setting(3, EnsembleId::clifford1q, 32);
    const QuantumState via_setting = apply_setting(psi, setting);
    const QuantumState via_mats = apply_product_unitary(psi, setting.qubit_matrices());
    CHECK((via_setting.amplitudes() - via_mats.amplitudes()).norm() < 1e-14);

    // Party settings act as block unitaries.
    const Partition parties({{0}, {1, 2}});
    const auto party_setting = sample_party_setting(parties, 33);
    const QuantumState rotated = apply_setting(psi, party_setting);
    CHECK(std::abs(rotated.amplitudes().norm() - 1.0) < 1e-12);
    // Norm preservation on the density path too.
    const QuantumState mixed = QuantumState::mixed(3, psi.to_density());
    const QuantumState rotated_mixed = apply_setting(mixed, party_setting);
    CHECK(rotated_mixed.density().trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((rotated_mixed.density() - rotated.to_density()).cwiseAbs().maxCoeff() < 1e-12);
}
