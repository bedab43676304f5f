#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cro/qcore.hpp"
#include "cro/support.hpp"

namespace cro {

enum class EnsembleId { clifford1q, haar1q, haar_party };

EnsembleId ensemble_from_string(const std::string& name);
std::string to_string(EnsembleId id);

// The 24-element single-qubit Clifford group (modulo global phase),
// enumerated as the closure of {H, S} in deterministic breadth-first order
// with the identity at index 0. Every element is phase-canonicalized so the
// first nonzero entry is real positive.
const std::array<Matrix2, 24>& clifford_table();
const Matrix2& clifford_1q(int index);

// Index of the product c[a] * c[b], modulo global phase.
int clifford_product_index(int a, int b);

// Audit export: one row per element, tab-separated entries.
std::string clifford_table_text();

// One sampled product unitary: per-qubit Clifford indices (clifford1q),
// explicit per-qubit matrices (haar1q), or explicit per-party matrices
// (haar_party, global protocol). Stored matrices are unitary within 1e-12.
struct LocalUnitarySetting {
    EnsembleId ensemble_id = EnsembleId::clifford1q;
    std::vector<int> clifford_indices;        // clifford1q
    std::vector<Matrix2> qubit_unitaries;     // haar1q
    std::vector<Matrix> party_unitaries;      // haar_party
    std::vector<std::vector<int>> party_qubits;

    int unit_count() const;
    // Per-qubit 2x2 matrices; valid for the single-qubit ensembles only.
    std::vector<Matrix2> qubit_matrices() const;
};

// Independent uniform draws per qubit; deterministic given seed.
LocalUnitarySetting sample_setting(int n_qubits, EnsembleId id, std::uint64_t seed);

// Independent Haar draws per party for the global protocol. Party dimension
// is capped at 2^5.
inline constexpr int kMaxPartyQubits = 5;
LocalUnitarySetting sample_party_setting(const Partition& partition, std::uint64_t seed);

// Haar-distributed unitary via QR of a complex Ginibre matrix.
Matrix haar_unitary(std::int64_t dim, Rng& rng);

// Evolves a state by the setting's product unitary. For the single-qubit
// ensembles conjugate_mask selects entrywise conjugation per qubit (the
// U x U* protocol); it must be empty for party settings.
QuantumState apply_setting(const QuantumState& state, const LocalUnitarySetting& setting,
                           const std::vector<bool>& conjugate_mask = {});

struct TwirlResult {
    Matrix value;
    // Largest entrywise Monte Carlo standard error; zero for exact averages.
    double mc_std_error = 0.0;
};

// t-fold twirling channel E_U[U^{xt} X U^{dag xt}] over the named ensemble
// acting on one qubit (X lives on (C^2)^{xt}). Exact for clifford1q (a
// 3-design, so t <= 3); Monte Carlo with reported error for haar1q.
TwirlResult twirl(const Matrix& x, EnsembleId id, int t, int mc_samples = 10000,
                  std::uint64_t seed = 1);

// Monte Carlo Haar twirl in arbitrary dimension.
TwirlResult twirl_haar_mc(const Matrix& x, std::int64_t dim, int t, int mc_samples,
                          std::uint64_t seed);

// Second-order Weingarten data: coefficients C_{pi,sigma} over S_t indexed
// against `perms`. Only t = 2 is materialized (1/(d^2-1) on the diagonal,
// -1/(d(d^2-1)) off it).
struct WeingartenTable {
    int t = 2;
    int d = 2;
    std::vector<std::vector<int>> perms;
    Eigen::MatrixXd coeffs;

    double row_sum(int row) const;
    bool is_symmetric(double tol = 0.0) const;
};

WeingartenTable weingarten_t2(int d);

// Twirl evaluated through the Weingarten expansion
// sum_{pi,sigma} C_{pi,sigma} tr(W_pi X) W_sigma; cross-checks the
// ensemble averages.
Matrix twirl_via_weingarten(const Matrix& x, const WeingartenTable& table);

// Brute-force evaluation of the three permutation sums against their
// closed forms: sum over S2 of tr(W X^2), over S3 of tr(W X^(12,13)), over
// S4 of tr(W X^{x2}), with X(a,b) = -(-d)^{delta_ab}. Enumerates explicit
// permutation matrices; d <= 6.
struct PermSumReport {
    int d = 0;
    double sum_s2 = 0, sum_s3 = 0, sum_s4 = 0;
    double closed_s2 = 0, closed_s3 = 0, closed_s4 = 0;
    double max_abs_error() const;
    bool ok(double tol = 1e-8) const { return max_abs_error() <= tol; }
};

PermSumReport verify_perm_sums(int d);

}  // namespace cro
