#pragma once

#include <cstdint>
#include <vector>

#include "cro/qcore.hpp"
#include "cro/sampler.hpp"

namespace cro {

enum class FidelityVariant { gm, max };

FidelityVariant fidelity_variant_from_string(const std::string& name);

// Exact purity of the reduced state on `subset` (the full system when the
// subset covers every qubit).
double exact_purity(const QuantumState& state, const std::vector<int>& subset);

// Correlation overlap T_k = tr(rho x_i rho_i) by direct contraction. Pure
// states whose partition covers every qubit avoid materializing the full
// density matrix.
double exact_Tk(const QuantumState& state, const Partition& partition);

// Superfidelity tr(rho sigma) / sqrt(tr rho^2 tr sigma^2) (gm) or
// tr(rho sigma) / max{tr rho^2, tr sigma^2} (max).
double exact_fidelity(const QuantumState& rho, const QuantumState& sigma, FidelityVariant variant);

// Total correlation C = -log2 F(rho, x_i rho_i).
double exact_correlation(const QuantumState& state, const Partition& partition,
                         FidelityVariant variant = FidelityVariant::gm);

// Genuine multipartite correlation: min over nontrivial bipartitions of the
// parties of -log2 F(rho, rho_A x rho_Abar).
double exact_genuine_correlation(const QuantumState& state, const Partition& partition,
                                 FidelityVariant variant = FidelityVariant::gm);

// Overlap with the maximally entangled state, computed both as the direct
// projector overlap and as (1/d) tr(rho S^{T_B}); the two routes are
// asserted equal to 1e-12.
double exact_mes_fidelity(const QuantumState& state);

// Pure-state concurrence 2^{1-n/2} sqrt((2^n - 2) - sum of all nontrivial
// subsystem purities).
double exact_concurrence(const QuantumState& state);

// Hilbert-Schmidt distance tr[(rho - x_i rho_i)^2] by direct matrix
// computation (independent of the purity identity it is tested against).
double exact_hs_distance(const QuantumState& state, const Partition& partition);

// The four bipartite separability witnesses; witness > 0 flags
// entanglement.
struct CriterionReport {
    double ppt = 0;      // -min eigenvalue of rho^{T_B}
    double entropy = 0;  // tr rho_AB^2 - tr rho_A^2
    double p3ppt = 0;    // (tr rho^2)^2 - tr((rho^{T_B})^3)
    double t2 = 0;       // tr rho_AB^2 + tr rho_A^2 + tr rho_B^2 - 2 T_2 - 1
    bool ppt_flag = false, entropy_flag = false, p3ppt_flag = false, t2_flag = false;
};

CriterionReport criterion_report(const QuantumState& state, const Partition& bipartition);

// Exact expectation of the correlation-overlap estimator over the full
// per-qubit Clifford ensemble: sums every setting and every (k+1)-tuple of
// outcomes weighted by its probability. Enumerable only for per-qubit
// settings, so global_cro is accepted when every party is a single qubit.
// Capped at 3 qubits (24^n settings).
double brute_force_estimator_expectation(const QuantumState& state, const Partition& partition,
                                         Protocol protocol, int threads = 1);

// Enumeration check of the concurrence identity chain at n <= 3: the
// fixed-outcome second moment E_U P(0^n|U)^2 versus the outcome-averaged
// one (1/2^n) E_U sum_s P(s|U)^2, plus the concurrence value each implies.
struct ConcurrenceEnumeration {
    double fixed_s_moment = 0;        // E_U P(0^n|U)^2
    double symmetrized_moment = 0;    // (1/2^n) E_U sum_s P(s|U)^2
    double concurrence_fixed_s = 0;   // 2 sqrt(1 - 3^n * fixed_s_moment)
    double concurrence_symmetrized = 0;
};

ConcurrenceEnumeration concurrence_enumeration_check(const QuantumState& state, int threads = 1);

// (1-p)|Psi+><Psi+| + p|0+><0+| on two qubits (the witness-comparison
// family).
QuantumState bell_plus_mixture(double p);

// Bell-diagonal state (I + r_x XX + r_y YY + r_z ZZ)/4.
QuantumState bell_diagonal_state(double rx, double ry, double rz);

}  // namespace cro
