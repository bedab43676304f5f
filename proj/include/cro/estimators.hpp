#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cro/qcore.hpp"
#include "cro/sampler.hpp"

namespace cro {

// Point estimate with its standard error (sample standard deviation of the
// per-setting estimates divided by sqrt(N_U)). `defined` is false when a
// finite-sample pathology (nonpositive overlap under a log, negative
// radicand) makes the value meaningless; diagnostics then carry the raw
// numbers.
struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    int n_settings = 0;
    int shots_per_setting = 0;
    std::string estimator_id;
    bool defined = true;
    std::string diagnostics;
};

// One-line JSON export of an estimate record.
std::string estimate_record(const EstimateWithError& est, const std::string& partition_text,
                            const std::string& dataset_ref);

// Single-system weight X(s, s') = -(-d)^{delta_{s,s'}}: d when the outcomes
// agree, -1 otherwise.
double x_weight(std::int64_t s, std::int64_t s_prime, std::int64_t d);

// Per-qubit product weight on m-bit strings: 2^m (-2)^{-hamming(a,b)},
// equal to the product of per-bit x_weight factors.
double x_weight_local(std::uint64_t a, std::uint64_t b, int n_bits);

// Unbiased correlation-overlap estimator: per setting the order-(k+1)
// U-statistic whose smallest index plays the distinguished first copy,
// averaged over settings. Local datasets use per-qubit product weights for
// any partition; global datasets require every requested group to be a
// union of recorded parties and use per-party weights.
EstimateWithError estimate_Tk(const MeasurementDataset& dataset, const Partition& partition,
                              int threads = 1);

// Reference evaluator of the same statistic by direct enumeration of the
// (k+1)-subsets. O(N_M^{k+1}) per setting; test oracle for small N_M.
double tk_setting_statistic_direct(const MeasurementDataset& dataset, const Partition& partition,
                                   int setting_index);
// Production evaluator for one setting (chained prefix sums over ordered
// subsets; algebraically the same sum).
double tk_setting_statistic(const MeasurementDataset& dataset, const Partition& partition,
                            int setting_index);

// 2-copy purity estimator tr(rho_subset^2): mean over ordered shot pairs of
// the product weight restricted to the subset.
EstimateWithError estimate_purity(const MeasurementDataset& dataset, const std::vector<int>& subset,
                                  int threads = 1);

// Plug-in total correlation -log2( T_k / sqrt(purity_full * prod purity_i) )
// with first-order error propagation, components treated as independent.
EstimateWithError estimate_correlation(const MeasurementDataset& dataset, const Partition& partition,
                                       int threads = 1);

// Fidelity to the maximally entangled state: per setting the mean over
// shots of (-2)^{-hamming(s_A, s_B)} (the kernel compares the two halves of
// one shot, not two shots).
EstimateWithError estimate_mes_fidelity(const MeasurementDataset& dataset, int threads = 1);

// Concurrence of a pure state: the collision statistic over ordered shot
// pairs estimates K = E_U sum_s P(s|U)^2, and the estimate is
// 2 sqrt(max(0, 1 - (3/2)^n K)). The s-symmetrized collision form has the
// same expectation as the paper's fixed-s estimator and 2^n times better
// statistics.
EstimateWithError estimate_concurrence(const MeasurementDataset& dataset, int threads = 1);

// T2 separability witness
// tr rho_AB^2 + tr rho_A^2 + tr rho_B^2 - 2 T_2 - 1; positive values flag
// entanglement.
EstimateWithError estimate_t2_witness(const MeasurementDataset& dataset, const Partition& bipartition,
                                      int threads = 1);

}  // namespace cro
