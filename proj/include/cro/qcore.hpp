#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cro {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;

// Qubit 0 is the most significant bit of the basis index: the basis state
// |s_0 s_1 ... s_{n-1}> has index sum_l s_l * 2^(n-1-l). Every module shares
// this convention.
inline int bit_of(std::uint64_t basis_index, int qubit, int n_qubits) {
    return static_cast<int>((basis_index >> (n_qubits - 1 - qubit)) & 1ULL);
}

// Simulation caps: amplitude vectors up to 22 qubits, density matrices up
// to 12 qubits.
inline constexpr int kMaxPureQubits = 22;
inline constexpr int kMaxDensityQubits = 12;

// Dense n-qubit state, either an amplitude vector (pure) or a density
// matrix (mixed). Immutable after construction; operations return new
// states. Construction validates normalization (1e-10) and, for density
// matrices, Hermiticity and unit trace (1e-10).
class QuantumState {
public:
    static QuantumState pure(int n_qubits, Vector amplitudes, std::string label = "");
    static QuantumState mixed(int n_qubits, Matrix density, std::string label = "");

    int n_qubits() const { return n_qubits_; }
    std::int64_t dim() const { return std::int64_t{1} << n_qubits_; }
    bool is_pure() const { return is_pure_; }
    const std::string& label() const { return label_; }

    const Vector& amplitudes() const;  // pure states only
    const Matrix& density() const;     // mixed states only
    Matrix to_density() const;         // either representation

    double purity() const;
    // Smallest eigenvalue of the density matrix (1.0 - ... = 0 for pure
    // states by construction). Exposed for invariant checks; not computed
    // on construction because the eigensolve is O(dim^3).
    double min_eigenvalue() const;

private:
    QuantumState() = default;
    int n_qubits_ = 0;
    bool is_pure_ = true;
    Vector amplitudes_;
    Matrix density_;
    std::string label_;
};

enum class StateKind { ghz, w, bell, mes, product_random, pure_random, zero };

StateKind state_kind_from_string(const std::string& name);
std::string to_string(StateKind kind);

// Named state families. Random kinds are deterministic given the seed.
// bell requires n = 2; mes requires even n; w and ghz require n >= 2 (ghz
// also accepts n = 1 trivially rejected: n >= 2).
QuantumState make_state(StateKind kind, int n_qubits, std::uint64_t seed = 0);

// (1-p) rho + p I/2^n. Returns the input unchanged when p = 0; otherwise
// materializes a density matrix (subject to the density cap).
QuantumState depolarize(const QuantumState& state, double p);

// Ordered disjoint grouping of qubit indices into k parties.
struct Partition {
    std::vector<std::vector<int>> groups;

    Partition() = default;
    explicit Partition(std::vector<std::vector<int>> g) : groups(std::move(g)) {}

    // Consecutive blocks of the given sizes: blocks({1,1,1}) on 3 qubits is
    // {0}|{1}|{2}.
    static Partition blocks(const std::vector<int>& sizes);
    // Every qubit its own party.
    static Partition singletons(int n_qubits);
    // Parses "1|1|1" (block sizes) as used on the command line.
    static Partition parse(const std::string& text);

    int k() const { return static_cast<int>(groups.size()); }
    int group_qubits(int i) const { return static_cast<int>(groups[static_cast<std::size_t>(i)].size()); }
    std::int64_t group_dim(int i) const { return std::int64_t{1} << group_qubits(i); }
    std::vector<int> all_qubits() const;  // concatenation in group order
    std::string to_text() const;

    // Throws unless groups are nonempty, pairwise disjoint and within
    // [0, n_qubits). require_k2 additionally demands k >= 2.
    void validate(int n_qubits, bool require_k2 = true) const;
};

// Reduced density matrix on the listed qubits (order preserved: keep[i]
// becomes qubit i of the result). Accepts pure or mixed input; the result
// is a density-matrix state.
QuantumState partial_trace(const QuantumState& state, const std::vector<int>& keep);

// Applies the product V_0 x V_1 x ... x V_{n-1} of single-qubit unitaries.
// conjugate_mask (empty = all false) selects the entrywise complex
// conjugate of the supplied matrix per qubit.
QuantumState apply_product_unitary(const QuantumState& state,
                                   const std::vector<Matrix2>& qubit_unitaries,
                                   const std::vector<bool>& conjugate_mask = {});

// Applies a d x d operator acting on the listed qubits (in list order) to a
// state vector / density matrix, leaving the other qubits untouched.
Vector apply_group_operator(const Vector& amplitudes, const Matrix& op,
                            const std::vector<int>& qubits, int n_qubits);
Matrix apply_group_operator(const Matrix& rho, const Matrix& op,
                            const std::vector<int>& qubits, int n_qubits);

// Computational-basis outcome probabilities: |psi_s|^2 or Re diag(rho).
std::vector<double> outcome_distribution(const QuantumState& state);

// n_shots i.i.d. draws by cumulative-distribution inversion; deterministic
// given the seed.
std::vector<std::uint64_t> sample_outcomes(const std::vector<double>& probs, int n_shots,
                                           std::uint64_t seed);

// Transposition of the listed qubits' indices between rows and columns.
Matrix partial_transpose(const QuantumState& state, const std::vector<int>& subsystem);
Matrix partial_transpose(const Matrix& rho, const std::vector<int>& subsystem, int n_qubits);

// Realignment R(O)_{ij,kl} = O_{ik,jl} for the bipartition split = {A, B}
// (two groups covering all qubits). Result has shape d_A^2 x d_B^2.
Matrix realignment(const QuantumState& state, const Partition& split);
Matrix realignment(const Matrix& rho, const Partition& split, int n_qubits);

// Dense permutation operator W_pi on (C^d)^{x t}: position j of the output
// receives the input factor at position pi^{-1}(j), so that
// W_pi W_sigma = W_{pi o sigma}. perm is in one-line notation (perm[i] is
// the image of i). Subject to the materialization cap t * d^t <= 8192.
inline constexpr std::int64_t kPermOperatorCap = 8192;
Matrix permutation_operator(const std::vector<int>& perm, int d, int t);

// All t! permutations of {0..t-1} in lexicographic order.
std::vector<std::vector<int>> all_permutations(int t);

}  // namespace cro
