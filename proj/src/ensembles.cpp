#include "cro/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <stdexcept>

namespace cro {

EnsembleId ensemble_from_string(const std::string& name) {
    if (name == "clifford1q") return EnsembleId::clifford1q;
    if (name == "haar1q") return EnsembleId::haar1q;
    if (name == "haar_party") return EnsembleId::haar_party;
    throw std::invalid_argument("unknown ensemble: " + name);
}

std::string to_string(EnsembleId id) {
    switch (id) {
        case EnsembleId::clifford1q: return "clifford1q";
        case EnsembleId::haar1q: return "haar1q";
        case EnsembleId::haar_party: return "haar_party";
    }
    return "?";
}

namespace {

Matrix2 canonical_phase(Matrix2 u) {
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            if (std::abs(u(r, c)) > 1e-8) {
                u *= std::conj(u(r, c)) / std::abs(u(r, c));
                return u;
            }
        }
    }
    throw std::logic_error("zero matrix in Clifford generation");
}

// Entries of canonicalized Cliffords come from a coarse finite set, so a
// fixed-grid rounding keys them uniquely.
std::array<long, 8> dedupe_key(const Matrix2& u) {
    std::array<long, 8> key{};
    int i = 0;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            key[static_cast<std::size_t>(i++)] = std::lround(u(r, c).real() * 4096.0);
            key[static_cast<std::size_t>(i++)] = std::lround(u(r, c).imag() * 4096.0);
        }
    }
    return key;
}

std::array<Matrix2, 24> generate_clifford_group() {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Matrix2 h;
    h << inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2;
    Matrix2 s;
    s << 1.0, 0.0, 0.0, Complex(0.0, 1.0);

    std::array<Matrix2, 24> table;
    std::map<std::array<long, 8>, int> seen;
    std::deque<Matrix2> frontier;

    const Matrix2 identity = Matrix2::Identity();
    table[0] = canonical_phase(identity);
    seen[dedupe_key(table[0])] = 0;
    frontier.push_back(table[0]);
    int count = 1;

    while (!frontier.empty()) {
        const Matrix2 cur = frontier.front();
        frontier.pop_front();
        for (const Matrix2* gen : {&h, &s}) {
            const Matrix2 next = canonical_phase((*gen) * cur);
            const auto key = dedupe_key(next);
            if (seen.find(key) != seen.end()) continue;
            if (count >= 24) throw std::logic_error("Clifford closure exceeded 24 elements");
            seen[key] = count;
            table[static_cast<std::size_t>(count)] = next;
            frontier.push_back(next);
            ++count;
        }
    }
    if (count != 24) throw std::logic_error("Clifford closure produced " + std::to_string(count) + " elements");
    return table;
}

}  // namespace

const std::array<Matrix2, 24>& clifford_table() {
    static const std::array<Matrix2, 24> table = generate_clifford_group();
    return table;
}

const Matrix2& clifford_1q(int index) {
    if (index < 0 || index >= 24) {
        throw std::invalid_argument("Clifford index out of range: " + std::to_string(index));
    }
    return clifford_table()[static_cast<std::size_t>(index)];
}

int clifford_product_index(int a, int b) {
    const Matrix2 prod = clifford_1q(a) * clifford_1q(b);
    // Compare modulo global phase.
    for (int i = 0; i < 24; ++i) {
        const Matrix2& cand = clifford_table()[static_cast<std::size_t>(i)];
        const Complex overlap = (cand.adjoint() * prod).trace();
        if (std::abs(std::abs(overlap) - 2.0) < 1e-9) return i;
    }
    throw std::logic_error("Clifford product not found in table");
}

std::string clifford_table_text() {
    std::string out = "# single-qubit Clifford enumeration: index\tu00\tu01\tu10\tu11 (re,im)\n";
    char buf[64];
    for (int i = 0; i < 24; ++i) {
        const Matrix2& u = clifford_table()[static_cast<std::size_t>(i)];
        out += std::to_string(i);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                std::snprintf(buf, sizeof(buf), "\t%.17g,%.17g", u(r, c).real(), u(r, c).imag());
                out += buf;
            }
        }
        out += '\n';
    }
    return out;
}

int LocalUnitarySetting::unit_count() const {
    switch (ensemble_id) {
        case EnsembleId::clifford1q: return static_cast<int>(clifford_indices.size());
        case EnsembleId::haar1q: return static_cast<int>(qubit_unitaries.size());
        case EnsembleId::haar_party: return static_cast<int>(party_unitaries.size());
    }
    return 0;
}

std::vector<Matrix2> LocalUnitarySetting::qubit_matrices() const {
    if (ensemble_id == EnsembleId::clifford1q) {
        std::vector<Matrix2> mats;
        mats.reserve(clifford_indices.size());
        for (int idx : clifford_indices) mats.push_back(clifford_1q(idx));
        return mats;
    }
    if (ensemble_id == EnsembleId::haar1q) return qubit_unitaries;
    throw std::logic_error("party settings have no per-qubit matrices");
}

LocalUnitarySetting sample_setting(int n_qubits, EnsembleId id, std::uint64_t seed) {
    if (n_qubits < 1) throw std::invalid_argument("sample_setting: need at least one qubit");
    LocalUnitarySetting setting;
    setting.ensemble_id = id;
    Rng rng(seed);
    switch (id) {
        case EnsembleId::clifford1q:
            setting.clifford_indices.reserve(static_cast<std::size_t>(n_qubits));
            for (int q = 0; q < n_qubits; ++q) {
                setting.clifford_indices.push_back(static_cast<int>(rng.uniform_int(24)));
            }
            break;
        case EnsembleId::haar1q:
            setting.qubit_unitaries.reserve(static_cast<std::size_t>(n_qubits));
            for (int q = 0; q < n_qubits; ++q) {
                setting.qubit_unitaries.push_back(Matrix2(haar_unitary(2, rng)));
            }
            break;
        case EnsembleId::haar_party:
            throw std::invalid_argument("party settings are sampled with sample_party_setting");
    }
    return setting;
}

LocalUnitarySetting sample_party_setting(const Partition& partition, std::uint64_t seed) {
    if (partition.groups.empty()) throw std::invalid_argument("sample_party_setting: empty partition");
    LocalUnitarySetting setting;
    setting.ensemble_id = EnsembleId::haar_party;
    Rng rng(seed);
    for (int i = 0; i < partition.k(); ++i) {
        if (partition.group_qubits(i) > kMaxPartyQubits) {
            throw std::invalid_argument("party of " + std::to_string(partition.group_qubits(i)) +
                                        " qubits exceeds the Haar-sampling cap of " +
                                        std::to_string(kMaxPartyQubits));
        }
        setting.party_unitaries.push_back(haar_unitary(partition.group_dim(i), rng));
        setting.party_qubits.push_back(partition.groups[static_cast<std::size_t>(i)]);
    }
    return setting;
}

Matrix haar_unitary(std::int64_t dim, Rng& rng) {
    Matrix a(dim, dim);
    for (std::int64_t r = 0; r < dim; ++r) {
        for (std::int64_t c = 0; c < dim; ++c) a(r, c) = Complex(rng.normal(), rng.normal());
    }
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (std::int64_t c = 0; c < dim; ++c) {
        const Complex diag = r(c, c);
        const double mag = std::abs(diag);
        if (mag > 0) q.col(c) *= diag / mag;
    }
    return q;
}

QuantumState apply_setting(const QuantumState& state, const LocalUnitarySetting& setting,
                           const std::vector<bool>& conjugate_mask) {
    if (setting.ensemble_id == EnsembleId::haar_party) {
        if (!conjugate_mask.empty()) {
            throw std::invalid_argument("conjugate mask is not supported for party settings");
        }
        if (state.is_pure()) {
            Vector psi = state.amplitudes();
            for (std::size_t i = 0; i < setting.party_unitaries.size(); ++i) {
                psi = apply_group_operator(psi, setting.party_unitaries[i], setting.party_qubits[i],
                                           state.n_qubits());
            }
            return QuantumState::pure(state.n_qubits(), std::move(psi), state.label());
        }
        Matrix rho = state.density();
        for (std::size_t i = 0; i < setting.party_unitaries.size(); ++i) {
            rho = apply_group_operator(rho, setting.party_unitaries[i], setting.party_qubits[i],
                                       state.n_qubits());
            rho = apply_group_operator(Matrix(rho.adjoint()), setting.party_unitaries[i],
                                       setting.party_qubits[i], state.n_qubits())
                      .adjoint();
        }
        return QuantumState::mixed(state.n_qubits(), std::move(rho), state.label());
    }
    return apply_product_unitary(state, setting.qubit_matrices(), conjugate_mask);
}

namespace {

Matrix kron_pow(const Matrix& u, int t) {
    Matrix out = u;
    for (int i = 1; i < t; ++i) {
        Matrix next(out.rows() * u.rows(), out.cols() * u.cols());
        for (std::int64_t r = 0; r < out.rows(); ++r) {
            for (std::int64_t c = 0; c < out.cols(); ++c) {
                next.block(r * u.rows(), c * u.cols(), u.rows(), u.cols()) = out(r, c) * u;
            }
        }
        out = std::move(next);
    }
    return out;
}

std::int64_t int_pow(std::int64_t base, int exp) {
    std::int64_t out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

}  // namespace

TwirlResult twirl(const Matrix& x, EnsembleId id, int t, int mc_samples, std::uint64_t seed) {
    if (t < 1) throw std::invalid_argument("twirl: need t >= 1");
    const std::int64_t dim = int_pow(2, t);
    if (x.rows() != dim || x.cols() != dim) {
        throw std::invalid_argument("twirl: operator dimension does not match 2^t");
    }
    switch (id) {
        case EnsembleId::clifford1q: {
            // The single-qubit Clifford group is a 3-design.
            if (t > 3) {
                throw std::invalid_argument("clifford1q is a 3-design; cannot twirl with t = " +
                                            std::to_string(t));
            }
            Matrix acc = Matrix::Zero(dim, dim);
            for (int i = 0; i < 24; ++i) {
                const Matrix u = kron_pow(clifford_1q(i), t);
                acc += u * x * u.adjoint();
            }
            return {acc / 24.0, 0.0};
        }
        case EnsembleId::haar1q:
            return twirl_haar_mc(x, 2, t, mc_samples, seed);
        case EnsembleId::haar_party:
            throw std::invalid_argument("twirl over party settings needs an explicit dimension; "
                                        "use twirl_haar_mc");
    }
    throw std::invalid_argument("unsupported ensemble");
}

TwirlResult twirl_haar_mc(const Matrix& x, std::int64_t dim, int t, int mc_samples,
                          std::uint64_t seed) {
    if (mc_samples < 2) throw std::invalid_argument("twirl_haar_mc: need at least two samples");
    const std::int64_t full = x.rows();
    if (full != int_pow(dim, t) || x.cols() != full) {
        throw std::invalid_argument("twirl_haar_mc: operator dimension does not match d^t");
    }
    Rng rng(seed);
    Matrix mean = Matrix::Zero(full, full);
    Eigen::MatrixXd sq_mean = Eigen::MatrixXd::Zero(full, full);
    for (int s = 0; s < mc_samples; ++s) {
        const Matrix u = kron_pow(haar_unitary(dim, rng), t);
        const Matrix sample = u * x * u.adjoint();
        mean += sample;
        sq_mean += sample.cwiseAbs2();
    }
    mean /= static_cast<double>(mc_samples);
    sq_mean /= static_cast<double>(mc_samples);
    const Eigen::MatrixXd var = (sq_mean - mean.cwiseAbs2()).cwiseMax(0.0);
    const double max_se = std::sqrt(var.maxCoeff() / static_cast<double>(mc_samples - 1));
    return {std::move(mean), max_se};
}

double WeingartenTable::row_sum(int row) const {
    return coeffs.row(row).sum();
}

bool WeingartenTable::is_symmetric(double tol) const {
    return (coeffs - coeffs.transpose()).cwiseAbs().maxCoeff() <= tol;
}

WeingartenTable weingarten_t2(int d) {
    if (d < 2) throw std::invalid_argument("weingarten_t2: need d >= 2");
    WeingartenTable table;
    table.t = 2;
    table.d = d;
    table.perms = all_permutations(2);
    const double dd = static_cast<double>(d);
    table.coeffs.resize(2, 2);
    table.coeffs << 1.0 / (dd * dd - 1.0), -1.0 / (dd * (dd * dd - 1.0)),
        -1.0 / (dd * (dd * dd - 1.0)), 1.0 / (dd * dd - 1.0);
    return table;
}

Matrix twirl_via_weingarten(const Matrix& x, const WeingartenTable& table) {
    const std::size_t n_perms = table.perms.size();
    std::vector<Matrix> ws;
    ws.reserve(n_perms);
    for (const auto& perm : table.perms) {
        ws.push_back(permutation_operator(perm, table.d, table.t));
    }
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t p = 0; p < n_perms; ++p) {
        const Complex tr = (ws[p] * x).trace();
        for (std::size_t s = 0; s < n_perms; ++s) {
            out += table.coeffs(static_cast<std::int64_t>(p), static_cast<std::int64_t>(s)) * tr * ws[s];
        }
    }
    return out;
}

namespace {

double x_kernel(int a, int b, int d) { return a == b ? static_cast<double>(d) : -1.0; }

// Diagonal observable on (C^d)^{xt} given by a value per basis digit string.
Eigen::VectorXd diagonal_observable(int d, int t, const std::function<double(const std::vector<int>&)>& f) {
    const std::int64_t dim = int_pow(d, t);
    Eigen::VectorXd diag(dim);
    std::vector<int> digits(static_cast<std::size_t>(t));
    for (std::int64_t i = 0; i < dim; ++i) {
        std::int64_t rem = i;
        for (int k = t - 1; k >= 0; --k) {
            digits[static_cast<std::size_t>(k)] = static_cast<int>(rem % d);
            rem /= d;
        }
        diag(i) = f(digits);
    }
    return diag;
}

double perm_sum(int d, int t, const Eigen::VectorXd& diag) {
    double total = 0.0;
    for (const auto& perm : all_permutations(t)) {
        const Matrix w = permutation_operator(perm, d, t);
        // tr(W * diag(Q))
        double tr = 0.0;
        for (std::int64_t i = 0; i < w.rows(); ++i) tr += (w(i, i) * diag(i)).real();
        total += tr;
    }
    return total;
}

}  // namespace

double PermSumReport::max_abs_error() const {
    return std::max({std::abs(sum_s2 - closed_s2), std::abs(sum_s3 - closed_s3),
                     std::abs(sum_s4 - closed_s4)});
}

PermSumReport verify_perm_sums(int d) {
    if (d < 2 || d > 6) throw std::invalid_argument("verify_perm_sums: d must be in [2, 6]");
    PermSumReport report;
    report.d = d;

    const auto x2 = diagonal_observable(d, 2, [d](const std::vector<int>& a) {
        const double x = x_kernel(a[0], a[1], d);
        return x * x;
    });
    const auto x1213 = diagonal_observable(d, 3, [d](const std::vector<int>& a) {
        return x_kernel(a[0], a[1], d) * x_kernel(a[0], a[2], d);
    });
    const auto xx = diagonal_observable(d, 4, [d](const std::vector<int>& a) {
        return x_kernel(a[0], a[1], d) * x_kernel(a[2], a[3], d);
    });

    report.sum_s2 = perm_sum(d, 2, x2);
    report.sum_s3 = perm_sum(d, 3, x1213);
    report.sum_s4 = perm_sum(d, 4, xx);

    const double dd = static_cast<double>(d);
    report.closed_s2 = dd * (2.0 * dd - 1.0) * (dd + 1.0);
    report.closed_s3 = 3.0 * dd * dd * (dd + 1.0);
    report.closed_s4 = dd * (dd + 1.0) * (dd * dd + 9.0 * dd + 2.0);
    return report;
}

}  // namespace cro
