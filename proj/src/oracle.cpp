#include "cro/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cro/ensembles.hpp"
#include "cro/estimators.hpp"
#include "cro/support.hpp"

namespace cro {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::int64_t r = 0; r < a.rows(); ++r) {
        for (std::int64_t c = 0; c < a.cols(); ++c) {
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
        }
    }
    return out;
}

// Marginal product operator x_i rho_{g_i} in the frame where the groups
// occupy consecutive blocks (the order produced by partial-tracing onto the
// concatenated group qubits).
Matrix marginal_product(const QuantumState& state, const Partition& partition) {
    Matrix out = partial_trace(state, partition.groups[0]).density();
    for (int i = 1; i < partition.k(); ++i) {
        out = kron(out, partial_trace(state, partition.groups[static_cast<std::size_t>(i)]).density());
    }
    return out;
}

bool covers_all_qubits(const Partition& partition, int n_qubits) {
    std::size_t total = 0;
    for (const auto& g : partition.groups) total += g.size();
    return static_cast<int>(total) == n_qubits;
}

}  // namespace

FidelityVariant fidelity_variant_from_string(const std::string& name) {
    if (name == "gm") return FidelityVariant::gm;
    if (name == "max") return FidelityVariant::max;
    throw std::invalid_argument("unknown fidelity variant: " + name);
}

double exact_purity(const QuantumState& state, const std::vector<int>& subset) {
    if (static_cast<int>(subset.size()) == state.n_qubits()) return state.purity();
    return partial_trace(state, subset).purity();
}

double exact_Tk(const QuantumState& state, const Partition& partition) {
    partition.validate(state.n_qubits(), false);
    if (state.is_pure() && covers_all_qubits(partition, state.n_qubits())) {
        // <psi| prod_i rho_{g_i} |psi> without the 2^n x 2^n matrix.
        Vector phi = state.amplitudes();
        for (const auto& group : partition.groups) {
            const Matrix marg = partial_trace(state, group).density();
            phi = apply_group_operator(phi, marg, group, state.n_qubits());
        }
        return state.amplitudes().dot(phi).real();
    }
    const QuantumState reduced = partial_trace(state, partition.all_qubits());
    Partition relabeled;
    int next = 0;
    for (const auto& g : partition.groups) {
        std::vector<int> grp(g.size());
        std::iota(grp.begin(), grp.end(), next);
        next += static_cast<int>(g.size());
        relabeled.groups.push_back(std::move(grp));
    }
    // In the reduced frame the groups are consecutive blocks, and the block
    // marginals equal the original group marginals.
    const Matrix m = marginal_product(reduced, relabeled);
    return (reduced.density() * m).trace().real();
}

double exact_fidelity(const QuantumState& rho, const QuantumState& sigma, FidelityVariant variant) {
    if (rho.n_qubits() != sigma.n_qubits()) {
        throw std::invalid_argument("exact_fidelity: dimension mismatch");
    }
    double overlap = 0.0;
    if (rho.is_pure() && sigma.is_pure()) {
        overlap = std::norm(rho.amplitudes().dot(sigma.amplitudes()));
    } else if (rho.is_pure()) {
        overlap = (rho.amplitudes().adjoint() * sigma.density() * rho.amplitudes())(0).real();
    } else if (sigma.is_pure()) {
        overlap = (sigma.amplitudes().adjoint() * rho.density() * sigma.amplitudes())(0).real();
    } else {
        overlap = (rho.density() * sigma.density()).trace().real();
    }
    const double pr = rho.purity();
    const double ps = sigma.purity();
    const double denom =
        variant == FidelityVariant::gm ? std::sqrt(pr * ps) : std::max(pr, ps);
    if (denom <= 0.0) throw std::invalid_argument("exact_fidelity: zero denominator");
    return overlap / denom;
}

double exact_correlation(const QuantumState& state, const Partition& partition,
                         FidelityVariant variant) {
    partition.validate(state.n_qubits());
    const double tk = exact_Tk(state, partition);
    const double purity_full = exact_purity(state, partition.all_qubits());
    double marginal_purity = 1.0;
    for (const auto& g : partition.groups) marginal_purity *= exact_purity(state, g);
    const double denom = variant == FidelityVariant::gm
                             ? std::sqrt(purity_full * marginal_purity)
                             : std::max(purity_full, marginal_purity);
    return -std::log2(tk / denom);
}

double exact_genuine_correlation(const QuantumState& state, const Partition& partition,
                                 FidelityVariant variant) {
    const int k = partition.k();
    if (k < 2) throw std::invalid_argument("genuine correlation needs at least two parties");
    if (k > 12) throw std::invalid_argument("genuine correlation capped at 12 parties");
    double best = std::numeric_limits<double>::infinity();
    // Enumerate bipartitions of the parties; fixing party 0 on side A
    // visits each unordered split once.
    const std::uint64_t limit = std::uint64_t{1} << (k - 1);
    for (std::uint64_t mask = 0; mask + 1 < limit; ++mask) {
        const std::uint64_t side_a = (mask << 1) | 1ULL;
        std::vector<int> qa, qb;
        for (int i = 0; i < k; ++i) {
            const auto& g = partition.groups[static_cast<std::size_t>(i)];
            auto& dst = (side_a >> i) & 1ULL ? qa : qb;
            dst.insert(dst.end(), g.begin(), g.end());
        }
        best = std::min(best, exact_correlation(state, Partition({qa, qb}), variant));
    }
    return best;
}

double exact_mes_fidelity(const QuantumState& state) {
    const int n = state.n_qubits();
    if (n % 2 != 0) throw std::invalid_argument("mes fidelity needs an even qubit count");
    const int half = n / 2;
    const std::int64_t d = std::int64_t{1} << half;

    // Route 1: direct overlap with |Psi+>.
    Vector mes = Vector::Zero(d * d);
    const double a = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::int64_t i = 0; i < d; ++i) mes(i * d + i) = a;
    double direct = 0.0;
    if (state.is_pure()) {
        direct = std::norm(mes.dot(state.amplitudes()));
    } else {
        direct = (mes.adjoint() * state.density() * mes)(0).real();
    }

    // Route 2: (1/d) tr(rho S^{T_B}) with S the half-swap.
    Matrix swap = Matrix::Zero(d * d, d * d);
    for (std::int64_t i = 0; i < d; ++i) {
        for (std::int64_t j = 0; j < d; ++j) swap(j * d + i, i * d + j) = 1.0;
    }
    std::vector<int> side_b(static_cast<std::size_t>(half));
    std::iota(side_b.begin(), side_b.end(), half);
    const Matrix swap_tb = partial_transpose(swap, side_b, n);
    const double via_swap = (state.to_density() * swap_tb).trace().real() / static_cast<double>(d);

    if (std::abs(direct - via_swap) > 1e-12) {
        throw std::logic_error("mes fidelity routes disagree: " + std::to_string(direct) + " vs " +
                               std::to_string(via_swap));
    }
    return direct;
}

double exact_concurrence(const QuantumState& state) {
    if (!state.is_pure()) {
        throw std::invalid_argument("concurrence formula applies to pure states only");
    }
    const int n = state.n_qubits();
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    KahanSum purity_sum;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
        std::vector<int> keep;
        for (int q = 0; q < n; ++q) {
            if ((mask >> q) & 1ULL) keep.push_back(q);
        }
        purity_sum.add(exact_purity(state, keep));
    }
    const double inner = (std::ldexp(1.0, n) - 2.0) - purity_sum.value();
    return std::pow(2.0, 1.0 - n / 2.0) * std::sqrt(std::max(0.0, inner));
}

double exact_hs_distance(const QuantumState& state, const Partition& partition) {
    partition.validate(state.n_qubits(), false);
    const QuantumState reduced = covers_all_qubits(partition, state.n_qubits()) && !state.is_pure()
                                     ? state
                                     : partial_trace(state, partition.all_qubits());
    Partition relabeled;
    int next = 0;
    for (const auto& g : partition.groups) {
        std::vector<int> grp(g.size());
        std::iota(grp.begin(), grp.end(), next);
        next += static_cast<int>(g.size());
        relabeled.groups.push_back(std::move(grp));
    }
    const Matrix diff = reduced.to_density() - marginal_product(reduced, relabeled);
    return (diff * diff).trace().real();
}

CriterionReport criterion_report(const QuantumState& state, const Partition& bipartition) {
    if (bipartition.k() != 2) throw std::invalid_argument("criterion_report needs a bipartition");
    bipartition.validate(state.n_qubits());
    const Matrix rho = state.to_density();
    const auto& ga = bipartition.groups[0];
    const auto& gb = bipartition.groups[1];

    const double purity = (rho * rho).trace().real();
    const double pa = exact_purity(state, ga);
    const double pb = exact_purity(state, gb);
    const double t2 = exact_Tk(state, bipartition);

    const Matrix rho_tb = partial_transpose(rho, gb, state.n_qubits());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_tb, Eigen::EigenvaluesOnly);
    double min_eig = solver.eigenvalues().minCoeff();
    if (std::abs(min_eig) < 1e-12) min_eig = 0.0;

    CriterionReport report;
    report.ppt = -min_eig;
    report.entropy = purity - pa;
    report.p3ppt = purity * purity - (rho_tb * rho_tb * rho_tb).trace().real();
    report.t2 = purity + pa + pb - 2.0 * t2 - 1.0;
    report.ppt_flag = report.ppt > 0.0;
    report.entropy_flag = report.entropy > 0.0;
    report.p3ppt_flag = report.p3ppt > 0.0;
    report.t2_flag = report.t2 > 0.0;
    return report;
}

namespace {

// Precomputed per-group weight tables w_m(a, b) for the brute-force sum.
struct BruteForceTables {
    int k = 0;
    std::vector<std::vector<int>> groups;
    std::vector<std::vector<double>> weights;  // per group, indexed a * dim_g + b
    std::vector<std::int64_t> dims;
};

BruteForceTables make_tables(const Partition& partition) {
    BruteForceTables tables;
    tables.k = partition.k();
    tables.groups = partition.groups;
    for (int m = 0; m < partition.k(); ++m) {
        const int width = partition.group_qubits(m);
        const std::int64_t dim = std::int64_t{1} << width;
        std::vector<double> w(static_cast<std::size_t>(dim * dim));
        for (std::int64_t a = 0; a < dim; ++a) {
            for (std::int64_t b = 0; b < dim; ++b) {
                w[static_cast<std::size_t>(a * dim + b)] =
                    x_weight_local(static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b), width);
            }
        }
        tables.weights.push_back(std::move(w));
        tables.dims.push_back(dim);
    }
    return tables;
}

std::uint64_t restrict_bits(std::uint64_t shot, const std::vector<int>& group, int n_qubits) {
    std::uint64_t out = 0;
    for (int q : group) out = (out << 1) | ((shot >> (n_qubits - 1 - q)) & 1ULL);
    return out;
}

}  // namespace

double brute_force_estimator_expectation(const QuantumState& state, const Partition& partition,
                                         Protocol protocol, int threads) {
    const int n = state.n_qubits();
    if (n > 3) {
        throw std::invalid_argument("brute-force expectation capped at 3 qubits (24^n settings)");
    }
    partition.validate(n);
    if (protocol == Protocol::global_cro) {
        for (const auto& g : partition.groups) {
            if (g.size() != 1) {
                throw std::invalid_argument(
                    "global settings are Haar-sampled and not enumerable; brute force supports "
                    "global_cro only with single-qubit parties");
            }
        }
    } else if (protocol != Protocol::local_cro) {
        throw std::invalid_argument("brute force supports the correlation-overlap protocols only");
    }

    const int k = partition.k();
    const std::int64_t dim = std::int64_t{1} << n;
    std::int64_t n_settings = 1;
    for (int q = 0; q < n; ++q) n_settings *= 24;

    const BruteForceTables tables = make_tables(partition);
    std::vector<double> per_setting(static_cast<std::size_t>(n_settings));

    parallel_for(static_cast<std::size_t>(n_settings), threads, [&](std::size_t setting) {
        std::vector<Matrix2> mats(static_cast<std::size_t>(n));
        std::size_t rem = setting;
        for (int q = 0; q < n; ++q) {
            mats[static_cast<std::size_t>(q)] = clifford_1q(static_cast<int>(rem % 24));
            rem /= 24;
        }
        const QuantumState rotated = apply_product_unitary(state, mats);
        const std::vector<double> probs = outcome_distribution(rotated);

        // Restricted outcome values per group.
        std::vector<std::vector<std::uint64_t>> restricted(static_cast<std::size_t>(k));
        for (int m = 0; m < k; ++m) {
            restricted[static_cast<std::size_t>(m)].resize(static_cast<std::size_t>(dim));
            for (std::int64_t s = 0; s < dim; ++s) {
                restricted[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)] =
                    restrict_bits(static_cast<std::uint64_t>(s), tables.groups[static_cast<std::size_t>(m)], n);
            }
        }

        // Sum over every (k+1)-tuple of outcomes, weighted by the product
        // of their probabilities.
        KahanSum acc;
        std::vector<std::int64_t> tuple(static_cast<std::size_t>(k) + 1, 0);
        for (;;) {
            double prob = 1.0;
            for (std::int64_t s : tuple) prob *= probs[static_cast<std::size_t>(s)];
            if (prob > 0.0) {
                double kernel = 1.0;
                for (int m = 0; m < k; ++m) {
                    const std::int64_t dg = tables.dims[static_cast<std::size_t>(m)];
                    const std::uint64_t a =
                        restricted[static_cast<std::size_t>(m)][static_cast<std::size_t>(tuple[0])];
                    const std::uint64_t b = restricted[static_cast<std::size_t>(m)]
                                                      [static_cast<std::size_t>(tuple[static_cast<std::size_t>(m) + 1])];
                    kernel *= tables.weights[static_cast<std::size_t>(m)]
                                            [static_cast<std::size_t>(static_cast<std::int64_t>(a) * dg +
                                                                      static_cast<std::int64_t>(b))];
                }
                acc.add(prob * kernel);
            }
            int pos = k;
            while (pos >= 0 && ++tuple[static_cast<std::size_t>(pos)] == dim) {
                tuple[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
        per_setting[setting] = acc.value();
    });

    KahanSum total;
    for (double v : per_setting) total.add(v);
    return total.value() / static_cast<double>(n_settings);
}

ConcurrenceEnumeration concurrence_enumeration_check(const QuantumState& state, int threads) {
    if (!state.is_pure()) throw std::invalid_argument("concurrence enumeration needs a pure state");
    const int n = state.n_qubits();
    if (n > 3) throw std::invalid_argument("concurrence enumeration capped at 3 qubits");
    const std::int64_t dim = std::int64_t{1} << n;
    std::int64_t n_settings = 1;
    for (int q = 0; q < n; ++q) n_settings *= 24;

    std::vector<double> fixed(static_cast<std::size_t>(n_settings));
    std::vector<double> summed(static_cast<std::size_t>(n_settings));
    parallel_for(static_cast<std::size_t>(n_settings), threads, [&](std::size_t setting) {
        std::vector<Matrix2> mats(static_cast<std::size_t>(n));
        std::size_t rem = setting;
        for (int q = 0; q < n; ++q) {
            mats[static_cast<std::size_t>(q)] = clifford_1q(static_cast<int>(rem % 24));
            rem /= 24;
        }
        const std::vector<double> probs = outcome_distribution(apply_product_unitary(state, mats));
        fixed[setting] = probs[0] * probs[0];
        double s = 0.0;
        for (std::int64_t i = 0; i < dim; ++i) {
            s += probs[static_cast<std::size_t>(i)] * probs[static_cast<std::size_t>(i)];
        }
        summed[setting] = s;
    });
    KahanSum fixed_sum, summed_sum;
    for (double v : fixed) fixed_sum.add(v);
    for (double v : summed) summed_sum.add(v);

    ConcurrenceEnumeration out;
    out.fixed_s_moment = fixed_sum.value() / static_cast<double>(n_settings);
    out.symmetrized_moment =
        summed_sum.value() / static_cast<double>(n_settings) / static_cast<double>(dim);
    const double three_n = std::pow(3.0, n);
    out.concurrence_fixed_s = 2.0 * std::sqrt(std::max(0.0, 1.0 - three_n * out.fixed_s_moment));
    out.concurrence_symmetrized =
        2.0 * std::sqrt(std::max(0.0, 1.0 - three_n * out.symmetrized_moment));
    return out;
}

QuantumState bell_plus_mixture(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("mixture weight must be in [0,1]");
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    Vector zero_plus = Vector::Zero(4);
    zero_plus(0) = zero_plus(1) = 1.0 / std::sqrt(2.0);  // |0+> = |00>+|01> over sqrt 2
    Matrix rho = (1.0 - p) * (bell * bell.adjoint()) + p * (zero_plus * zero_plus.adjoint());
    return QuantumState::mixed(2, std::move(rho), "bell_plus_mixture");
}

QuantumState bell_diagonal_state(double rx, double ry, double rz) {
    Matrix2 x, y, z;
    x << 0, 1, 1, 0;
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    z << 1, 0, 0, -1;
    Matrix rho = Matrix::Identity(4, 4);
    rho += rx * kron(x, x) + ry * kron(y, y) + rz * kron(z, z);
    rho *= 0.25;
    return QuantumState::mixed(2, std::move(rho), "bell_diagonal");
}

}  // namespace cro
