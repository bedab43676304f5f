#include "cro/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cro/support.hpp"

namespace cro {

namespace {

constexpr double kNormTol = 1e-10;

void check_qubit_count(int n_qubits, bool density) {
    if (n_qubits < 1) throw std::invalid_argument("state needs at least one qubit");
    const int cap = density ? kMaxDensityQubits : kMaxPureQubits;
    if (n_qubits > cap) {
        throw std::invalid_argument("state of " + std::to_string(n_qubits) +
                                    " qubits exceeds the dense representation cap of " +
                                    std::to_string(cap));
    }
}

}  // namespace

QuantumState QuantumState::pure(int n_qubits, Vector amplitudes, std::string label) {
    check_qubit_count(n_qubits, false);
    if (amplitudes.size() != (std::int64_t{1} << n_qubits)) {
        throw std::invalid_argument("amplitude vector has wrong length for " +
                                    std::to_string(n_qubits) + " qubits");
    }
    const double norm = amplitudes.norm();
    if (std::abs(norm - 1.0) > kNormTol) {
        throw std::invalid_argument("amplitude vector is not normalized (|norm - 1| = " +
                                    std::to_string(std::abs(norm - 1.0)) + ")");
    }
    QuantumState s;
    s.n_qubits_ = n_qubits;
    s.is_pure_ = true;
    s.amplitudes_ = std::move(amplitudes);
    s.label_ = std::move(label);
    return s;
}

QuantumState QuantumState::mixed(int n_qubits, Matrix density, std::string label) {
    check_qubit_count(n_qubits, true);
    const std::int64_t d = std::int64_t{1} << n_qubits;
    if (density.rows() != d || density.cols() != d) {
        throw std::invalid_argument("density matrix has wrong shape for " +
                                    std::to_string(n_qubits) + " qubits");
    }
    if ((density - density.adjoint()).cwiseAbs().maxCoeff() > kNormTol) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(density.trace().real() - 1.0) > kNormTol ||
        std::abs(density.trace().imag()) > kNormTol) {
        throw std::invalid_argument("density matrix does not have unit trace");
    }
    QuantumState s;
    s.n_qubits_ = n_qubits;
    s.is_pure_ = false;
    s.density_ = std::move(density);
    s.label_ = std::move(label);
    return s;
}

const Vector& QuantumState::amplitudes() const {
    if (!is_pure_) throw std::logic_error("state is a density matrix, not an amplitude vector");
    return amplitudes_;
}

const Matrix& QuantumState::density() const {
    if (is_pure_) throw std::logic_error("state is an amplitude vector, not a density matrix");
    return density_;
}

Matrix QuantumState::to_density() const {
    if (is_pure_) return amplitudes_ * amplitudes_.adjoint();
    return density_;
}

double QuantumState::purity() const {
    if (is_pure_) return 1.0;
    return (density_ * density_).trace().real();
}

double QuantumState::min_eigenvalue() const {
    if (is_pure_) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(density_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

StateKind state_kind_from_string(const std::string& name) {
    if (name == "ghz") return StateKind::ghz;
    if (name == "w") return StateKind::w;
    if (name == "bell") return StateKind::bell;
    if (name == "mes") return StateKind::mes;
    if (name == "product_random") return StateKind::product_random;
    if (name == "pure_random") return StateKind::pure_random;
    if (name == "zero") return StateKind::zero;
    throw std::invalid_argument("unknown state kind: " + name);
}

std::string to_string(StateKind kind) {
    switch (kind) {
        case StateKind::ghz: return "ghz";
        case StateKind::w: return "w";
        case StateKind::bell: return "bell";
        case StateKind::mes: return "mes";
        case StateKind::product_random: return "product_random";
        case StateKind::pure_random: return "pure_random";
        case StateKind::zero: return "zero";
    }
    return "?";
}

QuantumState make_state(StateKind kind, int n_qubits, std::uint64_t seed) {
    check_qubit_count(n_qubits, false);
    const std::int64_t d = std::int64_t{1} << n_qubits;
    const std::string label = to_string(kind) + std::to_string(n_qubits);
    switch (kind) {
        case StateKind::zero: {
            Vector v = Vector::Zero(d);
            v(0) = 1.0;
            return QuantumState::pure(n_qubits, std::move(v), label);
        }
        case StateKind::ghz: {
            if (n_qubits < 2) throw std::invalid_argument("ghz needs n >= 2");
            Vector v = Vector::Zero(d);
            v(0) = v(d - 1) = 1.0 / std::sqrt(2.0);
            return QuantumState::pure(n_qubits, std::move(v), label);
        }
        case StateKind::bell: {
            if (n_qubits != 2) throw std::invalid_argument("bell needs n = 2");
            Vector v = Vector::Zero(4);
            v(0) = v(3) = 1.0 / std::sqrt(2.0);
            return QuantumState::pure(2, std::move(v), label);
        }
        case StateKind::w: {
            if (n_qubits < 2) throw std::invalid_argument("w needs n >= 2");
            Vector v = Vector::Zero(d);
            const double a = 1.0 / std::sqrt(static_cast<double>(n_qubits));
            for (int q = 0; q < n_qubits; ++q) v(std::int64_t{1} << q) = a;
            return QuantumState::pure(n_qubits, std::move(v), label);
        }
        case StateKind::mes: {
            if (n_qubits % 2 != 0) throw std::invalid_argument("mes needs an even qubit count");
            const std::int64_t half_dim = std::int64_t{1} << (n_qubits / 2);
            Vector v = Vector::Zero(d);
            const double a = 1.0 / std::sqrt(static_cast<double>(half_dim));
            for (std::int64_t i = 0; i < half_dim; ++i) v(i * half_dim + i) = a;
            return QuantumState::pure(n_qubits, std::move(v), label);
        }
        case StateKind::pure_random: {
            Rng rng(mix64(seed ^ 0x70757265ULL));
            Vector v(d);
            for (std::int64_t i = 0; i < d; ++i) v(i) = Complex(rng.normal(), rng.normal());
            v.normalize();
            return QuantumState::pure(n_qubits, std::move(v), label);
        }
        case StateKind::product_random: {
            Rng rng(mix64(seed ^ 0x70726f64ULL));
            Vector v = Vector::Ones(1);
            for (int q = 0; q < n_qubits; ++q) {
                Eigen::Vector2cd site(Complex(rng.normal(), rng.normal()),
                                      Complex(rng.normal(), rng.normal()));
                site.normalize();
                Vector next(v.size() * 2);
                for (std::int64_t i = 0; i < v.size(); ++i) {
                    next(2 * i) = v(i) * site(0);
                    next(2 * i + 1) = v(i) * site(1);
                }
                v = std::move(next);
            }
            return QuantumState::pure(n_qubits, std::move(v), label);
        }
    }
    throw std::invalid_argument("unsupported state kind");
}

QuantumState depolarize(const QuantumState& state, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing strength must be in [0,1]");
    if (p == 0.0) return state;
    const int n = state.n_qubits();
    check_qubit_count(n, true);
    const std::int64_t d = state.dim();
    Matrix rho = state.to_density() * (1.0 - p);
    rho += (p / static_cast<double>(d)) * Matrix::Identity(d, d);
    return QuantumState::mixed(n, std::move(rho), state.label());
}

Partition Partition::blocks(const std::vector<int>& sizes) {
    Partition p;
    int next = 0;
    for (int size : sizes) {
        if (size < 1) throw std::invalid_argument("partition block sizes must be positive");
        std::vector<int> group(static_cast<std::size_t>(size));
        std::iota(group.begin(), group.end(), next);
        next += size;
        p.groups.push_back(std::move(group));
    }
    return p;
}

Partition Partition::singletons(int n_qubits) {
    Partition p;
    for (int q = 0; q < n_qubits; ++q) p.groups.push_back({q});
    return p;
}

Partition Partition::parse(const std::string& text) {
    std::vector<int> sizes;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, '|')) {
        if (token.empty()) throw std::invalid_argument("bad partition spec: " + text);
        sizes.push_back(std::stoi(token));
    }
    if (sizes.empty()) throw std::invalid_argument("empty partition spec");
    return blocks(sizes);
}

std::vector<int> Partition::all_qubits() const {
    std::vector<int> qs;
    for (const auto& g : groups) qs.insert(qs.end(), g.begin(), g.end());
    return qs;
}

std::string Partition::to_text() const {
    std::string out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (i) out += '|';
        for (std::size_t j = 0; j < groups[i].size(); ++j) {
            if (j) out += ',';
            out += std::to_string(groups[i][j]);
        }
    }
    return out;
}

void Partition::validate(int n_qubits, bool require_k2) const {
    if (groups.empty()) throw std::invalid_argument("partition has no groups");
    if (require_k2 && groups.size() < 2) {
        throw std::invalid_argument("correlation quantities need at least two parties");
    }
    std::set<int> seen;
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("partition group is empty");
        for (int q : g) {
            if (q < 0 || q >= n_qubits) {
                throw std::invalid_argument("partition qubit index out of range: " + std::to_string(q));
            }
            if (!seen.insert(q).second) {
                throw std::invalid_argument("partition groups overlap on qubit " + std::to_string(q));
            }
        }
    }
}

namespace {

// Scatters the bits of `sub` (one per listed qubit, list order) into an
// n-qubit basis index.
std::uint64_t scatter_bits(std::uint64_t sub, const std::vector<int>& qubits, int n_qubits) {
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        const std::uint64_t bit = (sub >> (qubits.size() - 1 - i)) & 1ULL;
        out |= bit << (n_qubits - 1 - qubits[i]);
    }
    return out;
}

std::vector<int> complement_of(const std::vector<int>& qubits, int n_qubits) {
    std::vector<bool> in(static_cast<std::size_t>(n_qubits), false);
    for (int q : qubits) in[static_cast<std::size_t>(q)] = true;
    std::vector<int> rest;
    for (int q = 0; q < n_qubits; ++q) {
        if (!in[static_cast<std::size_t>(q)]) rest.push_back(q);
    }
    return rest;
}

void check_subsystem(const std::vector<int>& qubits, int n_qubits, const char* what) {
    if (qubits.empty()) throw std::invalid_argument(std::string(what) + ": empty qubit list");
    std::set<int> seen;
    for (int q : qubits) {
        if (q < 0 || q >= n_qubits) {
            throw std::invalid_argument(std::string(what) + ": qubit index out of range");
        }
        if (!seen.insert(q).second) {
            throw std::invalid_argument(std::string(what) + ": repeated qubit index");
        }
    }
}

}  // namespace

QuantumState partial_trace(const QuantumState& state, const std::vector<int>& keep) {
    const int n = state.n_qubits();
    check_subsystem(keep, n, "partial_trace");
    const int k = static_cast<int>(keep.size());
    const std::vector<int> rest = complement_of(keep, n);
    const std::int64_t dk = std::int64_t{1} << k;
    const std::int64_t dr = std::int64_t{1} << rest.size();

    Matrix reduced = Matrix::Zero(dk, dk);
    if (state.is_pure()) {
        const Vector& psi = state.amplitudes();
        for (std::int64_t a = 0; a < dk; ++a) {
            const std::uint64_t ia = scatter_bits(static_cast<std::uint64_t>(a), keep, n);
            for (std::int64_t b = 0; b <= a; ++b) {
                const std::uint64_t ib = scatter_bits(static_cast<std::uint64_t>(b), keep, n);
                Complex sum = 0.0;
                for (std::int64_t e = 0; e < dr; ++e) {
                    const std::uint64_t ie = scatter_bits(static_cast<std::uint64_t>(e), rest, n);
                    sum += psi(static_cast<std::int64_t>(ia | ie)) *
                           std::conj(psi(static_cast<std::int64_t>(ib | ie)));
                }
                reduced(a, b) = sum;
                if (a != b) reduced(b, a) = std::conj(sum);
            }
        }
    } else {
        const Matrix& rho = state.density();
        for (std::int64_t a = 0; a < dk; ++a) {
            const std::uint64_t ia = scatter_bits(static_cast<std::uint64_t>(a), keep, n);
            for (std::int64_t b = 0; b <= a; ++b) {
                const std::uint64_t ib = scatter_bits(static_cast<std::uint64_t>(b), keep, n);
                Complex sum = 0.0;
                for (std::int64_t e = 0; e < dr; ++e) {
                    const std::uint64_t ie = scatter_bits(static_cast<std::uint64_t>(e), rest, n);
                    sum += rho(static_cast<std::int64_t>(ia | ie), static_cast<std::int64_t>(ib | ie));
                }
                reduced(a, b) = sum;
                if (a != b) reduced(b, a) = std::conj(sum);
            }
        }
    }
    return QuantumState::mixed(k, std::move(reduced), state.label());
}

namespace {

// In-place single-qubit gate on an amplitude vector.
void apply_1q(Vector& psi, const Matrix2& u, int qubit, int n_qubits) {
    const std::int64_t stride = std::int64_t{1} << (n_qubits - 1 - qubit);
    const std::int64_t dim = psi.size();
    for (std::int64_t base = 0; base < dim; base += 2 * stride) {
        for (std::int64_t off = 0; off < stride; ++off) {
            const std::int64_t i0 = base + off;
            const std::int64_t i1 = i0 + stride;
            const Complex a = psi(i0), b = psi(i1);
            psi(i0) = u(0, 0) * a + u(0, 1) * b;
            psi(i1) = u(1, 0) * a + u(1, 1) * b;
        }
    }
}

}  // namespace

QuantumState apply_product_unitary(const QuantumState& state,
                                   const std::vector<Matrix2>& qubit_unitaries,
                                   const std::vector<bool>& conjugate_mask) {
    const int n = state.n_qubits();
    if (static_cast<int>(qubit_unitaries.size()) != n) {
        throw std::invalid_argument("apply_product_unitary: need one unitary per qubit");
    }
    if (!conjugate_mask.empty() && static_cast<int>(conjugate_mask.size()) != n) {
        throw std::invalid_argument("apply_product_unitary: conjugate mask has wrong length");
    }
    auto resolved = [&](int q) -> Matrix2 {
        if (!conjugate_mask.empty() && conjugate_mask[static_cast<std::size_t>(q)]) {
            return qubit_unitaries[static_cast<std::size_t>(q)].conjugate();
        }
        return qubit_unitaries[static_cast<std::size_t>(q)];
    };
    if (state.is_pure()) {
        Vector psi = state.amplitudes();
        for (int q = 0; q < n; ++q) apply_1q(psi, resolved(q), q, n);
        return QuantumState::pure(n, std::move(psi), state.label());
    }
    Matrix rho = state.density();
    for (int q = 0; q < n; ++q) {
        const Matrix2 u = resolved(q);
        // rho -> (U rho U^dag): gate on every column, then adjoint gate on rows.
        for (std::int64_t c = 0; c < rho.cols(); ++c) {
            Vector col = rho.col(c);
            apply_1q(col, u, q, n);
            rho.col(c) = col;
        }
        const Matrix2 u_conj = u.conjugate();
        for (std::int64_t r = 0; r < rho.rows(); ++r) {
            Vector row = rho.row(r).transpose();
            apply_1q(row, u_conj, q, n);
            rho.row(r) = row.transpose();
        }
    }
    return QuantumState::mixed(n, std::move(rho), state.label());
}

Vector apply_group_operator(const Vector& amplitudes, const Matrix& op,
                            const std::vector<int>& qubits, int n_qubits) {
    check_subsystem(qubits, n_qubits, "apply_group_operator");
    const int k = static_cast<int>(qubits.size());
    const std::int64_t dk = std::int64_t{1} << k;
    if (op.rows() != dk || op.cols() != dk) {
        throw std::invalid_argument("apply_group_operator: operator shape does not match qubit list");
    }
    const std::vector<int> rest = complement_of(qubits, n_qubits);
    const std::int64_t dr = std::int64_t{1} << rest.size();
    Vector out = Vector::Zero(amplitudes.size());
    for (std::int64_t e = 0; e < dr; ++e) {
        const std::uint64_t ie = scatter_bits(static_cast<std::uint64_t>(e), rest, n_qubits);
        for (std::int64_t a = 0; a < dk; ++a) {
            const std::int64_t ia = static_cast<std::int64_t>(
                scatter_bits(static_cast<std::uint64_t>(a), qubits, n_qubits) | ie);
            Complex sum = 0.0;
            for (std::int64_t b = 0; b < dk; ++b) {
                const std::int64_t ib = static_cast<std::int64_t>(
                    scatter_bits(static_cast<std::uint64_t>(b), qubits, n_qubits) | ie);
                sum += op(a, b) * amplitudes(ib);
            }
            out(ia) = sum;
        }
    }
    return out;
}

Matrix apply_group_operator(const Matrix& rho, const Matrix& op,
                            const std::vector<int>& qubits, int n_qubits) {
    Matrix out(rho.rows(), rho.cols());
    for (std::int64_t c = 0; c < rho.cols(); ++c) {
        out.col(c) = apply_group_operator(Vector(rho.col(c)), op, qubits, n_qubits);
    }
    return out;
}

std::vector<double> outcome_distribution(const QuantumState& state) {
    const std::int64_t d = state.dim();
    std::vector<double> probs(static_cast<std::size_t>(d));
    if (state.is_pure()) {
        const Vector& psi = state.amplitudes();
        for (std::int64_t i = 0; i < d; ++i) probs[static_cast<std::size_t>(i)] = std::norm(psi(i));
    } else {
        const Matrix& rho = state.density();
        for (std::int64_t i = 0; i < d; ++i) {
            probs[static_cast<std::size_t>(i)] = std::max(0.0, rho(i, i).real());
        }
    }
    return probs;
}

std::vector<std::uint64_t> sample_outcomes(const std::vector<double>& probs, int n_shots,
                                           std::uint64_t seed) {
    if (n_shots < 1) throw std::invalid_argument("sample_outcomes: need at least one shot");
    if (probs.empty()) throw std::invalid_argument("sample_outcomes: empty distribution");
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < -1e-12) throw std::invalid_argument("sample_outcomes: negative probability");
        acc += probs[i];
        cdf[i] = acc;
    }
    if (std::abs(acc - 1.0) > 1e-8) {
        throw std::invalid_argument("sample_outcomes: probabilities sum to " + std::to_string(acc));
    }
    cdf.back() = std::max(cdf.back(), 1.0);
    Rng rng(seed);
    std::vector<std::uint64_t> shots(static_cast<std::size_t>(n_shots));
    for (int s = 0; s < n_shots; ++s) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        shots[static_cast<std::size_t>(s)] =
            static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                                static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    }
    return shots;
}

Matrix partial_transpose(const Matrix& rho, const std::vector<int>& subsystem, int n_qubits) {
    check_subsystem(subsystem, n_qubits, "partial_transpose");
    std::uint64_t mask = 0;
    for (int q : subsystem) mask |= std::uint64_t{1} << (n_qubits - 1 - q);
    const std::int64_t d = std::int64_t{1} << n_qubits;
    Matrix out(d, d);
    for (std::int64_t r = 0; r < d; ++r) {
        for (std::int64_t c = 0; c < d; ++c) {
            const std::uint64_t ur = static_cast<std::uint64_t>(r);
            const std::uint64_t uc = static_cast<std::uint64_t>(c);
            const std::uint64_t nr = (ur & ~mask) | (uc & mask);
            const std::uint64_t nc = (uc & ~mask) | (ur & mask);
            out(static_cast<std::int64_t>(nr), static_cast<std::int64_t>(nc)) = rho(r, c);
        }
    }
    return out;
}

Matrix partial_transpose(const QuantumState& state, const std::vector<int>& subsystem) {
    return partial_transpose(state.to_density(), subsystem, state.n_qubits());
}

Matrix realignment(const Matrix& rho, const Partition& split, int n_qubits) {
    if (split.k() != 2) throw std::invalid_argument("realignment needs a bipartition");
    split.validate(n_qubits);
    const auto& ga = split.groups[0];
    const auto& gb = split.groups[1];
    if (static_cast<int>(ga.size() + gb.size()) != n_qubits) {
        throw std::invalid_argument("realignment bipartition must cover all qubits");
    }
    const std::int64_t da = std::int64_t{1} << ga.size();
    const std::int64_t db = std::int64_t{1} << gb.size();
    Matrix out(da * da, db * db);
    for (std::int64_t i = 0; i < da; ++i) {
        const std::uint64_t bi = scatter_bits(static_cast<std::uint64_t>(i), ga, n_qubits);
        for (std::int64_t j = 0; j < da; ++j) {
            const std::uint64_t bj = scatter_bits(static_cast<std::uint64_t>(j), ga, n_qubits);
            for (std::int64_t k = 0; k < db; ++k) {
                const std::uint64_t bk = scatter_bits(static_cast<std::uint64_t>(k), gb, n_qubits);
                for (std::int64_t l = 0; l < db; ++l) {
                    const std::uint64_t bl = scatter_bits(static_cast<std::uint64_t>(l), gb, n_qubits);
                    out(i * da + j, k * db + l) =
                        rho(static_cast<std::int64_t>(bi | bk), static_cast<std::int64_t>(bj | bl));
                }
            }
        }
    }
    return out;
}

Matrix realignment(const QuantumState& state, const Partition& split) {
    return realignment(state.to_density(), split, state.n_qubits());
}

Matrix permutation_operator(const std::vector<int>& perm, int d, int t) {
    if (static_cast<int>(perm.size()) != t) {
        throw std::invalid_argument("permutation length does not match copy count");
    }
    std::vector<int> inverse(static_cast<std::size_t>(t), -1);
    for (int i = 0; i < t; ++i) {
        const int img = perm[static_cast<std::size_t>(i)];
        if (img < 0 || img >= t || inverse[static_cast<std::size_t>(img)] != -1) {
            throw std::invalid_argument("not a permutation");
        }
        inverse[static_cast<std::size_t>(img)] = i;
    }
    double cells = static_cast<double>(t);
    for (int i = 0; i < t; ++i) cells *= d;
    if (cells > static_cast<double>(kPermOperatorCap)) {
        throw std::invalid_argument("permutation operator exceeds the materialization cap");
    }
    std::int64_t dim = 1;
    for (int i = 0; i < t; ++i) dim *= d;
    Matrix w = Matrix::Zero(dim, dim);
    std::vector<int> digits(static_cast<std::size_t>(t));
    for (std::int64_t col = 0; col < dim; ++col) {
        std::int64_t rem = col;
        for (int i = t - 1; i >= 0; --i) {
            digits[static_cast<std::size_t>(i)] = static_cast<int>(rem % d);
            rem /= d;
        }
        std::int64_t row = 0;
        for (int i = 0; i < t; ++i) {
            row = row * d + digits[static_cast<std::size_t>(inverse[static_cast<std::size_t>(i)])];
        }
        w(row, col) = 1.0;
    }
    return w;
}

std::vector<std::vector<int>> all_permutations(int t) {
    std::vector<int> perm(static_cast<std::size_t>(t));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

}  // namespace cro
