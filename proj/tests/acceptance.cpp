// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with its runtime. Statistical cases run with fixed seeds so a green
// run stays green.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cro/ensembles.hpp"
#include "cro/estimators.hpp"
#include "cro/expcli.hpp"
#include "cro/oracle.hpp"
#include "cro/sampler.hpp"
#include "cro/support.hpp"

using namespace cro;

namespace {

constexpr std::uint64_t kSeed = 20240817;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int number, const char* name, bool pass, double elapsed, const std::string& detail) {
    std::printf("criterion %2d %-34s %s  [%6.1fs]  %s\n", number, name, pass ? "PASS" : "FAIL",
                elapsed, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

QuantumState random_mixed(int n_qubits, std::uint64_t seed) {
    const QuantumState big = make_state(StateKind::pure_random, n_qubits + 2, seed);
    std::vector<int> keep;
    for (int q = 0; q < n_qubits; ++q) keep.push_back(q);
    return partial_trace(big, keep);
}

QuantumState tensor_pure(const QuantumState& a, const QuantumState& b) {
    const std::int64_t da = a.dim(), db = b.dim();
    Vector v(da * db);
    for (std::int64_t i = 0; i < da; ++i) {
        for (std::int64_t j = 0; j < db; ++j) v(i * db + j) = a.amplitudes()(i) * b.amplitudes()(j);
    }
    return QuantumState::pure(a.n_qubits() + b.n_qubits(), std::move(v));
}

int threads() { return default_thread_count(); }

}  // namespace

TEST_CASE("criterion 1: exact GHZ overlap") {
    Stopwatch watch;
    double worst = 0;
    for (int n : {3, 6, 9}) {
        const int third = n / 3;
        const double tk =
            exact_Tk(make_state(StateKind::ghz, n), Partition::blocks({third, third, third}));
        worst = std::max(worst, std::abs(tk - 0.125));
    }
    const double elapsed = watch.seconds();
    const bool pass = worst < 1e-12 && elapsed < 1.0;
    report(1, "oracle T3(GHZ)=0.125, n=3,6,9", pass, elapsed, "max |T3-0.125| = " + fmt(worst));
    CHECK(worst < 1e-12);
    CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 2: twirling identity") {
    Stopwatch watch;
    Matrix x = Matrix::Zero(4, 4);
    for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) x(s * 2 + sp, s * 2 + sp) = (s == sp) ? 2.0 : -1.0;
    }
    const Matrix swap = permutation_operator({1, 0}, 2, 2);
    const double err = (twirl(x, EnsembleId::clifford1q, 2).value - swap).cwiseAbs().maxCoeff();
    const double elapsed = watch.seconds();
    const bool pass = err < 1e-12 && elapsed < 1.0;
    report(2, "Phi^2(X) = SWAP over 24 Cliffords", pass, elapsed, "max-abs error = " + fmt(err));
    CHECK(err < 1e-12);
    CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 3: permutation-sum closed forms") {
    Stopwatch watch;
    double worst = 0;
    for (int d : {2, 3, 4, 5}) {
        worst = std::max(worst, verify_perm_sums(d).max_abs_error());
    }
    const double elapsed = watch.seconds();
    const bool pass = worst < 1e-8 && elapsed < 30.0;
    report(3, "perm sums vs brute force, d=2..5", pass, elapsed, "max-abs error = " + fmt(worst));
    CHECK(worst < 1e-8);
    CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 4: unbiasedness by enumeration") {
    Stopwatch watch;
    const QuantumState bell = make_state(StateKind::bell, 2);
    const Partition two = Partition::singletons(2);
    const double e_bell =
        std::abs(brute_force_estimator_expectation(bell, two, Protocol::local_cro, threads()) -
                 exact_Tk(bell, two));
    const QuantumState ghz = make_state(StateKind::ghz, 3);
    const Partition three = Partition::singletons(3);
    const double e_ghz =
        std::abs(brute_force_estimator_expectation(ghz, three, Protocol::local_cro, threads()) -
                 exact_Tk(ghz, three));
    const QuantumState noisy = depolarize(bell, 0.5);
    const double e_noisy =
        std::abs(brute_force_estimator_expectation(noisy, two, Protocol::local_cro, threads()) -
                 exact_Tk(noisy, two));
    const double worst = std::max({e_bell, e_ghz, e_noisy});
    const double elapsed = watch.seconds();
    const bool pass = worst < 1e-10 && elapsed < 300.0;
    report(4, "E[M-hat] = T_k by enumeration", pass, elapsed, "max |bias| = " + fmt(worst));
    CHECK(worst < 1e-10);
    CHECK(elapsed < 300.0);
}

TEST_CASE("criterion 5: statistical recovery of T3") {
    Stopwatch watch;
    const QuantumState ghz = make_state(StateKind::ghz, 3);
    const Partition thirds = Partition::singletons(3);
    const int replications = 20;
    std::array<int, 20> hits{};
    parallel_for(replications, threads(), [&](std::size_t r) {
        const MeasurementDataset ds =
            run_local_protocol(ghz, 1000, 100, substream(kSeed, 5, static_cast<std::uint64_t>(r)));
        const EstimateWithError est = estimate_Tk(ds, thirds);
        hits[r] = std::abs(est.value - 0.125) <= 3.0 * est.std_error ? 1 : 0;
    });
    int total = 0;
    for (int h : hits) total += h;
    const double elapsed = watch.seconds();
    const bool pass = total >= 19 && elapsed < 600.0;  // >= 95% of 20
    report(5, "GHZ3 recovery, N_U=1000 N_M=100", pass, elapsed,
           std::to_string(total) + "/20 within 3 std errors");
    CHECK(total >= 19);
    CHECK(elapsed < 600.0);
}

TEST_CASE("criterion 6: variance slope vs N_U") {
    Stopwatch watch;
    SweepConfig config;
    config.experiment = Experiment::var_vs_NU;
    config.state_kind = StateKind::ghz;
    config.n_qubits = 3;
    config.grid = {32, 64, 128, 256, 512, 1024};
    config.shots_per_setting = 10;
    config.replications = 50;
    config.seed = kSeed + 6;
    config.threads = threads();
    const SweepTable table = run_sweep(config);
    REQUIRE(table.regression.has_value());
    const double slope = table.regression->slope;
    const double elapsed = watch.seconds();
    const bool pass = slope >= -1.15 && slope <= -0.85 && elapsed < 900.0;
    report(6, "Var slope vs N_U in [-1.15,-0.85]", pass, elapsed, "slope = " + fmt(slope));
    CHECK(slope >= -1.15);
    CHECK(slope <= -0.85);
    CHECK(elapsed < 900.0);
}

TEST_CASE("criterion 7: variance slope vs qubit number") {
    Stopwatch watch;
    SweepConfig config;
    config.experiment = Experiment::var_vs_n;
    config.state_kind = StateKind::ghz;
    config.grid = {6, 9, 12, 15};
    config.n_settings = 100;
    config.shots_per_setting = 10;
    config.replications = 50;
    config.seed = kSeed + 7;
    config.threads = threads();
    const SweepTable table = run_sweep(config);
    REQUIRE(table.regression.has_value());
    const double alpha = table.regression->slope;
    const double elapsed = watch.seconds();
    const double log2_3 = std::log2(3.0);
    const bool pass =
        alpha >= 1.0 && alpha <= 1.45 && alpha <= log2_3 + 0.15 && elapsed < 1800.0;
    report(7, "Var slope vs n in [1.0,1.45]", pass, elapsed, "alpha = " + fmt(alpha));
    CHECK(alpha >= 1.0);
    CHECK(alpha <= 1.45);
    CHECK(alpha <= log2_3 + 0.15);
    CHECK(elapsed < 1800.0);
}

TEST_CASE("criterion 8: witness crossovers") {
    Stopwatch watch;
    const Partition bipartition = Partition::singletons(2);
    const auto witness = [&](int which) {
        return [which, &bipartition](double p) {
            const CriterionReport r = criterion_report(bell_plus_mixture(p), bipartition);
            return which == 0 ? r.entropy : r.p3ppt;
        };
    };
    const double entropy_cross = bisect_crossing(witness(0), 0.01, 0.99, 1e-4);
    const double p3_cross = bisect_crossing(witness(1), 0.01, 0.99, 1e-4);
    double min_t2 = 1e300, min_ppt = 1e300;
    for (int i = 0; i <= 99; ++i) {
        const CriterionReport r = criterion_report(bell_plus_mixture(i / 100.0), bipartition);
        min_t2 = std::min(min_t2, r.t2);
        min_ppt = std::min(min_ppt, r.ppt);
    }
    const double elapsed = watch.seconds();
    const bool pass = std::abs(entropy_cross - 0.50) <= 0.01 && std::abs(p3_cross - 0.59) <= 0.01 &&
                      min_t2 > 0.0 && min_ppt > 0.0 && elapsed < 60.0;
    report(8, "crossovers 0.50 / 0.59, T2 & PPT > 0", pass, elapsed,
           "entropy @ " + fmt(entropy_cross) + ", p3ppt @ " + fmt(p3_cross) +
               ", min t2 = " + fmt(min_t2));
    CHECK(std::abs(entropy_cross - 0.50) <= 0.01);
    CHECK(std::abs(p3_cross - 0.59) <= 0.01);
    CHECK(min_t2 > 0.0);
    CHECK(min_ppt > 0.0);
    CHECK(elapsed < 60.0);
}

TEST_CASE("criterion 9: mes fidelity estimates") {
    Stopwatch watch;
    const auto run = [&](const QuantumState& state, std::uint64_t lane) {
        const MeasurementDataset ds =
            run_mes_fidelity_protocol(state, 500, 50, substream(kSeed, lane, 9), threads());
        return estimate_mes_fidelity(ds, threads());
    };
    const EstimateWithError bell = run(make_state(StateKind::bell, 2), 1);
    const EstimateWithError mes4 = run(make_state(StateKind::mes, 4), 2);
    const EstimateWithError mixed = run(depolarize(make_state(StateKind::zero, 2), 1.0), 3);
    const bool bell_ok = std::abs(bell.value - 1.0) <= 3 * bell.std_error + 1e-12;
    const bool mes4_ok = std::abs(mes4.value - 1.0) <= 3 * mes4.std_error + 1e-12;
    const bool mixed_ok = std::abs(mixed.value - 0.25) <= 3 * mixed.std_error;
    const double elapsed = watch.seconds();
    const bool pass = bell_ok && mes4_ok && mixed_ok && elapsed < 300.0;
    report(9, "mes fidelity 1.00 / 1.00 / 0.25", pass, elapsed,
           fmt(bell.value) + " / " + fmt(mes4.value) + " / " + fmt(mixed.value) + " +- " +
               fmt(mixed.std_error));
    CHECK(bell_ok);
    CHECK(mes4_ok);
    CHECK(mixed_ok);
    CHECK(elapsed < 300.0);
}

TEST_CASE("criterion 10: concurrence") {
    Stopwatch watch;
    const QuantumState bell = make_state(StateKind::bell, 2);
    const EstimateWithError bell_est = estimate_concurrence(
        run_concurrence_protocol(bell, 1000, 50, substream(kSeed, 10, 1), threads()), threads());
    const bool bell_ok = std::abs(bell_est.value - 1.0) <= 3 * bell_est.std_error;

    const QuantumState ghz = make_state(StateKind::ghz, 3);
    const double ghz_oracle = exact_concurrence(ghz);
    const EstimateWithError ghz_est = estimate_concurrence(
        run_concurrence_protocol(ghz, 1000, 50, substream(kSeed, 10, 2), threads()), threads());
    const bool ghz_ok = std::abs(ghz_est.value - ghz_oracle) <= 3 * ghz_est.std_error;

    // Identity chain by enumeration at n <= 3: fixed-outcome vs symmetrized
    // second moment, both against the subsystem-purity formula.
    double chain_err = 0;
    for (int n : {2, 3}) {
        const QuantumState psi = n == 2 ? bell : ghz;
        const ConcurrenceEnumeration e = concurrence_enumeration_check(psi, threads());
        chain_err = std::max(chain_err, std::abs(e.fixed_s_moment - e.symmetrized_moment));
        chain_err = std::max(chain_err, std::abs(e.concurrence_fixed_s - exact_concurrence(psi)));
    }
    const QuantumState random_pure = make_state(StateKind::pure_random, 3, kSeed);
    const ConcurrenceEnumeration e = concurrence_enumeration_check(random_pure, threads());
    chain_err = std::max(chain_err, std::abs(e.fixed_s_moment - e.symmetrized_moment));
    chain_err = std::max(chain_err, std::abs(e.concurrence_fixed_s - exact_concurrence(random_pure)));

    const double elapsed = watch.seconds();
    const bool pass = bell_ok && ghz_ok && chain_err < 1e-10 && elapsed < 300.0;
    report(10, "concurrence Bell/GHZ3 + identity", pass, elapsed,
           fmt(bell_est.value) + " / " + fmt(ghz_est.value) + " (oracle " + fmt(ghz_oracle) +
               "), chain err " + fmt(chain_err));
    CHECK(bell_ok);
    CHECK(ghz_ok);
    CHECK(chain_err < 1e-10);
    CHECK(elapsed < 300.0);
}

TEST_CASE("criterion 11: measure-property suite") {
    Stopwatch watch;
    double worst_faithful = 0, worst_lu = 0, worst_ext = 0, worst_add = 0;
    Rng rng(kSeed + 11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint64_t seed = kSeed + 100 + static_cast<std::uint64_t>(trial);

        // Faithfulness: products of marginals carry zero correlation.
        const QuantumState prod = make_state(StateKind::product_random, 3, seed);
        worst_faithful =
            std::max(worst_faithful, std::abs(exact_correlation(prod, Partition::singletons(3))));

        // Local-unitary invariance on pure and mixed states.
        const QuantumState base =
            (trial % 2 == 0) ? make_state(StateKind::pure_random, 3, seed) : random_mixed(3, seed);
        std::vector<Matrix2> us;
        for (int q = 0; q < 3; ++q) us.push_back(Matrix2(haar_unitary(2, rng)));
        const QuantumState rotated = apply_product_unitary(base, us);
        worst_lu = std::max(worst_lu,
                            std::abs(exact_correlation(base, Partition::singletons(3)) -
                                     exact_correlation(rotated, Partition::singletons(3))));

        // Tensor extension by a fresh party leaves C unchanged.
        const QuantumState core = make_state(StateKind::pure_random, 2, seed + 7000);
        const QuantumState extra = make_state(StateKind::pure_random, 1, seed + 8000);
        worst_ext = std::max(
            worst_ext, std::abs(exact_correlation(tensor_pure(core, extra), Partition::singletons(3)) -
                                exact_correlation(core, Partition::singletons(2))));

        // Additivity under tensor products.
        const QuantumState left = make_state(StateKind::pure_random, 2, seed + 9000);
        const QuantumState right = make_state(StateKind::pure_random, 2, seed + 10000);
        worst_add = std::max(
            worst_add, std::abs(exact_correlation(tensor_pure(left, right), Partition::singletons(4)) -
                                exact_correlation(left, Partition::singletons(2)) -
                                exact_correlation(right, Partition::singletons(2))));
    }
    const double worst = std::max({worst_faithful, worst_lu, worst_ext, worst_add});
    const double elapsed = watch.seconds();
    const bool pass = worst < 1e-10 && elapsed < 120.0;
    report(11, "measure properties, 100 states each", pass, elapsed,
           "faithful " + fmt(worst_faithful) + ", LU " + fmt(worst_lu) + ", ext " + fmt(worst_ext) +
               ", add " + fmt(worst_add));
    CHECK(worst < 1e-10);
    CHECK(elapsed < 120.0);
}

namespace {

std::string run_command(const std::string& command) {
    std::string output;
    FILE* pipe = popen((command + " 2>&1").c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    std::size_t got;
    while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) output.append(buffer, got);
    const int status = pclose(pipe);
    REQUIRE(status == 0);
    return output;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("criterion 12: CLI determinism") {
    Stopwatch watch;
    const std::string cli = CRO_CLI_PATH;
    bool all_equal = true;
    std::string first_diff;

    const auto compare_stdout = [&](const std::string& args) {
        const std::string a = run_command(cli + " " + args);
        const std::string b = run_command(cli + " " + args);
        if (a != b && all_equal) {
            all_equal = false;
            first_diff = args;
        }
    };

    compare_stdout("oracle --state ghz3 --quantity t_k --partition 1|1|1");
    compare_stdout("oracle --state pure_random4 --seed 5 --quantity concurrence");
    compare_stdout("cliffords");
    compare_stdout("verify --threads 4");

    // simulate: identical files from different thread counts.
    run_command(cli + " simulate --state ghz3 --protocol local_cro --n-settings 30 --shots 10"
                      " --seed 5 --threads 1 --out /tmp/cro_accept_a.ds");
    run_command(cli + " simulate --state ghz3 --protocol local_cro --n-settings 30 --shots 10"
                      " --seed 5 --threads 4 --out /tmp/cro_accept_b.ds");
    if (slurp("/tmp/cro_accept_a.ds") != slurp("/tmp/cro_accept_b.ds")) {
        all_equal = false;
        first_diff = "simulate";
    }

    compare_stdout("estimate --dataset /tmp/cro_accept_a.ds --estimator tk --partition 1|1|1");

    // sweep: identical tables from repeat runs with different thread counts.
    {
        std::ofstream cfg("/tmp/cro_accept_sweep.json");
        cfg << R"({"experiment":"var_vs_NU","state":{"kind":"ghz","n":3},"grid":[16,32],)"
            << R"("shots_per_setting":10,"replications":5,"seed":7})";
    }
    run_command(cli + " sweep --config /tmp/cro_accept_sweep.json --threads 1 --out /tmp/cro_accept_s1.tsv");
    run_command(cli + " sweep --config /tmp/cro_accept_sweep.json --threads 3 --out /tmp/cro_accept_s2.tsv");
    const std::string s1 = slurp("/tmp/cro_accept_s1.tsv");
    if (s1 != slurp("/tmp/cro_accept_s2.tsv")) {
        all_equal = false;
        first_diff = "sweep";
    }

    const double elapsed = watch.seconds();
    report(12, "CLI byte-identical reruns", all_equal, elapsed,
           all_equal ? "all commands identical" : ("first difference: " + first_diff));
    CHECK(all_equal);
}
