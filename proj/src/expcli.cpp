#include "cro/expcli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cro/ensembles.hpp"
#include "cro/estimators.hpp"
#include "cro/sampler.hpp"
#include "cro/support.hpp"

namespace cro {

using json = nlohmann::json;

Experiment experiment_from_string(const std::string& name) {
    if (name == "var_vs_NU") return Experiment::var_vs_NU;
    if (name == "var_vs_n") return Experiment::var_vs_n;
    if (name == "var_vs_NM") return Experiment::var_vs_NM;
    if (name == "noisy_state_estimate") return Experiment::noisy_state_estimate;
    if (name == "criterion_scan") return Experiment::criterion_scan;
    if (name == "fidelity_curve") return Experiment::fidelity_curve;
    throw std::invalid_argument("unknown experiment: " + name);
}

std::string to_string(Experiment experiment) {
    switch (experiment) {
        case Experiment::var_vs_NU: return "var_vs_NU";
        case Experiment::var_vs_n: return "var_vs_n";
        case Experiment::var_vs_NM: return "var_vs_NM";
        case Experiment::noisy_state_estimate: return "noisy_state_estimate";
        case Experiment::criterion_scan: return "criterion_scan";
        case Experiment::fidelity_curve: return "fidelity_curve";
    }
    return "?";
}

SweepConfig SweepConfig::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    SweepConfig c;
    c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    if (j.contains("state")) {
        const auto& s = j.at("state");
        c.state_kind = state_kind_from_string(s.value("kind", "ghz"));
        c.n_qubits = s.value("n", 3);
        c.noise_p = s.value("depolarize", 0.0);
    }
    c.grid = j.at("grid").get<std::vector<double>>();
    c.n_settings = j.value("n_settings", c.n_settings);
    c.shots_per_setting = j.value("shots_per_setting", c.shots_per_setting);
    c.replications = j.value("replications", c.replications);
    c.seed = j.value("seed", c.seed);
    c.partition_text = j.value("partition", "");
    c.out_path = j.value("out", "");
    c.threads = j.value("threads", 1);
    c.validate();
    return c;
}

SweepConfig SweepConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string SweepConfig::to_json_text() const {
    // Execution details (threads, output path) are deliberately absent: the
    // echo identifies the experiment, and result tables must be
    // byte-identical for a fixed config + seed regardless of scheduling.
    json j;
    j["experiment"] = to_string(experiment);
    j["state"] = {{"kind", to_string(state_kind)}, {"n", n_qubits}, {"depolarize", noise_p}};
    j["grid"] = grid;
    j["n_settings"] = n_settings;
    j["shots_per_setting"] = shots_per_setting;
    j["replications"] = replications;
    j["seed"] = seed;
    if (!partition_text.empty()) j["partition"] = partition_text;
    return j.dump();
}

void SweepConfig::validate() const {
    if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (n_settings < 1 || shots_per_setting < 1) {
        throw std::invalid_argument("sample counts must be positive");
    }
    if (noise_p < 0.0 || noise_p > 1.0) throw std::invalid_argument("depolarize must be in [0,1]");
}

RegressionResult regress(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("regress: length mismatch");
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("regress: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("regress: degenerate x grid");
    RegressionResult r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.xs = xs;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double resid = ys[i] - (r.slope * xs[i] + r.intercept);
        ss += resid * resid;
    }
    r.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return r;
}

double bisect_crossing(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) {
        throw std::invalid_argument("bisect_crossing: no sign change on the interval");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct ReplicationStats {
    double mean = 0, variance = 0, mean_abs_error = 0, se_abs_error = 0;
};

ReplicationStats stats_vs_oracle(const std::vector<double>& estimates, double oracle) {
    const std::size_t n = estimates.size();
    ReplicationStats s;
    KahanSum sum;
    for (double v : estimates) sum.add(v);
    s.mean = sum.value() / static_cast<double>(n);
    if (n > 1) {
        KahanSum sq;
        for (double v : estimates) sq.add((v - s.mean) * (v - s.mean));
        s.variance = sq.value() / static_cast<double>(n - 1);
    }
    KahanSum abs_sum;
    for (double v : estimates) abs_sum.add(std::abs(v - oracle));
    s.mean_abs_error = abs_sum.value() / static_cast<double>(n);
    if (n > 1) {
        KahanSum abs_sq;
        for (double v : estimates) {
            const double dev = std::abs(v - oracle) - s.mean_abs_error;
            abs_sq.add(dev * dev);
        }
        s.se_abs_error = std::sqrt(abs_sq.value() / static_cast<double>(n - 1)) /
                         std::sqrt(static_cast<double>(n));
    }
    return s;
}

Partition sweep_partition(const SweepConfig& config, int n_qubits) {
    if (!config.partition_text.empty()) return Partition::parse(config.partition_text);
    if (n_qubits % 3 != 0) {
        throw std::invalid_argument("no partition given and qubit count is not divisible by 3");
    }
    const int third = n_qubits / 3;
    return Partition::blocks({third, third, third});
}

// Tripartite overlap estimation at one grid point; used by the variance and
// noisy-state experiments.
std::vector<double> replicate_tk(const QuantumState& state, const Partition& partition,
                                 int n_settings, int shots, int replications, std::uint64_t seed,
                                 std::uint64_t lane, int threads) {
    std::vector<double> estimates(static_cast<std::size_t>(replications));
    parallel_for(estimates.size(), threads, [&](std::size_t r) {
        const MeasurementDataset ds = run_local_protocol(
            state, n_settings, shots, substream(seed, lane, static_cast<std::uint64_t>(r)));
        estimates[r] = estimate_Tk(ds, partition).value;
    });
    return estimates;
}

void run_variance_like(const SweepConfig& config, SweepTable& table) {
    const bool grid_is_nu = config.experiment == Experiment::var_vs_NU;
    const bool grid_is_nm = config.experiment == Experiment::var_vs_NM ||
                            config.experiment == Experiment::noisy_state_estimate;
    table.columns = {grid_is_nu ? "n_settings" : (grid_is_nm ? "shots_per_setting" : "grid"),
                     "mean_estimate", "variance", "oracle", "mean_abs_error", "se_abs_error",
                     "replications"};
    QuantumState state = make_state(config.state_kind, config.n_qubits, config.seed);
    if (config.noise_p > 0.0) state = depolarize(state, config.noise_p);
    const Partition partition = sweep_partition(config, config.n_qubits);
    const double oracle = exact_Tk(state, partition);
    for (std::size_t gi = 0; gi < config.grid.size(); ++gi) {
        const int value = static_cast<int>(config.grid[gi]);
        const int nu = grid_is_nu ? value : config.n_settings;
        const int nm = grid_is_nm ? value : config.shots_per_setting;
        try {
            const auto estimates = replicate_tk(state, partition, nu, nm, config.replications,
                                                config.seed, 1000 + gi, config.threads);
            const ReplicationStats s = stats_vs_oracle(estimates, oracle);
            table.rows.push_back({static_cast<double>(value), s.mean, s.variance, oracle,
                                  s.mean_abs_error, s.se_abs_error,
                                  static_cast<double>(config.replications)});
        } catch (const std::exception& e) {
            table.comments.push_back(std::string("# grid point ") + std::to_string(value) +
                                     " skipped: " + e.what());
        }
    }
    if (grid_is_nu && table.rows.size() >= 2) {
        std::vector<double> xs, ys;
        for (const auto& row : table.rows) {
            xs.push_back(std::log2(row[0]));
            ys.push_back(std::log2(row[2]));
        }
        table.regression = regress(xs, ys);
        table.scalars["slope_log2var_vs_log2NU"] = table.regression->slope;
    }
}

void run_var_vs_n(const SweepConfig& config, SweepTable& table) {
    table.columns = {"n_qubits", "mean_estimate", "variance", "oracle",
                     "mean_abs_error", "se_abs_error", "replications"};
    for (std::size_t gi = 0; gi < config.grid.size(); ++gi) {
        const int n = static_cast<int>(config.grid[gi]);
        try {
            const QuantumState state = make_state(config.state_kind, n, config.seed);
            // The partition scales with n: three equal blocks per grid point.
            SweepConfig per_point = config;
            per_point.partition_text.clear();
            const Partition partition = sweep_partition(per_point, n);
            const double oracle = exact_Tk(state, partition);
            const auto estimates =
                replicate_tk(state, partition, config.n_settings, config.shots_per_setting,
                             config.replications, config.seed, 2000 + gi, config.threads);
            const ReplicationStats s = stats_vs_oracle(estimates, oracle);
            table.rows.push_back({static_cast<double>(n), s.mean, s.variance, oracle,
                                  s.mean_abs_error, s.se_abs_error,
                                  static_cast<double>(config.replications)});
        } catch (const std::exception& e) {
            table.comments.push_back(std::string("# grid point ") + std::to_string(n) +
                                     " skipped: " + e.what());
        }
    }
    if (table.rows.size() >= 2) {
        std::vector<double> xs, ys;
        for (const auto& row : table.rows) {
            xs.push_back(row[0]);
            ys.push_back(std::log2(row[2]));
        }
        table.regression = regress(xs, ys);
        table.scalars["slope_log2var_vs_n"] = table.regression->slope;
    }
}

void run_criterion_scan(const SweepConfig& config, SweepTable& table) {
    table.columns = {"p", "ppt", "entropy", "p3ppt", "t2"};
    const Partition bipartition({{0}, {1}});
    for (double p : config.grid) {
        const CriterionReport r = criterion_report(bell_plus_mixture(p), bipartition);
        table.rows.push_back({p, r.ppt, r.entropy, r.p3ppt, r.t2});
    }
    const auto witness = [&](int which) {
        return [which, &bipartition](double p) {
            const CriterionReport r = criterion_report(bell_plus_mixture(p), bipartition);
            switch (which) {
                case 0: return r.ppt;
                case 1: return r.entropy;
                case 2: return r.p3ppt;
                default: return r.t2;
            }
        };
    };
    // Crossing points located on the oracle witnesses by bisection to 1e-3.
    table.scalars["crossing_entropy"] = bisect_crossing(witness(1), 0.01, 0.99);
    table.scalars["crossing_p3ppt"] = bisect_crossing(witness(2), 0.01, 0.99);
    double min_t2 = std::numeric_limits<double>::infinity();
    double min_ppt = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 99; ++i) {
        const double p = static_cast<double>(i) / 100.0;
        const CriterionReport r = criterion_report(bell_plus_mixture(p), bipartition);
        min_t2 = std::min(min_t2, r.t2);
        min_ppt = std::min(min_ppt, r.ppt);
    }
    table.scalars["min_t2_up_to_0.99"] = min_t2;
    table.scalars["min_ppt_up_to_0.99"] = min_ppt;
}

void run_fidelity_curve(const SweepConfig& config, SweepTable& table) {
    table.columns = {"p", "mean_estimate", "variance", "oracle", "mean_abs_error",
                     "se_abs_error", "replications"};
    const QuantumState base = make_state(StateKind::mes, config.n_qubits, config.seed);
    for (std::size_t gi = 0; gi < config.grid.size(); ++gi) {
        const double p = config.grid[gi];
        try {
            const QuantumState state = depolarize(base, p);
            const double oracle = exact_mes_fidelity(state);
            std::vector<double> estimates(static_cast<std::size_t>(config.replications));
            parallel_for(estimates.size(), config.threads, [&](std::size_t r) {
                const MeasurementDataset ds = run_mes_fidelity_protocol(
                    state, config.n_settings, config.shots_per_setting,
                    substream(config.seed, 3000 + gi, static_cast<std::uint64_t>(r)));
                estimates[r] = estimate_mes_fidelity(ds).value;
            });
            const ReplicationStats s = stats_vs_oracle(estimates, oracle);
            table.rows.push_back({p, s.mean, s.variance, oracle, s.mean_abs_error, s.se_abs_error,
                                  static_cast<double>(config.replications)});
        } catch (const std::exception& e) {
            table.comments.push_back(std::string("# grid point ") + format_double(p) +
                                     " skipped: " + e.what());
        }
    }
}

}  // namespace

std::string SweepTable::to_text() const {
    std::string out;
    for (const auto& c : comments) {
        out += c;
        out += '\n';
    }
    for (const auto& [key, value] : scalars) {
        out += "# " + key + " = " + format_double(value) + '\n';
    }
    if (regression) {
        out += "# regression slope=" + format_double(regression->slope) +
               " intercept=" + format_double(regression->intercept) +
               " residual_rms=" + format_double(regression->residual_rms) + '\n';
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out += '\t';
        out += columns[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += '\t';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

SweepTable run_sweep(const SweepConfig& config) {
    config.validate();
    SweepTable table;
    table.comments.push_back("# " + config.to_json_text());
    switch (config.experiment) {
        case Experiment::var_vs_NU:
        case Experiment::var_vs_NM:
        case Experiment::noisy_state_estimate:
            run_variance_like(config, table);
            break;
        case Experiment::var_vs_n:
            run_var_vs_n(config, table);
            break;
        case Experiment::criterion_scan:
            run_criterion_scan(config, table);
            break;
        case Experiment::fidelity_curve:
            run_fidelity_curve(config, table);
            break;
    }
    return table;
}

namespace {

// "ghz3" / "w6" / "bell" / "mes4" / "zero2" / "pure_random5".
std::pair<StateKind, int> parse_state_spec(const std::string& spec) {
    std::size_t split = spec.size();
    while (split > 0 && std::isdigit(static_cast<unsigned char>(spec[split - 1]))) --split;
    const std::string name = spec.substr(0, split);
    const StateKind kind = state_kind_from_string(name);
    int n = 0;
    if (split < spec.size()) {
        n = std::stoi(spec.substr(split));
    } else if (kind == StateKind::bell) {
        n = 2;
    } else {
        throw std::invalid_argument("state spec needs a qubit count, e.g. ghz3");
    }
    return {kind, n};
}

QuantumState state_from_flags(const std::string& spec, double depolarize_p, std::uint64_t seed) {
    const auto [kind, n] = parse_state_spec(spec);
    QuantumState state = make_state(kind, n, seed);
    if (depolarize_p > 0.0) state = depolarize(state, depolarize_p);
    return state;
}

int cmd_simulate(const std::string& state_spec, double depol, const std::string& protocol_name,
                 const std::string& partition_text, int n_settings, int shots, std::uint64_t seed,
                 const std::string& out, int threads) {
    const QuantumState state = state_from_flags(state_spec, depol, seed);
    const Protocol protocol = protocol_from_string(protocol_name);
    MeasurementDataset ds;
    switch (protocol) {
        case Protocol::local_cro:
            ds = run_local_protocol(state, n_settings, shots, seed, threads);
            break;
        case Protocol::global_cro: {
            if (partition_text.empty()) {
                throw std::invalid_argument("the global protocol needs --partition");
            }
            ds = run_global_protocol(state, Partition::parse(partition_text), n_settings, shots,
                                     seed, threads);
            break;
        }
        case Protocol::mes_fidelity:
            ds = run_mes_fidelity_protocol(state, n_settings, shots, seed, threads);
            break;
        case Protocol::concurrence:
            ds = run_concurrence_protocol(state, n_settings, shots, seed, threads);
            break;
    }
    save_dataset(ds, out);
    std::cout << "wrote " << out << " (" << ds.n_settings << " settings x " << ds.shots_per_setting
              << " shots)\n";
    return 0;
}

int cmd_estimate(const std::string& dataset_path, const std::string& estimator,
                 const std::string& partition_text, const std::string& subset_text,
                 const std::string& out, int threads) {
    const MeasurementDataset ds = load_dataset(dataset_path);
    EstimateWithError est;
    std::string partition_label = partition_text;
    if (estimator == "tk" || estimator == "correlation" || estimator == "t2_witness") {
        if (partition_text.empty()) throw std::invalid_argument("--partition is required");
        const Partition partition = Partition::parse(partition_text);
        if (estimator == "tk") {
            est = estimate_Tk(ds, partition, threads);
        } else if (estimator == "correlation") {
            est = estimate_correlation(ds, partition, threads);
        } else {
            est = estimate_t2_witness(ds, partition, threads);
        }
    } else if (estimator == "purity") {
        if (subset_text.empty()) throw std::invalid_argument("--subset is required for purity");
        std::vector<int> subset;
        std::stringstream ss(subset_text);
        std::string token;
        while (std::getline(ss, token, ',')) subset.push_back(std::stoi(token));
        est = estimate_purity(ds, subset, threads);
        partition_label = subset_text;
    } else if (estimator == "mes_fidelity") {
        est = estimate_mes_fidelity(ds, threads);
    } else if (estimator == "concurrence") {
        est = estimate_concurrence(ds, threads);
    } else {
        throw std::invalid_argument("unknown estimator: " + estimator);
    }
    const std::string record = estimate_record(est, partition_label, dataset_path);
    if (out.empty()) {
        std::cout << record << '\n';
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot open " + out);
        f << record << '\n';
    }
    return 0;
}

int cmd_oracle(const std::string& state_spec, double depol, const std::string& quantity,
               const std::string& partition_text, const std::string& variant_name,
               std::uint64_t seed) {
    const QuantumState state = state_from_flags(state_spec, depol, seed);
    const FidelityVariant variant = fidelity_variant_from_string(variant_name);
    auto need_partition = [&]() {
        if (partition_text.empty()) throw std::invalid_argument("--partition is required");
        return Partition::parse(partition_text);
    };
    double value = 0.0;
    if (quantity == "t_k") {
        value = exact_Tk(state, need_partition());
    } else if (quantity == "purity") {
        std::vector<int> all(static_cast<std::size_t>(state.n_qubits()));
        std::iota(all.begin(), all.end(), 0);
        value = exact_purity(state, all);
    } else if (quantity == "correlation") {
        value = exact_correlation(state, need_partition(), variant);
    } else if (quantity == "genuine_correlation") {
        value = exact_genuine_correlation(state, need_partition(), variant);
    } else if (quantity == "mes_fidelity") {
        value = exact_mes_fidelity(state);
    } else if (quantity == "concurrence") {
        value = exact_concurrence(state);
    } else if (quantity == "hs_distance") {
        value = exact_hs_distance(state, need_partition());
    } else if (quantity == "criteria") {
        const CriterionReport r = criterion_report(state, need_partition());
        json j;
        j["ppt"] = r.ppt;
        j["entropy"] = r.entropy;
        j["p3ppt"] = r.p3ppt;
        j["t2"] = r.t2;
        std::cout << j.dump() << '\n';
        return 0;
    } else {
        throw std::invalid_argument("unknown quantity: " + quantity);
    }
    std::printf("%.12g\n", value);
    return 0;
}

int cmd_verify(int threads) {
    int failures = 0;
    const auto check = [&](const std::string& name, bool ok, double value) {
        std::printf("%-44s %s (%.3g)\n", name.c_str(), ok ? "ok" : "FAIL", value);
        if (!ok) ++failures;
    };

    // Clifford group structure.
    {
        const auto& table = clifford_table();
        bool distinct = true;
        for (int a = 0; a < 24 && distinct; ++a) {
            for (int b = a + 1; b < 24 && distinct; ++b) {
                const Complex overlap = (table[static_cast<std::size_t>(a)].adjoint() *
                                         table[static_cast<std::size_t>(b)])
                                            .trace();
                if (std::abs(std::abs(overlap) - 2.0) < 1e-9) distinct = false;
            }
        }
        check("clifford: 24 elements pairwise distinct", distinct, 24);
        bool closed = true;
        for (int a = 0; a < 24 && closed; ++a) {
            for (int b = 0; b < 24 && closed; ++b) {
                try {
                    clifford_product_index(a, b);
                } catch (...) {
                    closed = false;
                }
            }
        }
        check("clifford: closed under products", closed, 576);
    }

    // Twirling identity: Phi^2(X) = SWAP over the Clifford enumeration.
    {
        // X written out from its definition, independent of the estimator
        // kernels.
        Matrix x = Matrix::Zero(4, 4);
        for (int s = 0; s < 2; ++s) {
            for (int sp = 0; sp < 2; ++sp) {
                x(s * 2 + sp, s * 2 + sp) = (s == sp) ? 2.0 : -1.0;
            }
        }
        const Matrix swap = permutation_operator({1, 0}, 2, 2);
        const TwirlResult tw = twirl(x, EnsembleId::clifford1q, 2);
        const double err = (tw.value - swap).cwiseAbs().maxCoeff();
        check("twirl: Phi^2(X) = SWAP", err < 1e-12, err);

        Vector plus(2);
        plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        const Matrix proj = plus * plus.adjoint();
        Matrix proj2 = Matrix::Zero(4, 4);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                proj2.block(r * 2, c * 2, 2, 2) = proj(r, c) * proj;
            }
        }
        const Matrix expected = (Matrix::Identity(4, 4) + swap) / 6.0;
        const double err2 =
            (twirl(proj2, EnsembleId::clifford1q, 2).value - expected).cwiseAbs().maxCoeff();
        check("twirl: Phi^2(|psi><psi|^{x2}) = (I+S)/6", err2 < 1e-12, err2);
    }

    // Weingarten invariants and agreement with the ensemble twirl.
    for (int d : {2, 3, 4}) {
        const WeingartenTable wg = weingarten_t2(d);
        const double expected_row = 1.0 / (static_cast<double>(d) * (d + 1.0));
        const double row_err = std::max(std::abs(wg.row_sum(0) - expected_row),
                                        std::abs(wg.row_sum(1) - expected_row));
        check("weingarten t=2 d=" + std::to_string(d) + ": symmetric + row sums",
              wg.is_symmetric() && row_err < 1e-15, row_err);
    }

    // Permutation sums vs closed forms.
    for (int d : {2, 3, 4, 5}) {
        const PermSumReport r = verify_perm_sums(d);
        check("perm sums d=" + std::to_string(d), r.ok(1e-8), r.max_abs_error());
    }

    // Brute-force unbiasedness of the overlap estimator.
    {
        const QuantumState bell = make_state(StateKind::bell, 2);
        const Partition two = Partition::singletons(2);
        const double e1 = brute_force_estimator_expectation(bell, two, Protocol::local_cro, threads);
        check("unbiased: Bell k=2", std::abs(e1 - exact_Tk(bell, two)) < 1e-10,
              std::abs(e1 - exact_Tk(bell, two)));

        const QuantumState ghz = make_state(StateKind::ghz, 3);
        const Partition three = Partition::singletons(3);
        const double e2 = brute_force_estimator_expectation(ghz, three, Protocol::local_cro, threads);
        check("unbiased: GHZ3 k=3", std::abs(e2 - exact_Tk(ghz, three)) < 1e-10,
              std::abs(e2 - exact_Tk(ghz, three)));

        const QuantumState noisy = depolarize(bell, 0.5);
        const double e3 =
            brute_force_estimator_expectation(noisy, two, Protocol::local_cro, threads);
        check("unbiased: depolarized Bell k=2", std::abs(e3 - exact_Tk(noisy, two)) < 1e-10,
              std::abs(e3 - exact_Tk(noisy, two)));
    }

    if (failures > 0) {
        std::printf("%d verification check(s) failed\n", failures);
        return 2;
    }
    std::printf("all verification checks passed\n");
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"correlation-overlap toolkit: randomized-measurement simulation and estimation"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a measurement protocol, write a dataset");
    std::string sim_state = "ghz3", sim_protocol = "local_cro", sim_partition, sim_out;
    double sim_depol = 0.0;
    int sim_nu = 100, sim_nm = 10, sim_threads = default_thread_count();
    std::uint64_t sim_seed = 1;
    simulate->add_option("--state", sim_state, "state spec, e.g. ghz3, w6, bell, mes4");
    simulate->add_option("--depolarize", sim_depol, "depolarizing strength in [0,1]");
    simulate->add_option("--protocol", sim_protocol, "local_cro|global_cro|mes_fidelity|concurrence");
    simulate->add_option("--partition", sim_partition, "block sizes, e.g. 1|1|1 (global protocol)");
    simulate->add_option("--n-settings", sim_nu, "number of unitary settings N_U");
    simulate->add_option("--shots", sim_nm, "shots per setting N_M");
    simulate->add_option("--seed", sim_seed, "master seed");
    simulate->add_option("--threads", sim_threads, "worker threads");
    simulate->add_option("--out", sim_out, "output dataset path")->required();

    // estimate
    auto* estimate = app.add_subcommand("estimate", "postprocess a dataset into an estimate");
    std::string est_dataset, est_name = "tk", est_partition, est_subset, est_out;
    int est_threads = default_thread_count();
    estimate->add_option("--dataset", est_dataset, "dataset file")->required();
    estimate->add_option("--estimator", est_name,
                         "tk|purity|correlation|mes_fidelity|concurrence|t2_witness");
    estimate->add_option("--partition", est_partition, "block sizes, e.g. 1|1|1");
    estimate->add_option("--subset", est_subset, "qubit list for purity, e.g. 0,1");
    estimate->add_option("--threads", est_threads, "worker threads");
    estimate->add_option("--out", est_out, "write the record here instead of stdout");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "exact value of an estimated quantity");
    std::string ora_state = "ghz3", ora_quantity = "t_k", ora_partition, ora_variant = "gm";
    double ora_depol = 0.0;
    std::uint64_t ora_seed = 1;
    oracle_cmd->add_option("--state", ora_state, "state spec");
    oracle_cmd->add_option("--depolarize", ora_depol, "depolarizing strength");
    oracle_cmd->add_option("--quantity", ora_quantity,
                           "t_k|purity|correlation|genuine_correlation|mes_fidelity|concurrence|"
                           "hs_distance|criteria");
    oracle_cmd->add_option("--partition", ora_partition, "block sizes");
    oracle_cmd->add_option("--variant", ora_variant, "gm|max");
    oracle_cmd->add_option("--seed", ora_seed, "seed for random state kinds");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a configured experiment sweep");
    std::string sweep_config_path, sweep_out;
    std::uint64_t sweep_seed = 0;
    int sweep_threads = 0;
    sweep->add_option("--config", sweep_config_path, "JSON sweep config")->required();
    sweep->add_option("--out", sweep_out, "override the output path");
    auto* sweep_seed_opt = sweep->add_option("--seed", sweep_seed, "override the config seed");
    sweep->add_option("--threads", sweep_threads, "override worker threads");

    // verify
    auto* verify = app.add_subcommand("verify", "run the identity suite (exit 2 on failure)");
    int verify_threads = default_thread_count();
    verify->add_option("--threads", verify_threads, "worker threads");

    // cliffords
    auto* cliffords = app.add_subcommand("cliffords", "export the Clifford enumeration table");
    std::string cliffords_out;
    cliffords->add_option("--out", cliffords_out, "write the table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim_state, sim_depol, sim_protocol, sim_partition, sim_nu, sim_nm,
                                sim_seed, sim_out, sim_threads);
        }
        if (estimate->parsed()) {
            return cmd_estimate(est_dataset, est_name, est_partition, est_subset, est_out,
                                est_threads);
        }
        if (oracle_cmd->parsed()) {
            return cmd_oracle(ora_state, ora_depol, ora_quantity, ora_partition, ora_variant,
                              ora_seed);
        }
        if (sweep->parsed()) {
            SweepConfig config = SweepConfig::from_json_file(sweep_config_path);
            if (sweep_seed_opt->count() > 0) config.seed = sweep_seed;
            if (!sweep_out.empty()) config.out_path = sweep_out;
            if (sweep_threads > 0) config.threads = sweep_threads;
            const SweepTable table = run_sweep(config);
            if (config.out_path.empty()) {
                std::cout << table.to_text();
            } else {
                std::ofstream f(config.out_path);
                if (!f) throw std::runtime_error("cannot open " + config.out_path);
                f << table.to_text();
            }
            return 0;
        }
        if (verify->parsed()) {
            return cmd_verify(verify_threads);
        }
        if (cliffords->parsed()) {
            if (cliffords_out.empty()) {
                std::cout << clifford_table_text();
            } else {
                std::ofstream f(cliffords_out);
                if (!f) throw std::runtime_error("cannot open " + cliffords_out);
                f << clifford_table_text();
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace cro
