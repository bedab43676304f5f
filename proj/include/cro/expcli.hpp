#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cro/oracle.hpp"
#include "cro/qcore.hpp"

namespace cro {

enum class Experiment {
    var_vs_NU,
    var_vs_n,
    var_vs_NM,
    noisy_state_estimate,
    criterion_scan,
    fidelity_curve,
};

Experiment experiment_from_string(const std::string& name);
std::string to_string(Experiment experiment);

// Configuration of one sweep; read from a JSON config file and overridable
// by CLI flags.
struct SweepConfig {
    Experiment experiment = Experiment::var_vs_NU;
    StateKind state_kind = StateKind::ghz;
    int n_qubits = 3;
    double noise_p = 0.0;          // depolarizing strength of the target state
    std::vector<double> grid;      // per-experiment meaning (N_U, N_M, n, or p)
    int n_settings = 100;          // N_U (when not the grid variable)
    int shots_per_setting = 10;    // N_M (when not the grid variable)
    int replications = 50;
    std::uint64_t seed = 1;
    std::string partition_text;    // optional; default: three equal blocks
    std::string out_path;
    int threads = 1;

    static SweepConfig from_json_text(const std::string& text);
    static SweepConfig from_json_file(const std::string& path);
    std::string to_json_text() const;

    void validate() const;
};

// Ordinary least squares y = slope * x + intercept.
struct RegressionResult {
    double slope = 0;
    double intercept = 0;
    double residual_rms = 0;
    std::vector<double> xs;
};

RegressionResult regress(const std::vector<double>& xs, const std::vector<double>& ys);

// Finds the sign change of f on [lo, hi] by bisection to the given x
// tolerance; f(lo) and f(hi) must differ in sign.
double bisect_crossing(const std::function<double(double)>& f, double lo, double hi,
                       double tol = 1e-3);

// Row-oriented result table with '#' comment lines carrying the config echo
// and derived scalars (regression slopes, crossing points). Serialization
// is deterministic.
struct SweepTable {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::optional<RegressionResult> regression;
    std::map<std::string, double> scalars;

    std::string to_text() const;
};

// Runs the configured sweep: per grid point, `replications` independent
// estimations with oracle values alongside. Grid points that violate a
// simulation cap are reported in a comment and skipped, without aborting
// the sweep.
SweepTable run_sweep(const SweepConfig& config);

// Entry point of the command-line tool. Exit codes: 0 success, 1 usage or
// runtime error, 2 verification failure.
int run_cli(int argc, const char* const* argv);

}  // namespace cro
