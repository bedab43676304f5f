#include "cro/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cro/support.hpp"

namespace cro {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Mean and standard error of per-setting estimates; the reduce runs in
// setting order with compensated summation so the result is independent of
// any parallel schedule used to fill the slots.
EstimateWithError summarize(const std::vector<double>& per_setting, int shots_per_setting,
                            std::string estimator_id) {
    const int n = static_cast<int>(per_setting.size());
    KahanSum sum;
    for (double v : per_setting) sum.add(v);
    const double mean = sum.value() / n;
    double std_error = 0.0;
    if (n > 1) {
        KahanSum sq;
        for (double v : per_setting) sq.add((v - mean) * (v - mean));
        std_error = std::sqrt(sq.value() / (n - 1)) / std::sqrt(static_cast<double>(n));
    }
    EstimateWithError est;
    est.value = mean;
    est.std_error = std_error;
    est.n_settings = n;
    est.shots_per_setting = shots_per_setting;
    est.estimator_id = std::move(estimator_id);
    return est;
}

std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::int64_t out = 1;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

// Extracted group values per shot: vals[m][i] is shot i restricted to the
// m-th extraction unit (a partition group for local weights, a recorded
// party for global weights).
struct GroupExtraction {
    std::vector<std::uint64_t> masks_unused;  // kept for clarity of intent
    std::vector<std::vector<int>> shifts;     // per unit, source bit positions
    std::vector<int> widths;

    static GroupExtraction build(const std::vector<std::vector<int>>& units, int n_qubits) {
        GroupExtraction ex;
        for (const auto& unit : units) {
            std::vector<int> src;
            src.reserve(unit.size());
            for (int q : unit) src.push_back(n_qubits - 1 - q);
            ex.shifts.push_back(std::move(src));
            ex.widths.push_back(static_cast<int>(unit.size()));
        }
        return ex;
    }

    std::uint64_t extract(std::uint64_t shot, std::size_t unit) const {
        const auto& src = shifts[unit];
        std::uint64_t out = 0;
        for (int pos : src) out = (out << 1) | ((shot >> pos) & 1ULL);
        return out;
    }
};

// Per-setting weight evaluation plan: the requested partition groups mapped
// onto extraction units. Local datasets extract the groups themselves;
// global datasets extract the recorded parties and attach each group to the
// parties it unites.
struct WeightPlan {
    GroupExtraction extraction;
    // Per requested group: the extraction-unit indices whose per-unit
    // x_weight factors multiply into the group weight.
    std::vector<std::vector<std::size_t>> group_units;
    std::vector<std::vector<int>> unit_widths_per_group;
    bool local = true;

    int k() const { return static_cast<int>(group_units.size()); }
};

WeightPlan make_weight_plan(const MeasurementDataset& dataset, const Partition& partition,
                            bool require_k2 = true) {
    partition.validate(dataset.n_qubits, require_k2);
    WeightPlan plan;
    if (dataset.protocol == Protocol::local_cro || dataset.protocol == Protocol::concurrence) {
        plan.local = true;
        plan.extraction = GroupExtraction::build(partition.groups, dataset.n_qubits);
        for (std::size_t m = 0; m < partition.groups.size(); ++m) {
            plan.group_units.push_back({m});
            plan.unit_widths_per_group.push_back({static_cast<int>(partition.groups[m].size())});
        }
        return plan;
    }
    if (dataset.protocol != Protocol::global_cro) {
        throw std::invalid_argument("correlation-overlap estimation needs a local_cro or global_cro dataset");
    }
    if (!dataset.partition_hint) {
        throw std::invalid_argument("global dataset is missing its recorded partition");
    }
    const auto& parties = dataset.partition_hint->groups;
    plan.local = false;
    plan.extraction = GroupExtraction::build(parties, dataset.n_qubits);
    // Each requested group must be a union of recorded parties: a party
    // 2-design cannot be restricted below party granularity.
    for (const auto& group : partition.groups) {
        std::vector<int> remaining(group);
        std::sort(remaining.begin(), remaining.end());
        std::vector<std::size_t> units;
        std::vector<int> widths;
        for (std::size_t p = 0; p < parties.size(); ++p) {
            std::vector<int> party_sorted(parties[p]);
            std::sort(party_sorted.begin(), party_sorted.end());
            if (std::includes(remaining.begin(), remaining.end(), party_sorted.begin(),
                              party_sorted.end())) {
                units.push_back(p);
                widths.push_back(static_cast<int>(party_sorted.size()));
                std::vector<int> rest;
                std::set_difference(remaining.begin(), remaining.end(), party_sorted.begin(),
                                    party_sorted.end(), std::back_inserter(rest));
                remaining = std::move(rest);
            }
        }
        if (!remaining.empty()) {
            throw std::invalid_argument(
                "partition group {" + partition.to_text() +
                "} is not a union of the parties recorded in the global dataset");
        }
        plan.group_units.push_back(std::move(units));
        plan.unit_widths_per_group.push_back(std::move(widths));
    }
    return plan;
}

// Extracted per-unit shot values for one setting.
std::vector<std::vector<std::uint64_t>> extract_setting(const WeightPlan& plan,
                                                        const std::vector<std::uint64_t>& shots) {
    const std::size_t n_units = plan.extraction.shifts.size();
    std::vector<std::vector<std::uint64_t>> vals(n_units);
    for (std::size_t u = 0; u < n_units; ++u) {
        vals[u].resize(shots.size());
        for (std::size_t i = 0; i < shots.size(); ++i) {
            vals[u][i] = plan.extraction.extract(shots[i], u);
        }
    }
    return vals;
}

double group_weight(const WeightPlan& plan, const std::vector<std::vector<std::uint64_t>>& vals,
                    int group, std::size_t i, std::size_t j) {
    const auto& units = plan.group_units[static_cast<std::size_t>(group)];
    const auto& widths = plan.unit_widths_per_group[static_cast<std::size_t>(group)];
    if (plan.local) {
        return x_weight_local(vals[units[0]][i], vals[units[0]][j], widths[0]);
    }
    double w = 1.0;
    for (std::size_t u = 0; u < units.size(); ++u) {
        const std::int64_t d = std::int64_t{1} << widths[u];
        w *= x_weight(static_cast<std::int64_t>(vals[units[u]][i]),
                      static_cast<std::int64_t>(vals[units[u]][j]), d);
    }
    return w;
}

double tk_statistic_from_values(const WeightPlan& plan,
                                const std::vector<std::vector<std::uint64_t>>& vals,
                                std::size_t n_shots) {
    const int k = plan.k();
    KahanSum total;
    std::vector<double> prefix(static_cast<std::size_t>(k) + 1, 0.0);
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) < n_shots; ++i) {
        std::fill(prefix.begin(), prefix.end(), 0.0);
        prefix[0] = 1.0;
        for (std::size_t j = i + 1; j < n_shots; ++j) {
            // Downward update keeps prefix[m-1] at its value before shot j,
            // so prefix[m] accumulates exactly the ordered m-tuples ending
            // at j with the distinguished copy fixed at i.
            for (int m = k; m >= 1; --m) {
                prefix[static_cast<std::size_t>(m)] +=
                    group_weight(plan, vals, m - 1, i, j) * prefix[static_cast<std::size_t>(m - 1)];
            }
        }
        total.add(prefix[static_cast<std::size_t>(k)]);
    }
    return total.value() / static_cast<double>(binomial(static_cast<int>(n_shots), k + 1));
}

void check_tk_preconditions(const MeasurementDataset& dataset, const Partition& partition) {
    const int k = partition.k();
    if (dataset.shots_per_setting < k + 1) {
        throw std::invalid_argument("estimating a k-partite overlap needs at least k+1 shots per setting");
    }
    if (dataset.protocol == Protocol::mes_fidelity) {
        throw std::invalid_argument("mes_fidelity datasets carry U x U* mechanics, not correlation shots");
    }
}

}  // namespace

std::string estimate_record(const EstimateWithError& est, const std::string& partition_text,
                            const std::string& dataset_ref) {
    nlohmann::json j;
    j["estimator_id"] = est.estimator_id;
    j["value"] = est.value;
    j["std_error"] = est.std_error;
    j["n_settings"] = est.n_settings;
    j["shots_per_setting"] = est.shots_per_setting;
    j["defined"] = est.defined;
    if (!est.diagnostics.empty()) j["diagnostics"] = est.diagnostics;
    if (!partition_text.empty()) j["partition"] = partition_text;
    if (!dataset_ref.empty()) j["dataset"] = dataset_ref;
    return j.dump();
}

double x_weight(std::int64_t s, std::int64_t s_prime, std::int64_t d) {
    if (s < 0 || s >= d || s_prime < 0 || s_prime >= d) {
        throw std::invalid_argument("x_weight: outcome out of range");
    }
    return s == s_prime ? static_cast<double>(d) : -1.0;
}

double x_weight_local(std::uint64_t a, std::uint64_t b, int n_bits) {
    if (n_bits < 1 || n_bits > 63) throw std::invalid_argument("x_weight_local: bad width");
    const std::uint64_t mask = (std::uint64_t{1} << n_bits) - 1;
    if ((a | b) > mask) throw std::invalid_argument("x_weight_local: outcome exceeds width");
    const int h = std::popcount((a ^ b) & mask);
    const double magnitude = std::ldexp(1.0, n_bits - h);  // 2^(m-h)
    return (h & 1) ? -magnitude : magnitude;
}

double tk_setting_statistic(const MeasurementDataset& dataset, const Partition& partition,
                            int setting_index) {
    const WeightPlan plan = make_weight_plan(dataset, partition);
    const auto& shots = dataset.shots[static_cast<std::size_t>(setting_index)];
    return tk_statistic_from_values(plan, extract_setting(plan, shots), shots.size());
}

double tk_setting_statistic_direct(const MeasurementDataset& dataset, const Partition& partition,
                                   int setting_index) {
    const WeightPlan plan = make_weight_plan(dataset, partition);
    const auto& shots = dataset.shots[static_cast<std::size_t>(setting_index)];
    const auto vals = extract_setting(plan, shots);
    const int k = plan.k();
    const int n = static_cast<int>(shots.size());
    std::vector<std::size_t> idx(static_cast<std::size_t>(k) + 1);
    KahanSum total;
    // Enumerates ordered (k+1)-subsets i_0 < i_1 < ... < i_k directly.
    std::function<void(int, std::size_t)> recurse = [&](int depth, std::size_t start) {
        if (depth == k + 1) {
            double prod = 1.0;
            for (int m = 1; m <= k; ++m) {
                prod *= group_weight(plan, vals, m - 1, idx[0], idx[static_cast<std::size_t>(m)]);
            }
            total.add(prod);
            return;
        }
        for (std::size_t i = start; i < static_cast<std::size_t>(n); ++i) {
            idx[static_cast<std::size_t>(depth)] = i;
            recurse(depth + 1, i + 1);
        }
    };
    recurse(0, 0);
    return total.value() / static_cast<double>(binomial(n, k + 1));
}

EstimateWithError estimate_Tk(const MeasurementDataset& dataset, const Partition& partition,
                              int threads) {
    dataset.validate();
    check_tk_preconditions(dataset, partition);
    const WeightPlan plan = make_weight_plan(dataset, partition);
    std::vector<double> per_setting(static_cast<std::size_t>(dataset.n_settings));
    parallel_for(per_setting.size(), threads, [&](std::size_t t) {
        const auto& shots = dataset.shots[t];
        per_setting[t] = tk_statistic_from_values(plan, extract_setting(plan, shots), shots.size());
    });
    return summarize(per_setting, dataset.shots_per_setting,
                     "tk_k" + std::to_string(partition.k()) +
                         (plan.local ? "_local" : "_global"));
}

EstimateWithError estimate_purity(const MeasurementDataset& dataset, const std::vector<int>& subset,
                                  int threads) {
    dataset.validate();
    if (subset.empty()) throw std::invalid_argument("estimate_purity: empty subset");
    if (dataset.shots_per_setting < 2) {
        throw std::invalid_argument("estimate_purity: need at least two shots per setting");
    }
    if (dataset.protocol == Protocol::mes_fidelity) {
        throw std::invalid_argument("estimate_purity: mes_fidelity datasets are not purity data");
    }
    // Single-group weight plan; on global datasets this enforces the
    // union-of-parties rule for the subset too.
    const WeightPlan p = make_weight_plan(dataset, Partition({subset}), /*require_k2=*/false);

    std::vector<double> per_setting(static_cast<std::size_t>(dataset.n_settings));
    parallel_for(per_setting.size(), threads, [&](std::size_t t) {
        const auto& shots = dataset.shots[t];
        const auto vals = extract_setting(p, shots);
        const std::size_t n = shots.size();
        KahanSum sum;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                sum.add(group_weight(p, vals, 0, i, j));
            }
        }
        per_setting[t] = 2.0 * sum.value() / (static_cast<double>(n) * static_cast<double>(n - 1));
    });
    return summarize(per_setting, dataset.shots_per_setting, "purity");
}

EstimateWithError estimate_correlation(const MeasurementDataset& dataset, const Partition& partition,
                                       int threads) {
    EstimateWithError tk = estimate_Tk(dataset, partition, threads);
    EstimateWithError full = estimate_purity(dataset, partition.all_qubits(), threads);
    std::vector<EstimateWithError> parts;
    parts.reserve(static_cast<std::size_t>(partition.k()));
    for (const auto& group : partition.groups) {
        parts.push_back(estimate_purity(dataset, group, threads));
    }

    EstimateWithError est;
    est.estimator_id = "correlation_k" + std::to_string(partition.k());
    est.n_settings = dataset.n_settings;
    est.shots_per_setting = dataset.shots_per_setting;

    double denom = full.value;
    for (const auto& p : parts) denom *= p.value;
    if (tk.value <= 0.0 || full.value <= 0.0 ||
        std::any_of(parts.begin(), parts.end(), [](const auto& p) { return p.value <= 0.0; })) {
        est.defined = false;
        est.value = std::numeric_limits<double>::quiet_NaN();
        est.diagnostics = "nonpositive component: T_k=" + std::to_string(tk.value) +
                          " purity_full=" + std::to_string(full.value);
        return est;
    }
    est.value = -std::log2(tk.value / std::sqrt(denom));
    // First-order propagation, components treated as independent.
    double var = (tk.std_error / (tk.value * kLn2)) * (tk.std_error / (tk.value * kLn2));
    var += (full.std_error / (2.0 * full.value * kLn2)) * (full.std_error / (2.0 * full.value * kLn2));
    for (const auto& p : parts) {
        var += (p.std_error / (2.0 * p.value * kLn2)) * (p.std_error / (2.0 * p.value * kLn2));
    }
    est.std_error = std::sqrt(var);
    return est;
}

EstimateWithError estimate_mes_fidelity(const MeasurementDataset& dataset, int threads) {
    dataset.validate();
    if (dataset.protocol != Protocol::mes_fidelity) {
        throw std::invalid_argument("estimate_mes_fidelity: dataset protocol is " +
                                    to_string(dataset.protocol));
    }
    const int half = dataset.n_qubits / 2;
    const std::uint64_t mask = (std::uint64_t{1} << half) - 1;
    std::vector<double> per_setting(static_cast<std::size_t>(dataset.n_settings));
    parallel_for(per_setting.size(), threads, [&](std::size_t t) {
        KahanSum sum;
        for (std::uint64_t shot : dataset.shots[t]) {
            const std::uint64_t sa = shot >> half;
            const std::uint64_t sb = shot & mask;
            const int h = std::popcount(sa ^ sb);
            sum.add((h & 1) ? -std::ldexp(1.0, -h) : std::ldexp(1.0, -h));  // (-2)^{-h}
        }
        per_setting[t] = sum.value() / dataset.shots_per_setting;
    });
    return summarize(per_setting, dataset.shots_per_setting, "mes_fidelity");
}

EstimateWithError estimate_concurrence(const MeasurementDataset& dataset, int threads) {
    dataset.validate();
    if (dataset.protocol != Protocol::concurrence) {
        throw std::invalid_argument("estimate_concurrence: dataset protocol is " +
                                    to_string(dataset.protocol));
    }
    if (dataset.shots_per_setting < 2) {
        throw std::invalid_argument("estimate_concurrence: need at least two shots per setting");
    }
    const int n = dataset.n_qubits;
    std::vector<double> per_setting(static_cast<std::size_t>(dataset.n_settings));
    parallel_for(per_setting.size(), threads, [&](std::size_t t) {
        const auto& shots = dataset.shots[t];
        const std::size_t m = shots.size();
        std::int64_t collisions = 0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                if (shots[i] == shots[j]) ++collisions;
            }
        }
        per_setting[t] =
            2.0 * static_cast<double>(collisions) / (static_cast<double>(m) * static_cast<double>(m - 1));
    });
    EstimateWithError k_hat = summarize(per_setting, dataset.shots_per_setting, "concurrence");
    const double scale = std::pow(1.5, n);  // (3/2)^n from the s-symmetrization
    const double radicand = 1.0 - scale * k_hat.value;

    EstimateWithError est;
    est.estimator_id = "concurrence";
    est.n_settings = dataset.n_settings;
    est.shots_per_setting = dataset.shots_per_setting;
    est.value = 2.0 * std::sqrt(std::max(0.0, radicand));
    if (radicand > 1e-12) {
        est.std_error = scale * k_hat.std_error / std::sqrt(radicand);
    } else {
        // Clamped at zero; report the kernel-level error instead.
        est.std_error = scale * k_hat.std_error;
        est.diagnostics = "radicand clamped: 1-(3/2)^n K = " + std::to_string(radicand);
    }
    return est;
}

EstimateWithError estimate_t2_witness(const MeasurementDataset& dataset, const Partition& bipartition,
                                      int threads) {
    if (bipartition.k() != 2) {
        throw std::invalid_argument("estimate_t2_witness: need a two-party partition");
    }
    if (dataset.protocol != Protocol::local_cro) {
        throw std::invalid_argument("estimate_t2_witness: needs a local_cro dataset");
    }
    EstimateWithError tk = estimate_Tk(dataset, bipartition, threads);
    EstimateWithError pab = estimate_purity(dataset, bipartition.all_qubits(), threads);
    EstimateWithError pa = estimate_purity(dataset, bipartition.groups[0], threads);
    EstimateWithError pb = estimate_purity(dataset, bipartition.groups[1], threads);

    EstimateWithError est;
    est.estimator_id = "t2_witness";
    est.n_settings = dataset.n_settings;
    est.shots_per_setting = dataset.shots_per_setting;
    est.value = pab.value + pa.value + pb.value - 2.0 * tk.value - 1.0;
    est.std_error = std::sqrt(pab.std_error * pab.std_error + pa.std_error * pa.std_error +
                              pb.std_error * pb.std_error + 4.0 * tk.std_error * tk.std_error);
    return est;
}

}  // namespace cro
