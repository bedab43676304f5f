#include "cro/sampler.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cro/support.hpp"

namespace cro {

using json = nlohmann::json;

namespace {

// Substream lanes of the master seed.
constexpr std::uint64_t kSettingLane = 1;
constexpr std::uint64_t kShotLane = 2;

}  // namespace

Protocol protocol_from_string(const std::string& name) {
    if (name == "local_cro") return Protocol::local_cro;
    if (name == "global_cro") return Protocol::global_cro;
    if (name == "mes_fidelity") return Protocol::mes_fidelity;
    if (name == "concurrence") return Protocol::concurrence;
    throw std::invalid_argument("unknown protocol: " + name);
}

std::string to_string(Protocol protocol) {
    switch (protocol) {
        case Protocol::local_cro: return "local_cro";
        case Protocol::global_cro: return "global_cro";
        case Protocol::mes_fidelity: return "mes_fidelity";
        case Protocol::concurrence: return "concurrence";
    }
    return "?";
}

void MeasurementDataset::validate() const {
    if (static_cast<int>(settings.size()) != n_settings) {
        throw std::invalid_argument("dataset: settings count does not match N_U");
    }
    if (static_cast<int>(shots.size()) != n_settings) {
        throw std::invalid_argument("dataset: shot lists count does not match N_U");
    }
    const std::uint64_t limit = (n_qubits >= 64) ? ~0ULL : (std::uint64_t{1} << n_qubits);
    for (const auto& list : shots) {
        if (static_cast<int>(list.size()) != shots_per_setting) {
            throw std::invalid_argument("dataset: shot list length does not match N_M");
        }
        for (std::uint64_t s : list) {
            if (s >= limit) throw std::invalid_argument("dataset: shot exceeds bitstring width");
        }
    }
    if (protocol == Protocol::mes_fidelity && n_qubits % 2 != 0) {
        throw std::invalid_argument("dataset: mes_fidelity needs an even qubit count");
    }
}

std::vector<bool> conjugate_mask_for(Protocol protocol, int n_qubits) {
    if (protocol != Protocol::mes_fidelity) return {};
    std::vector<bool> mask(static_cast<std::size_t>(n_qubits), false);
    for (int q = n_qubits / 2; q < n_qubits; ++q) mask[static_cast<std::size_t>(q)] = true;
    return mask;
}

std::vector<Matrix2> setting_qubit_matrices(const LocalUnitarySetting& setting, Protocol protocol,
                                            int n_qubits) {
    std::vector<Matrix2> mats = setting.qubit_matrices();
    if (protocol == Protocol::mes_fidelity) {
        if (static_cast<int>(mats.size()) != n_qubits / 2) {
            throw std::invalid_argument("mes_fidelity setting must hold one unitary per qubit pair");
        }
        // The same unitary drives qubit l and its partner l + n/2; the
        // conjugation happens through the mask at application time.
        std::vector<Matrix2> full(mats);
        full.insert(full.end(), mats.begin(), mats.end());
        return full;
    }
    if (static_cast<int>(mats.size()) != n_qubits) {
        throw std::invalid_argument("setting does not cover all qubits");
    }
    return mats;
}

MeasurementDataset run_with_settings(const QuantumState& state, Protocol protocol,
                                     std::vector<LocalUnitarySetting> settings,
                                     int shots_per_setting, std::uint64_t seed, int threads) {
    if (settings.empty()) throw std::invalid_argument("need at least one setting");
    if (shots_per_setting < 1) throw std::invalid_argument("need at least one shot per setting");

    MeasurementDataset ds;
    ds.protocol = protocol;
    ds.n_qubits = state.n_qubits();
    ds.n_settings = static_cast<int>(settings.size());
    ds.shots_per_setting = shots_per_setting;
    ds.ensemble_id = settings.front().ensemble_id;
    ds.settings = std::move(settings);
    ds.state_label = state.label();
    ds.seed = seed;
    ds.shots.assign(static_cast<std::size_t>(ds.n_settings), {});

    const std::vector<bool> mask = conjugate_mask_for(protocol, ds.n_qubits);
    parallel_for(static_cast<std::size_t>(ds.n_settings), threads, [&](std::size_t t) {
        const LocalUnitarySetting& setting = ds.settings[t];
        QuantumState rotated = (setting.ensemble_id == EnsembleId::haar_party)
                                   ? apply_setting(state, setting)
                                   : apply_product_unitary(
                                         state, setting_qubit_matrices(setting, protocol, ds.n_qubits),
                                         mask);
        const std::vector<double> probs = outcome_distribution(rotated);
        ds.shots[t] = sample_outcomes(probs, shots_per_setting,
                                      substream(seed, kShotLane, static_cast<std::uint64_t>(t)));
    });
    ds.validate();
    return ds;
}

MeasurementDataset run_local_protocol(const QuantumState& state, int n_settings,
                                      int shots_per_setting, std::uint64_t seed, int threads) {
    if (n_settings < 1) throw std::invalid_argument("need at least one unitary setting");
    std::vector<LocalUnitarySetting> settings;
    settings.reserve(static_cast<std::size_t>(n_settings));
    for (int t = 0; t < n_settings; ++t) {
        settings.push_back(sample_setting(state.n_qubits(), EnsembleId::clifford1q,
                                          substream(seed, kSettingLane, static_cast<std::uint64_t>(t))));
    }
    return run_with_settings(state, Protocol::local_cro, std::move(settings), shots_per_setting,
                             seed, threads);
}

MeasurementDataset run_global_protocol(const QuantumState& state, const Partition& partition,
                                       int n_settings, int shots_per_setting, std::uint64_t seed,
                                       int threads) {
    if (n_settings < 1) throw std::invalid_argument("need at least one unitary setting");
    partition.validate(state.n_qubits());
    std::vector<LocalUnitarySetting> settings;
    settings.reserve(static_cast<std::size_t>(n_settings));
    for (int t = 0; t < n_settings; ++t) {
        settings.push_back(sample_party_setting(
            partition, substream(seed, kSettingLane, static_cast<std::uint64_t>(t))));
    }
    MeasurementDataset ds = run_with_settings(state, Protocol::global_cro, std::move(settings),
                                              shots_per_setting, seed, threads);
    ds.partition_hint = partition;
    return ds;
}

MeasurementDataset run_mes_fidelity_protocol(const QuantumState& state, int n_settings,
                                             int shots_per_setting, std::uint64_t seed,
                                             int threads) {
    if (state.n_qubits() % 2 != 0) {
        throw std::invalid_argument("mes fidelity protocol needs two equal halves (even qubit count)");
    }
    if (n_settings < 1) throw std::invalid_argument("need at least one unitary setting");
    std::vector<LocalUnitarySetting> settings;
    settings.reserve(static_cast<std::size_t>(n_settings));
    for (int t = 0; t < n_settings; ++t) {
        settings.push_back(sample_setting(state.n_qubits() / 2, EnsembleId::clifford1q,
                                          substream(seed, kSettingLane, static_cast<std::uint64_t>(t))));
    }
    return run_with_settings(state, Protocol::mes_fidelity, std::move(settings), shots_per_setting,
                             seed, threads);
}

MeasurementDataset run_concurrence_protocol(const QuantumState& state, int n_settings,
                                            int shots_per_setting, std::uint64_t seed, int threads) {
    if (!state.is_pure()) {
        throw std::invalid_argument("concurrence protocol is defined for pure states only");
    }
    if (n_settings < 1) throw std::invalid_argument("need at least one unitary setting");
    std::vector<LocalUnitarySetting> settings;
    settings.reserve(static_cast<std::size_t>(n_settings));
    for (int t = 0; t < n_settings; ++t) {
        settings.push_back(sample_setting(state.n_qubits(), EnsembleId::clifford1q,
                                          substream(seed, kSettingLane, static_cast<std::uint64_t>(t))));
    }
    return run_with_settings(state, Protocol::concurrence, std::move(settings), shots_per_setting,
                             seed, threads);
}

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::int64_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::int64_t c = 0; c < m.cols(); ++c) {
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows) {
    const std::int64_t nr = static_cast<std::int64_t>(rows.size());
    const std::int64_t nc = nr > 0 ? static_cast<std::int64_t>(rows[0].size()) : 0;
    Matrix m(nr, nc);
    for (std::int64_t r = 0; r < nr; ++r) {
        for (std::int64_t c = 0; c < nc; ++c) {
            const auto& cell = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            m(r, c) = Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

json setting_to_json(const LocalUnitarySetting& setting) {
    json j;
    switch (setting.ensemble_id) {
        case EnsembleId::clifford1q:
            j["clifford"] = setting.clifford_indices;
            break;
        case EnsembleId::haar1q: {
            json mats = json::array();
            for (const auto& u : setting.qubit_unitaries) mats.push_back(matrix_to_json(u));
            j["qubit_unitaries"] = std::move(mats);
            break;
        }
        case EnsembleId::haar_party: {
            json mats = json::array();
            for (const auto& u : setting.party_unitaries) mats.push_back(matrix_to_json(u));
            j["party_unitaries"] = std::move(mats);
            j["party_qubits"] = setting.party_qubits;
            break;
        }
    }
    return j;
}

LocalUnitarySetting setting_from_json(const json& j) {
    LocalUnitarySetting setting;
    if (j.contains("clifford")) {
        setting.ensemble_id = EnsembleId::clifford1q;
        setting.clifford_indices = j.at("clifford").get<std::vector<int>>();
    } else if (j.contains("qubit_unitaries")) {
        setting.ensemble_id = EnsembleId::haar1q;
        for (const auto& m : j.at("qubit_unitaries")) {
            setting.qubit_unitaries.push_back(Matrix2(matrix_from_json(m)));
        }
    } else if (j.contains("party_unitaries")) {
        setting.ensemble_id = EnsembleId::haar_party;
        for (const auto& m : j.at("party_unitaries")) {
            setting.party_unitaries.push_back(matrix_from_json(m));
        }
        setting.party_qubits = j.at("party_qubits").get<std::vector<std::vector<int>>>();
    } else {
        throw std::invalid_argument("unrecognized setting line in dataset");
    }
    return setting;
}

std::string shot_to_string(std::uint64_t shot, int n_qubits) {
    std::string s(static_cast<std::size_t>(n_qubits), '0');
    for (int q = 0; q < n_qubits; ++q) {
        if (bit_of(shot, q, n_qubits)) s[static_cast<std::size_t>(q)] = '1';
    }
    return s;
}

std::uint64_t shot_from_string(const std::string& s, int n_qubits) {
    if (static_cast<int>(s.size()) != n_qubits) {
        throw std::invalid_argument("shot string has wrong width");
    }
    std::uint64_t shot = 0;
    for (int q = 0; q < n_qubits; ++q) {
        const char c = s[static_cast<std::size_t>(q)];
        if (c != '0' && c != '1') throw std::invalid_argument("shot string has non-binary character");
        if (c == '1') shot |= std::uint64_t{1} << (n_qubits - 1 - q);
    }
    return shot;
}

}  // namespace

void write_dataset(const MeasurementDataset& dataset, std::ostream& out) {
    dataset.validate();
    json header;
    header["format"] = "cro-dataset-v1";
    header["protocol"] = to_string(dataset.protocol);
    header["n_qubits"] = dataset.n_qubits;
    header["n_settings"] = dataset.n_settings;
    header["shots_per_setting"] = dataset.shots_per_setting;
    header["ensemble"] = to_string(dataset.ensemble_id);
    header["seed"] = dataset.seed;
    header["state_label"] = dataset.state_label;
    if (dataset.partition_hint) header["partition"] = dataset.partition_hint->groups;
    out << header.dump() << '\n';
    for (int t = 0; t < dataset.n_settings; ++t) {
        out << setting_to_json(dataset.settings[static_cast<std::size_t>(t)]).dump() << '\n';
        const auto& list = dataset.shots[static_cast<std::size_t>(t)];
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i) out << ' ';
            out << shot_to_string(list[i], dataset.n_qubits);
        }
        out << '\n';
    }
}

MeasurementDataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty dataset stream");
    const json header = json::parse(line);
    if (header.value("format", "") != "cro-dataset-v1") {
        throw std::invalid_argument("not a cro dataset (bad format tag)");
    }
    MeasurementDataset ds;
    ds.protocol = protocol_from_string(header.at("protocol").get<std::string>());
    ds.n_qubits = header.at("n_qubits").get<int>();
    ds.n_settings = header.at("n_settings").get<int>();
    ds.shots_per_setting = header.at("shots_per_setting").get<int>();
    ds.ensemble_id = ensemble_from_string(header.at("ensemble").get<std::string>());
    ds.seed = header.at("seed").get<std::uint64_t>();
    ds.state_label = header.value("state_label", "");
    if (header.contains("partition")) {
        ds.partition_hint = Partition(header.at("partition").get<std::vector<std::vector<int>>>());
    }
    ds.settings.reserve(static_cast<std::size_t>(ds.n_settings));
    ds.shots.reserve(static_cast<std::size_t>(ds.n_settings));
    for (int t = 0; t < ds.n_settings; ++t) {
        if (!std::getline(in, line)) throw std::invalid_argument("dataset truncated (setting line)");
        ds.settings.push_back(setting_from_json(json::parse(line)));
        if (!std::getline(in, line)) throw std::invalid_argument("dataset truncated (shot line)");
        std::istringstream shot_stream(line);
        std::vector<std::uint64_t> list;
        list.reserve(static_cast<std::size_t>(ds.shots_per_setting));
        std::string token;
        while (shot_stream >> token) list.push_back(shot_from_string(token, ds.n_qubits));
        ds.shots.push_back(std::move(list));
    }
    ds.validate();
    return ds;
}

void save_dataset(const MeasurementDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_dataset(dataset, out);
}

MeasurementDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_dataset(in);
}

}  // namespace cro
