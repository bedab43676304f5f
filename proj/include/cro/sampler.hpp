#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cro/ensembles.hpp"
#include "cro/qcore.hpp"

namespace cro {

enum class Protocol { local_cro, global_cro, mes_fidelity, concurrence };

Protocol protocol_from_string(const std::string& name);
std::string to_string(Protocol protocol);

// N_U unitary settings x N_M computational-basis shots, plus the metadata
// needed to postprocess them later. Shots are basis indices in the shared
// qubit-0-most-significant convention.
struct MeasurementDataset {
    Protocol protocol = Protocol::local_cro;
    int n_qubits = 0;
    int n_settings = 0;        // N_U
    int shots_per_setting = 0; // N_M
    EnsembleId ensemble_id = EnsembleId::clifford1q;
    std::vector<LocalUnitarySetting> settings;
    std::vector<std::vector<std::uint64_t>> shots;
    std::string state_label;
    std::uint64_t seed = 0;
    std::optional<Partition> partition_hint;  // global protocol only

    void validate() const;
};

// Algorithm "local measurement": per-qubit Clifford settings, shots from
// the rotated state. No partition is consumed; postprocessing picks it.
MeasurementDataset run_local_protocol(const QuantumState& state, int n_settings,
                                      int shots_per_setting, std::uint64_t seed,
                                      int threads = 1);

// Algorithm "global measurement": independent Haar unitaries per party.
MeasurementDataset run_global_protocol(const QuantumState& state, const Partition& partition,
                                       int n_settings, int shots_per_setting, std::uint64_t seed,
                                       int threads = 1);

// Algorithm "fidelity with local measurement": the state has two equal
// halves; each setting applies U on the first half and the entrywise
// conjugate U* on the second.
MeasurementDataset run_mes_fidelity_protocol(const QuantumState& state, int n_settings,
                                             int shots_per_setting, std::uint64_t seed,
                                             int threads = 1);

// Concurrence protocol: local mechanics, pure states only.
MeasurementDataset run_concurrence_protocol(const QuantumState& state, int n_settings,
                                            int shots_per_setting, std::uint64_t seed,
                                            int threads = 1);

// Shared engine: measures the state under caller-supplied settings. Used by
// all protocols after settings are sampled, and directly by tests that need
// fixed settings.
MeasurementDataset run_with_settings(const QuantumState& state, Protocol protocol,
                                     std::vector<LocalUnitarySetting> settings,
                                     int shots_per_setting, std::uint64_t seed, int threads = 1);

// Conjugate mask for a protocol (mes_fidelity conjugates the second half).
std::vector<bool> conjugate_mask_for(Protocol protocol, int n_qubits);

// Expands a stored setting to one 2x2 matrix per qubit (mes_fidelity
// settings store n/2 unitaries that act on both halves).
std::vector<Matrix2> setting_qubit_matrices(const LocalUnitarySetting& setting, Protocol protocol,
                                            int n_qubits);

// Line-delimited dataset format: a JSON header line, then per setting one
// JSON setting line and one line of fixed-width 0/1 shot strings
// (qubit 0 = leftmost character). Round-trips bit-exactly.
void save_dataset(const MeasurementDataset& dataset, const std::string& path);
MeasurementDataset load_dataset(const std::string& path);
void write_dataset(const MeasurementDataset& dataset, std::ostream& out);
MeasurementDataset read_dataset(std::istream& in);

}  // namespace cro
