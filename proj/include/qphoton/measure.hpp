// measure.hpp
// Correlation coefficients, an imperfect-detector model and coincidence
// counting.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qphoton/qcore.hpp"

namespace qphoton {

struct AnalyzerSetting {
    std::vector<BlochVector> directions;  // one per qubit
};

// Local Bloch vectors and correlation tensor T_ij = tr(rho sigma_i x sigma_j)
// of a two-qubit state. Every spin correlation follows from these.
struct CorrelationTensor {
    Eigen::Vector3d alice = Eigen::Vector3d::Zero();
    Eigen::Vector3d bob = Eigen::Vector3d::Zero();
    Eigen::Matrix3d t = Eigen::Matrix3d::Zero();

    double correlation(const BlochVector& a, const BlochVector& b) const {
        return a.vec().dot(t * b.vec());
    }
};

CorrelationTensor correlation_tensor(const DensityMatrix& rho);

// E(a,b) = tr(rho (a.sigma x b.sigma)) for a two-qubit state.
double correlation(const DensityMatrix& rho, const BlochVector& a, const BlochVector& b);

// Product of +-1 outcomes averaged over the Born distribution, for any
// number of qubits.
double correlation(const DensityMatrix& rho, std::span<const BlochVector> settings);

struct DetectorModel {
    double eta = 1.0;     // quantum efficiency
    double p_dark = 0.0;  // dark-count probability per detector per gate
    int n_det = 2;        // detectors per station

    DetectorModel() = default;
    DetectorModel(double eta, double p_dark, int n_det = 2);

    static DetectorModel ideal() { return {}; }
};

// clicks[station][detector]
struct ClickPattern {
    std::vector<std::vector<bool>> clicks;

    int click_count(std::size_t station) const;
    // Index of the single firing detector at a station, or -1 when zero or
    // several detectors fired.
    int single_click(std::size_t station) const;
    bool coincidence() const;
};

// Each station's true result k lights detector k with probability eta (if
// k < n_det); every detector independently dark-fires with p_dark.
ClickPattern detect(const Outcome& true_outcome, const DetectorModel& detector, Rng& rng);
std::vector<bool> detect_station(int true_result, const DetectorModel& detector, Rng& rng);

// Coincidence counts keyed by (setting id, outcome pattern).
class CountTable {
public:
    using Key = std::pair<int, std::vector<int>>;

    void add(int setting_id, const std::vector<int>& pattern, std::uint64_t n = 1);
    std::uint64_t count(int setting_id, const std::vector<int>& pattern) const;
    // Sum of counts recorded for one setting.
    std::uint64_t setting_total(int setting_id) const;
    std::uint64_t total_counts() const;
    std::vector<int> setting_ids() const;

    std::uint64_t total_gates() const { return total_gates_; }
    void add_gates(std::uint64_t n) { total_gates_ += n; }
    void set_total_gates(std::uint64_t n) { total_gates_ = n; }

    const std::map<Key, std::uint64_t>& entries() const { return counts_; }
    void merge(const CountTable& other);

    // Delimited text: header "setting_id,outcome,count", outcome written as a
    // digit string ("01"). A leading "# total_gates=N" comment line carries
    // the gate count.
    void write_csv(std::ostream& out) const;
    static CountTable read_csv(std::istream& in);

    bool operator==(const CountTable&) const = default;

private:
    std::map<Key, std::uint64_t> counts_;
    std::uint64_t total_gates_ = 0;
};

std::string pattern_to_string(const std::vector<int>& pattern);
std::vector<int> pattern_from_string(const std::string& text);

struct CorrelationEstimate {
    double e_hat = 0.0;
    double std_error = 0.0;
    std::uint64_t coincidences = 0;
    CountTable counts;
};

// Coincidence-based (fair-sampling) estimate of E(a,b): gates with exactly
// one click per station are kept. Outcome patterns are the clicked detector
// indices, detector 0 standing for +1 and detector 1 for -1.
CorrelationEstimate estimate_correlation(const DensityMatrix& rho, const BlochVector& a,
                                         const BlochVector& b, std::uint64_t shots,
                                         const DetectorModel& detector, Rng& rng);

// Sharded variant: bit-identical for a fixed (seed, workers) pair.
CorrelationEstimate estimate_correlation(const DensityMatrix& rho, const BlochVector& a,
                                         const BlochVector& b, std::uint64_t shots,
                                         const DetectorModel& detector, std::uint64_t seed,
                                         int workers);

// E_hat and its standard error sqrt((1-E^2)/N) from the four two-detector
// coincidence counts of one setting.
CorrelationEstimate correlation_from_counts(const CountTable& counts, int setting_id);

}  // namespace qphoton
