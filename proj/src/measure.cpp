#include "qphoton/measure.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qphoton/parallel.hpp"

namespace qphoton {

CorrelationTensor correlation_tensor(const DensityMatrix& rho) {
    if (rho.dims() != Dims{2, 2}) throw std::invalid_argument("correlation tensor needs a two-qubit state");
    const Matrix paulis[3] = {pauli_x(), pauli_y(), pauli_z()};
    const Matrix id = identity(2);
    CorrelationTensor ct;
    for (int i = 0; i < 3; ++i) {
        ct.alice(i) = (rho.mat() * kron(paulis[i], id)).trace().real();
        ct.bob(i) = (rho.mat() * kron(id, paulis[i])).trace().real();
        for (int j = 0; j < 3; ++j) ct.t(i, j) = (rho.mat() * kron(paulis[i], paulis[j])).trace().real();
    }
    return ct;
}

double correlation(const DensityMatrix& rho, const BlochVector& a, const BlochVector& b) {
    if (rho.dims() != Dims{2, 2}) throw std::invalid_argument("correlation needs a two-qubit state");
    return (rho.mat() * kron(spin_observable(a), spin_observable(b))).trace().real();
}

double correlation(const DensityMatrix& rho, std::span<const BlochVector> settings) {
    const ProbabilityTable table = born_probabilities(rho, settings);
    double e = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto pattern = table.outcome_at(i).pattern;
        int minus = 0;
        for (int r : pattern) minus += r;
        e += (minus % 2 == 0 ? 1.0 : -1.0) * table[i];
    }
    return e;
}

DetectorModel::DetectorModel(double eta_, double p_dark_, int n_det_) : eta(eta_), p_dark(p_dark_), n_det(n_det_) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("detector efficiency must lie in [0, 1]");
    if (!(p_dark >= 0.0 && p_dark <= 1.0)) throw std::invalid_argument("dark-count probability must lie in [0, 1]");
    if (n_det < 1) throw std::invalid_argument("need at least one detector per station");
}

int ClickPattern::click_count(std::size_t station) const {
    int n = 0;
    for (bool c : clicks.at(station)) n += c ? 1 : 0;
    return n;
}

int ClickPattern::single_click(std::size_t station) const {
    int found = -1;
    const auto& s = clicks.at(station);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!s[k]) continue;
        if (found >= 0) return -1;
        found = static_cast<int>(k);
    }
    return found;
}

bool ClickPattern::coincidence() const {
    for (std::size_t s = 0; s < clicks.size(); ++s)
        if (single_click(s) < 0) return false;
    return true;
}

std::vector<bool> detect_station(int true_result, const DetectorModel& detector, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<bool> clicks(static_cast<std::size_t>(detector.n_det), false);
    if (true_result >= 0 && true_result < detector.n_det && u(rng) < detector.eta)
        clicks[static_cast<std::size_t>(true_result)] = true;
    if (detector.p_dark > 0.0) {
        for (std::size_t k = 0; k < clicks.size(); ++k)
            if (u(rng) < detector.p_dark) clicks[k] = true;
    }
    return clicks;
}

ClickPattern detect(const Outcome& true_outcome, const DetectorModel& detector, Rng& rng) {
    ClickPattern pattern;
    pattern.clicks.reserve(true_outcome.pattern.size());
    for (int r : true_outcome.pattern) pattern.clicks.push_back(detect_station(r, detector, rng));
    return pattern;
}

// ---------------------------------------------------------------------------
// CountTable

void CountTable::add(int setting_id, const std::vector<int>& pattern, std::uint64_t n) {
    counts_[{setting_id, pattern}] += n;
}

std::uint64_t CountTable::count(int setting_id, const std::vector<int>& pattern) const {
    auto it = counts_.find({setting_id, pattern});
    return it == counts_.end() ? 0 : it->second;
}

std::uint64_t CountTable::setting_total(int setting_id) const {
    std::uint64_t total = 0;
    for (const auto& [key, n] : counts_)
        if (key.first == setting_id) total += n;
    return total;
}

std::uint64_t CountTable::total_counts() const {
    std::uint64_t total = 0;
    for (const auto& [key, n] : counts_) total += n;
    return total;
}

std::vector<int> CountTable::setting_ids() const {
    std::vector<int> ids;
    for (const auto& [key, n] : counts_)
        if (ids.empty() || ids.back() != key.first) ids.push_back(key.first);
    return ids;
}

void CountTable::merge(const CountTable& other) {
    for (const auto& [key, n] : other.counts_) counts_[key] += n;
    total_gates_ += other.total_gates_;
}

std::string pattern_to_string(const std::vector<int>& pattern) {
    std::string s;
    for (int d : pattern) {
        if (d < 0 || d > 9) throw std::invalid_argument("outcome digit out of range for text export");
        s.push_back(static_cast<char>('0' + d));
    }
    return s;
}

std::vector<int> pattern_from_string(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty outcome pattern");
    std::vector<int> out;
    for (char c : text) {
        if (c < '0' || c > '9') throw std::invalid_argument("malformed outcome pattern: " + text);
        out.push_back(c - '0');
    }
    return out;
}

void CountTable::write_csv(std::ostream& out) const {
    out << "# total_gates=" << total_gates_ << '\n';
    out << "setting_id,outcome,count\n";
    for (const auto& [key, n] : counts_) out << key.first << ',' << pattern_to_string(key.second) << ',' << n << '\n';
}

CountTable CountTable::read_csv(std::istream& in) {
    CountTable table;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# total_gates=", 0) == 0) {
            table.total_gates_ = std::stoull(line.substr(14));
            continue;
        }
        if (line[0] == '#') continue;
        if (!header_seen) {
            if (line != "setting_id,outcome,count") throw std::invalid_argument("count table: unexpected header");
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string id, outcome, count;
        if (!std::getline(row, id, ',') || !std::getline(row, outcome, ',') || !std::getline(row, count))
            throw std::invalid_argument("count table: malformed row: " + line);
        try {
            table.add(std::stoi(id), pattern_from_string(outcome), std::stoull(count));
        } catch (const std::logic_error&) {
            throw std::invalid_argument("count table: malformed row: " + line);
        }
    }
    if (!header_seen) throw std::invalid_argument("count table: missing header");
    return table;
}

// ---------------------------------------------------------------------------
// Estimation

CorrelationEstimate correlation_from_counts(const CountTable& counts, int setting_id) {
    CorrelationEstimate est;
    const double same = static_cast<double>(counts.count(setting_id, {0, 0}) + counts.count(setting_id, {1, 1}));
    const double diff = static_cast<double>(counts.count(setting_id, {0, 1}) + counts.count(setting_id, {1, 0}));
    const double n = same + diff;
    est.coincidences = static_cast<std::uint64_t>(n);
    est.counts = counts;
    if (n > 0) {
        est.e_hat = (same - diff) / n;
        est.std_error = std::sqrt(std::max(0.0, 1.0 - est.e_hat * est.e_hat) / n);
    }
    return est;
}

namespace {
CountTable simulate_coincidences(const OutcomeSampler& proto, std::uint64_t shots,
                                 const DetectorModel& detector, Rng& rng) {
    OutcomeSampler sampler = proto;
    CountTable table;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const ClickPattern clicks = detect(sampler(rng), detector, rng);
        const int a = clicks.single_click(0);
        const int b = clicks.single_click(1);
        if (a >= 0 && b >= 0) table.add(0, {a, b});
    }
    table.add_gates(shots);
    return table;
}
}  // namespace

CorrelationEstimate estimate_correlation(const DensityMatrix& rho, const BlochVector& a, const BlochVector& b,
                                         std::uint64_t shots, const DetectorModel& detector, Rng& rng) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    const BlochVector settings[2] = {a, b};
    const OutcomeSampler sampler(born_probabilities(rho, settings));
    return correlation_from_counts(simulate_coincidences(sampler, shots, detector, rng), 0);
}

CorrelationEstimate estimate_correlation(const DensityMatrix& rho, const BlochVector& a, const BlochVector& b,
                                         std::uint64_t shots, const DetectorModel& detector, std::uint64_t seed,
                                         int workers) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    const BlochVector settings[2] = {a, b};
    const OutcomeSampler sampler(born_probabilities(rho, settings));
    auto parts = run_sharded(shots, workers, seed, [&](const Shard& shard, Rng& rng) {
        return simulate_coincidences(sampler, shard.size(), detector, rng);
    });
    CountTable merged;
    for (const auto& p : parts) merged.merge(p);
    return correlation_from_counts(merged, 0);
}

}  // namespace qphoton
