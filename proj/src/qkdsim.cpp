#include "qphoton/qkdsim.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qphoton/belltest.hpp"
#include "qphoton/measure.hpp"
#include "qphoton/parallel.hpp"

namespace qphoton {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

double mismatch(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    if (a.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < a.size(); ++i) wrong += a[i] != b[i] ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(a.size());
}

// Per-worker tallies, merged in worker order.
struct Tally {
    std::vector<std::uint8_t> alice;
    std::vector<std::uint8_t> bob;
    std::uint64_t gates = 0;
    std::uint64_t detections = 0;
    std::uint64_t multi = 0;
    CountTable bell;
    // secret sharing: raw bits of the single parties on sifted rounds
    std::vector<std::uint8_t> b_raw;
    std::vector<std::uint8_t> c_raw;
};

Tally merge(const std::vector<Tally>& parts) {
    Tally all;
    for (const auto& t : parts) {
        all.alice.insert(all.alice.end(), t.alice.begin(), t.alice.end());
        all.bob.insert(all.bob.end(), t.bob.begin(), t.bob.end());
        all.b_raw.insert(all.b_raw.end(), t.b_raw.begin(), t.b_raw.end());
        all.c_raw.insert(all.c_raw.end(), t.c_raw.begin(), t.c_raw.end());
        all.gates += t.gates;
        all.detections += t.detections;
        all.multi += t.multi;
        all.bell.merge(t.bell);
    }
    return all;
}

void fill(KeyExchangeRecord& r, Tally&& t) {
    r.alice_key = std::move(t.alice);
    r.bob_key = std::move(t.bob);
    r.qber = mismatch(r.alice_key, r.bob_key);
    r.gates = t.gates;
    r.detections = t.detections;
    r.multi_clicks = t.multi;
}

std::string eve_label(const char* attack, double fraction) {
    if (fraction <= 0.0) return "none";
    std::ostringstream os;
    os << attack << " fraction=" << fraction;
    return os.str();
}

// Photon prepared in basis (0 = z, 1 = x) with a bit value.
struct Photon {
    int basis;
    int bit;
};

// Bob's receiver: 2 detectors per basis, n_det = 4 with a passive 50/50
// basis split, n_det = 2 with a random active basis choice per gate.
// Reports the click count and, for a single click, its (basis, bit).
struct BobResult {
    int clicks = 0;
    int basis = -1;
    int bit = -1;
};

BobResult bob_receive(const std::vector<Photon>& photons, double t_eta, double p_dark, int n_det, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const bool passive = n_det >= 4;
    const int active_basis = passive ? -1 : (coin(rng) ? 1 : 0);
    std::array<bool, 4> fired{};  // index 2 * basis + bit
    for (const Photon& ph : photons) {
        if (u(rng) >= t_eta) continue;
        const int arm = passive ? (coin(rng) ? 1 : 0) : active_basis;
        const int bit = arm == ph.basis ? ph.bit : (coin(rng) ? 1 : 0);
        fired[static_cast<std::size_t>(2 * arm + bit)] = true;
    }
    if (p_dark > 0.0) {
        for (int d = 0; d < 4; ++d) {
            if (!passive && d / 2 != active_basis) continue;
            if (u(rng) < p_dark) fired[static_cast<std::size_t>(d)] = true;
        }
    }
    BobResult r;
    for (int d = 0; d < 4; ++d)
        if (fired[static_cast<std::size_t>(d)]) {
            ++r.clicks;
            r.basis = d / 2;
            r.bit = d % 2;
        }
    if (r.clicks != 1) r.basis = r.bit = -1;
    return r;
}

// Intercept-resend: Eve measures in a random basis and sends one photon in
// her result state. Vacuum passes untouched.
void intercept_resend(std::vector<Photon>& photons, Rng& rng) {
    if (photons.empty()) return;
    std::bernoulli_distribution coin(0.5);
    const Photon& first = photons.front();
    const int eb = coin(rng) ? 1 : 0;
    const int bit = eb == first.basis ? first.bit : (coin(rng) ? 1 : 0);
    photons.assign(1, Photon{eb, bit});
}

}  // namespace

void LinkParams::validate() const {
    require(nonneg(f_rep) && nonneg(mu) && nonneg(alpha_db_per_km) && nonneg(length_km) && nonneg(eta) &&
                nonneg(p_dark) && nonneg(extra_loss_db),
            "link parameters must be finite and nonnegative");
    require(eta <= 1.0, "eta must not exceed 1");
    require(p_dark <= 1.0, "p_dark must not exceed 1");
    require(n_det >= 1, "n_det must be at least 1");
}

std::vector<std::string> link_warnings(const LinkParams& p) {
    std::vector<std::string> out;
    if (p.mu > 1.0) out.push_back("mu > 1: multi-photon pulses dominate");
    const double p_multi = 1.0 - std::exp(-p.mu) * (1.0 + p.mu);
    const double p_bob = 1.0 - std::exp(-p.mu * transmittance(p) * p.eta);
    if (p.mu > 0.0 && p_multi >= p_bob)
        out.push_back("multi-photon probability exceeds Bob's detection probability: photon-number splitting "
                      "attacks are not covered by the rate model");
    return out;
}

double transmittance(const LinkParams& p) {
    p.validate();
    return std::pow(10.0, -(p.alpha_db_per_km * p.length_km + p.extra_loss_db) / 10.0);
}

double sifted_rate(const LinkParams& p) { return 0.5 * p.f_rep * p.mu * transmittance(p) * p.eta; }

double qber_model(const LinkParams& p) {
    const double denom = 2.0 * transmittance(p) * p.eta * p.mu;
    if (!(denom > 0.0)) throw std::domain_error("QBER undefined: t_link * eta * mu is zero");
    return std::min(0.5, p.n_det * p.p_dark / denom);
}

double binary_entropy(double p) {
    require(p >= 0.0 && p <= 1.0, "binary_entropy needs p in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double eve_information(double d) {
    require(d >= 0.0 && d <= 0.5, "disturbance must lie in [0, 1/2]");
    return 1.0 - binary_entropy(std::min(1.0, 0.5 + std::sqrt(d * (1.0 - d))));
}

double secret_rate(const LinkParams& p) {
    const double q = qber_model(p);
    if (q >= kCrossingQber) return 0.0;
    return sifted_rate(p) * std::max(0.0, 1.0 - binary_entropy(q) - eve_information(q));
}

RatePoint rate_point(const LinkParams& p) {
    return {p.length_km, transmittance(p), qber_model(p), sifted_rate(p), secret_rate(p)};
}

std::vector<RatePoint> rate_curve(LinkParams p, double start_km, double stop_km, double step_km) {
    require(step_km > 0.0 && std::isfinite(step_km), "step must be positive");
    require(nonneg(start_km) && std::isfinite(stop_km) && stop_km >= start_km, "invalid length range");
    std::vector<RatePoint> out;
    for (std::uint64_t i = 0;; ++i) {
        const double l = start_km + static_cast<double>(i) * step_km;
        if (l > stop_km + 1e-9) break;
        p.length_km = l;
        out.push_back(rate_point(p));
    }
    return out;
}

void write_rate_curve_csv(std::ostream& out, const std::vector<RatePoint>& curve) {
    out << "length_km,t_link,qber,sifted_hz,secret_hz\n";
    std::ostringstream line;
    line.imbue(std::locale::classic());
    line << std::setprecision(10);
    for (const auto& r : curve) line << r.length_km << ',' << r.t_link << ',' << r.qber << ',' << r.r_sifted << ','
                                     << r.r_secret << '\n';
    out << line.str();
}

double max_distance(const LinkParams& p, double threshold) {
    require(threshold > 0.0 && threshold <= 0.5, "threshold must lie in (0, 1/2]");
    p.validate();
    if (!(p.p_dark > 0.0) || !(p.alpha_db_per_km > 0.0))
        throw std::domain_error("QBER never reaches the threshold");
    if (!(p.eta * p.mu > 0.0)) throw std::domain_error("QBER undefined: eta * mu is zero");
    // n p_dark / (2 t eta mu) = threshold
    const double t = p.n_det * p.p_dark / (2.0 * p.eta * p.mu * threshold);
    const double loss_db = -10.0 * std::log10(t) - p.extra_loss_db;
    if (!(loss_db >= 0.0)) throw std::domain_error("QBER is above the threshold already at zero length");
    return loss_db / p.alpha_db_per_km;
}

std::string_view to_string(QkdSource s) {
    switch (s) {
        case QkdSource::Faint: return "faint";
        case QkdSource::PairTriggered: return "pair-triggered";
        case QkdSource::Entangled: return "entangled";
    }
    return "?";
}

QkdSource qkd_source_from_string(std::string_view s) {
    for (QkdSource k : {QkdSource::Faint, QkdSource::PairTriggered, QkdSource::Entangled})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown QKD source: " + std::string(s));
}

std::string pack_hex(const std::vector<std::uint8_t>& bits) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    for (std::size_t i = 0; i < bits.size(); i += 8) {
        unsigned byte = 0;
        for (std::size_t k = 0; k < 8; ++k) byte = (byte << 1) | (i + k < bits.size() && bits[i + k] ? 1u : 0u);
        out += digits[byte >> 4];
        out += digits[byte & 15u];
    }
    return out;
}

std::vector<std::uint8_t> unpack_hex(const std::string& hex, std::size_t n_bits) {
    require(hex.size() == 2 * ((n_bits + 7) / 8), "hex length does not match the bit count");
    std::vector<std::uint8_t> bits;
    bits.reserve(n_bits);
    for (std::size_t i = 0; i < hex.size() && bits.size() < n_bits; i += 2) {
        const unsigned byte = static_cast<unsigned>(std::stoul(hex.substr(i, 2), nullptr, 16));
        for (int k = 7; k >= 0 && bits.size() < n_bits; --k) bits.push_back(static_cast<std::uint8_t>((byte >> k) & 1u));
    }
    return bits;
}

std::string to_json(const KeyExchangeRecord& r) {
    nlohmann::ordered_json j;
    j["protocol"] = r.protocol;
    j["eavesdropper"] = r.eavesdropper;
    j["seed"] = r.seed;
    j["workers"] = r.workers;
    j["pulses"] = r.pulses;
    j["params"] = {{"f_rep", r.params.f_rep},
                   {"mu", r.params.mu},
                   {"alpha_db_per_km", r.params.alpha_db_per_km},
                   {"length_km", r.params.length_km},
                   {"eta", r.params.eta},
                   {"p_dark", r.params.p_dark},
                   {"n_det", r.params.n_det},
                   {"extra_loss_db", r.params.extra_loss_db}};
    j["gates"] = r.gates;
    j["detections"] = r.detections;
    j["multi_clicks"] = r.multi_clicks;
    j["sifted_bits"] = r.sifted();
    j["qber"] = r.qber;
    if (r.s) j["chsh_s"] = *r.s;
    if (r.s_std_error) j["chsh_s_std_error"] = *r.s_std_error;
    if (r.bob_alone_correlation) j["bob_alone_correlation"] = *r.bob_alone_correlation;
    if (r.charlie_alone_correlation) j["charlie_alone_correlation"] = *r.charlie_alone_correlation;
    j["alice_key_hex"] = pack_hex(r.alice_key);
    j["bob_key_hex"] = pack_hex(r.bob_key);
    return j.dump(2) + "\n";
}

KeyExchangeRecord bb84_montecarlo(const LinkParams& p, std::uint64_t pulses, const Bb84Options& opt,
                                  std::uint64_t seed, int workers) {
    require(pulses >= 1, "pulses must be at least 1");
    require(opt.eve_fraction >= 0.0 && opt.eve_fraction <= 1.0, "eve_fraction must lie in [0, 1]");
    p.validate();
    const double t_eta = transmittance(p) * p.eta;
    const SourceModel source(p.mu, 1.0, opt.statistics);

    auto parts = run_sharded(pulses, workers, seed, [&](const Shard& shard, Rng& rng) {
        Tally t;
        std::bernoulli_distribution coin(0.5), eve(opt.eve_fraction);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<Photon> photons;
        for (std::uint64_t i = 0; i < shard.size(); ++i) {
            const int basis = coin(rng) ? 1 : 0;
            int bit = coin(rng) ? 1 : 0;
            const std::uint64_t k = pair_count(source, rng);
            photons.clear();
            if (opt.source == QkdSource::Faint) {
                photons.assign(k, Photon{basis, bit});
            } else if (opt.source == QkdSource::PairTriggered) {
                // Trigger photons hit Alice's detector; no trigger, no gate.
                bool trigger = false;
                for (std::uint64_t j = 0; j < k; ++j) trigger |= u(rng) < p.eta;
                trigger |= u(rng) < p.p_dark;
                if (!trigger) continue;
                photons.assign(k, Photon{basis, bit});
            } else {
                // Alice's analyzer projects each of her photons; the singlet
                // partner leaves in the opposite state of the same basis.
                int clicks = 0, alice_bit = -1;
                std::array<bool, 2> fired{};
                for (std::uint64_t j = 0; j < k; ++j) {
                    const int r = coin(rng) ? 1 : 0;
                    photons.push_back(Photon{basis, 1 - r});
                    if (u(rng) < p.eta) fired[static_cast<std::size_t>(r)] = true;
                }
                for (int d = 0; d < 2; ++d)
                    if (u(rng) < p.p_dark) fired[static_cast<std::size_t>(d)] = true;
                for (int d = 0; d < 2; ++d)
                    if (fired[static_cast<std::size_t>(d)]) {
                        ++clicks;
                        alice_bit = d;
                    }
                if (clicks != 1) continue;
                bit = alice_bit;
            }
            if (opt.eve_fraction > 0.0 && eve(rng)) intercept_resend(photons, rng);
            ++t.gates;
            const BobResult b = bob_receive(photons, t_eta, p.p_dark, p.n_det, rng);
            if (b.clicks > 1) ++t.multi;
            if (b.clicks != 1) continue;
            ++t.detections;
            if (b.basis != basis) continue;
            t.alice.push_back(static_cast<std::uint8_t>(bit));
            // singlet partners arrive anticorrelated
            const int bob_bit = opt.source == QkdSource::Entangled ? 1 - b.bit : b.bit;
            t.bob.push_back(static_cast<std::uint8_t>(bob_bit));
        }
        return t;
    });

    KeyExchangeRecord r;
    r.protocol = "bb84-" + std::string(to_string(opt.source));
    r.eavesdropper = eve_label("intercept-resend", opt.eve_fraction);
    r.params = p;
    r.seed = seed;
    r.workers = workers;
    r.pulses = pulses;
    fill(r, merge(parts));
    return r;
}

KeyExchangeRecord ekert_montecarlo(const LinkParams& p, std::uint64_t pulses, double eve_fraction,
                                   std::uint64_t seed, int workers, double visibility) {
    require(pulses >= 1, "pulses must be at least 1");
    require(eve_fraction >= 0.0 && eve_fraction <= 1.0, "eve_fraction must lie in [0, 1]");
    p.validate();
    constexpr double kPi = std::numbers::pi;
    const std::array<BlochVector, 3> alice{BlochVector::in_xz_plane(0.0), BlochVector::in_xz_plane(kPi / 4),
                                           BlochVector::in_xz_plane(kPi / 2)};
    const std::array<BlochVector, 3> bob{BlochVector::in_xz_plane(kPi / 4), BlochVector::in_xz_plane(kPi / 2),
                                         BlochVector::in_xz_plane(3 * kPi / 4)};
    const DensityMatrix pair = noisy_bell(BellKind::PsiMinus, visibility);
    // Eve measures Bob's photon in z or x at random and resends the result.
    Matrix attacked = Matrix::Zero(4, 4);
    for (const BlochVector& e : {kPlusZ, kPlusX})
        for (int s : {1, -1}) {
            const Matrix proj = kron(identity(2), projector_from_bloch(e, s));
            attacked += 0.5 * proj * pair.mat() * proj;
        }
    const DensityMatrix eve_pair = DensityMatrix::normalized({2, 2}, attacked);

    std::vector<OutcomeSampler> honest, intercepted;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const BlochVector s[2] = {alice[static_cast<std::size_t>(i)], bob[static_cast<std::size_t>(j)]};
            honest.emplace_back(born_probabilities(pair, s));
            intercepted.emplace_back(born_probabilities(eve_pair, s));
        }
    const DetectorModel det_a(p.eta, p.p_dark, 2);
    const DetectorModel det_b(p.eta * transmittance(p), p.p_dark, 2);
    const SourceModel source(p.mu, 1.0);

    auto parts = run_sharded(pulses, workers, seed, [&](const Shard& shard, Rng& rng) {
        Tally t;
        std::uniform_int_distribution<int> pick(0, 2);
        std::bernoulli_distribution eve(eve_fraction);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<OutcomeSampler> h = honest, x = intercepted;
        for (std::uint64_t n = 0; n < shard.size(); ++n) {
            const int i = pick(rng), j = pick(rng);
            const std::uint64_t k = pair_count(source, rng);
            const bool attacked_pulse = eve_fraction > 0.0 && eve(rng);
            auto& sampler = (attacked_pulse ? x : h)[static_cast<std::size_t>(3 * i + j)];
            std::array<bool, 2> fa{}, fb{};
            for (std::uint64_t m = 0; m < k; ++m) {
                const Outcome o = sampler(rng);
                if (u(rng) < det_a.eta) fa[static_cast<std::size_t>(o.pattern[0])] = true;
                if (u(rng) < det_b.eta) fb[static_cast<std::size_t>(o.pattern[1])] = true;
            }
            // dark counts through the shared detector model
            const auto da = detect_station(-1, det_a, rng);
            const auto db = detect_station(-1, det_b, rng);
            ClickPattern clicks;
            clicks.clicks = {{fa[0] || da[0], fa[1] || da[1]}, {fb[0] || db[0], fb[1] || db[1]}};
            ++t.gates;
            const int a = clicks.single_click(0), b = clicks.single_click(1);
            if (clicks.click_count(1) > 1) ++t.multi;
            if (b >= 0) ++t.detections;
            if (a < 0 || b < 0) continue;
            t.bell.add(3 * i + j, {a, b});
            if ((i == 1 && j == 0) || (i == 2 && j == 1)) {
                t.alice.push_back(static_cast<std::uint8_t>(a));
                t.bob.push_back(static_cast<std::uint8_t>(1 - b));
            }
        }
        t.bell.add_gates(shard.size());
        return t;
    });

    Tally all = merge(parts);
    const std::array<CorrelationEstimate, 4> est{correlation_from_counts(all.bell, 0),
                                                 correlation_from_counts(all.bell, 2),
                                                 correlation_from_counts(all.bell, 6),
                                                 correlation_from_counts(all.bell, 8)};
    const ChshSettings settings{alice[0], alice[2], bob[0], bob[2]};
    const BoundReport bell = chsh_from_estimates(est, settings);

    KeyExchangeRecord r;
    r.protocol = "ekert";
    r.eavesdropper = eve_label("measure-resend", eve_fraction);
    r.params = p;
    r.seed = seed;
    r.workers = workers;
    r.pulses = pulses;
    r.s = bell.s;
    r.s_std_error = bell.std_error;
    fill(r, std::move(all));
    return r;
}

KeyExchangeRecord secret_sharing_ghz(std::uint64_t rounds, std::uint64_t seed, int workers) {
    const DensityMatrix g = ghz(3).density();
    // setting bits: 0 = X, 1 = Y for each party
    std::vector<OutcomeSampler> samplers;
    for (int code = 0; code < 8; ++code) {
        const BlochVector s[3] = {(code & 4) ? kPlusY : kPlusX, (code & 2) ? kPlusY : kPlusX,
                                  (code & 1) ? kPlusY : kPlusX};
        samplers.emplace_back(born_probabilities(g, s));
    }
    auto parts = run_sharded(rounds, workers, seed, [&](const Shard& shard, Rng& rng) {
        Tally t;
        std::uniform_int_distribution<int> pick(0, 7);
        std::vector<OutcomeSampler> local = samplers;
        for (std::uint64_t n = 0; n < shard.size(); ++n) {
            const int code = pick(rng);
            const Outcome o = local[static_cast<std::size_t>(code)](rng);
            ++t.gates;
            ++t.detections;
            const int ys = ((code >> 2) & 1) + ((code >> 1) & 1) + (code & 1);
            if (ys % 2 == 1) continue;
            const int has_y = ys > 0 ? 1 : 0;
            t.alice.push_back(static_cast<std::uint8_t>(o.pattern[0]));
            t.bob.push_back(static_cast<std::uint8_t>(o.pattern[1] ^ o.pattern[2] ^ has_y));
            t.b_raw.push_back(static_cast<std::uint8_t>(o.pattern[1]));
            t.c_raw.push_back(static_cast<std::uint8_t>(o.pattern[2]));
        }
        return t;
    });
    Tally all = merge(parts);
    auto corr = [&](const std::vector<std::uint8_t>& other) {
        if (all.alice.empty()) return 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < other.size(); ++i) sum += all.alice[i] == other[i] ? 1.0 : -1.0;
        return sum / static_cast<double>(other.size());
    };
    KeyExchangeRecord r;
    r.protocol = "ghz-secret-sharing";
    r.params = LinkParams{};
    r.seed = seed;
    r.workers = workers;
    r.pulses = rounds;
    r.bob_alone_correlation = corr(all.b_raw);
    r.charlie_alone_correlation = corr(all.c_raw);
    fill(r, std::move(all));
    return r;
}

}  // namespace qphoton
