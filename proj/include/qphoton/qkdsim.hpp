// qkdsim.hpp
// QKD link model (sifted rate, QBER, secret rate, maximum distance) and
// Monte Carlo key exchange: BB84 with three source types, Ekert with a
// Bell test, and three-party GHZ secret sharing.

#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qphoton/qcore.hpp"
#include "qphoton/sources.hpp"

namespace qphoton {

struct LinkParams {
    double f_rep = 1e6;            // pulse rate, Hz
    double mu = 0.1;               // mean photons (or pairs) per pulse
    double alpha_db_per_km = 0.2;  // fiber loss
    double length_km = 0.0;
    double eta = 0.1;              // detector efficiency
    double p_dark = 1e-5;          // dark-count probability per detector per gate
    int n_det = 4;                 // detectors at Bob (4: passive basis choice)
    double extra_loss_db = 0.0;    // lumped optics loss

    // Throws std::invalid_argument for negative or non-finite fields,
    // eta or p_dark above 1, or n_det < 1.
    void validate() const;
};

// Human-readable warnings: mu > 1, and multi-photon emission outweighing
// Bob's detection probability (photon-number-splitting regime).
std::vector<std::string> link_warnings(const LinkParams& p);

// QBER at which Alice-Bob and Eve information cross for individual attacks.
inline const double kCrossingQber = (1.0 - 1.0 / std::sqrt(2.0)) / 2.0;
// Alternative cutoff for coherent attacks (no attack model behind it).
constexpr double kCoherentAttackQber = 0.11;

double transmittance(const LinkParams& p);
double sifted_rate(const LinkParams& p);
// min(1/2, n p_dark / (2 t eta mu)). Throws std::domain_error when
// t eta mu = 0.
double qber_model(const LinkParams& p);
double binary_entropy(double p);
// 1 - h(1/2 + sqrt(d(1-d))), d in [0, 1/2].
double eve_information(double d);
// r_sifted * max(0, 1 - h(q) - I_E(q)); exactly 0 for q >= kCrossingQber.
double secret_rate(const LinkParams& p);

struct RatePoint {
    double length_km = 0.0;
    double t_link = 0.0;
    double qber = 0.0;
    double r_sifted = 0.0;
    double r_secret = 0.0;
};

RatePoint rate_point(const LinkParams& p);
// Points at start, start + step, ... up to stop (inclusive within 1e-9).
std::vector<RatePoint> rate_curve(LinkParams p, double start_km, double stop_km, double step_km);
// Header length_km,t_link,qber,sifted_hz,secret_hz.
void write_rate_curve_csv(std::ostream& out, const std::vector<RatePoint>& curve);

// Length at which qber_model reaches `threshold`. Independent of f_rep.
// Throws std::invalid_argument for a threshold outside (0, 1/2] and
// std::domain_error when the threshold is never or already reached.
double max_distance(const LinkParams& p, double threshold = kCrossingQber);

enum class QkdSource {
    Faint,          // attenuated laser, Poisson photon number
    PairTriggered,  // heralded: Bob's gate opens only on a trigger click
    Entangled,      // singlet pairs measured by Alice, vacuum removed
};
std::string_view to_string(QkdSource s);
QkdSource qkd_source_from_string(std::string_view s);

struct KeyExchangeRecord {
    std::string protocol;
    std::string eavesdropper = "none";
    LinkParams params;
    std::uint64_t seed = 0;
    int workers = 1;
    std::uint64_t pulses = 0;

    std::vector<std::uint8_t> alice_key;
    std::vector<std::uint8_t> bob_key;
    double qber = 0.0;             // mismatch fraction of the sifted keys
    std::uint64_t gates = 0;       // gates Bob evaluated
    std::uint64_t detections = 0;  // gates with a single click at Bob
    std::uint64_t multi_clicks = 0;

    // Ekert
    std::optional<double> s;
    std::optional<double> s_std_error;
    // Secret sharing: correlation of Alice's bit with one party's raw bit.
    std::optional<double> bob_alone_correlation;
    std::optional<double> charlie_alone_correlation;

    std::size_t sifted() const { return alice_key.size(); }
};

// Bits packed MSB-first into bytes, rendered as lowercase hex.
std::string pack_hex(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> unpack_hex(const std::string& hex, std::size_t n_bits);

// Structured text (JSON): run metadata, parameters, statistics and the
// hex-packed keys.
std::string to_json(const KeyExchangeRecord& r);

struct Bb84Options {
    QkdSource source = QkdSource::Faint;
    double eve_fraction = 0.0;  // intercept-resend on this fraction of pulses
    PairStatistics statistics = PairStatistics::Poisson;
};

// Pulses are split across workers with independent substreams; results are
// bit-identical for a fixed (seed, workers).
KeyExchangeRecord bb84_montecarlo(const LinkParams& p, std::uint64_t pulses, const Bb84Options& opt,
                                  std::uint64_t seed, int workers = 1);

// Singlet pairs; Alice measures along Bloch angles {0, pi/4, pi/2} and Bob
// along {pi/4, pi/2, 3pi/4} in the x-z plane. Matching directions form the
// key, (0, pi/2) x (pi/4, 3pi/4) the CHSH test. Bob's detectors see
// eta * t_link; Alice's see eta. `visibility` sets the pair state
// noisy_bell(psi-, visibility). Eve measures Bob's photon in z or x and
// resends it on the given fraction of pulses.
KeyExchangeRecord ekert_montecarlo(const LinkParams& p, std::uint64_t pulses, double eve_fraction,
                                   std::uint64_t seed, int workers = 1, double visibility = 1.0);

// GHZ rounds with X/Y measurements; rounds with an even number of Y are
// kept. bob_key holds the combined b xor c xor [Y present] bit.
KeyExchangeRecord secret_sharing_ghz(std::uint64_t rounds, std::uint64_t seed, int workers = 1);

}  // namespace qphoton
