#include "qphoton/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "qphoton/belltest.hpp"
#include "qphoton/distill.hpp"
#include "qphoton/measure.hpp"
#include "qphoton/parallel.hpp"
#include "qphoton/protocols.hpp"
#include "qphoton/qkdsim.hpp"
#include "qphoton/sources.hpp"
#include "qphoton/tomography.hpp"

namespace qphoton::cli {

namespace {

enum class Type { Real, Count, Text, Flag, Choice };

struct KeySpec {
    std::string name;
    std::string def;
    Type type;
    std::vector<std::string> choices = {};
    std::string help = {};
};

// Output of one experiment: headline for the summary line, optional file
// body for --out, and whether an invariant check failed.
struct Outcome {
    std::vector<std::pair<std::string, std::string>> headline;
    std::string file;
    std::vector<std::string> warnings;
    bool invariant_ok = true;
};

class Params {
public:
    explicit Params(const RunConfig& c) : c_(c) {}
    double real(const std::string& k) const { return std::stod(c_.params.at(k)); }
    std::uint64_t count(const std::string& k) const { return std::stoull(c_.params.at(k)); }
    const std::string& text(const std::string& k) const { return c_.params.at(k); }
    bool flag(const std::string& k) const { return c_.params.at(k) == "true"; }
    std::uint64_t seed() const { return c_.seed; }
    std::uint64_t shots() const { return c_.shots; }
    int workers() const { return c_.workers; }

private:
    const RunConfig& c_;
};

struct Experiment {
    std::string name;
    std::string summary;
    std::uint64_t default_shots;
    std::vector<KeySpec> keys;
    std::function<Outcome(const Params&)> run;
};

std::string fmt(double x) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(10) << x;
    return os.str();
}

// "quantity,value" table
std::string quantity_table(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::string s = "quantity,value\n";
    for (const auto& [k, v] : rows) s += k + "," + v + "\n";
    return s;
}

const std::vector<std::string> kBellNames{"psi-", "psi+", "phi-", "phi+"};

std::vector<KeySpec> link_keys(const std::string& mu = "0.1", const std::string& length = "0") {
    return {{"f_rep", "1e6", Type::Real, {}, "pulse rate in Hz"},
            {"mu", mu, Type::Real, {}, "mean photon (pair) number per pulse"},
            {"alpha_db_per_km", "0.2", Type::Real, {}, "fiber loss"},
            {"length_km", length, Type::Real, {}, "link length"},
            {"eta", "0.1", Type::Real, {}, "detector efficiency"},
            {"p_dark", "1e-5", Type::Real, {}, "dark-count probability per gate"},
            {"n_det", "4", Type::Count, {}, "detectors at Bob"},
            {"extra_loss_db", "0", Type::Real, {}, "lumped optics loss"}};
}

LinkParams link_from(const Params& p) {
    LinkParams l;
    l.f_rep = p.real("f_rep");
    l.mu = p.real("mu");
    l.alpha_db_per_km = p.real("alpha_db_per_km");
    l.length_km = p.real("length_km");
    l.eta = p.real("eta");
    l.p_dark = p.real("p_dark");
    l.n_det = static_cast<int>(p.count("n_det"));
    l.extra_loss_db = p.real("extra_loss_db");
    l.validate();
    return l;
}

std::vector<KeySpec> with(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

DensityMatrix two_qubit_state(const Params& p) {
    const std::string& s = p.text("state");
    if (s == "werner") return werner(p.real("v"));
    if (s == "bell") return noisy_bell(bell_kind_from_string(p.text("kind")), p.real("v"));
    return nonmax_state(p.real("alpha")).density();
}

const std::vector<KeySpec> kStateKeys{
    {"state", "werner", Type::Choice, {"werner", "bell", "nonmax"}, "two-qubit state family"},
    {"v", "1", Type::Real, {}, "visibility"},
    {"kind", "psi-", Type::Choice, kBellNames, "Bell state for state=bell"},
    {"alpha", "0.7071067812", Type::Real, {}, "|00> amplitude for state=nonmax"}};

// ---------------------------------------------------------------------------

Outcome run_chsh(const Params& p) {
    const DensityMatrix rho = two_qubit_state(p);
    const BoundReport best = chsh_optimize(rho);
    Outcome o;
    std::vector<std::pair<std::string, std::string>> rows{{"s_optimal", fmt(best.s)},
                                                          {"s_closed_form", fmt(chsh_max_analytic(rho))}};
    o.headline.push_back({"S", fmt(best.s)});
    if (p.shots() > 0) {
        const DetectorModel det(p.real("det_eta"), p.real("det_p_dark"));
        const auto& s = best.settings;
        const std::pair<BlochVector, BlochVector> pairs[4] = {{s.a, s.b}, {s.a, s.b_prime}, {s.a_prime, s.b},
                                                              {s.a_prime, s.b_prime}};
        std::array<CorrelationEstimate, 4> est;
        for (std::size_t i = 0; i < 4; ++i)
            est[i] = estimate_correlation(rho, pairs[i].first, pairs[i].second, p.shots(), det,
                                          p.seed() + i, p.workers());
        const BoundReport mc = chsh_from_estimates(est, s);
        rows.push_back({"s_estimated", fmt(mc.s)});
        rows.push_back({"s_std_error", fmt(*mc.std_error)});
        rows.push_back({"sigma_margin", fmt(*mc.sigma_margin)});
        o.headline.push_back({"S_mc", fmt(mc.s)});
        o.headline.push_back({"sigma", fmt(*mc.std_error)});
    }
    o.invariant_ok = best.s <= kTsirelsonBound + 1e-9;
    o.file = quantity_table(rows);
    return o;
}

Outcome run_mermin(const Params&) {
    const double m = mermin3(ghz(3).density(), mermin_xy_settings());
    Outcome o;
    o.headline = {{"M", fmt(m)}, {"lhv_bound", "2"}};
    o.file = quantity_table({{"mermin", fmt(m)}, {"lhv_bound", "2"}, {"quantum_max", "4"}});
    o.invariant_ok = std::abs(std::abs(m) - 4.0) < 1e-9;
    return o;
}

Outcome run_ghz_profile(const Params& p) {
    const auto n = p.count("photons");
    const StateVector state =
        n == 3 ? ghz(3, std::pair{std::vector<int>{0, 0, 1}, std::vector<int>{1, 1, 0}})
               : ghz(4, std::pair{std::vector<int>{0, 1, 1, 0}, std::vector<int>{1, 0, 0, 1}});
    const auto profile = n == 3 ? ghz3_coincidence_profile(state) : pm_coincidence_profile(state);
    Outcome o;
    o.file = "pattern,probability\n";
    int nonzero = 0;
    double total = 0.0;
    for (const auto& [label, prob] : profile) {
        o.file += label + "," + fmt(prob < 1e-15 ? 0.0 : prob) + "\n";
        nonzero += prob > 1e-12 ? 1 : 0;
        total += prob;
    }
    o.headline = {{"nonzero_patterns", std::to_string(nonzero)}};
    o.invariant_ok = std::abs(total - 1.0) < 1e-12;
    return o;
}

Outcome run_efficiency(const Params& p) {
    const bool maximal = p.text("family") == "maximal";
    const auto th = critical_efficiency(maximal ? EfficiencyFamily::maximal(p.real("v"))
                                                : EfficiencyFamily::nonmaximal({}, p.real("v")));
    Outcome o;
    o.file = "alpha,eta,lo,hi,converged\n";
    if (th.sweep.empty()) {
        o.file += fmt(th.alpha) + "," + fmt(th.eta) + "," + fmt(th.lo) + "," + fmt(th.hi) + "," +
                  (th.converged ? "true" : "false") + "\n";
    }
    for (const auto& pt : th.sweep)
        o.file += fmt(pt.alpha) + "," + fmt(pt.eta) + "," + fmt(pt.lo) + "," + fmt(pt.hi) + "," +
                  (pt.converged ? "true" : "false") + "\n";
    o.headline = {{"eta_critical", fmt(th.eta)}};
    if (!maximal) o.headline.push_back({"alpha", fmt(th.alpha)});
    return o;
}

Outcome run_speed(const Params& p) {
    const double v = speed_lower_bound(p.real("distance_m"), p.real("dt_s"));
    Outcome o;
    o.headline = {{"v_over_c", fmt(v)}};
    o.file = quantity_table({{"distance_m", fmt(p.real("distance_m"))},
                             {"dt_s", fmt(p.real("dt_s"))},
                             {"v_over_c", fmt(v)}});
    return o;
}

DensityMatrix bsm_input(const std::string& s) {
    if (s == "product01") return StateVector::basis({2, 2}, {0, 1}).density();
    if (s == "mixture") return DensityMatrix::maximally_mixed({2, 2});
    return bell_state(bell_kind_from_string(s)).density();
}

Outcome run_bsm(const Params& p) {
    const DensityMatrix rho = bsm_input(p.text("input"));
    const bool full = p.text("mode") == "full";
    Rng rng = make_substream(p.seed(), 0);
    std::map<std::string, std::uint64_t> freq;
    std::map<std::string, double> prob;
    if (full) {
        const auto pr = bell_probabilities(rho);
        for (std::size_t k = 0; k < 4; ++k) prob[std::string(to_string(to_label(kAllBellKinds[k])))] = pr[k];
        for (std::uint64_t i = 0; i < p.shots(); ++i) ++freq[std::string(to_string(full_bsm(rho, rng).outcome.label))];
    } else {
        const auto pr = partial_bsm_probabilities(rho);
        prob["psi-"] = pr[0];
        prob["psi+"] = pr[1];
        prob["ambiguous"] = pr[2];
        for (std::uint64_t i = 0; i < p.shots(); ++i) ++freq[std::string(to_string(partial_bsm(rho, rng).label))];
    }
    Outcome o;
    o.file = "outcome,probability,count\n";
    double total = 0.0;
    for (const auto& [label, pr] : prob) {
        o.file += label + "," + fmt(pr) + "," + std::to_string(freq[label]) + "\n";
        total += pr;
    }
    const auto top = std::max_element(prob.begin(), prob.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
    o.headline = {{"top", top->first}, {"p", fmt(top->second)}};
    o.invariant_ok = std::abs(total - 1.0) < 1e-12;
    return o;
}

StateVector teleport_input(const std::string& s, Rng& rng) {
    if (s == "random") return random_state({2}, rng);
    // linear polarization at angle theta sits at Bloch angle 2 theta in the x-z plane
    const double deg = s == "h" ? 0.0 : s == "v" ? 90.0 : s == "d" ? 45.0 : -45.0;
    return StateVector({2}, bloch_ket(BlochVector::in_xz_plane(2.0 * deg * std::numbers::pi / 180.0), 1));
}

Outcome run_teleport(const Params& p) {
    const BellKind resource = bell_kind_from_string(p.text("resource"));
    const BsmMode mode = p.text("mode") == "full" ? BsmMode::Full : BsmMode::Partial;
    const bool correct = p.flag("correct");
    Rng rng = make_substream(p.seed(), 0);
    double f_sum = 0.0, f_min = 1.0;
    std::uint64_t ok = 0;
    for (std::uint64_t i = 0; i < p.shots(); ++i) {
        const StateVector in = teleport_input(p.text("input"), rng);
        const auto r = teleport(in, resource, mode, correct, rng);
        if (!r.success) continue;
        ++ok;
        f_sum += r.fidelity;
        f_min = std::min(f_min, r.fidelity);
    }
    const double mean = ok > 0 ? f_sum / static_cast<double>(ok) : 0.0;
    Outcome o;
    o.headline = {{"fidelity", fmt(mean)}, {"success", fmt(static_cast<double>(ok) / static_cast<double>(p.shots()))}};
    o.file = quantity_table({{"shots", std::to_string(p.shots())},
                             {"successes", std::to_string(ok)},
                             {"mean_fidelity", fmt(mean)},
                             {"min_fidelity", fmt(f_min)}});
    if (correct && ok > 0) o.invariant_ok = f_min > 1.0 - 1e-9;
    return o;
}

Outcome run_dense(const Params& p) {
    const BellKind resource = bell_kind_from_string(p.text("resource"));
    const BsmMode mode = p.text("mode") == "full" ? BsmMode::Full : BsmMode::Partial;
    Rng rng = make_substream(p.seed(), 0);
    std::uniform_int_distribution<int> msg(0, 3);
    std::uint64_t decoded = 0, wrong = 0;
    for (std::uint64_t i = 0; i < p.shots(); ++i) {
        const int m = msg(rng);
        const DensityMatrix enc = dense_encode_state(m, resource).density();
        const BsmLabel label = mode == BsmMode::Full ? full_bsm(enc, rng).outcome.label : partial_bsm(enc, rng).label;
        if (const auto d = dense_decode(label, resource)) {
            ++decoded;
            wrong += *d != m ? 1 : 0;
        }
    }
    Outcome o;
    const double cap = dense_coding_capacity(mode);
    o.headline = {{"capacity_bits", fmt(cap)},
                  {"decoded", fmt(static_cast<double>(decoded) / static_cast<double>(p.shots()))}};
    o.file = quantity_table({{"capacity_bits", fmt(cap)},
                             {"shots", std::to_string(p.shots())},
                             {"decoded", std::to_string(decoded)},
                             {"decode_errors", std::to_string(wrong)}});
    o.invariant_ok = wrong == 0;
    return o;
}

Outcome run_swap(const Params& p) {
    const DensityMatrix pair = werner(p.real("v"));
    const auto cond = entanglement_swap_conditional(pair, pair, BellKind::PsiMinus);
    const double s = chsh_optimize(cond.state14).s;
    Rng rng = make_substream(p.seed(), 0);
    std::map<std::string, std::uint64_t> freq;
    for (std::uint64_t i = 0; i < p.shots(); ++i)
        ++freq[std::string(to_string(entanglement_swap(pair, pair, rng).outcome.label))];
    Outcome o;
    o.headline = {{"S_swapped", fmt(s)}};
    o.file = "outcome,count\n";
    for (const auto& name : kBellNames) o.file += name + "," + std::to_string(freq[name]) + "\n";
    o.file += "# s_swapped_psi-=" + fmt(s) + "\n";
    o.invariant_ok = s <= kTsirelsonBound + 1e-9;
    return o;
}

Outcome run_tomo(const Params& p) {
    const DensityMatrix rho = two_qubit_state(p);
    const auto st = standard_settings();
    CountTable counts;
    if (!p.text("counts").empty()) {
        std::ifstream in(p.text("counts"));
        if (!in) throw std::runtime_error("cannot read count table " + p.text("counts"));
        counts = CountTable::read_csv(in);
    } else {
        Rng rng = make_substream(p.seed(), 0);
        counts = simulate_counts(rho, st, p.shots(), rng);
    }
    if (!p.text("save_counts").empty()) {
        std::ofstream os(p.text("save_counts"));
        counts.write_csv(os);
        if (!os) throw std::runtime_error("cannot write count table " + p.text("save_counts"));
    }
    const auto data = TomographyData::from_counts(counts, st.size());
    Matrix m;
    Outcome o;
    if (p.text("method") == "linear") {
        m = linear_inversion(data, st);
        Eigen::SelfAdjointEigenSolver<Matrix> es(m);
        o.headline.push_back({"min_eigenvalue", fmt(es.eigenvalues().minCoeff())});
        o.headline.push_back({"fidelity", fmt(fidelity(project_to_physical(m), rho))});
    } else {
        const auto r = mle_reconstruct(data, st);
        m = r.matrix.mat();
        o.headline.push_back({"fidelity", fmt(fidelity(r.matrix, rho))});
        o.headline.push_back({"iterations", std::to_string(r.iterations)});
        if (!r.converged) o.warnings.push_back("maximum-likelihood iteration did not converge");
    }
    o.file = "row,col,re,im\n";
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            o.file += std::to_string(i) + "," + std::to_string(j) + "," + fmt(m(i, j).real()) + "," +
                      fmt(m(i, j).imag()) + "\n";
    return o;
}

Outcome run_distill(const Params& p) {
    const auto r = hidden_nonlocality_demo(p.real("lambda"), p.real("target"));
    Outcome o;
    o.headline = {{"S_initial", fmt(r.s_initial)}, {"S_filtered", fmt(r.s_filtered)}};
    o.file = quantity_table({{"s_initial", fmt(r.s_initial)},
                             {"s_filtered", fmt(r.s_filtered)},
                             {"success_probability", fmt(r.success_probability)},
                             {"filter_t", fmt(r.filter.a(1, 1).real())},
                             {"filter_s", fmt(r.filter.b(1, 1).real())},
                             {"hidden_nonlocality", r.hidden_nonlocality ? "true" : "false"}});
    o.invariant_ok = r.s_filtered <= kTsirelsonBound + 1e-9;
    return o;
}

Outcome run_qkd_rate(const Params& p) {
    const LinkParams l = link_from(p);
    const RatePoint r = rate_point(l);
    Outcome o;
    o.warnings = link_warnings(l);
    std::string dmax = "unreachable";
    try {
        dmax = fmt(max_distance(l, p.real("threshold")));
    } catch (const std::domain_error&) {
    }
    o.headline = {{"secret_hz", fmt(r.r_secret)}, {"qber", fmt(r.qber)}};
    o.file = quantity_table({{"t_link", fmt(r.t_link)},
                             {"qber", fmt(r.qber)},
                             {"sifted_hz", fmt(r.r_sifted)},
                             {"secret_hz", fmt(r.r_secret)},
                             {"max_distance_km", dmax}});
    o.invariant_ok = r.r_secret <= r.r_sifted;
    return o;
}

Outcome run_qkd_curve(const Params& p) {
    const LinkParams l = link_from(p);
    const auto curve = rate_curve(l, p.real("start_km"), p.real("stop_km"), p.real("step_km"));
    std::ostringstream os;
    write_rate_curve_csv(os, curve);
    Outcome o;
    o.warnings = link_warnings(l);
    o.file = os.str();
    std::string dmax = "unreachable";
    try {
        dmax = fmt(max_distance(l, p.real("threshold")));
    } catch (const std::domain_error&) {
    }
    o.headline = {{"points", std::to_string(curve.size())}, {"max_distance_km", dmax}};
    for (std::size_t i = 1; i < curve.size(); ++i)
        o.invariant_ok &= curve[i].r_secret <= curve[i - 1].r_secret && curve[i].r_secret <= curve[i].r_sifted;
    return o;
}

Outcome record_outcome(const KeyExchangeRecord& r) {
    Outcome o;
    o.file = to_json(r);
    o.headline = {{"sifted", std::to_string(r.sifted())}, {"qber", fmt(r.qber)}};
    if (r.s) {
        o.headline.insert(o.headline.begin(), {"S", fmt(*r.s)});
        o.headline.push_back({"sigma", fmt(*r.s_std_error)});
    }
    return o;
}

Outcome run_qkd_mc(const Params& p) {
    const LinkParams l = link_from(p);
    Bb84Options opt;
    opt.source = qkd_source_from_string(p.text("source"));
    opt.eve_fraction = p.real("eve");
    auto o = record_outcome(bb84_montecarlo(l, p.shots(), opt, p.seed(), p.workers()));
    o.warnings = link_warnings(l);
    return o;
}

Outcome run_ekert(const Params& p) {
    const LinkParams l = link_from(p);
    return record_outcome(ekert_montecarlo(l, p.shots(), p.real("eve"), p.seed(), p.workers(), p.real("v")));
}

Outcome run_secret_share(const Params& p) {
    const auto r = secret_sharing_ghz(p.shots(), p.seed(), p.workers());
    Outcome o = record_outcome(r);
    o.headline.push_back({"agreement", fmt(1.0 - r.qber)});
    o.headline.push_back({"bob_alone_corr", fmt(*r.bob_alone_correlation)});
    o.invariant_ok = r.qber == 0.0;
    return o;
}

const std::vector<Experiment>& experiments() {
    static const std::vector<Experiment> table{
        {"chsh", "optimal CHSH value of a two-qubit state (optionally sampled)", 0,
         with(kStateKeys, {{"det_eta", "1", Type::Real, {}, "detector efficiency when sampling"},
                           {"det_p_dark", "0", Type::Real, {}, "dark-count probability when sampling"}}),
         run_chsh},
        {"mermin", "Mermin value of the three-photon GHZ state", 0, {}, run_mermin},
        {"ghz-profile", "+-45 deg coincidence profile of the GHZ states", 0,
         {{"photons", "3", Type::Choice, {"3", "4"}, "number of photons"}}, run_ghz_profile},
        {"efficiency-threshold", "critical detector efficiency without fair sampling", 0,
         {{"family", "maximal", Type::Choice, {"maximal", "nonmaximal"}, "state family"},
          {"v", "1", Type::Real, {}, "visibility"}},
         run_efficiency},
        {"speed-bound", "lower bound on the speed of a hypothetical influence", 0,
         {{"distance_m", "10000", Type::Real, {}, "separation"},
          {"dt_s", "5e-12", Type::Real, {}, "timing uncertainty"}},
         run_speed},
        {"bsm", "Bell-state measurement statistics", 1000,
         {{"input", "psi-", Type::Choice, {"psi-", "psi+", "phi-", "phi+", "product01", "mixture"}, "input state"},
          {"mode", "full", Type::Choice, {"full", "partial"}, "measurement"}},
         run_bsm},
        {"teleport", "teleportation fidelity", 1000,
         {{"resource", "psi-", Type::Choice, kBellNames, "shared Bell state"},
          {"mode", "full", Type::Choice, {"full", "partial"}, "Bell measurement"},
          {"correct", "true", Type::Flag, {}, "apply Bob's correction"},
          {"input", "random", Type::Choice, {"random", "h", "v", "d", "a"}, "input polarization"}},
         run_teleport},
        {"dense", "dense coding", 1000,
         {{"resource", "psi-", Type::Choice, kBellNames, "shared Bell state"},
          {"mode", "full", Type::Choice, {"full", "partial"}, "Bell measurement"}},
         run_dense},
        {"swap", "entanglement swapping of two Werner pairs", 1000,
         {{"v", "1", Type::Real, {}, "Werner visibility of each pair"}}, run_swap},
        {"tomo", "two-qubit state tomography", 10000,
         with(kStateKeys, {{"method", "mle", Type::Choice, {"mle", "linear"}, "reconstruction"},
                           {"counts", "", Type::Text, {}, "read counts from this file instead of simulating"},
                           {"save_counts", "", Type::Text, {}, "write the count table here"}}),
         run_tomo},
        {"distill", "hidden nonlocality by local filtering", 0,
         {{"lambda", "0.9", Type::Real, {}, "weight of the entangled component"},
          {"target", "1.82", Type::Real, {}, "CHSH value of the unfiltered state"}},
         run_distill},
        {"qkd-rate", "QKD link model at one length", 0,
         with(link_keys(), {{"threshold", "0.15", Type::Real, {}, "QBER cutoff for the span"}}), run_qkd_rate},
        {"qkd-curve", "QKD rates against length", 0,
         with(link_keys(), {{"start_km", "0", Type::Real, {}, "first length"},
                            {"stop_km", "150", Type::Real, {}, "last length"},
                            {"step_km", "1", Type::Real, {}, "length step"},
                            {"threshold", "0.15", Type::Real, {}, "QBER cutoff for the span"}}),
         run_qkd_curve},
        {"qkd-mc", "BB84 Monte Carlo key exchange", 100000,
         with(link_keys(), {{"source", "faint", Type::Choice, {"faint", "pair-triggered", "entangled"}, "source"},
                            {"eve", "0", Type::Real, {}, "intercept-resend fraction"}}),
         run_qkd_mc},
        {"ekert", "Ekert key exchange with a CHSH test", 1000000,
         with(link_keys(), {{"eve", "0", Type::Real, {}, "measure-resend fraction"},
                            {"v", "1", Type::Real, {}, "pair visibility"}}),
         run_ekert},
        {"secret-share", "three-party GHZ secret sharing", 100000, {}, run_secret_share},
    };
    return table;
}

const Experiment& find_experiment(const std::string& name) {
    for (const auto& e : experiments())
        if (e.name == name) return e;
    throw UsageError("unknown experiment '" + name + "'");
}

bool parses_real(const std::string& v) {
    std::istringstream is(v);
    is.imbue(std::locale::classic());
    double x;
    is >> x;
    return !is.fail() && is.eof() && std::isfinite(x);
}

bool parses_count(const std::string& v) {
    return !v.empty() && v.size() <= 19 && std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void check_value(const KeySpec& k, const std::string& v) {
    bool ok = true;
    switch (k.type) {
        case Type::Real: ok = parses_real(v); break;
        case Type::Count: ok = parses_count(v); break;
        case Type::Flag: ok = v == "true" || v == "false"; break;
        case Type::Choice: ok = std::find(k.choices.begin(), k.choices.end(), v) != k.choices.end(); break;
        case Type::Text: break;
    }
    if (!ok) throw UsageError("malformed value '" + v + "' for --" + k.name);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return out;
}

}  // namespace

std::vector<std::string> experiment_names() {
    std::vector<std::string> names;
    for (const auto& e : experiments()) names.push_back(e.name);
    return names;
}

std::string usage() {
    std::ostringstream os;
    os << "usage: qphoton <experiment> [--key value ...]\n"
          "common flags: --seed <u64> (42) --shots <n> --out <path> --workers <n> (1) --config <path>\n"
          "experiments:\n";
    for (const auto& e : experiments()) os << "  " << std::left << std::setw(22) << e.name << e.summary << "\n";
    os << "run 'qphoton <experiment> --help' for its keys\n";
    return os.str();
}

std::string usage(const std::string& experiment) {
    const Experiment& e = find_experiment(experiment);
    std::ostringstream os;
    os << "usage: qphoton " << e.name << " [--key value ...]\n" << e.summary << "\n";
    os << "  --shots (default " << e.default_shots << ")\n";
    for (const auto& k : e.keys) {
        os << "  --" << k.name << " (default " << (k.def.empty() ? "\"\"" : k.def) << ")";
        if (!k.choices.empty()) {
            os << " one of";
            for (const auto& c : k.choices) os << " " << c;
        }
        if (!k.help.empty()) os << ": " << k.help;
        os << "\n";
    }
    return os.str();
}

RunConfig parse(const std::vector<std::string>& args) {
    if (args.empty()) throw UsageError("missing experiment");
    if (args[0].rfind("--", 0) == 0) throw UsageError("missing experiment");
    const Experiment& e = find_experiment(args[0]);

    std::vector<std::pair<std::string, std::string>> flags;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0 || a.size() == 2) throw UsageError("unexpected argument '" + a + "'");
        const auto eq = a.find('=');
        if (eq != std::string::npos) {
            flags.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
        } else {
            if (i + 1 >= args.size()) throw UsageError("missing value for " + a);
            flags.emplace_back(a.substr(2), args[++i]);
        }
    }

    // config file first, flags override
    std::vector<std::pair<std::string, std::string>> merged;
    for (const auto& [k, v] : flags)
        if (k == "config") {
            const auto cfg = read_config(v);
            merged.insert(merged.end(), cfg.begin(), cfg.end());
        }
    for (const auto& kv : flags)
        if (kv.first != "config") merged.push_back(kv);

    RunConfig c;
    c.experiment = e.name;
    c.shots = e.default_shots;
    for (const auto& k : e.keys) c.params[k.name] = k.def;
    for (const auto& [k, v] : merged) {
        if (k == "seed") {
            if (!parses_count(v)) throw UsageError("malformed value '" + v + "' for --seed");
            c.seed = std::stoull(v);
        } else if (k == "shots") {
            if (!parses_count(v)) throw UsageError("malformed value '" + v + "' for --shots");
            c.shots = std::stoull(v);
        } else if (k == "workers") {
            if (!parses_count(v) || std::stoull(v) < 1 || std::stoull(v) > 256)
                throw UsageError("malformed value '" + v + "' for --workers");
            c.workers = static_cast<int>(std::stoull(v));
        } else if (k == "out") {
            if (v.empty()) throw UsageError("empty --out path");
            c.out = v;
        } else {
            const auto it = std::find_if(e.keys.begin(), e.keys.end(), [&](const KeySpec& s) { return s.name == k; });
            if (it == e.keys.end()) throw UsageError("unknown key --" + k + " for " + e.name);
            check_value(*it, v);
            c.params[k] = v;
        }
    }
    const bool needs_shots = e.default_shots > 0;
    if (needs_shots && c.shots == 0) throw UsageError("--shots must be at least 1 for " + e.name);
    return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const Experiment& e = find_experiment(config.experiment);
    Outcome o;
    try {
        o = e.run(Params(config));
    } catch (const std::exception& ex) {
        err << "qphoton " << e.name << ": " << ex.what() << "\n";
        return 1;
    }
    for (const auto& w : o.warnings) err << "warning: " << w << "\n";
    if (config.out) {
        std::ofstream f(*config.out, std::ios::binary);
        f << o.file;
        f.close();
        if (!f) {
            err << "qphoton " << e.name << ": cannot write " << *config.out << "\n";
            return 1;
        }
    }
    out << e.name;
    for (const auto& [k, v] : o.headline) out << " " << k << "=" << v;
    out << " seed=" << config.seed << "\n";
    if (!o.invariant_ok) {
        err << "qphoton " << e.name << ": invariant check failed\n";
        return 1;
    }
    return 0;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (args.empty() || args[0] == "--help" || args[0] == "-h") {
            (args.empty() ? std::cerr : std::cout) << usage();
            return args.empty() ? 2 : 0;
        }
        if (args.size() >= 2 && (args[1] == "--help" || args[1] == "-h")) {
            std::cout << usage(args[0]);
            return 0;
        }
        return run(parse(args), std::cout, std::cerr);
    } catch (const UsageError& ex) {
        std::cerr << "qphoton: " << ex.what() << "\n" << usage();
        return 2;
    }
}

}  // namespace qphoton::cli
