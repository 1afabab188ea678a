#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qphoton/belltest.hpp"
#include "qphoton/cli.hpp"
#include "qphoton/distill.hpp"
#include "qphoton/parallel.hpp"
#include "qphoton/protocols.hpp"
#include "qphoton/qkdsim.hpp"
#include "qphoton/sources.hpp"
#include "qphoton/tomography.hpp"

namespace py = pybind11;
using namespace qphoton;

namespace {

// Python side passes plain complex arrays; dims are all qubits.
Dims qubit_dims(Eigen::Index dim) {
    Dims d;
    for (Eigen::Index n = dim; n > 1; n /= 2) d.push_back(2);
    if (total_dim(d) != static_cast<std::size_t>(dim)) throw std::invalid_argument("dimension is not a power of two");
    return d;
}

DensityMatrix as_density(const Matrix& m) { return DensityMatrix(qubit_dims(m.rows()), m); }

}  // namespace

PYBIND11_MODULE(_qphoton, m) {
    m.doc() = "Photonic entanglement and QKD simulator";

    // states
    m.def("bell_state", [](const std::string& kind) { return bell_state(bell_kind_from_string(kind)).amps(); },
          py::arg("kind"));
    m.def("werner", [](double v) { return werner(v).mat(); }, py::arg("v"));
    m.def("noisy_bell", [](const std::string& kind, double v) { return noisy_bell(bell_kind_from_string(kind), v).mat(); },
          py::arg("kind"), py::arg("visibility"));
    m.def("nonmax_state", [](double alpha) { return nonmax_state(alpha).amps(); }, py::arg("alpha"));
    m.def("ghz", [](int n) { return ghz(n).amps(); }, py::arg("n"));

    // Bell tests
    m.def("chsh_max", [](const Matrix& rho) { return chsh_optimize(as_density(rho)).s; }, py::arg("rho"),
          "Optimal CHSH value over all analyzer directions.");
    m.def("chsh_max_analytic", [](const Matrix& rho) { return chsh_max_analytic(as_density(rho)); }, py::arg("rho"));
    m.def("mermin_ghz3", [] { return mermin3(ghz(3).density(), mermin_xy_settings()); });
    m.def("critical_efficiency", [](double visibility) { return critical_efficiency(EfficiencyFamily::maximal(visibility)).eta; },
          py::arg("visibility") = 1.0);
    m.def("speed_lower_bound", [](double d, double dt) { return speed_lower_bound(d, dt); }, py::arg("separation_m"),
          py::arg("timing_uncertainty_s"));

    // protocols
    m.def("dense_coding_capacity",
          [](const std::string& mode) { return dense_coding_capacity(mode == "partial" ? BsmMode::Partial : BsmMode::Full); },
          py::arg("mode") = "full");
    m.def(
        "teleport",
        [](const Vector& input, const std::string& resource, const std::string& mode, bool correct, std::uint64_t seed) {
            Rng rng = make_substream(seed, 0);
            const auto r = teleport(StateVector::normalized({2}, input), bell_kind_from_string(resource),
                                    mode == "partial" ? BsmMode::Partial : BsmMode::Full, correct, rng);
            return py::dict(py::arg("output") = r.output.mat(), py::arg("fidelity") = r.fidelity,
                            py::arg("success") = r.success, py::arg("outcome") = std::string(to_string(r.outcome.label)));
        },
        py::arg("input"), py::arg("resource") = "psi-", py::arg("mode") = "full", py::arg("correct") = true,
        py::arg("seed") = 42);
    m.def(
        "swap_conditional",
        [](const Matrix& a, const Matrix& b, const std::string& outcome) {
            return entanglement_swap_conditional(as_density(a), as_density(b), bell_kind_from_string(outcome))
                .state14.mat();
        },
        py::arg("pair12"), py::arg("pair34"), py::arg("outcome") = "psi-");

    // tomography
    m.def(
        "tomography",
        [](const Matrix& rho, std::uint64_t shots, const std::string& method, std::uint64_t seed) {
            const auto st = standard_settings();
            Rng rng = make_substream(seed, 0);
            const auto data = TomographyData::from_counts(simulate_counts(as_density(rho), st, shots, rng), st.size());
            if (method == "linear") return linear_inversion(data, st);
            return Matrix(mle_reconstruct(data, st).matrix.mat());
        },
        py::arg("rho"), py::arg("shots"), py::arg("method") = "mle", py::arg("seed") = 42);
    m.def("fidelity", [](const Matrix& a, const Matrix& b) { return fidelity(as_density(a), as_density(b)); });

    // distillation
    m.def(
        "hidden_nonlocality_demo",
        [](double lambda, double target) {
            const auto r = hidden_nonlocality_demo(lambda, target);
            return py::dict(py::arg("s_initial") = r.s_initial, py::arg("s_filtered") = r.s_filtered,
                            py::arg("success_probability") = r.success_probability,
                            py::arg("hidden_nonlocality") = r.hidden_nonlocality);
        },
        py::arg("lam") = 0.9, py::arg("target") = 1.82);

    // QKD
    py::class_<LinkParams>(m, "LinkParams")
        .def(py::init<>())
        .def_readwrite("f_rep", &LinkParams::f_rep)
        .def_readwrite("mu", &LinkParams::mu)
        .def_readwrite("alpha_db_per_km", &LinkParams::alpha_db_per_km)
        .def_readwrite("length_km", &LinkParams::length_km)
        .def_readwrite("eta", &LinkParams::eta)
        .def_readwrite("p_dark", &LinkParams::p_dark)
        .def_readwrite("n_det", &LinkParams::n_det)
        .def_readwrite("extra_loss_db", &LinkParams::extra_loss_db);
    m.attr("CROSSING_QBER") = kCrossingQber;
    m.def("qber", &qber_model, py::arg("link"));
    m.def("sifted_rate", &sifted_rate, py::arg("link"));
    m.def("secret_rate", &secret_rate, py::arg("link"));
    m.def("max_distance", &max_distance, py::arg("link"), py::arg("threshold") = kCrossingQber);
    m.def(
        "rate_curve_csv",
        [](const LinkParams& p, double start, double stop, double step) {
            std::ostringstream os;
            write_rate_curve_csv(os, rate_curve(p, start, stop, step));
            return os.str();
        },
        py::arg("link"), py::arg("start_km"), py::arg("stop_km"), py::arg("step_km"));
    m.def(
        "bb84",
        [](const LinkParams& p, std::uint64_t pulses, const std::string& source, double eve, std::uint64_t seed,
           int workers) {
            Bb84Options opt;
            opt.source = qkd_source_from_string(source);
            opt.eve_fraction = eve;
            py::gil_scoped_release release;
            return to_json(bb84_montecarlo(p, pulses, opt, seed, workers));
        },
        py::arg("link"), py::arg("pulses"), py::arg("source") = "faint", py::arg("eve") = 0.0, py::arg("seed") = 42,
        py::arg("workers") = 1, "Returns the run record as JSON text.");
    m.def(
        "ekert",
        [](const LinkParams& p, std::uint64_t pulses, double eve, std::uint64_t seed, int workers) {
            py::gil_scoped_release release;
            return to_json(ekert_montecarlo(p, pulses, eve, seed, workers));
        },
        py::arg("link"), py::arg("pulses"), py::arg("eve") = 0.0, py::arg("seed") = 42, py::arg("workers") = 1);

    // command line
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int status;
            try {
                status = cli::run(cli::parse(args), out, err);
            } catch (const cli::UsageError& e) {
                err << e.what() << "\n";
                status = 2;
            }
            return py::make_tuple(status, out.str(), err.str());
        },
        py::arg("args"), "Runs one CLI experiment; returns (status, stdout, stderr).");
}
