// distill.hpp
// Local filtering and the hidden-nonlocality demonstration.

#pragma once

#include <optional>

#include "qphoton/qcore.hpp"

namespace qphoton {

// Per-party filter matrices with A^dag A <= I and B^dag B <= I.
struct LocalFilter {
    Matrix a = identity(2);
    Matrix b = identity(2);

    LocalFilter() = default;
    // Throws std::invalid_argument if either matrix is not 2x2 or has
    // operator norm above 1.
    LocalFilter(Matrix a, Matrix b);

    static LocalFilter diagonal(double t, double s);  // diag(1, t) (x) diag(1, s)
};

struct FilterOutput {
    DensityMatrix state;
    double success_probability = 0.0;
};

// (A (x) B) rho (A (x) B)^dag / p. Throws std::domain_error when p <= 1e-12.
FilterOutput local_filter(const DensityMatrix& rho, const LocalFilter& f);

// Filter turning nonmax_state(alpha) into a maximally entangled state:
// diag(beta/alpha, 1) (x) I for alpha > 1/sqrt2 (success 2 beta^2) and
// diag(1, alpha/beta) (x) I otherwise (success 2 alpha^2). Throws for
// alpha outside (0, 1).
LocalFilter procrustean_filter_for(double alpha);

// lambda |phi_alpha><phi_alpha| + (1 - lambda) (|01><01| + |10><10|)/2 with
// |phi_alpha> = alpha|00> + sqrt(1 - alpha^2)|11>.
DensityMatrix distill_family_state(double alpha, double lambda);
// Smallest alpha in (0, 1/sqrt2] whose family member reaches CHSH value
// `target_s`; nullopt if the target is out of reach at this lambda.
std::optional<double> family_alpha_for(double lambda, double target_s);

struct DistillationReport {
    double s_initial = 0.0;
    double s_filtered = 0.0;
    double success_probability = 1.0;
    LocalFilter filter;
    // S_initial <= 2 < S_filtered (by more than 1e-9)
    bool hidden_nonlocality = false;
};

// Searches diagonal filters diag(1, t) (x) diag(1, s), t, s in (0, 1], on a
// log grid with local refinement. When no filter beats the input the
// identity filter is reported.
DistillationReport hidden_nonlocality_demo(const DensityMatrix& rho);

// Family member tuned to S_initial = target_s, then filtered.
DistillationReport hidden_nonlocality_demo(double lambda = 0.9, double target_s = 1.82);

}  // namespace qphoton
