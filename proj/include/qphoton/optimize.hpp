// optimize.hpp
// Small deterministic derivative-free optimizers used by the setting and
// filter searches.

#pragma once

#include <functional>
#include <vector>

namespace qphoton::opt {

struct Result {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Nelder-Mead maximization starting from x0 with initial simplex edge `step`.
// Stops when the spread of simplex values drops below f_tol and the simplex
// diameter below x_tol, or after max_evals evaluations.
Result nelder_mead_max(const Objective& f, std::vector<double> x0, double step, double f_tol = 1e-13,
                       double x_tol = 1e-10, int max_evals = 20000);

// Evaluates f on every point of a regular grid (per-dimension start, step,
// count) and returns the best `keep` points, best first. Ties keep the
// earlier grid point, so the result is deterministic.
std::vector<Result> grid_search_max(const Objective& f, const std::vector<double>& start,
                                    const std::vector<double>& step, const std::vector<int>& count,
                                    std::size_t keep);

// Grid scan followed by Nelder-Mead refinement from the best `starts` grid
// points; returns the overall best.
Result grid_then_refine_max(const Objective& f, const std::vector<double>& start,
                            const std::vector<double>& step, const std::vector<int>& count,
                            std::size_t starts, double refine_step);

// Bisection for the boundary of a monotone predicate on [lo, hi]:
// pred(lo) == false, pred(hi) == true. Returns the final bracket.
struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    int iterations = 0;
    bool converged = false;
};
Bracket bisect_boundary(const std::function<bool(double)>& pred, double lo, double hi, double tol,
                        int max_iter = 200);

}  // namespace qphoton::opt
