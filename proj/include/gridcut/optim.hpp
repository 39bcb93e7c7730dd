#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gridcut {

enum class Algorithm { adam, nadam };
enum class GradientMethod { central_difference, adjoint };

std::string to_string(Algorithm a);
std::string to_string(GradientMethod g);
Algorithm algorithm_from_string(const std::string& s);
GradientMethod gradient_from_string(const std::string& s);

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::nadam;
    double learning_rate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int max_steps = 100;
    GradientMethod gradient = GradientMethod::central_difference;
    double fd_step = 1e-4;  // relative: h = fd_step * max(1, |x|)
    // Stop once the best cost has improved by less than this (absolute) over
    // the last `patience` steps. Zero disables early stopping.
    double convergence_tol = 0.0;
    int patience = 20;

    void validate() const;
};

struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    void project(std::vector<double>& x) const;
};

struct Objective {
    double value = 0.0;
    std::vector<double> gradient;
};

using ValueFn = std::function<double(const std::vector<double>&)>;
using ValueGradFn = std::function<Objective(const std::vector<double>&)>;

struct OptimizeResult {
    std::vector<double> x_best;
    double f_best = 0.0;
    std::vector<double> trace;  // objective at each visited iterate
    int steps = 0;
    bool converged = false;
};

// Central differences, falling back to one-sided near the box so the objective
// is never evaluated outside it. Evaluations run on up to `threads` workers.
std::vector<double> finite_difference_gradient(const ValueFn& f, const std::vector<double>& x, double f_x,
                                               double rel_step, const Box& box, int threads = 1);

// Adam or Nadam with projection onto `box` after every update. Returns the
// best iterate seen. Throws NumericalError on a non-finite objective or gradient.
OptimizeResult minimize(const ValueGradFn& f, std::vector<double> x0, const Box& box, const OptimizerConfig& cfg);

// Convenience wrapper: gradients by finite_difference_gradient.
OptimizeResult minimize_fd(const ValueFn& f, std::vector<double> x0, const Box& box, const OptimizerConfig& cfg,
                           int threads = 1);

}  // namespace gridcut
