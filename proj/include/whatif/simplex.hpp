#pragma once

#include <cstddef>
#include <vector>

namespace whatif::lp {

enum class Sense { less_equal, equal, greater_equal };

struct Row {
    std::vector<std::pair<std::size_t, double>> terms;  // (column, coefficient)
    Sense sense = Sense::less_equal;
    double rhs = 0.0;
};

/// minimize cost . x  subject to rows, x >= 0.
struct LinearProgram {
    std::vector<double> cost;
    std::vector<Row> rows;

    std::size_t add_variable(double objective) {
        cost.push_back(objective);
        return cost.size() - 1;
    }
};

enum class Status { optimal, infeasible, unbounded };

struct Solution {
    Status status = Status::infeasible;
    double objective = 0.0;
    std::vector<double> values;
    std::size_t iterations = 0;
};

struct Options {
    double feasibility_tol = 1e-9;
    double pivot_tol = 1e-11;
    std::size_t max_iterations = 200000;
};

/// Dense two-phase primal simplex with Bland's rule. Entering and leaving
/// choices depend only on column order, so the caller controls tie-breaking
/// among alternative optima through the order it adds variables.
Solution solve(const LinearProgram& program, const Options& options = {});

}  // namespace whatif::lp
