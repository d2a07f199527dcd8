#include "whatif/simplex.hpp"

#include <cmath>
#include <limits>

#include "whatif/error.hpp"

namespace whatif::lp {

namespace {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double& objective(std::size_t c) { return at(rows_, c); }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            const double factor = at(r, pc);
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) {
                double v = at(r, c) - factor * at(pr, c);
                at(r, c) = std::abs(v) < 1e-14 ? 0.0 : v;
            }
            at(r, pc) = 0.0;
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

struct State {
    Tableau tableau;
    std::vector<std::size_t> basis;
    std::vector<bool> enterable;
};

void price_out(State& s, const std::vector<double>& cost) {
    auto& t = s.tableau;
    for (std::size_t c = 0; c <= t.cols(); ++c) t.objective(c) = c < t.cols() ? cost[c] : 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double cb = cost[s.basis[r]];
        if (cb == 0.0) continue;
        for (std::size_t c = 0; c <= t.cols(); ++c) t.objective(c) -= cb * t.at(r, c);
    }
}

// Bland's rule: lowest-index improving column, then lowest-index basic
// variable among tied ratios.
Status iterate(State& s, const Options& options, std::size_t& iterations) {
    auto& t = s.tableau;
    while (true) {
        if (iterations >= options.max_iterations) {
            throw Error(ErrorCode::invalid_value, "simplex iteration limit reached");
        }
        std::size_t entering = t.cols();
        for (std::size_t c = 0; c < t.cols(); ++c) {
            if (s.enterable[c] && t.objective(c) < -options.feasibility_tol) {
                entering = c;
                break;
            }
        }
        if (entering == t.cols()) return Status::optimal;

        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double a = t.at(r, entering);
            if (a > options.pivot_tol) best = std::min(best, t.rhs(r) / a);
        }
        std::size_t leaving = t.rows();
        if (best < std::numeric_limits<double>::infinity()) {
            const double slack = options.feasibility_tol * 1e-3 * std::max(1.0, std::abs(best));
            for (std::size_t r = 0; r < t.rows(); ++r) {
                const double a = t.at(r, entering);
                if (a <= options.pivot_tol || t.rhs(r) / a > best + slack) continue;
                if (leaving == t.rows() || s.basis[r] < s.basis[leaving]) leaving = r;
            }
        }
        if (leaving == t.rows()) return Status::unbounded;
        t.pivot(leaving, entering);
        s.basis[leaving] = entering;
        ++iterations;
    }
}

}  // namespace

Solution solve(const LinearProgram& program, const Options& options) {
    const std::size_t n = program.cost.size();
    const std::size_t m = program.rows.size();

    // Column layout: structural | slack/surplus | artificial.
    std::size_t slack_count = 0;
    std::size_t artificial_count = 0;
    for (const auto& row : program.rows) {
        if (row.sense != Sense::equal) ++slack_count;
        const bool flip = row.rhs < 0;
        Sense sense = row.sense;
        if (flip && sense != Sense::equal) sense = sense == Sense::less_equal ? Sense::greater_equal : Sense::less_equal;
        if (sense != Sense::less_equal) ++artificial_count;
    }
    const std::size_t total = n + slack_count + artificial_count;

    State s{Tableau(m, total), std::vector<std::size_t>(m), std::vector<bool>(total, true)};
    std::size_t next_slack = n;
    std::size_t next_artificial = n + slack_count;
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = program.rows[r];
        const double sign = row.rhs < 0 ? -1.0 : 1.0;
        Sense sense = row.sense;
        if (sign < 0 && sense != Sense::equal) sense = sense == Sense::less_equal ? Sense::greater_equal : Sense::less_equal;
        for (const auto& [col, coef] : row.terms) s.tableau.at(r, col) += sign * coef;
        s.tableau.rhs(r) = sign * row.rhs;
        if (sense == Sense::less_equal) {
            s.tableau.at(r, next_slack) = 1.0;
            s.basis[r] = next_slack++;
        } else {
            if (sense == Sense::greater_equal) s.tableau.at(r, next_slack++) = -1.0;
            s.tableau.at(r, next_artificial) = 1.0;
            s.basis[r] = next_artificial++;
        }
    }

    Solution out;
    std::size_t iterations = 0;

    if (artificial_count > 0) {
        std::vector<double> phase1(total, 0.0);
        for (std::size_t c = n + slack_count; c < total; ++c) phase1[c] = 1.0;
        price_out(s, phase1);
        iterate(s, options, iterations);
        if (-s.tableau.objective(total) > options.feasibility_tol * std::max<std::size_t>(1, m)) {
            out.status = Status::infeasible;
            out.iterations = iterations;
            return out;
        }
        // Drive zero-level artificials out of the basis where possible.
        for (std::size_t r = 0; r < m; ++r) {
            if (s.basis[r] < n + slack_count) continue;
            for (std::size_t c = 0; c < n + slack_count; ++c) {
                if (std::abs(s.tableau.at(r, c)) > options.pivot_tol) {
                    s.tableau.pivot(r, c);
                    s.basis[r] = c;
                    break;
                }
            }
        }
        for (std::size_t c = n + slack_count; c < total; ++c) s.enterable[c] = false;
    }

    std::vector<double> phase2(total, 0.0);
    for (std::size_t c = 0; c < n; ++c) phase2[c] = program.cost[c];
    price_out(s, phase2);
    out.status = iterate(s, options, iterations);
    out.iterations = iterations;
    out.values.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        if (s.basis[r] < n) out.values[s.basis[r]] = s.tableau.rhs(r);
    }
    out.objective = 0.0;
    for (std::size_t c = 0; c < n; ++c) out.objective += program.cost[c] * out.values[c];
    return out;
}

}  // namespace whatif::lp
