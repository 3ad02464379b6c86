#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bundletrade/offline.hpp"

namespace bundletrade {

std::size_t LPProblem::add_var(double cost, double lo, double hi) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    for (auto& row : rows) row.push_back(0.0);
    return objective.size() - 1;
}

std::size_t LPProblem::add_row(std::vector<double> coeffs, Sense sense, double b) {
    coeffs.resize(objective.size(), 0.0);
    rows.push_back(std::move(coeffs));
    senses.push_back(sense);
    rhs.push_back(b);
    return rows.size() - 1;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tableau over nonnegative columns. Row r holds B^-1 A in cols [0, cols) and
// B^-1 b in cols; z holds reduced costs c_B B^-1 A - c (maximization).
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * (cols + 1), 0.0), z_(cols + 1, 0.0), basis_(rows, 0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double rhs(std::size_t r) const { return at(r, cols_); }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::vector<std::size_t>& basis() { return basis_; }
    std::vector<double>& z() { return z_; }

    void set_costs(const std::vector<double>& c) {
        for (std::size_t j = 0; j <= cols_; ++j) {
            double v = j < cols_ ? -c[j] : 0.0;
            for (std::size_t r = 0; r < rows_; ++r) v += c[basis_[r]] * at(r, j);
            z_[j] = v;
        }
    }

    void pivot(std::size_t pr, std::size_t pc) {
        const double p = at(pr, pc);
        for (std::size_t j = 0; j <= cols_; ++j) at(pr, j) /= p;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) at(r, j) -= f * at(pr, j);
            at(r, pc) = 0.0;
        }
        const double f = z_[pc];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= cols_; ++j) z_[j] -= f * at(pr, j);
            z_[pc] = 0.0;
        }
        basis_[pr] = pc;
    }

    // Bland: lowest-index improving column, then lowest basic index among tied ratios.
    // Returns false at optimality; sets unbounded when a column has no limiting row.
    bool step(const std::vector<bool>& allowed, const SimplexOptions& opt, bool& unbounded) {
        std::size_t enter = cols_;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (allowed[j] && z_[j] < -opt.pivot_tol) {
                enter = j;
                break;
            }
        }
        if (enter == cols_) return false;
        std::size_t leave = rows_;
        double best = kInf;
        for (std::size_t r = 0; r < rows_; ++r) {
            const double a = at(r, enter);
            if (a <= opt.pivot_tol) continue;
            const double ratio = std::max(0.0, rhs(r)) / a;
            const double slack = 1e-12 * std::max(1.0, best == kInf ? ratio : best);
            if (leave == rows_ || ratio < best - slack) {
                leave = r;
                best = ratio;
            } else if (ratio <= best + slack && basis_[r] < basis_[leave]) {
                leave = r;
                best = std::min(best, ratio);
            }
        }
        if (leave == rows_) {
            unbounded = true;
            return false;
        }
        pivot(leave, enter);
        return true;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> a_;
    std::vector<double> z_;
    std::vector<std::size_t> basis_;
};

LPSolution solve_once(const LPProblem& lp, const std::vector<double>& rhs_in, const SimplexOptions& opt) {
    const std::size_t nv = lp.num_vars();
    // shifted/free columns: x = lower + x', with fixed variables dropped
    std::vector<std::size_t> col_of(nv, SIZE_MAX);
    std::vector<std::size_t> var_of;
    for (std::size_t j = 0; j < nv; ++j) {
        if (!std::isfinite(lp.lower[j])) throw std::invalid_argument("simplex: lower bounds must be finite");
        if (lp.upper[j] < lp.lower[j]) {
            LPSolution bad;
            bad.status = LPStatus::Infeasible;
            return bad;
        }
        if (lp.upper[j] == lp.lower[j]) continue;
        col_of[j] = var_of.size();
        var_of.push_back(j);
    }

    struct Row {
        std::vector<std::pair<std::size_t, double>> coeffs;  // over structural columns
        Sense sense;
        double b;
    };
    std::vector<Row> rows;
    rows.reserve(lp.num_rows() + var_of.size());
    for (std::size_t k = 0; k < lp.num_rows(); ++k) {
        Row row{{}, lp.senses[k], rhs_in[k]};
        for (std::size_t j = 0; j < nv; ++j) {
            const double a = lp.rows[k][j];
            if (a == 0.0) continue;
            row.b -= a * lp.lower[j];
            if (col_of[j] != SIZE_MAX) row.coeffs.emplace_back(col_of[j], a);
        }
        rows.push_back(std::move(row));
    }
    for (std::size_t c = 0; c < var_of.size(); ++c) {
        const std::size_t j = var_of[c];
        if (std::isfinite(lp.upper[j])) rows.push_back({{{c, 1.0}}, Sense::LessEqual, lp.upper[j] - lp.lower[j]});
    }
    for (Row& row : rows) {
        if (row.b < 0.0) {
            row.b = -row.b;
            for (auto& [c, a] : row.coeffs) a = -a;
            if (row.sense == Sense::LessEqual) row.sense = Sense::GreaterEqual;
            else if (row.sense == Sense::GreaterEqual) row.sense = Sense::LessEqual;
        }
    }

    const std::size_t ns = var_of.size();
    std::size_t n_slack = 0, n_art = 0;
    for (const Row& row : rows) {
        if (row.sense != Sense::Equal) ++n_slack;
        if (row.sense != Sense::LessEqual) ++n_art;
    }
    const std::size_t cols = ns + n_slack + n_art;
    const std::size_t art0 = ns + n_slack;
    Tableau tab(rows.size(), cols);
    std::size_t slack = ns, art = art0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Row& row = rows[r];
        for (const auto& [c, a] : row.coeffs) tab.at(r, c) += a;
        tab.rhs(r) = row.b;
        if (row.sense == Sense::LessEqual) {
            tab.at(r, slack) = 1.0;
            tab.basis()[r] = slack++;
        } else {
            if (row.sense == Sense::GreaterEqual) tab.at(r, slack++) = -1.0;
            tab.at(r, art) = 1.0;
            tab.basis()[r] = art++;
        }
    }

    LPSolution sol;
    std::vector<bool> allowed(cols, true);
    bool unbounded = false;
    if (n_art > 0) {
        std::vector<double> c1(cols, 0.0);
        for (std::size_t j = art0; j < cols; ++j) c1[j] = -1.0;
        tab.set_costs(c1);
        while (tab.step(allowed, opt, unbounded)) {
            if (++sol.iterations > opt.max_iterations) throw NumericalError("simplex: iteration limit in phase one");
        }
        double infeas = -tab.z()[cols];
        double scale = 1.0;
        for (const Row& row : rows) scale = std::max(scale, row.b);
        if (infeas > opt.feas_tol * scale) {
            sol.status = LPStatus::Infeasible;
            return sol;
        }
        for (std::size_t r = 0; r < tab.rows(); ++r) {
            if (tab.basis()[r] < art0) continue;
            std::size_t pc = cols;
            double best = opt.pivot_tol;
            for (std::size_t j = 0; j < art0; ++j) {
                if (std::abs(tab.at(r, j)) > best) {
                    best = std::abs(tab.at(r, j));
                    pc = j;
                }
            }
            if (pc != cols) tab.pivot(r, pc);
        }
        for (std::size_t j = art0; j < cols; ++j) allowed[j] = false;
    }

    std::vector<double> c2(cols, 0.0);
    for (std::size_t c = 0; c < ns; ++c) c2[c] = lp.objective[var_of[c]];
    tab.set_costs(c2);
    unbounded = false;
    while (tab.step(allowed, opt, unbounded)) {
        if (++sol.iterations > opt.max_iterations) throw NumericalError("simplex: iteration limit in phase two");
    }
    if (unbounded) {
        sol.status = LPStatus::Unbounded;
        return sol;
    }

    std::vector<double> shifted(cols, 0.0);
    for (std::size_t r = 0; r < tab.rows(); ++r) shifted[tab.basis()[r]] = std::max(0.0, tab.rhs(r));
    sol.x.assign(nv, 0.0);
    for (std::size_t j = 0; j < nv; ++j) sol.x[j] = lp.lower[j];
    for (std::size_t c = 0; c < ns; ++c) sol.x[var_of[c]] += shifted[c];
    sol.value = 0.0;
    for (std::size_t j = 0; j < nv; ++j) sol.value += lp.objective[j] * sol.x[j];
    sol.status = LPStatus::Optimal;
    return sol;
}

double max_residual(const LPProblem& lp, const std::vector<double>& x) {
    double worst = 0.0;
    for (std::size_t k = 0; k < lp.num_rows(); ++k) {
        double ax = 0.0, mag = std::abs(lp.rhs[k]);
        for (std::size_t j = 0; j < lp.num_vars(); ++j) {
            ax += lp.rows[k][j] * x[j];
            mag += std::abs(lp.rows[k][j] * x[j]);
        }
        double viol = 0.0;
        if (lp.senses[k] != Sense::GreaterEqual) viol = std::max(viol, ax - lp.rhs[k]);
        if (lp.senses[k] != Sense::LessEqual) viol = std::max(viol, lp.rhs[k] - ax);
        worst = std::max(worst, viol / std::max(1.0, mag));
    }
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        double scale = std::max(1.0, std::abs(x[j]));
        worst = std::max(worst, (lp.lower[j] - x[j]) / scale);
        if (std::isfinite(lp.upper[j])) worst = std::max(worst, (x[j] - lp.upper[j]) / scale);
    }
    return worst;
}

}  // namespace

LPSolution solve_simplex(const LPProblem& lp, const SimplexOptions& options) {
    if (lp.rows.size() != lp.senses.size() || lp.rows.size() != lp.rhs.size() ||
        lp.lower.size() != lp.num_vars() || lp.upper.size() != lp.num_vars())
        throw std::invalid_argument("simplex: inconsistent problem dimensions");
    for (const auto& row : lp.rows)
        if (row.size() != lp.num_vars()) throw std::invalid_argument("simplex: row length does not match variables");

    LPSolution sol = solve_once(lp, lp.rhs, options);
    if (sol.status != LPStatus::Optimal) return sol;
    sol.max_residual = max_residual(lp, sol.x);
    if (sol.max_residual <= options.residual_tol) return sol;

    // one retry on a slightly relaxed right-hand side; equalities stay exact
    const double first = sol.max_residual;
    std::vector<double> b = lp.rhs;
    for (std::size_t k = 0; k < b.size(); ++k) {
        const double bump = 1e-10 * static_cast<double>(1 + k % 7) * std::max(1.0, std::abs(b[k]));
        if (lp.senses[k] == Sense::LessEqual) b[k] += bump;
        else if (lp.senses[k] == Sense::GreaterEqual) b[k] -= bump;
    }
    LPSolution retry = solve_once(lp, b, options);
    if (retry.status == LPStatus::Optimal) {
        retry.max_residual = max_residual(lp, retry.x);
        retry.perturbed = true;
        retry.iterations += sol.iterations;
        if (retry.max_residual <= options.residual_tol) return retry;
    }
    throw NumericalError("simplex: residual " + std::to_string(first) + " exceeds " +
                         std::to_string(options.residual_tol) + " after a perturbed retry (" +
                         std::to_string(lp.num_rows()) + " rows, " + std::to_string(lp.num_vars()) +
                         " columns)");
}

}  // namespace bundletrade
