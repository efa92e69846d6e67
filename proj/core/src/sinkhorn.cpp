#include "rebasin/sinkhorn.hpp"

#include <cmath>
#include <limits>

namespace rebasin {

namespace {

void check_input(const Matrix& x) {
    if (x.rows() != x.cols()) throw DimensionError("sinkhorn: matrix must be square");
    if (!all_finite(x)) throw InvalidInputError("sinkhorn: entries must be finite");
}

// Row-wise logsumexp subtraction: L <- L - rowLSE(L).
void log_normalize_rows(Matrix& l) {
    const std::size_t n = l.rows(), m = l.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* row = &l.data()[i * m];
        double mx = row[0];
        for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += std::exp(row[j] - mx);
        const double lse = mx + std::log(s);
        for (std::size_t j = 0; j < m; ++j) row[j] -= lse;
    }
}

void log_normalize_cols(Matrix& l) {
    const std::size_t n = l.rows(), m = l.cols();
    for (std::size_t j = 0; j < m; ++j) {
        double mx = l(0, j);
        for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, l(i, j));
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::exp(l(i, j) - mx);
        const double lse = mx + std::log(s);
        for (std::size_t i = 0; i < n; ++i) l(i, j) -= lse;
    }
}

Matrix exp_of(const Matrix& l) {
    Matrix p(l.rows(), l.cols());
    for (std::size_t i = 0; i < l.size(); ++i) p[i] = std::exp(l[i]);
    return p;
}

void normalize_rows(Matrix& p) {
    const std::size_t n = p.rows(), m = p.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* row = &p.data()[i * m];
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += row[j];
        for (std::size_t j = 0; j < m; ++j) row[j] /= s;
    }
}

void normalize_cols(Matrix& p) {
    const std::size_t n = p.rows(), m = p.cols();
    std::vector<double> s(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) s[j] += p(i, j);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) p(i, j) /= s[j];
}

}  // namespace

Matrix sinkhorn(const Matrix& x, const SinkhornConfig& cfg, SinkhornTrace* trace) {
    check_input(x);
    if (cfg.tau <= 0.0) throw ConfigError("sinkhorn: tau must be positive");
    if (cfg.iters < 1) throw ConfigError("sinkhorn: iters must be >= 1");

    if (trace) trace->steps.clear();

    if (cfg.log_domain) {
        Matrix l = scaled(x, 1.0 / cfg.tau);
        Matrix p;
        for (int t = 0; t < cfg.iters; ++t) {
            log_normalize_rows(l);
            Matrix r = trace ? exp_of(l) : Matrix();
            log_normalize_cols(l);
            if (trace) {
                p = exp_of(l);
                trace->steps.push_back({std::move(r), p});
            } else if (t == cfg.iters - 1) {
                p = exp_of(l);
            }
        }
        if (trace) trace->output = p;
        return p;
    }

    Matrix p = exp_of(scaled(x, 1.0 / cfg.tau));
    for (int t = 0; t < cfg.iters; ++t) {
        normalize_rows(p);
        Matrix r = trace ? p : Matrix();
        normalize_cols(p);
        if (trace) trace->steps.push_back({std::move(r), p});
    }
    if (trace) trace->output = p;
    return p;
}

double marginal_residual(const Matrix& p) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) s += p(i, j);
        worst = std::max(worst, std::fabs(s - 1.0));
    }
    return worst;
}

namespace {

// Reverse pass through the recorded iterations in log coordinates.
// H carries the gradient with respect to the log iterate; the normalized
// matrices themselves are the softmax Jacobian weights.
Matrix unrolled_vjp(const SinkhornTrace& trace, double tau, const Matrix& upstream) {
    const std::size_t n = upstream.rows();
    Matrix h = hadamard(upstream, trace.output);  // dL_final
    for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
        // column normalization backward
        {
            const Matrix& p = it->col_normed;
            std::vector<double> colsum(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) colsum[j] += h(i, j);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) h(i, j) -= p(i, j) * colsum[j];
        }
        // row normalization backward
        {
            const Matrix& r = it->row_normed;
            for (std::size_t i = 0; i < n; ++i) {
                double rowsum = 0.0;
                for (std::size_t j = 0; j < n; ++j) rowsum += h(i, j);
                for (std::size_t j = 0; j < n; ++j) h(i, j) -= r(i, j) * rowsum;
            }
        }
    }
    return scaled(h, 1.0 / tau);
}

// Dense Gaussian elimination with partial pivoting; a is destroyed.
std::vector<double> solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        if (a[k][k] == 0.0) throw InvalidInputError("sinkhorn_vjp: singular implicit system");
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

// Implicit differentiation at the doubly stochastic fixed point. With
// P = exp(X/tau + f 1^T + 1 g^T) and both marginals equal to 1, perturbing the
// marginal conditions gives the symmetric system [I P; P^T I] z = w,
// w = [(G o P) 1; (G o P)^T 1], singular only along the gauge direction
// [1; -1]; the gauge is fixed by pinning the last column potential to zero.
Matrix implicit_vjp(const Matrix& p, double tau, const Matrix& upstream) {
    const std::size_t n = p.rows();
    const Matrix gp = hadamard(upstream, p);

    const std::size_t m = 2 * n - 1;
    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    std::vector<double> b(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = 1.0;
        for (std::size_t j = 0; j + 1 < n; ++j) a[i][n + j] = p(i, j);
        for (std::size_t j = 0; j < n; ++j) b[i] += gp(i, j);
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) a[n + j][i] = p(i, j);
        a[n + j][n + j] = 1.0;
        for (std::size_t i = 0; i < n; ++i) b[n + j] += gp(i, j);
    }
    std::vector<double> z = solve_dense(a, b);

    Matrix grad(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double zc = (j + 1 < n) ? z[n + j] : 0.0;
            grad(i, j) = p(i, j) * (upstream(i, j) - z[i] - zc) / tau;
        }
    return grad;
}

}  // namespace

Matrix sinkhorn_vjp_from_trace(const SinkhornTrace& trace, const SinkhornConfig& cfg,
                               const Matrix& upstream) {
    if (!trace.output.same_shape(upstream))
        throw DimensionError("sinkhorn_vjp: upstream shape mismatch");
    if (cfg.grad_mode == GradMode::unrolled)
        return unrolled_vjp(trace, cfg.tau, upstream);
    const double res = marginal_residual(trace.output);
    if (res > implicit_residual_gate)
        throw NonConvergenceError("sinkhorn_vjp: implicit mode requires a converged forward pass",
                                  res);
    return implicit_vjp(trace.output, cfg.tau, upstream);
}

Matrix sinkhorn_vjp(const Matrix& x, const SinkhornConfig& cfg, const Matrix& upstream) {
    if (!x.same_shape(upstream)) throw DimensionError("sinkhorn_vjp: upstream shape mismatch");
    SinkhornTrace trace;
    sinkhorn(x, cfg, &trace);
    return sinkhorn_vjp_from_trace(trace, cfg, upstream);
}

double entropy(const Matrix& p) {
    double h = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double v = p[i];
        if (v < 0.0) throw InvalidInputError("entropy: negative entry");
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

}  // namespace rebasin
