#include "gclab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gclab::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const std::string& what) {
    throw ShapeError(std::string(op) + ": " + what);
}

std::string shape_str(const Matrix& m) { return std::to_string(m.rows) + "x" + std::to_string(m.cols); }

void check_segments(const char* op, const Matrix& x, Segments seg) {
    if (seg.empty() || seg.front() != 0 || seg.back() != x.rows) {
        shape_error(op, "segments must start at 0 and end at the row count " + std::to_string(x.rows));
    }
    for (std::size_t s = 1; s < seg.size(); ++s) {
        if (seg[s] < seg[s - 1]) shape_error(op, "segment offsets must be non-decreasing");
    }
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c) throw ShapeError("Matrix: value count does not match " + std::to_string(r) + "x" + std::to_string(c));
}

Tensor Tensor::constant(Matrix value) {
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    return Tensor(std::move(node));
}

Matrix& Tensor::grad_accumulator() const {
    if (node_->grad.empty() && !node_->value.empty()) node_->grad = Matrix::zeros_like(node_->value);
    if (!node_->grad.same_shape(node_->value)) node_->grad = Matrix::zeros_like(node_->value);
    return node_->grad;
}

double Tensor::item() const {
    if (node_->value.rows != 1 || node_->value.cols != 1) throw ShapeError("item: tensor is " + shape_str(node_->value));
    return node_->value.data[0];
}

Tensor Tape::make_result(Matrix value, std::initializer_list<const Tensor*> inputs, Pullback pullback,
                         const char* op_name) {
    bool needs = false;
    for (const Tensor* in : inputs) needs = needs || in->requires_grad();
    return finish(std::move(value), needs, std::move(pullback), op_name);
}

Tensor Tape::make_result(Matrix value, std::span<const Tensor> inputs, Pullback pullback, const char* op_name) {
    bool needs = false;
    for (const Tensor& in : inputs) needs = needs || in.requires_grad();
    return finish(std::move(value), needs, std::move(pullback), op_name);
}

Tensor Tape::finish(Matrix value, bool needs_grad, Pullback pullback, const char* op_name) {
    if (check_finite_) {
        for (double v : value.data) {
            if (!std::isfinite(v)) throw NumericError(std::string(op_name) + ": produced a non-finite value");
        }
    }
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    node->requires_grad = recording_ && needs_grad;
    if (node->requires_grad) records_.push_back({node, std::move(pullback)});
    return Tensor(std::move(node));
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1) {
        throw ShapeError("backward: loss must be a 1x1 tensor");
    }
    if (!loss.requires_grad()) {
        clear();
        return;
    }
    loss.grad_accumulator().data[0] += 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        auto& node = *it->output;
        if (node.grad.empty()) continue;
        it->pullback(node.grad, node.value);
    }
    clear();
}

SparseMatrix SparseMatrix::adjacency(const Graph& g) {
    SparseMatrix s;
    s.rows = s.cols = g.num_nodes();
    s.offsets.assign(g.offsets().begin(), g.offsets().end());
    s.indices.assign(g.adjacency().begin(), g.adjacency().end());
    s.values.assign(s.indices.size(), 1.0);
    return s;
}

SparseMatrix SparseMatrix::gcn_normalized(const Graph& g) {
    const std::size_t n = g.num_nodes();
    SparseMatrix s;
    s.rows = s.cols = n;
    s.offsets.resize(n + 1, 0);
    s.indices.reserve(g.adjacency().size() + n);
    s.values.reserve(g.adjacency().size() + n);
    std::vector<double> inv_sqrt(n);
    for (NodeId v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
    for (NodeId v = 0; v < n; ++v) {
        bool self_done = false;
        for (NodeId u : g.neighbors(v)) {
            if (!self_done && u > v) {
                s.indices.push_back(v);
                s.values.push_back(inv_sqrt[v] * inv_sqrt[v]);
                self_done = true;
            }
            s.indices.push_back(u);
            s.values.push_back(inv_sqrt[v] * inv_sqrt[u]);
        }
        if (!self_done) {
            s.indices.push_back(v);
            s.values.push_back(inv_sqrt[v] * inv_sqrt[v]);
        }
        s.offsets[v + 1] = s.indices.size();
    }
    return s;
}

Matrix SparseMatrix::to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t e = offsets[r]; e < offsets[r + 1]; ++e) d(r, indices[e]) += values[e];
    }
    return d;
}

Tensor matmul(Tape& t, const Tensor& a, const Tensor& b) {
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    if (A.cols != B.rows) shape_error("matmul", shape_str(A) + " times " + shape_str(B));
    Matrix C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        double* c = C.row(i);
        const double* arow = A.row(i);
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = B.row(k);
            for (std::size_t j = 0; j < B.cols; ++j) c[j] += aik * brow[j];
        }
    }
    return t.make_result(std::move(C), {&a, &b}, [a, b](const Matrix& g, const Matrix&) {
        const Matrix& A = a.value();
        const Matrix& B = b.value();
        if (a.requires_grad()) {
            Matrix& ga = a.grad_accumulator();
            for (std::size_t i = 0; i < A.rows; ++i) {
                const double* grow = g.row(i);
                double* garow = ga.row(i);
                for (std::size_t k = 0; k < A.cols; ++k) {
                    const double* brow = B.row(k);
                    double acc = 0.0;
                    for (std::size_t j = 0; j < B.cols; ++j) acc += grow[j] * brow[j];
                    garow[k] += acc;
                }
            }
        }
        if (b.requires_grad()) {
            Matrix& gb = b.grad_accumulator();
            for (std::size_t i = 0; i < A.rows; ++i) {
                const double* grow = g.row(i);
                const double* arow = A.row(i);
                for (std::size_t k = 0; k < A.cols; ++k) {
                    const double aik = arow[k];
                    if (aik == 0.0) continue;
                    double* gbrow = gb.row(k);
                    for (std::size_t j = 0; j < B.cols; ++j) gbrow[j] += aik * grow[j];
                }
            }
        }
    }, "matmul");
}

Tensor spmm(Tape& t, const SparseMatrix& s, const Tensor& x) {
    const Matrix& X = x.value();
    if (s.cols != X.rows) shape_error("spmm", "sparse " + std::to_string(s.rows) + "x" + std::to_string(s.cols) + " times " + shape_str(X));
    Matrix Y(s.rows, X.cols);
    for (std::size_t r = 0; r < s.rows; ++r) {
        double* y = Y.row(r);
        for (std::size_t e = s.offsets[r]; e < s.offsets[r + 1]; ++e) {
            const double w = s.values[e];
            const double* xr = X.row(s.indices[e]);
            for (std::size_t c = 0; c < X.cols; ++c) y[c] += w * xr[c];
        }
    }
    // The pullback needs S^T; keep a shared copy of the pattern alive.
    auto sp = std::make_shared<const SparseMatrix>(s);
    return t.make_result(std::move(Y), {&x}, [x, sp](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        const std::size_t cols = gx.cols;
        for (std::size_t r = 0; r < sp->rows; ++r) {
            const double* grow = g.row(r);
            for (std::size_t e = sp->offsets[r]; e < sp->offsets[r + 1]; ++e) {
                const double w = sp->values[e];
                double* gxr = gx.row(sp->indices[e]);
                for (std::size_t c = 0; c < cols; ++c) gxr[c] += w * grow[c];
            }
        }
    }, "spmm");
}

Tensor add(Tape& t, const Tensor& a, const Tensor& b) {
    if (!a.value().same_shape(b.value())) shape_error("add", shape_str(a.value()) + " vs " + shape_str(b.value()));
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b.value().data[i];
    return t.make_result(std::move(out), {&a, &b}, [a, b](const Matrix& g, const Matrix&) {
        for (const Tensor* in : {&a, &b}) {
            if (!in->requires_grad()) continue;
            Matrix& gi = in->grad_accumulator();
            for (std::size_t i = 0; i < g.size(); ++i) gi.data[i] += g.data[i];
        }
    }, "add");
}

Tensor add_bias(Tape& t, const Tensor& x, const Tensor& bias) {
    const Matrix& X = x.value();
    const Matrix& B = bias.value();
    if (B.rows != 1 || B.cols != X.cols) shape_error("add_bias", "bias " + shape_str(B) + " for input " + shape_str(X));
    Matrix out = X;
    for (std::size_t r = 0; r < out.rows; ++r) {
        double* o = out.row(r);
        for (std::size_t c = 0; c < out.cols; ++c) o[c] += B.data[c];
    }
    return t.make_result(std::move(out), {&x, &bias}, [x, bias](const Matrix& g, const Matrix&) {
        if (x.requires_grad()) {
            Matrix& gx = x.grad_accumulator();
            for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += g.data[i];
        }
        if (bias.requires_grad()) {
            Matrix& gb = bias.grad_accumulator();
            for (std::size_t r = 0; r < g.rows; ++r) {
                const double* grow = g.row(r);
                for (std::size_t c = 0; c < g.cols; ++c) gb.data[c] += grow[c];
            }
        }
    }, "add_bias");
}

Tensor scale(Tape& t, const Tensor& x, double factor) {
    Matrix out = x.value();
    for (double& v : out.data) v *= factor;
    return t.make_result(std::move(out), {&x}, [x, factor](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += factor * g.data[i];
    }, "scale");
}

Tensor concat_cols(Tape& t, std::span<const Tensor> parts) {
    if (parts.empty()) shape_error("concat_cols", "no inputs");
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != rows) shape_error("concat_cols", "row counts differ");
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::size_t offset = 0;
    for (const Tensor& p : parts) {
        const Matrix& P = p.value();
        for (std::size_t r = 0; r < rows; ++r) std::copy_n(P.row(r), P.cols, out.row(r) + offset);
        offset += P.cols;
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return t.make_result(std::move(out), parts, [inputs](const Matrix& g, const Matrix&) {
        std::size_t offset = 0;
        for (const Tensor& p : inputs) {
            if (p.requires_grad()) {
                Matrix& gp = p.grad_accumulator();
                for (std::size_t r = 0; r < g.rows; ++r) {
                    const double* src = g.row(r) + offset;
                    double* dst = gp.row(r);
                    for (std::size_t c = 0; c < gp.cols; ++c) dst[c] += src[c];
                }
            }
            offset += p.cols();
        }
    }, "concat_cols");
}

Tensor rowsum_segments(Tape& t, const Tensor& x, Segments segments) {
    const Matrix& X = x.value();
    check_segments("rowsum_segments", X, segments);
    const std::size_t nseg = segments.size() - 1;
    Matrix out(nseg, X.cols);
    for (std::size_t s = 0; s < nseg; ++s) {
        double* o = out.row(s);
        for (std::size_t r = segments[s]; r < segments[s + 1]; ++r) {
            const double* xr = X.row(r);
            for (std::size_t c = 0; c < X.cols; ++c) o[c] += xr[c];
        }
    }
    std::vector<std::size_t> seg(segments.begin(), segments.end());
    return t.make_result(std::move(out), {&x}, [x, seg = std::move(seg)](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        for (std::size_t s = 0; s + 1 < seg.size(); ++s) {
            const double* gs = g.row(s);
            for (std::size_t r = seg[s]; r < seg[s + 1]; ++r) {
                double* gr = gx.row(r);
                for (std::size_t c = 0; c < gx.cols; ++c) gr[c] += gs[c];
            }
        }
    }, "rowsum_segments");
}

Tensor segment_mean(Tape& t, const Tensor& x, Segments segments) {
    const Matrix& X = x.value();
    check_segments("segment_mean", X, segments);
    const std::size_t nseg = segments.size() - 1;
    Matrix out(nseg, X.cols);
    for (std::size_t s = 0; s < nseg; ++s) {
        const std::size_t count = segments[s + 1] - segments[s];
        if (count == 0) continue;
        double* o = out.row(s);
        for (std::size_t r = segments[s]; r < segments[s + 1]; ++r) {
            const double* xr = X.row(r);
            for (std::size_t c = 0; c < X.cols; ++c) o[c] += xr[c];
        }
        for (std::size_t c = 0; c < X.cols; ++c) o[c] /= static_cast<double>(count);
    }
    std::vector<std::size_t> seg(segments.begin(), segments.end());
    return t.make_result(std::move(out), {&x}, [x, seg = std::move(seg)](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        for (std::size_t s = 0; s + 1 < seg.size(); ++s) {
            const std::size_t count = seg[s + 1] - seg[s];
            if (count == 0) continue;
            const double inv = 1.0 / static_cast<double>(count);
            const double* gs = g.row(s);
            for (std::size_t r = seg[s]; r < seg[s + 1]; ++r) {
                double* gr = gx.row(r);
                for (std::size_t c = 0; c < gx.cols; ++c) gr[c] += gs[c] * inv;
            }
        }
    }, "segment_mean");
}

Tensor segment_max(Tape& t, const Tensor& x, Segments segments) {
    const Matrix& X = x.value();
    check_segments("segment_max", X, segments);
    const std::size_t nseg = segments.size() - 1;
    Matrix out(nseg, X.cols);
    std::vector<std::size_t> argmax(nseg * X.cols, std::numeric_limits<std::size_t>::max());
    for (std::size_t s = 0; s < nseg; ++s) {
        if (segments[s] == segments[s + 1]) continue;
        for (std::size_t c = 0; c < X.cols; ++c) {
            std::size_t best = segments[s];
            for (std::size_t r = segments[s] + 1; r < segments[s + 1]; ++r) {
                if (X(r, c) > X(best, c)) best = r;
            }
            out(s, c) = X(best, c);
            argmax[s * X.cols + c] = best;
        }
    }
    return t.make_result(std::move(out), {&x}, [x, argmax = std::move(argmax)](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        for (std::size_t s = 0; s < g.rows; ++s) {
            for (std::size_t c = 0; c < g.cols; ++c) {
                const std::size_t r = argmax[s * g.cols + c];
                if (r != std::numeric_limits<std::size_t>::max()) gx(r, c) += g(s, c);
            }
        }
    }, "segment_max");
}

Tensor segment_softmax(Tape& t, const Tensor& x, Segments segments) {
    const Matrix& X = x.value();
    check_segments("segment_softmax", X, segments);
    Matrix out(X.rows, X.cols);
    for (std::size_t s = 0; s + 1 < segments.size(); ++s) {
        const std::size_t lo = segments[s], hi = segments[s + 1];
        if (lo == hi) continue;
        for (std::size_t c = 0; c < X.cols; ++c) {
            double mx = X(lo, c);
            for (std::size_t r = lo + 1; r < hi; ++r) mx = std::max(mx, X(r, c));
            double total = 0.0;
            for (std::size_t r = lo; r < hi; ++r) total += (out(r, c) = std::exp(X(r, c) - mx));
            for (std::size_t r = lo; r < hi; ++r) out(r, c) /= total;
        }
    }
    std::vector<std::size_t> seg(segments.begin(), segments.end());
    return t.make_result(std::move(out), {&x}, [x, seg = std::move(seg)](const Matrix& g, const Matrix& y) {
        Matrix& gx = x.grad_accumulator();
        for (std::size_t s = 0; s + 1 < seg.size(); ++s) {
            for (std::size_t c = 0; c < y.cols; ++c) {
                double dot = 0.0;
                for (std::size_t r = seg[s]; r < seg[s + 1]; ++r) dot += g(r, c) * y(r, c);
                for (std::size_t r = seg[s]; r < seg[s + 1]; ++r) gx(r, c) += y(r, c) * (g(r, c) - dot);
            }
        }
    }, "segment_softmax");
}

Tensor relu(Tape& t, const Tensor& x) {
    Matrix out = x.value();
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return t.make_result(std::move(out), {&x}, [x](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        const Matrix& X = x.value();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (X.data[i] > 0.0) gx.data[i] += g.data[i];
        }
    }, "relu");
}

Tensor leaky_relu(Tape& t, const Tensor& x, double slope) {
    Matrix out = x.value();
    for (double& v : out.data) v = v > 0.0 ? v : slope * v;
    return t.make_result(std::move(out), {&x}, [x, slope](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        const Matrix& X = x.value();
        for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += (X.data[i] > 0.0 ? 1.0 : slope) * g.data[i];
    }, "leaky_relu");
}

Tensor tanh(Tape& t, const Tensor& x) {
    Matrix out = x.value();
    for (double& v : out.data) v = std::tanh(v);
    return t.make_result(std::move(out), {&x}, [x](const Matrix& g, const Matrix& y) {
        Matrix& gx = x.grad_accumulator();
        for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += (1.0 - y.data[i] * y.data[i]) * g.data[i];
    }, "tanh");
}

Tensor mul(Tape& t, const Tensor& a, const Tensor& b) {
    if (!a.value().same_shape(b.value())) shape_error("mul", shape_str(a.value()) + " vs " + shape_str(b.value()));
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= b.value().data[i];
    return t.make_result(std::move(out), {&a, &b}, [a, b](const Matrix& g, const Matrix&) {
        if (a.requires_grad()) {
            Matrix& ga = a.grad_accumulator();
            for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * b.value().data[i];
        }
        if (b.requires_grad()) {
            Matrix& gb = b.grad_accumulator();
            for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i] * a.value().data[i];
        }
    }, "mul");
}

Tensor mul_col(Tape& t, const Tensor& x, const Tensor& s) {
    const Matrix& X = x.value();
    const Matrix& S = s.value();
    if (S.cols != 1 || S.rows != X.rows) shape_error("mul_col", "column " + shape_str(S) + " for input " + shape_str(X));
    Matrix out = X;
    for (std::size_t r = 0; r < X.rows; ++r) {
        double* o = out.row(r);
        for (std::size_t c = 0; c < X.cols; ++c) o[c] *= S.data[r];
    }
    return t.make_result(std::move(out), {&x, &s}, [x, s](const Matrix& g, const Matrix&) {
        const Matrix& X = x.value();
        const Matrix& S = s.value();
        if (x.requires_grad()) {
            Matrix& gx = x.grad_accumulator();
            for (std::size_t r = 0; r < X.rows; ++r) {
                for (std::size_t c = 0; c < X.cols; ++c) gx(r, c) += g(r, c) * S.data[r];
            }
        }
        if (s.requires_grad()) {
            Matrix& gs = s.grad_accumulator();
            for (std::size_t r = 0; r < X.rows; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < X.cols; ++c) acc += g(r, c) * X(r, c);
                gs.data[r] += acc;
            }
        }
    }, "mul_col");
}

Tensor log_softmax_rows(Tape& t, const Tensor& x) {
    const Matrix& X = x.value();
    Matrix out(X.rows, X.cols);
    for (std::size_t r = 0; r < X.rows; ++r) {
        const double* xr = X.row(r);
        const double mx = *std::max_element(xr, xr + X.cols);
        double total = 0.0;
        for (std::size_t c = 0; c < X.cols; ++c) total += std::exp(xr[c] - mx);
        const double lse = mx + std::log(total);
        for (std::size_t c = 0; c < X.cols; ++c) out(r, c) = xr[c] - lse;
    }
    return t.make_result(std::move(out), {&x}, [x](const Matrix& g, const Matrix& y) {
        Matrix& gx = x.grad_accumulator();
        for (std::size_t r = 0; r < y.rows; ++r) {
            double gsum = 0.0;
            for (std::size_t c = 0; c < y.cols; ++c) gsum += g(r, c);
            for (std::size_t c = 0; c < y.cols; ++c) gx(r, c) += g(r, c) - std::exp(y(r, c)) * gsum;
        }
    }, "log_softmax_rows");
}

Tensor batch_norm(Tape& t, const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                  bool train) {
    const Matrix& X = x.value();
    const std::size_t n = X.rows, f = X.cols;
    if (gamma.rows() != 1 || gamma.cols() != f || beta.rows() != 1 || beta.cols() != f) {
        shape_error("batch_norm", "affine parameters must be 1x" + std::to_string(f));
    }
    if (state.running_mean.cols != f) shape_error("batch_norm", "running statistics width mismatch");
    if (train && n == 0) shape_error("batch_norm", "empty batch in train mode");

    std::vector<double> mean(f, 0.0), inv_std(f, 0.0);
    if (train) {
        std::vector<double> var(f, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < f; ++c) mean[c] += X(r, c);
        }
        for (double& m : mean) m /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < f; ++c) {
                const double d = X(r, c) - mean[c];
                var[c] += d * d;
            }
        }
        for (std::size_t c = 0; c < f; ++c) {
            const double biased = var[c] / static_cast<double>(n);
            inv_std[c] = 1.0 / std::sqrt(biased + state.eps);
            const double unbiased = n > 1 ? var[c] / static_cast<double>(n - 1) : biased;
            state.running_mean.data[c] = (1.0 - state.momentum) * state.running_mean.data[c] + state.momentum * mean[c];
            state.running_var.data[c] = (1.0 - state.momentum) * state.running_var.data[c] + state.momentum * unbiased;
        }
    } else {
        for (std::size_t c = 0; c < f; ++c) {
            mean[c] = state.running_mean.data[c];
            inv_std[c] = 1.0 / std::sqrt(state.running_var.data[c] + state.eps);
        }
    }

    Matrix xhat(n, f), out(n, f);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < f; ++c) {
            xhat(r, c) = (X(r, c) - mean[c]) * inv_std[c];
            out(r, c) = gamma.value().data[c] * xhat(r, c) + beta.value().data[c];
        }
    }
    return t.make_result(std::move(out), {&x, &gamma, &beta},
                         [x, gamma, beta, train, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                             const Matrix& g, const Matrix&) {
        const std::size_t n = g.rows, f = g.cols;
        std::vector<double> sum_g(f, 0.0), sum_gx(f, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < f; ++c) {
                sum_g[c] += g(r, c);
                sum_gx[c] += g(r, c) * xhat(r, c);
            }
        }
        if (gamma.requires_grad()) {
            Matrix& gg = gamma.grad_accumulator();
            for (std::size_t c = 0; c < f; ++c) gg.data[c] += sum_gx[c];
        }
        if (beta.requires_grad()) {
            Matrix& gb = beta.grad_accumulator();
            for (std::size_t c = 0; c < f; ++c) gb.data[c] += sum_g[c];
        }
        if (!x.requires_grad()) return;
        Matrix& gx = x.grad_accumulator();
        const auto& gam = gamma.value().data;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < f; ++c) {
                if (train) {
                    const double inv_n = 1.0 / static_cast<double>(n);
                    gx(r, c) += gam[c] * inv_std[c] * (g(r, c) - inv_n * sum_g[c] - xhat(r, c) * inv_n * sum_gx[c]);
                } else {
                    gx(r, c) += gam[c] * inv_std[c] * g(r, c);
                }
            }
        }
    }, "batch_norm");
}

Tensor dropout(Tape& t, const Tensor& x, double p, bool train, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw ShapeError("dropout: p must lie in [0, 1)");
    if (!train || p == 0.0) return x;
    const double keep_scale = 1.0 / (1.0 - p);
    Matrix mask(x.rows(), x.cols());
    for (double& m : mask.data) m = uniform01(rng) >= p ? keep_scale : 0.0;
    Matrix out = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= mask.data[i];
    return t.make_result(std::move(out), {&x}, [x, mask = std::move(mask)](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += g.data[i] * mask.data[i];
    }, "dropout");
}

Tensor gather_rows(Tape& t, const Tensor& x, std::span<const NodeId> rows) {
    const Matrix& X = x.value();
    Matrix out(rows.size(), X.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= X.rows) shape_error("gather_rows", "row index " + std::to_string(rows[i]) + " out of range");
        std::copy_n(X.row(rows[i]), X.cols, out.row(i));
    }
    std::vector<NodeId> idx(rows.begin(), rows.end());
    return t.make_result(std::move(out), {&x}, [x, idx = std::move(idx)](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double* gi = g.row(i);
            double* dst = gx.row(idx[i]);
            for (std::size_t c = 0; c < gx.cols; ++c) dst[c] += gi[c];
        }
    }, "gather_rows");
}

Tensor sum_all(Tape& t, const Tensor& x) {
    const double total = std::accumulate(x.value().data.begin(), x.value().data.end(), 0.0);
    return t.make_result(Matrix(1, 1, total), {&x}, [x](const Matrix& g, const Matrix&) {
        Matrix& gx = x.grad_accumulator();
        for (double& v : gx.data) v += g.data[0];
    }, "sum_all");
}

std::vector<std::size_t> topk_indices(std::span<const double> values, std::size_t m) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    m = std::min(m, values.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                      [&](std::size_t a, std::size_t b) { return values[a] > values[b] || (values[a] == values[b] && a < b); });
    order.resize(m);
    return order;
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (double& v : m.data) v = bound * (2.0 * uniform01(rng) - 1.0);
    return m;
}

}  // namespace gclab::ad
