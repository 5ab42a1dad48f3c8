#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gclab/graph.hpp"
#include "gclab/rng.hpp"

namespace gclab::ad {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    static Matrix zeros_like(const Matrix& m) { return Matrix(m.rows, m.cols); }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Shape or argument errors raised by tensor operations.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by a finite-checking tape when an op produces NaN or Inf.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
struct Node {
    Matrix value;
    Matrix grad;  // allocated on first accumulation
    bool requires_grad = false;
};
}  // namespace detail

/// Handle to a value in a recorded computation. Copies share the same
/// underlying node, like a reference.
class Tensor {
public:
    Tensor() = default;

    /// Value that never receives a gradient.
    static Tensor constant(Matrix value);
    /// Leaf whose gradient is accumulated by Tape::backward.
    static Tensor parameter(Matrix value);

    bool defined() const { return node_ != nullptr; }
    std::size_t rows() const { return node_->value.rows; }
    std::size_t cols() const { return node_->value.cols; }
    const Matrix& value() const { return node_->value; }
    Matrix& mutable_value() { return node_->value; }
    bool requires_grad() const { return node_->requires_grad; }

    /// Gradient accumulated so far; empty when nothing has flowed in.
    const Matrix& grad() const { return node_->grad; }
    bool has_grad() const { return !node_->grad.empty(); }
    void zero_grad() { node_->grad = Matrix(); }

    /// Gradient buffer, allocated as zeros on first use.
    Matrix& grad_accumulator() const;

    double item() const;

    bool same_node(const Tensor& o) const { return node_ == o.node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::Node> node_;
    friend class Tape;
};

/// Ordered record of differentiable operations.
///
/// Every op that has at least one gradient-carrying input appends a pullback.
/// backward() runs the pullbacks in reverse order exactly once and then
/// clears the record, so one tape can be reused across steps.
class Tape {
public:
    using Pullback = std::function<void(const Matrix& grad_out, const Matrix& out_value)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// When false, ops produce plain constants and nothing is recorded.
    bool recording() const { return recording_; }
    void set_recording(bool on) { recording_ = on; }

    void set_check_finite(bool on) { check_finite_ = on; }
    bool check_finite() const { return check_finite_; }

    /// Wraps an op result. `pullback` receives d(loss)/d(result) together
    /// with the result value and must accumulate into the inputs'
    /// grad_accumulator(). It is recorded only if
    /// recording is on and some input requires grad.
    Tensor make_result(Matrix value, std::initializer_list<const Tensor*> inputs, Pullback pullback,
                       const char* op_name);
    Tensor make_result(Matrix value, std::span<const Tensor> inputs, Pullback pullback, const char* op_name);

    /// Back-propagates from a 1x1 loss into every reachable leaf.
    void backward(const Tensor& loss);

    void clear() { records_.clear(); }
    std::size_t size() const { return records_.size(); }

private:
    struct Record {
        std::shared_ptr<detail::Node> output;
        Pullback pullback;
    };
    Tensor finish(Matrix value, bool needs_grad, Pullback pullback, const char* op_name);

    std::vector<Record> records_;
    bool recording_ = true;
    bool check_finite_ = false;
};

/// Constant sparse matrix in CSR form.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> offsets;
    std::vector<NodeId> indices;
    std::vector<double> values;

    /// 0/1 adjacency matrix of g.
    static SparseMatrix adjacency(const Graph& g);
    /// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
    static SparseMatrix gcn_normalized(const Graph& g);

    Matrix to_dense() const;
};

/// Running statistics of a batch-norm layer.
struct BatchNormState {
    Matrix running_mean;
    Matrix running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    explicit BatchNormState(std::size_t features = 0)
        : running_mean(1, features, 0.0), running_var(1, features, 1.0) {}
};

/// Segment boundaries: rows [offsets[s], offsets[s+1]) belong to segment s.
using Segments = std::span<const std::size_t>;

Tensor matmul(Tape& t, const Tensor& a, const Tensor& b);
Tensor spmm(Tape& t, const SparseMatrix& s, const Tensor& x);
Tensor add(Tape& t, const Tensor& a, const Tensor& b);
/// x (n x c) plus a 1 x c row broadcast to every row.
Tensor add_bias(Tape& t, const Tensor& x, const Tensor& bias);
Tensor scale(Tape& t, const Tensor& x, double factor);
Tensor concat_cols(Tape& t, std::span<const Tensor> parts);
Tensor rowsum_segments(Tape& t, const Tensor& x, Segments segments);
Tensor segment_mean(Tape& t, const Tensor& x, Segments segments);
/// Column-wise maximum per segment; ties route the gradient to the first row.
Tensor segment_max(Tape& t, const Tensor& x, Segments segments);
/// Column-wise softmax within each segment.
Tensor segment_softmax(Tape& t, const Tensor& x, Segments segments);
Tensor relu(Tape& t, const Tensor& x);
Tensor leaky_relu(Tape& t, const Tensor& x, double slope);
Tensor tanh(Tape& t, const Tensor& x);
Tensor mul(Tape& t, const Tensor& a, const Tensor& b);
/// x (n x c) times a column s (n x 1) broadcast across columns.
Tensor mul_col(Tape& t, const Tensor& x, const Tensor& s);
Tensor log_softmax_rows(Tape& t, const Tensor& x);
/// Normalizes every column over the rows. Train mode uses batch statistics
/// and updates `state`; eval mode uses the running statistics.
Tensor batch_norm(Tape& t, const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                  bool train);
/// Inverted dropout: survivors are scaled by 1/(1-p). Identity when !train.
Tensor dropout(Tape& t, const Tensor& x, double p, bool train, Rng& rng);
Tensor gather_rows(Tape& t, const Tensor& x, std::span<const NodeId> rows);
Tensor sum_all(Tape& t, const Tensor& x);

/// Indices of the m largest values, ordered by descending value with ties
/// broken by ascending index.
std::vector<std::size_t> topk_indices(std::span<const double> values, std::size_t m);

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace gclab::ad
