#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sslv3/error.hpp"
#include "sslv3/rng.hpp"

namespace sslv3 {

using Shape = std::vector<int>;

int64_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);
std::vector<int64_t> row_major_strides(const Shape& shape);

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

/// Dense row-major f64 tensor. A tensor is either a leaf (parameter or
/// constant input) or the output of an op recorded on the active tape;
/// `grad` is allocated for parameters and for recorded nodes.
class Tensor {
  public:
    std::vector<double> data;
    std::vector<double> grad;
    int node_id = -1;            // position on the tape that produced it
    bool requires_grad = false;  // true for registered parameters

    Tensor() = default;
    explicit Tensor(Shape shape);

    static TensorPtr zeros(Shape shape);
    static TensorPtr full(Shape shape, double value);
    static TensorPtr scalar(double value);
    static TensorPtr from_data(Shape shape, std::vector<double> values);
    static TensorPtr randn(Shape shape, Rng& rng, double stddev = 1.0);

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int64_t size() const { return static_cast<int64_t>(data.size()); }
    int dim(int axis) const;  // supports negative axes

    /// Scalar value of a single-element tensor.
    double value() const;

    void ensure_grad();
    void zero_grad();

    /// A gradient should be accumulated into this tensor during backward.
    bool tracked() const { return requires_grad || node_id >= 0; }

  private:
    Shape shape_;
};

/// Reverse-mode tape. Ops executed while a Tape::Scope is alive append a
/// backward closure; Tape::backward replays them in reverse. The tape (and
/// with it the recorded graph) is freed when the scope ends.
class Tape {
  public:
    class Scope;

    static Tape* active();
    static bool recording() { return active() != nullptr; }

    void record(const TensorPtr& out, std::vector<TensorPtr> parents,
                std::function<void()> backward_fn);

    /// Seeds d(loss)=1 and propagates. Each call computes this run's leaf
    /// totals from zero and adds them to the existing parameter gradients,
    /// so repeated calls accumulate bit-identical increments.
    void backward(const TensorPtr& loss);

    size_t node_count() const { return nodes_.size(); }

  private:
    struct Node {
        TensorPtr out;
        std::vector<TensorPtr> parents;
        std::function<void()> fn;
    };
    std::vector<Node> nodes_;
};

/// RAII recording scope: ops executed while alive are recorded on its tape.
class Tape::Scope {
  public:
    Scope();
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;
    Tape& tape() { return tape_; }

  private:
    Tape tape_;
    Tape* prev_;
};

/// Runs backward from `loss` on the tape that recorded it.
void backward(const TensorPtr& loss);

// ---- elementwise ----
TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(const TensorPtr& a, double c);
TensorPtr add_scalar(const TensorPtr& a, double c);
TensorPtr exp(const TensorPtr& a);
TensorPtr log(const TensorPtr& a);
TensorPtr sqrt(const TensorPtr& a);
TensorPtr tanh(const TensorPtr& a);
TensorPtr relu(const TensorPtr& a);
TensorPtr gelu(const TensorPtr& a);
TensorPtr softplus(const TensorPtr& a);
TensorPtr pow_const(const TensorPtr& a, double p);
TensorPtr clamp(const TensorPtr& a, double lo, double hi);

// ---- linear algebra ----
/// y = x . w + b over the last axis: x [..., in], w [in, out], b [out].
TensorPtr linear(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b);
/// Batched matmul over the last two axes; leading axes must match exactly.
/// transpose_b treats b as [..., N, K] instead of [..., K, N].
TensorPtr matmul(const TensorPtr& a, const TensorPtr& b, bool transpose_b = false);

// ---- shape ----
TensorPtr reshape(const TensorPtr& a, Shape shape);
TensorPtr transpose(const TensorPtr& a, const std::vector<int>& perm);
TensorPtr broadcast_to(const TensorPtr& a, Shape shape);
TensorPtr slice(const TensorPtr& a, int axis, int start, int len);
TensorPtr concat(const std::vector<TensorPtr>& parts, int axis);

// ---- reductions ----
TensorPtr sum(const TensorPtr& a, int axis);
TensorPtr mean(const TensorPtr& a, int axis);
TensorPtr sum_all(const TensorPtr& a);
TensorPtr mean_all(const TensorPtr& a);

// ---- row selection ----
/// x [rows, cols], idx[rows] -> [rows]: picks x[r, idx[r]].
TensorPtr take_index(const TensorPtr& x, const std::vector<int>& idx);

// ---- normalization / activations over the last axis ----
TensorPtr softmax(const TensorPtr& a, int axis);
TensorPtr log_softmax(const TensorPtr& a);
/// (x - mean) / sqrt(var + eps) * gain + bias over the last axis.
TensorPtr layer_norm(const TensorPtr& x, const TensorPtr& gain, const TensorPtr& bias,
                     double eps = 1e-5);

// ---- temporal convolution ----
enum class PadSide { before, after };

/// Length-preserving 1-D convolution over the last axis with ks-1 zeros of
/// padding on one side. before: y_i = sum_j k_j x_{i-(ks-1)+j} (past window);
/// after: y_i = sum_j k_j x_{i+j} (future window).
TensorPtr conv1d_padded(const TensorPtr& x, const TensorPtr& kernel, PadSide pad_side);

/// Argmax over the last axis, lowest index on ties. Not recorded.
std::vector<int> argmax_last(const TensorPtr& x);

/// Throws NumericError if any element of t is NaN or infinite.
void check_finite(const Tensor& t, const char* op_name);

}  // namespace sslv3
