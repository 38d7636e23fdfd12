#include "sslv3/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace sslv3 {

namespace {

thread_local Tape* g_active_tape = nullptr;

void record_if(const TensorPtr& out, std::vector<TensorPtr> parents, std::function<void()> fn) {
    if (Tape* t = Tape::active()) t->record(out, std::move(parents), std::move(fn));
}

void require_same_shape(const char* op, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape() != b->shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a->shape()) +
                             " vs " + shape_str(b->shape()));
    }
}

// outer extent before `axis`, extent at `axis`, inner extent after it
struct AxisSplit {
    int64_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, int axis) {
    AxisSplit s;
    for (int i = 0; i < static_cast<int>(shape.size()); ++i) {
        if (i < axis) {
            s.outer *= shape[i];
        } else if (i == axis) {
            s.n = shape[i];
        } else {
            s.inner *= shape[i];
        }
    }
    return s;
}

int normalize_axis(const char* op, const Shape& shape, int axis) {
    int r = static_cast<int>(shape.size());
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= r) {
        throw DimensionError(std::string(op) + ": axis out of range for " + shape_str(shape));
    }
    return axis;
}

}  // namespace

int64_t numel(const Shape& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::vector<int64_t> row_major_strides(const Shape& shape) {
    std::vector<int64_t> s(shape.size(), 1);
    for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i) {
        s[i] = s[i + 1] * shape[i + 1];
    }
    return s;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    for (int d : shape_) {
        if (d < 1) throw ValueError("tensor extents must be positive, got " + shape_str(shape_));
    }
    data.assign(static_cast<size_t>(numel(shape_)), 0.0);
}

TensorPtr Tensor::zeros(Shape shape) { return std::make_shared<Tensor>(std::move(shape)); }

TensorPtr Tensor::full(Shape shape, double value) {
    auto t = zeros(std::move(shape));
    std::fill(t->data.begin(), t->data.end(), value);
    return t;
}

TensorPtr Tensor::scalar(double value) { return full({1}, value); }

TensorPtr Tensor::from_data(Shape shape, std::vector<double> values) {
    auto t = zeros(std::move(shape));
    if (static_cast<int64_t>(values.size()) != t->size()) {
        throw DimensionError("from_data: " + std::to_string(values.size()) +
                             " values for shape " + shape_str(t->shape()));
    }
    t->data = std::move(values);
    return t;
}

TensorPtr Tensor::randn(Shape shape, Rng& rng, double stddev) {
    auto t = zeros(std::move(shape));
    for (auto& v : t->data) v = rng.normal() * stddev;
    return t;
}

int Tensor::dim(int axis) const {
    int a = axis < 0 ? rank() + axis : axis;
    if (a < 0 || a >= rank()) {
        throw DimensionError("dim: axis " + std::to_string(axis) + " out of range for " +
                             shape_str(shape_));
    }
    return shape_[a];
}

double Tensor::value() const {
    if (size() != 1) throw DimensionError("value: tensor " + shape_str(shape_) + " is not scalar");
    return data[0];
}

void Tensor::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
    grad.assign(data.size(), 0.0);
}

Tape::Scope::Scope() : prev_(g_active_tape) { g_active_tape = &tape_; }

Tape::Scope::~Scope() { g_active_tape = prev_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(const TensorPtr& out, std::vector<TensorPtr> parents,
                  std::function<void()> backward_fn) {
    out->node_id = static_cast<int>(nodes_.size());
    out->ensure_grad();
    nodes_.push_back({out, std::move(parents), std::move(backward_fn)});
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->node_id < 0 || loss->node_id >= static_cast<int>(nodes_.size()) ||
        nodes_[loss->node_id].out.get() != loss.get()) {
        throw StateError("backward: tensor was not produced under this recorded graph");
    }
    if (loss->size() != 1) {
        throw DimensionError("backward: loss must be scalar, got " + shape_str(loss->shape()));
    }

    // leaves reachable from the recorded segment
    std::vector<Tensor*> leaves;
    for (int i = 0; i <= loss->node_id; ++i) {
        for (const auto& p : nodes_[i].parents) {
            if (p->requires_grad && p->node_id < 0) leaves.push_back(p.get());
        }
    }
    std::sort(leaves.begin(), leaves.end());
    leaves.erase(std::unique(leaves.begin(), leaves.end()), leaves.end());

    std::vector<std::vector<double>> prior(leaves.size());
    for (size_t i = 0; i < leaves.size(); ++i) {
        prior[i] = std::move(leaves[i]->grad);
        leaves[i]->zero_grad();
    }

    for (auto& n : nodes_) n.out->zero_grad();
    loss->grad[0] = 1.0;
    for (int i = loss->node_id; i >= 0; --i) nodes_[i].fn();

    for (size_t i = 0; i < leaves.size(); ++i) {
        for (size_t j = 0; j < prior[i].size(); ++j) leaves[i]->grad[j] += prior[i][j];
    }
}

void backward(const TensorPtr& loss) {
    Tape* t = Tape::active();
    if (!t) throw StateError("backward: no recording in progress");
    t->backward(loss);
}

void check_finite(const Tensor& t, const char* op_name) {
    for (double v : t.data) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(op_name) + ": non-finite value in output");
        }
    }
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("add", a, b);
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] + b->data[i];
    check_finite(*out, "add");
    record_if(out, {a, b}, [out, a, b] {
        const auto& g = out->grad;
        if (a->tracked()) {
            a->ensure_grad();
            for (size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i];
        }
        if (b->tracked()) {
            b->ensure_grad();
            for (size_t i = 0; i < g.size(); ++i) b->grad[i] += g[i];
        }
    });
    return out;
}

TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("sub", a, b);
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] - b->data[i];
    check_finite(*out, "sub");
    record_if(out, {a, b}, [out, a, b] {
        const auto& g = out->grad;
        if (a->tracked()) {
            a->ensure_grad();
            for (size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i];
        }
        if (b->tracked()) {
            b->ensure_grad();
            for (size_t i = 0; i < g.size(); ++i) b->grad[i] -= g[i];
        }
    });
    return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("mul", a, b);
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] * b->data[i];
    check_finite(*out, "mul");
    record_if(out, {a, b}, [out, a, b] {
        const auto& g = out->grad;
        if (a->tracked()) {
            a->ensure_grad();
            for (size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i] * b->data[i];
        }
        if (b->tracked()) {
            b->ensure_grad();
            for (size_t i = 0; i < g.size(); ++i) b->grad[i] += g[i] * a->data[i];
        }
    });
    return out;
}

TensorPtr scale(const TensorPtr& a, double c) {
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] * c;
    check_finite(*out, "scale");
    record_if(out, {a}, [out, a, c] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i] * c;
    });
    return out;
}

TensorPtr add_scalar(const TensorPtr& a, double c) {
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] + c;
    check_finite(*out, "add_scalar");
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i];
    });
    return out;
}

TensorPtr exp(const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = std::exp(a->data[i]);
    check_finite(*out, "exp");
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i] * out->data[i];
    });
    return out;
}

TensorPtr log(const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = std::log(a->data[i]);
    check_finite(*out, "log");
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i] / a->data[i];
    });
    return out;
}

TensorPtr sqrt(const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = std::sqrt(a->data[i]);
    check_finite(*out, "sqrt");
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        // subgradient 0 at the origin kink
        for (size_t i = 0; i < g.size(); ++i) {
            if (out->data[i] > 0.0) a->grad[i] += g[i] * 0.5 / out->data[i];
        }
    });
    return out;
}

TensorPtr tanh(const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = std::tanh(a->data[i]);
    check_finite(*out, "tanh");
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) {
            a->grad[i] += g[i] * (1.0 - out->data[i] * out->data[i]);
        }
    });
    return out;
}

TensorPtr relu(const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] > 0.0 ? a->data[i] : 0.0;
    check_finite(*out, "relu");
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) {
            if (a->data[i] > 0.0) a->grad[i] += g[i];
        }
    });
    return out;
}

TensorPtr gelu(const TensorPtr& a) {
    constexpr double kS = 0.7978845608028654;  // sqrt(2/pi)
    constexpr double kC = 0.044715;
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) {
        double x = a->data[i];
        out->data[i] = 0.5 * x * (1.0 + std::tanh(kS * (x + kC * x * x * x)));
    }
    check_finite(*out, "gelu");
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) {
            double x = a->data[i];
            double u = kS * (x + kC * x * x * x);
            double th = std::tanh(u);
            double sech2 = 1.0 - th * th;
            double local = 0.5 * (1.0 + th) + 0.5 * x * sech2 * kS * (1.0 + 3.0 * kC * x * x);
            a->grad[i] += g[i] * local;
        }
    });
    return out;
}

TensorPtr softplus(const TensorPtr& a) {
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) {
        double x = a->data[i];
        out->data[i] = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
    check_finite(*out, "softplus");
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) {
            double x = a->data[i];
            double sig = x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
            a->grad[i] += g[i] * sig;
        }
    });
    return out;
}

TensorPtr pow_const(const TensorPtr& a, double p) {
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) {
        out->data[i] = p == 0.0 ? 1.0 : std::pow(a->data[i], p);
    }
    check_finite(*out, "pow_const");
    record_if(out, {a}, [out, a, p] {
        if (!a->tracked() || p == 0.0) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) {
            double x = a->data[i];
            if (x == 0.0 && p < 1.0) continue;
            a->grad[i] += g[i] * p * std::pow(x, p - 1.0);
        }
    });
    return out;
}

TensorPtr clamp(const TensorPtr& a, double lo, double hi) {
    if (lo > hi) throw ValueError("clamp: lo > hi");
    auto out = Tensor::zeros(a->shape());
    const int64_t n = out->size();
    for (int64_t i = 0; i < n; ++i) out->data[i] = std::min(std::max(a->data[i], lo), hi);
    check_finite(*out, "clamp");
    record_if(out, {a}, [out, a, lo, hi] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) {
            if (a->data[i] > lo && a->data[i] < hi) a->grad[i] += g[i];
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

TensorPtr linear(const TensorPtr& x, const TensorPtr& w, const TensorPtr& b) {
    if (w->rank() != 2) {
        throw DimensionError("linear: weight must be rank 2, got " + shape_str(w->shape()));
    }
    const int in = w->shape()[0];
    const int out_dim = w->shape()[1];
    if (x->rank() < 1 || x->dim(-1) != in) {
        throw DimensionError("linear: shape mismatch x=" + shape_str(x->shape()) +
                             " vs w=" + shape_str(w->shape()));
    }
    if (b->rank() != 1 || b->shape()[0] != out_dim) {
        throw DimensionError("linear: shape mismatch b=" + shape_str(b->shape()) +
                             " vs w=" + shape_str(w->shape()));
    }
    Shape out_shape = x->shape();
    out_shape.back() = out_dim;
    auto out = Tensor::zeros(out_shape);

    const int64_t rows = x->size() / in;
    const double* xp = x->data.data();
    const double* wp = w->data.data();
    const double* bp = b->data.data();
    double* yp = out->data.data();
    for (int64_t r = 0; r < rows; ++r) {
        double* yr = yp + r * out_dim;
        for (int o = 0; o < out_dim; ++o) yr[o] = bp[o];
        const double* xr = xp + r * in;
        for (int i = 0; i < in; ++i) {
            const double xv = xr[i];
            const double* wr = wp + static_cast<int64_t>(i) * out_dim;
            for (int o = 0; o < out_dim; ++o) yr[o] += xv * wr[o];
        }
    }
    check_finite(*out, "linear");
    record_if(out, {x, w, b}, [out, x, w, b, rows, in, out_dim] {
        const double* gp = out->grad.data();
        if (x->tracked()) {
            x->ensure_grad();
            double* gx = x->grad.data();
            const double* wp = w->data.data();
            for (int64_t r = 0; r < rows; ++r) {
                const double* gr = gp + r * out_dim;
                double* gxr = gx + r * in;
                for (int i = 0; i < in; ++i) {
                    const double* wr = wp + static_cast<int64_t>(i) * out_dim;
                    double s = 0.0;
                    for (int o = 0; o < out_dim; ++o) s += gr[o] * wr[o];
                    gxr[i] += s;
                }
            }
        }
        if (w->tracked()) {
            w->ensure_grad();
            double* gw = w->grad.data();
            const double* xp = x->data.data();
            for (int64_t r = 0; r < rows; ++r) {
                const double* gr = gp + r * out_dim;
                const double* xr = xp + r * in;
                for (int i = 0; i < in; ++i) {
                    const double xv = xr[i];
                    double* gwr = gw + static_cast<int64_t>(i) * out_dim;
                    for (int o = 0; o < out_dim; ++o) gwr[o] += xv * gr[o];
                }
            }
        }
        if (b->tracked()) {
            b->ensure_grad();
            double* gb = b->grad.data();
            for (int64_t r = 0; r < rows; ++r) {
                const double* gr = gp + r * out_dim;
                for (int o = 0; o < out_dim; ++o) gb[o] += gr[o];
            }
        }
    });
    return out;
}

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b, bool transpose_b) {
    if (a->rank() < 2 || b->rank() != a->rank()) {
        throw DimensionError("matmul: ranks " + shape_str(a->shape()) + " vs " +
                             shape_str(b->shape()));
    }
    const int r = a->rank();
    for (int i = 0; i < r - 2; ++i) {
        if (a->shape()[i] != b->shape()[i]) {
            throw DimensionError("matmul: leading dims differ " + shape_str(a->shape()) + " vs " +
                                 shape_str(b->shape()));
        }
    }
    const int m = a->shape()[r - 2];
    const int k = a->shape()[r - 1];
    const int bk = transpose_b ? b->shape()[r - 1] : b->shape()[r - 2];
    const int n = transpose_b ? b->shape()[r - 2] : b->shape()[r - 1];
    if (bk != k) {
        throw DimensionError("matmul: inner dims differ " + shape_str(a->shape()) + " vs " +
                             shape_str(b->shape()));
    }
    Shape out_shape = a->shape();
    out_shape[r - 1] = n;
    auto out = Tensor::zeros(out_shape);

    int64_t mats = 1;
    for (int i = 0; i < r - 2; ++i) mats *= a->shape()[i];
    const int64_t a_sz = static_cast<int64_t>(m) * k;
    const int64_t b_sz = static_cast<int64_t>(k) * n;
    const int64_t o_sz = static_cast<int64_t>(m) * n;

    for (int64_t t = 0; t < mats; ++t) {
        const double* ap = a->data.data() + t * a_sz;
        const double* bp = b->data.data() + t * b_sz;
        double* op = out->data.data() + t * o_sz;
        if (transpose_b) {
            for (int i = 0; i < m; ++i) {
                const double* ar = ap + static_cast<int64_t>(i) * k;
                double* orow = op + static_cast<int64_t>(i) * n;
                for (int j = 0; j < n; ++j) {
                    const double* br = bp + static_cast<int64_t>(j) * k;
                    double s = 0.0;
                    for (int kk = 0; kk < k; ++kk) s += ar[kk] * br[kk];
                    orow[j] = s;
                }
            }
        } else {
            for (int i = 0; i < m; ++i) {
                const double* ar = ap + static_cast<int64_t>(i) * k;
                double* orow = op + static_cast<int64_t>(i) * n;
                for (int kk = 0; kk < k; ++kk) {
                    const double av = ar[kk];
                    const double* br = bp + static_cast<int64_t>(kk) * n;
                    for (int j = 0; j < n; ++j) orow[j] += av * br[j];
                }
            }
        }
    }
    check_finite(*out, "matmul");
    record_if(out, {a, b}, [out, a, b, transpose_b, mats, m, n, k, a_sz, b_sz, o_sz] {
        for (int64_t t = 0; t < mats; ++t) {
            const double* gp = out->grad.data() + t * o_sz;
            const double* ap = a->data.data() + t * a_sz;
            const double* bp = b->data.data() + t * b_sz;
            if (a->tracked()) {
                a->ensure_grad();
                double* ga = a->grad.data() + t * a_sz;
                if (transpose_b) {
                    // out = A B^T, B is [n, k]: dA[i,:] += sum_j g[i,j] B[j,:]
                    for (int i = 0; i < m; ++i) {
                        const double* gr = gp + static_cast<int64_t>(i) * n;
                        double* gar = ga + static_cast<int64_t>(i) * k;
                        for (int j = 0; j < n; ++j) {
                            const double gv = gr[j];
                            const double* br = bp + static_cast<int64_t>(j) * k;
                            for (int kk = 0; kk < k; ++kk) gar[kk] += gv * br[kk];
                        }
                    }
                } else {
                    // dA[i,kk] = dot(g[i,:], B[kk,:])
                    for (int i = 0; i < m; ++i) {
                        const double* gr = gp + static_cast<int64_t>(i) * n;
                        double* gar = ga + static_cast<int64_t>(i) * k;
                        for (int kk = 0; kk < k; ++kk) {
                            const double* br = bp + static_cast<int64_t>(kk) * n;
                            double s = 0.0;
                            for (int j = 0; j < n; ++j) s += gr[j] * br[j];
                            gar[kk] += s;
                        }
                    }
                }
            }
            if (b->tracked()) {
                b->ensure_grad();
                double* gb = b->grad.data() + t * b_sz;
                if (transpose_b) {
                    // dB[j,:] += sum_i g[i,j] A[i,:]
                    for (int i = 0; i < m; ++i) {
                        const double* gr = gp + static_cast<int64_t>(i) * n;
                        const double* ar = ap + static_cast<int64_t>(i) * k;
                        for (int j = 0; j < n; ++j) {
                            const double gv = gr[j];
                            double* gbr = gb + static_cast<int64_t>(j) * k;
                            for (int kk = 0; kk < k; ++kk) gbr[kk] += gv * ar[kk];
                        }
                    }
                } else {
                    // dB[kk,:] += sum_i A[i,kk] g[i,:]
                    for (int i = 0; i < m; ++i) {
                        const double* gr = gp + static_cast<int64_t>(i) * n;
                        const double* ar = ap + static_cast<int64_t>(i) * k;
                        for (int kk = 0; kk < k; ++kk) {
                            const double av = ar[kk];
                            double* gbr = gb + static_cast<int64_t>(kk) * n;
                            for (int j = 0; j < n; ++j) gbr[j] += av * gr[j];
                        }
                    }
                }
            }
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// shape ops
// ---------------------------------------------------------------------------

TensorPtr reshape(const TensorPtr& a, Shape shape) {
    if (numel(shape) != a->size()) {
        throw DimensionError("reshape: cannot view " + shape_str(a->shape()) + " as " +
                             shape_str(shape));
    }
    auto out = Tensor::zeros(std::move(shape));
    out->data = a->data;
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const auto& g = out->grad;
        for (size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i];
    });
    return out;
}

TensorPtr transpose(const TensorPtr& a, const std::vector<int>& perm) {
    const int r = a->rank();
    if (static_cast<int>(perm.size()) != r) {
        throw DimensionError("transpose: permutation size mismatch for " + shape_str(a->shape()));
    }
    std::vector<bool> seen(r, false);
    Shape out_shape(r);
    for (int i = 0; i < r; ++i) {
        if (perm[i] < 0 || perm[i] >= r || seen[perm[i]]) {
            throw ValueError("transpose: invalid permutation");
        }
        seen[perm[i]] = true;
        out_shape[i] = a->shape()[perm[i]];
    }
    auto out = Tensor::zeros(out_shape);
    auto src_strides = row_major_strides(a->shape());
    std::vector<int64_t> gather(r);
    for (int i = 0; i < r; ++i) gather[i] = src_strides[perm[i]];

    const int64_t n = out->size();
    std::vector<int> idx(r, 0);
    for (int64_t flat = 0; flat < n; ++flat) {
        int64_t src = 0;
        for (int i = 0; i < r; ++i) src += static_cast<int64_t>(idx[i]) * gather[i];
        out->data[flat] = a->data[src];
        for (int i = r - 1; i >= 0; --i) {
            if (++idx[i] < out_shape[i]) break;
            idx[i] = 0;
        }
    }
    record_if(out, {a}, [out, a, gather, out_shape, r, n] {
        if (!a->tracked()) return;
        a->ensure_grad();
        std::vector<int> idx(r, 0);
        for (int64_t flat = 0; flat < n; ++flat) {
            int64_t src = 0;
            for (int i = 0; i < r; ++i) src += static_cast<int64_t>(idx[i]) * gather[i];
            a->grad[src] += out->grad[flat];
            for (int i = r - 1; i >= 0; --i) {
                if (++idx[i] < out_shape[i]) break;
                idx[i] = 0;
            }
        }
    });
    return out;
}

TensorPtr broadcast_to(const TensorPtr& a, Shape shape) {
    const int r = a->rank();
    if (static_cast<int>(shape.size()) != r) {
        throw DimensionError("broadcast_to: rank mismatch " + shape_str(a->shape()) + " vs " +
                             shape_str(shape));
    }
    for (int i = 0; i < r; ++i) {
        if (a->shape()[i] != shape[i] && a->shape()[i] != 1) {
            throw DimensionError("broadcast_to: cannot expand " + shape_str(a->shape()) + " to " +
                                 shape_str(shape));
        }
    }
    auto out = Tensor::zeros(shape);
    auto src_strides = row_major_strides(a->shape());
    std::vector<int64_t> eff(r);
    for (int i = 0; i < r; ++i) eff[i] = a->shape()[i] == 1 ? 0 : src_strides[i];

    const int64_t n = out->size();
    std::vector<int> idx(r, 0);
    for (int64_t flat = 0; flat < n; ++flat) {
        int64_t src = 0;
        for (int i = 0; i < r; ++i) src += static_cast<int64_t>(idx[i]) * eff[i];
        out->data[flat] = a->data[src];
        for (int i = r - 1; i >= 0; --i) {
            if (++idx[i] < shape[i]) break;
            idx[i] = 0;
        }
    }
    Shape out_shape = shape;
    record_if(out, {a}, [out, a, eff, out_shape, r, n] {
        if (!a->tracked()) return;
        a->ensure_grad();
        std::vector<int> idx(r, 0);
        for (int64_t flat = 0; flat < n; ++flat) {
            int64_t src = 0;
            for (int i = 0; i < r; ++i) src += static_cast<int64_t>(idx[i]) * eff[i];
            a->grad[src] += out->grad[flat];
            for (int i = r - 1; i >= 0; --i) {
                if (++idx[i] < out_shape[i]) break;
                idx[i] = 0;
            }
        }
    });
    return out;
}

TensorPtr slice(const TensorPtr& a, int axis, int start, int len) {
    axis = normalize_axis("slice", a->shape(), axis);
    const int extent = a->shape()[axis];
    if (len < 1 || start < 0 || start + len > extent) {
        throw DimensionError("slice: range [" + std::to_string(start) + "," +
                             std::to_string(start + len) + ") out of bounds for axis " +
                             std::to_string(axis) + " of " + shape_str(a->shape()));
    }
    Shape out_shape = a->shape();
    out_shape[axis] = len;
    auto out = Tensor::zeros(out_shape);

    auto sp = split_at(a->shape(), axis);
    for (int64_t o = 0; o < sp.outer; ++o) {
        const double* src = a->data.data() + (o * sp.n + start) * sp.inner;
        double* dst = out->data.data() + o * len * sp.inner;
        std::copy(src, src + static_cast<int64_t>(len) * sp.inner, dst);
    }
    record_if(out, {a}, [out, a, sp, start, len] {
        if (!a->tracked()) return;
        a->ensure_grad();
        for (int64_t o = 0; o < sp.outer; ++o) {
            double* dst = a->grad.data() + (o * sp.n + start) * sp.inner;
            const double* src = out->grad.data() + o * len * sp.inner;
            for (int64_t i = 0; i < static_cast<int64_t>(len) * sp.inner; ++i) dst[i] += src[i];
        }
    });
    return out;
}

TensorPtr concat(const std::vector<TensorPtr>& parts, int axis) {
    if (parts.empty()) throw ValueError("concat: no inputs");
    axis = normalize_axis("concat", parts[0]->shape(), axis);
    Shape out_shape = parts[0]->shape();
    int total = 0;
    for (const auto& p : parts) {
        if (p->rank() != parts[0]->rank()) {
            throw DimensionError("concat: rank mismatch");
        }
        for (int i = 0; i < p->rank(); ++i) {
            if (i != axis && p->shape()[i] != out_shape[i]) {
                throw DimensionError("concat: shape mismatch " + shape_str(p->shape()) + " vs " +
                                     shape_str(parts[0]->shape()));
            }
        }
        total += p->shape()[axis];
    }
    out_shape[axis] = total;
    auto out = Tensor::zeros(out_shape);

    auto sp = split_at(out_shape, axis);
    int offset = 0;
    for (const auto& p : parts) {
        const int plen = p->shape()[axis];
        for (int64_t o = 0; o < sp.outer; ++o) {
            const double* src = p->data.data() + o * plen * sp.inner;
            double* dst = out->data.data() + (o * sp.n + offset) * sp.inner;
            std::copy(src, src + static_cast<int64_t>(plen) * sp.inner, dst);
        }
        offset += plen;
    }
    record_if(out, parts, [out, parts, sp, axis] {
        int offset = 0;
        for (const auto& p : parts) {
            const int plen = p->shape()[axis];
            if (p->tracked()) {
                p->ensure_grad();
                for (int64_t o = 0; o < sp.outer; ++o) {
                    double* dst = p->grad.data() + o * plen * sp.inner;
                    const double* src = out->grad.data() + (o * sp.n + offset) * sp.inner;
                    for (int64_t i = 0; i < static_cast<int64_t>(plen) * sp.inner; ++i) {
                        dst[i] += src[i];
                    }
                }
            }
            offset += plen;
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

TensorPtr sum(const TensorPtr& a, int axis) {
    axis = normalize_axis("sum", a->shape(), axis);
    Shape out_shape = a->shape();
    out_shape.erase(out_shape.begin() + axis);
    if (out_shape.empty()) out_shape = {1};
    auto out = Tensor::zeros(out_shape);

    auto sp = split_at(a->shape(), axis);
    for (int64_t o = 0; o < sp.outer; ++o) {
        for (int64_t j = 0; j < sp.n; ++j) {
            const double* src = a->data.data() + (o * sp.n + j) * sp.inner;
            double* dst = out->data.data() + o * sp.inner;
            for (int64_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
        }
    }
    check_finite(*out, "sum");
    record_if(out, {a}, [out, a, sp] {
        if (!a->tracked()) return;
        a->ensure_grad();
        for (int64_t o = 0; o < sp.outer; ++o) {
            const double* src = out->grad.data() + o * sp.inner;
            for (int64_t j = 0; j < sp.n; ++j) {
                double* dst = a->grad.data() + (o * sp.n + j) * sp.inner;
                for (int64_t i = 0; i < sp.inner; ++i) dst[i] += src[i];
            }
        }
    });
    return out;
}

TensorPtr mean(const TensorPtr& a, int axis) {
    axis = normalize_axis("mean", a->shape(), axis);
    return scale(sum(a, axis), 1.0 / a->shape()[axis]);
}

TensorPtr sum_all(const TensorPtr& a) {
    auto out = Tensor::zeros({1});
    double s = 0.0;
    for (double v : a->data) s += v;
    out->data[0] = s;
    check_finite(*out, "sum_all");
    record_if(out, {a}, [out, a] {
        if (!a->tracked()) return;
        a->ensure_grad();
        const double g = out->grad[0];
        for (auto& v : a->grad) v += g;
    });
    return out;
}

TensorPtr mean_all(const TensorPtr& a) { return scale(sum_all(a), 1.0 / a->size()); }

TensorPtr take_index(const TensorPtr& x, const std::vector<int>& idx) {
    if (x->rank() != 2) {
        throw DimensionError("take_index: expected rank 2, got " + shape_str(x->shape()));
    }
    const int rows = x->shape()[0];
    const int cols = x->shape()[1];
    if (static_cast<int>(idx.size()) != rows) {
        throw DimensionError("take_index: index count " + std::to_string(idx.size()) +
                             " vs rows " + std::to_string(rows));
    }
    for (int r = 0; r < rows; ++r) {
        if (idx[r] < 0 || idx[r] >= cols) {
            throw ValueError("take_index: index " + std::to_string(idx[r]) +
                             " out of range [0," + std::to_string(cols) + ")");
        }
    }
    auto out = Tensor::zeros({rows});
    for (int r = 0; r < rows; ++r) out->data[r] = x->data[static_cast<int64_t>(r) * cols + idx[r]];
    record_if(out, {x}, [out, x, idx, rows, cols] {
        if (!x->tracked()) return;
        x->ensure_grad();
        for (int r = 0; r < rows; ++r) {
            x->grad[static_cast<int64_t>(r) * cols + idx[r]] += out->grad[r];
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// normalization
// ---------------------------------------------------------------------------

TensorPtr softmax(const TensorPtr& a, int axis) {
    axis = normalize_axis("softmax", a->shape(), axis);
    auto out = Tensor::zeros(a->shape());
    auto sp = split_at(a->shape(), axis);
    for (int64_t o = 0; o < sp.outer; ++o) {
        for (int64_t i = 0; i < sp.inner; ++i) {
            const int64_t base = o * sp.n * sp.inner + i;
            double mx = a->data[base];
            for (int64_t j = 1; j < sp.n; ++j) {
                mx = std::max(mx, a->data[base + j * sp.inner]);
            }
            double z = 0.0;
            for (int64_t j = 0; j < sp.n; ++j) {
                double e = std::exp(a->data[base + j * sp.inner] - mx);
                out->data[base + j * sp.inner] = e;
                z += e;
            }
            const double inv = 1.0 / z;
            for (int64_t j = 0; j < sp.n; ++j) out->data[base + j * sp.inner] *= inv;
        }
    }
    check_finite(*out, "softmax");
    record_if(out, {a}, [out, a, sp] {
        if (!a->tracked()) return;
        a->ensure_grad();
        for (int64_t o = 0; o < sp.outer; ++o) {
            for (int64_t i = 0; i < sp.inner; ++i) {
                const int64_t base = o * sp.n * sp.inner + i;
                double dot = 0.0;
                for (int64_t j = 0; j < sp.n; ++j) {
                    const int64_t p = base + j * sp.inner;
                    dot += out->grad[p] * out->data[p];
                }
                for (int64_t j = 0; j < sp.n; ++j) {
                    const int64_t p = base + j * sp.inner;
                    a->grad[p] += out->data[p] * (out->grad[p] - dot);
                }
            }
        }
    });
    return out;
}

TensorPtr log_softmax(const TensorPtr& a) {
    const int n = a->dim(-1);
    const int64_t rows = a->size() / n;
    auto out = Tensor::zeros(a->shape());
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = a->data.data() + r * n;
        double* yr = out->data.data() + r * n;
        double mx = xr[0];
        for (int j = 1; j < n; ++j) mx = std::max(mx, xr[j]);
        double z = 0.0;
        for (int j = 0; j < n; ++j) z += std::exp(xr[j] - mx);
        const double lse = mx + std::log(z);
        for (int j = 0; j < n; ++j) yr[j] = xr[j] - lse;
    }
    check_finite(*out, "log_softmax");
    record_if(out, {a}, [out, a, rows, n] {
        if (!a->tracked()) return;
        a->ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const double* gr = out->grad.data() + r * n;
            const double* yr = out->data.data() + r * n;
            double gsum = 0.0;
            for (int j = 0; j < n; ++j) gsum += gr[j];
            double* gx = a->grad.data() + r * n;
            for (int j = 0; j < n; ++j) gx[j] += gr[j] - std::exp(yr[j]) * gsum;
        }
    });
    return out;
}

TensorPtr layer_norm(const TensorPtr& x, const TensorPtr& gain, const TensorPtr& bias,
                     double eps) {
    const int n = x->dim(-1);
    if (gain->rank() != 1 || gain->shape()[0] != n || bias->rank() != 1 ||
        bias->shape()[0] != n) {
        throw DimensionError("layer_norm: affine params must be [" + std::to_string(n) + "]");
    }
    const int64_t rows = x->size() / n;
    auto out = Tensor::zeros(x->shape());
    // normalized values are re-derived in backward; keep rstd per row
    auto rstd = std::make_shared<std::vector<double>>(rows);
    auto mu = std::make_shared<std::vector<double>>(rows);
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = x->data.data() + r * n;
        double m = 0.0;
        for (int j = 0; j < n; ++j) m += xr[j];
        m /= n;
        double var = 0.0;
        for (int j = 0; j < n; ++j) {
            const double d = xr[j] - m;
            var += d * d;
        }
        var /= n;
        const double rs = 1.0 / std::sqrt(var + eps);
        (*mu)[r] = m;
        (*rstd)[r] = rs;
        double* yr = out->data.data() + r * n;
        for (int j = 0; j < n; ++j) yr[j] = (xr[j] - m) * rs * gain->data[j] + bias->data[j];
    }
    check_finite(*out, "layer_norm");
    record_if(out, {x, gain, bias}, [out, x, gain, bias, rows, n, rstd, mu] {
        for (int64_t r = 0; r < rows; ++r) {
            const double* gr = out->grad.data() + r * n;
            const double* xr = x->data.data() + r * n;
            const double m = (*mu)[r];
            const double rs = (*rstd)[r];
            if (gain->tracked() || bias->tracked()) {
                if (gain->tracked()) gain->ensure_grad();
                if (bias->tracked()) bias->ensure_grad();
                for (int j = 0; j < n; ++j) {
                    const double xhat = (xr[j] - m) * rs;
                    if (gain->tracked()) gain->grad[j] += gr[j] * xhat;
                    if (bias->tracked()) bias->grad[j] += gr[j];
                }
            }
            if (x->tracked()) {
                x->ensure_grad();
                double s1 = 0.0, s2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double dxhat = gr[j] * gain->data[j];
                    const double xhat = (xr[j] - m) * rs;
                    s1 += dxhat;
                    s2 += dxhat * xhat;
                }
                s1 /= n;
                s2 /= n;
                double* gx = x->grad.data() + r * n;
                for (int j = 0; j < n; ++j) {
                    const double dxhat = gr[j] * gain->data[j];
                    const double xhat = (xr[j] - m) * rs;
                    gx[j] += (dxhat - s1 - xhat * s2) * rs;
                }
            }
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// temporal convolution
// ---------------------------------------------------------------------------

TensorPtr conv1d_padded(const TensorPtr& x, const TensorPtr& kernel, PadSide pad_side) {
    if (kernel->rank() != 1) {
        throw DimensionError("conv1d_padded: kernel must be rank 1, got " +
                             shape_str(kernel->shape()));
    }
    const int ks = kernel->shape()[0];
    if (ks < 1) throw ValueError("conv1d_padded: kernel size must be >= 1");
    const int n = x->dim(-1);
    const int64_t rows = x->size() / n;
    auto out = Tensor::zeros(x->shape());
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = x->data.data() + r * n;
        double* yr = out->data.data() + r * n;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < ks; ++j) {
                const int src = pad_side == PadSide::before ? i - (ks - 1) + j : i + j;
                if (src >= 0 && src < n) s += kernel->data[j] * xr[src];
            }
            yr[i] = s;
        }
    }
    check_finite(*out, "conv1d_padded");
    record_if(out, {x, kernel}, [out, x, kernel, pad_side, rows, n, ks] {
        for (int64_t r = 0; r < rows; ++r) {
            const double* gr = out->grad.data() + r * n;
            const double* xr = x->data.data() + r * n;
            if (x->tracked()) x->ensure_grad();
            if (kernel->tracked()) kernel->ensure_grad();
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < ks; ++j) {
                    const int src = pad_side == PadSide::before ? i - (ks - 1) + j : i + j;
                    if (src < 0 || src >= n) continue;
                    if (x->tracked()) x->grad[r * n + src] += kernel->data[j] * gr[i];
                    if (kernel->tracked()) kernel->grad[j] += xr[src] * gr[i];
                }
            }
        }
    });
    return out;
}

std::vector<int> argmax_last(const TensorPtr& x) {
    const int n = x->dim(-1);
    const int64_t rows = x->size() / n;
    std::vector<int> out(rows);
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = x->data.data() + r * n;
        int best = 0;
        for (int j = 1; j < n; ++j) {
            if (xr[j] > xr[best]) best = j;
        }
        out[r] = best;
    }
    return out;
}

}  // namespace sslv3
