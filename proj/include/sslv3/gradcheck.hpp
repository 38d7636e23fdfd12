#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sslv3/param_store.hpp"
#include "sslv3/tensor.hpp"

namespace sslv3 {

struct ParamCheck {
    std::string name;
    double max_rel_err = 0.0;
    int64_t worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
    bool flagged = false;  // max_rel_err >= tol
};

struct GradCheckReport {
    std::vector<ParamCheck> params;
    double max_rel_err = 0.0;
    double tol = 0.0;

    bool all_within_tol() const {
        for (const auto& p : params) {
            if (p.flagged) return false;
        }
        return true;
    }
    std::vector<std::string> flagged_names() const;
};

/// Scalar loss as a function of the store's current parameter values. The
/// callable must be deterministic: it is evaluated once under recording for
/// the analytic gradients and many times without recording for the central
/// differences (f(th+h) - f(th-h)) / 2h.
using LossFn = std::function<TensorPtr()>;

/// Relative error uses |a-n| / max(|a|, |n|, floor) so that near-zero
/// gradients are compared against finite-difference noise, not divided by it.
GradCheckReport grad_check(const LossFn& f, ParameterStore& store, double h, double tol,
                           double denom_floor = 1e-5);

}  // namespace sslv3
