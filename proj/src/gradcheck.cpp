#include "sslv3/gradcheck.hpp"

#include <cmath>

namespace sslv3 {

std::vector<std::string> GradCheckReport::flagged_names() const {
    std::vector<std::string> out;
    for (const auto& p : params) {
        if (p.flagged) out.push_back(p.name);
    }
    return out;
}

namespace {

double eval_plain(const LossFn& f) {
    TensorPtr out = f();
    double v = out->value();
    if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
    return v;
}

}  // namespace

GradCheckReport grad_check(const LossFn& f, ParameterStore& store, double h, double tol,
                           double denom_floor) {
    if (h <= 0.0) throw ValueError("grad_check: step size must be positive");

    // analytic pass
    store.zero_grad();
    std::map<std::string, std::vector<double>> analytic;
    {
        Tape::Scope scope;
        TensorPtr loss = f();
        if (!std::isfinite(loss->value())) throw NumericError("grad_check: loss is not finite");
        backward(loss);
        for (const auto& [name, e] : store.entries()) analytic[name] = e.tensor->grad;
    }

    GradCheckReport report;
    report.tol = tol;
    for (const auto& [name, e] : store.entries()) {
        ParamCheck pc;
        pc.name = name;
        auto& theta = e.tensor->data;
        const auto& ga = analytic[name];
        for (int64_t i = 0; i < e.tensor->size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + h;
            const double fp = eval_plain(f);
            theta[i] = saved - h;
            const double fm = eval_plain(f);
            theta[i] = saved;
            const double numeric = (fp - fm) / (2.0 * h);
            const double denom =
                std::max({std::fabs(ga[i]), std::fabs(numeric), denom_floor});
            const double rel = std::fabs(ga[i] - numeric) / denom;
            if (rel > pc.max_rel_err || pc.worst_index < 0) {
                pc.max_rel_err = rel;
                pc.worst_index = i;
                pc.analytic = ga[i];
                pc.numeric = numeric;
            }
        }
        pc.flagged = pc.max_rel_err >= tol;
        report.max_rel_err = std::max(report.max_rel_err, pc.max_rel_err);
        report.params.push_back(std::move(pc));
    }
    return report;
}

}  // namespace sslv3
