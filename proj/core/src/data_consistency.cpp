#include "sbmri/data_consistency.hpp"

#include <cmath>
#include <string>

namespace sbmri {

namespace {

// op(x) = A^H A x + lambda x
ComplexImage normal_op(const ComplexImage& x, const AcquisitionModel& model, double lambda) {
    ComplexImage out = adjoint_A(forward_A(x, model.csm, model.mask), model.csm, model.mask);
    if (lambda != 0) out.axpy(lambda, x);
    return out;
}

} // namespace

DCResult cg_correct(const ComplexImage& x_init, const KSpaceData& y,
                    const AcquisitionModel& model, const DCConfig& cfg) {
    if (!x_init.all_finite()) throw UsageError("cg_correct: non-finite initial image");
    if (cfg.lambda < 0) throw ConfigError("cg_correct: lambda must be >= 0");
    if (cfg.lambda == 0 && model.mask.count() == 0)
        throw ConfigError("cg_correct: singular system (lambda = 0 and empty mask)");

    DCResult res;
    res.x = x_init;
    if (cfg.max_iters == 0) return res;

    // rhs = A^H y + lambda x_init
    ComplexImage rhs = adjoint_A(y, model.csm, model.mask);
    const double rhs_scale = rhs.norm();
    rhs.axpy(cfg.lambda, x_init);

    ComplexImage x = x_init;
    ComplexImage r = rhs - normal_op(x, model, cfg.lambda);
    ComplexImage p = r;
    double rs = std::real(dot(r, r));

    ComplexImage best = x;
    double best_res = std::sqrt(rs);
    res.residual_log.push_back(best_res);
    const double stop = cfg.tol * rhs_scale;

    for (std::size_t it = 0; it < cfg.max_iters && std::sqrt(rs) > stop; ++it) {
        ComplexImage ap = normal_op(p, model, cfg.lambda);
        const double denom = std::real(dot(p, ap));
        if (!(denom > 0)) break; // numerically exhausted Krylov space
        const double step = rs / denom;
        x.axpy(step, p);
        r.axpy(-step, ap);
        const double rs_new = std::real(dot(r, r));
        if (!std::isfinite(rs_new))
            throw NumericalError("cg_correct: non-finite residual at iteration " +
                                 std::to_string(it));
        const double rn = std::sqrt(rs_new);
        res.residual_log.push_back(rn);
        if (rn < best_res) { best_res = rn; best = x; }
        p *= rs_new / rs;
        p += r;
        rs = rs_new;
    }
    res.x = std::move(best);
    if (!res.x.all_finite()) throw NumericalError("cg_correct: non-finite output");
    return res;
}

double residual(const ComplexImage& x, const KSpaceData& y, const AcquisitionModel& model) {
    KSpaceData ax = forward_A(x, model.csm, model.mask);
    double s = 0;
    for (std::size_t c = 0; c < y.coils.size(); ++c)
        for (std::size_t i = 0; i < y.coils[c].size(); ++i)
            if (model.mask.keep[i]) s += std::norm(y.coils[c][i] - ax.coils[c][i]);
    return std::sqrt(s);
}

} // namespace sbmri
