#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>

#include "field_node.hpp"

namespace ccnv::detail {

namespace {

constexpr double kAbsTol = 1e-10;
// only matters once |result| > 100, where 1e-10 absolute is below round-off
constexpr double kRelTol = 1e-12;
// 2^40 halvings of the interval, the same resolution as a depth-40 bisection.
constexpr std::size_t kMaxIntervals = 2000;

struct Integrand {
    const Node* node;
    int coord;
    double buf[kMaxDimension];
    std::size_t dim;
    std::exception_ptr error;
};

double trampoline(double z, void* raw) {
    auto* s = static_cast<Integrand*>(raw);
    if (s->error) return 0.0;
    s->buf[s->coord] = z;
    try {
        return evaluate(*s->node, std::span<const double>(s->buf, s->dim));
    } catch (...) {
        s->error = std::current_exception();
        return 0.0;
    }
}

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

}  // namespace

double integrate(const Node& integrand, int coord, double lower, std::span<const double> p) {
    static std::once_flag handler_once;
    std::call_once(handler_once, [] { gsl_set_error_handler_off(); });

    double upper = p[coord];
    if (upper == lower) return 0.0;

    Integrand s{&integrand, coord, {}, p.size(), nullptr};
    for (std::size_t i = 0; i < p.size(); ++i) s.buf[i] = p[i];
    gsl_function fn{&trampoline, &s};

    // nested quadrature fields re-enter here, so each call owns its workspace
    std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
        gsl_integration_workspace_alloc(kMaxIntervals));
    double r = 0.0, err = 0.0;
    int status = gsl_integration_qag(&fn, lower, upper, kAbsTol, kRelTol, kMaxIntervals,
                                     GSL_INTEG_GAUSS21, ws.get(), &r, &err);
    if (s.error) std::rethrow_exception(s.error);
    if (status != GSL_SUCCESS || !std::isfinite(r) || !(err <= std::max(kAbsTol, kRelTol * std::abs(r))))
        throw QuadratureError("quadrature over " + coordinate_label(coord) + " on [" +
                              std::to_string(lower) + ", " + std::to_string(upper) +
                              "] did not converge (error estimate " + sci(err) + ", " + gsl_strerror(status) + ")");
    return r;
}

}  // namespace ccnv::detail
