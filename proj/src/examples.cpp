#include "ccnv/examples.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ccnv {

namespace {

ScalarField U() { return ScalarField::coordinate(kU); }
ScalarField V() { return ScalarField::coordinate(kV); }
ScalarField x(int e) { return ScalarField::coordinate(kX3 + e); }

CoordMask xe(const Chart& c) { return c.transverse(); }
CoordMask uxe(const Chart& c) { return c.transverse() | bit(kU); }
CoordMask xn(const Chart& c) { return c.transverse() & ~bit(kX3); }

void require_eps(double eps) {
    if (eps == 0.0 || !std::isfinite(eps)) throw Error("eps must be a nonzero number");
}

Region region_for(const std::optional<Region>& r, const Chart& c, bool needs_u_nonzero) {
    Region out = r ? *r : Region::standard(c);
    if (out.dimension() != c.dimension()) throw Error("region dimension does not match the chart");
    if (needs_u_nonzero && !out.u_excludes_zero())
        throw DomainError("this example carries 1/u: the region must exclude u = 0");
    return out;
}

// Leg slots 4..D; empty means all zero.
std::vector<ScalarField> leg_slots(const std::vector<ScalarField>& given, const Chart& c, CoordMask mask,
                                   const std::string& name) {
    int R = c.transverse_count() - 1;
    if (given.empty()) return std::vector<ScalarField>(R);
    if (static_cast<int>(given.size()) != R)
        throw Error(name + " needs " + std::to_string(R) + " components, got " + std::to_string(given.size()));
    for (int k = 0; k < R; ++k) require_mask(given[k], mask, name + std::to_string(k + 4));
    return given;
}

// Profile rows written in (x3, x^n), evaluated along x3 - eps u.
TransverseFrame shifted_profile(const std::optional<TransverseFrame>& profile, const Chart& c, double eps) {
    int T = c.transverse_count();
    if (!profile) return TransverseFrame::identity(T);
    if (profile->size() != T) throw Error("profile must be " + std::to_string(T) + " square");
    std::vector<std::vector<ScalarField>> rows(T, std::vector<ScalarField>(T));
    for (int i = 0; i < T; ++i)
        for (int e = i; e < T; ++e) {
            require_mask((*profile)(i, e), xe(c), frame_entry_name(i, e), "profiles depend on (x3 - eps u, x^n)");
            rows[i][e] = shift((*profile)(i, e), eps);
        }
    return TransverseFrame(rows);
}

ExampleTriple finish(const Chart& c, ScalarField H, std::vector<ScalarField> W, TransverseFrame frame,
                     KillingCandidate X, ScalarField norm, const Region& region) {
    CCNVMetric m(c, std::move(H), std::move(W), std::move(frame));
    validate_frame(m, sample_points(region, 64, 1));
    return {m, std::move(X), std::move(norm), {}};
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

ExampleTriple build_example_I(const ExampleISpec& s) {
    const Chart& c = s.chart;
    require_eps(s.eps);
    Region region = region_for(s.region, c, true);
    require_mask(s.F2, uxe(c), "F2");
    require_mask(s.A, xe(c), "A", "A depends on (x3 - eps u, x^n)");
    auto B = leg_slots(s.B, c, xe(c), "B");
    TransverseFrame m = shifted_profile(s.profile, c, s.eps);
    const double eps = s.eps;
    int T = c.transverse_count();

    ScalarField u = U();
    ScalarField m33 = m(0, 0);
    ScalarField m33sq = m33 * m33;
    ScalarField F2u = differentiate(s.F2, kU);
    ScalarField F23 = differentiate(s.F2, kX3);
    ScalarField S = differentiate(u * F2u, kU) + eps * u * differentiate(F23, kU) +
                    eps * eps * u * differentiate(m33sq, kU);
    ScalarField H = (-characteristic_integral(S, eps) + shift(s.A, eps)) / u;

    std::vector<ScalarField> W(T);
    W[0] = -(H + F2u) / eps - F23 - eps * m33sq;
    ScalarField inner = differentiate(u * s.F2, kU) + eps * u * F23 + eps * eps * u * m33sq;
    for (int n = 1; n < T; ++n) {
        ScalarField Tn = differentiate(inner, kX3 + n) + eps * m(0, n) * m33;
        W[n] = (-characteristic_integral(Tn, eps) + shift(B[n - 1], eps)) / u;
    }
    ScalarField F3 = eps * u * m33;
    ScalarField norm = -2.0 * u * V() + 2.0 * u * s.F2 + F3 * F3;
    return finish(c, H, W, m, {u, s.F2, F3}, norm, region);
}

ExampleTriple build_example_I_separable(const ExampleISeparableSpec& s) {
    const Chart& c = s.chart;
    require_eps(s.eps);
    Region region = region_for(s.region, c, true);
    const int T = c.transverse_count();
    const double eps = s.eps;

    std::vector<double> p = s.p.empty() ? std::vector<double>(T, 0.0) : s.p;
    if (static_cast<int>(p.size()) != T) throw Error("p needs " + std::to_string(T) + " exponents");
    const double p3 = p[0];
    if (2.0 * p3 + 1.0 == 0.0) throw Error("2 p3 + 1 must be nonzero");
    std::vector<ScalarField> h = s.h;
    if (h.empty()) {
        h.assign(T, 0.0);
        h[0] = 1.0;
    }
    if (static_cast<int>(h.size()) != T) throw Error("h needs " + std::to_string(T) + " components");
    for (int k = 0; k < T; ++k) require_mask(h[k], xn(c), "h" + std::to_string(k + 3));
    require_mask(s.g, xn(c) | bit(kU), "g");
    require_mask(s.A, xe(c), "A", "A depends on (x3 - eps u, x^n)");
    auto B = leg_slots(s.B, c, xe(c), "B");

    ScalarField u = U();
    ScalarField y = x(0) - eps * u;
    auto ypow = [&](double q) { return q == 0.0 ? ScalarField(1.0) : pow(y, q); };

    std::vector<std::vector<ScalarField>> rows(T, std::vector<ScalarField>(T));
    for (int e = 0; e < T; ++e) rows[0][e] = ypow(p[e]) * h[e];
    if (s.rest) {
        if (s.rest->size() != T - 1) throw Error("rest must be " + std::to_string(T - 1) + " square");
        for (int n = 1; n < T; ++n)
            for (int e = n; e < T; ++e) {
                require_mask((*s.rest)(n - 1, e - 1), xe(c), frame_entry_name(n, e),
                             "profiles depend on (x3 - eps u, x^n)");
                rows[n][e] = shift((*s.rest)(n - 1, e - 1), eps);
            }
    } else {
        for (int n = 1; n < T; ++n) rows[n][n] = 1.0;
    }
    TransverseFrame m(rows);

    ScalarField h3sq = h[0] * h[0];
    ScalarField F2 = -eps / (2 * p3 + 1) * ypow(2 * p3 + 1) * h3sq + s.g;
    // y^(2p3-1) (x3 - eps (p3+1) u) = y^(2p3) - eps p3 u y^(2p3-1)
    ScalarField bracket = ypow(2 * p3);
    if (p3 != 0.0) bracket = bracket - eps * p3 * u * ypow(2 * p3 - 1);
    ScalarField As = shift(s.A, eps);
    ScalarField H = -eps * eps * bracket * h3sq - differentiate(s.g, kU) + As / u;

    std::vector<ScalarField> W(T);
    W[0] = -As / (eps * u);
    if (p3 != 0.0) W[0] = -eps * eps * p3 * u * ypow(2 * p3 - 1) * h3sq + W[0];
    // 2 y^p3 (x3 - eps (p3 + 3/2) u) / (2p3+1) = 2 y^(p3+1) / (2p3+1) - eps u y^p3
    ScalarField lead = 2.0 / (2 * p3 + 1) * ypow(p3 + 1) - eps * u * ypow(p3);
    for (int n = 1; n < T; ++n) {
        W[n] = eps * ypow(p3) * h[0] * (lead * differentiate(h[0], kX3 + n) - ypow(p[n]) * h[n]) -
               differentiate(s.g, kX3 + n) + shift(B[n - 1], eps) / u;
    }
    ScalarField F3 = eps * u * m(0, 0);
    ScalarField norm = -2.0 * u * V() + 2.0 * u * F2 + F3 * F3;
    return finish(c, H, W, m, {u, F2, F3}, norm, region);
}

ExampleTriple build_example_II(const ExampleIISpec& s) {
    const Chart& c = s.chart;
    require_eps(s.eps);
    Region region = region_for(s.region, c, false);
    require_mask(s.H, uxe(c), "H");
    require_mask(s.F2, xe(c), "F2", "F2 depends on (x3 - eps u, x^n)");
    require_mask(s.f, xe(c), "f");
    auto E = leg_slots(s.E, c, xe(c), "E");
    TransverseFrame m = shifted_profile(s.profile, c, s.eps);
    const double eps = s.eps;
    int T = c.transverse_count();

    ScalarField H3 = differentiate(s.H, kX3);
    ScalarField F2 = shift(s.F2, eps);
    std::vector<ScalarField> W(T);
    W[0] = antiderivative(H3, kU, 0.0) + (F2 + s.f) / eps;
    for (int n = 1; n < T; ++n) {
        ScalarField Ln = differentiate(s.H, kX3 + n) + eps * antiderivative(differentiate(H3, kX3 + n), kU, 0.0) +
                         differentiate(s.f, kX3 + n);
        W[n] = characteristic_integral(Ln, eps) + shift(E[n - 1], eps);
    }
    ScalarField F3 = eps * m(0, 0);
    return finish(c, s.H, W, m, {1.0, F2, F3}, 2.0 * F2 + F3 * F3, region);
}

ExampleTriple build_example_II_analytic(const ExampleIIAnalyticSpec& s) {
    const Chart& c = s.chart;
    require_eps(s.eps);
    if (s.order < 0) throw Error("series order must be nonnegative");
    Region region = region_for(s.region, c, false);
    require_mask(s.H, xe(c), "H", "H depends on (x3 - eps u, x^n)");
    require_mask(s.F2, xe(c), "F2", "F2 depends on (x3 - eps u, x^n)");
    require_mask(s.f, xe(c), "f");
    auto E = leg_slots(s.E, c, xe(c), "E");
    TransverseFrame m = shifted_profile(s.profile, c, s.eps);
    const double eps = s.eps;
    int T = c.transverse_count();

    ScalarField H = shift(s.H, eps);
    ScalarField F2 = shift(s.F2, eps);
    std::vector<ScalarField> W(T);
    W[0] = -(H - F2 - s.f) / eps;
    std::vector<std::string> warnings;
    auto sample = sample_points(region, 64, 3);
    for (int n = 1; n < T; ++n) {
        ScalarField d = differentiate(s.f, kX3 + n);
        ScalarField series;
        double factorial = 1.0;
        for (int p = 0; p <= s.order; ++p) {
            factorial *= p + 1;
            series = series + substitute(d, kX3, 0.0) * pow(x(0), p + 1.0) / factorial;
            d = differentiate(d, kX3);
        }
        ScalarField next = substitute(d, kX3, 0.0);
        if (!next.is_zero()) {
            factorial *= s.order + 2;
            ScalarField term = next * pow(x(0), s.order + 2.0) / (factorial * eps);
            double worst = 0.0;
            for (const auto& q : sample) worst = std::max(worst, std::abs(term(q)));
            warnings.push_back("series for W" + std::to_string(n + 3) + " truncated at order " +
                               std::to_string(s.order) + "; first omitted term up to " + sci(worst));
        }
        W[n] = series / eps + shift(E[n - 1], eps);
    }
    ScalarField F3 = eps * m(0, 0);
    ExampleTriple out = finish(c, H, W, m, {1.0, F2, F3}, 2.0 * F2 + F3 * F3, region);
    out.warnings = std::move(warnings);
    return out;
}

FamilyPair to_w3_gauge(const CCNVMetric& m, const KillingCandidate& X) {
    if (m.w3_gauge()) return {m, X};
    ScalarField phi = antiderivative(m.W()[0], kX3, 0.0);
    std::vector<ScalarField> W = m.W();
    W[0] = 0.0;
    for (std::size_t e = 1; e < W.size(); ++e) W[e] = W[e] - differentiate(phi, kX3 + static_cast<int>(e));
    CCNVMetric g(m.chart(), m.H() - differentiate(phi, kU), W, m.frame());
    KillingCandidate Y{X.F1, X.F2 + phi * differentiate(X.F1, kU),
                       X.F3 + phi * m.inverse_frame(0, 0) * differentiate(X.F1, kX3)};
    return {g, Y};
}

}  // namespace ccnv
