#include "ccnv/families.hpp"

#include <algorithm>
#include <cmath>

namespace ccnv {

const std::vector<std::string> kCase21Structure = {"m3r",       "m33_r",     "mnr_x3",    "D3Wn", "gamma_3n2",
                                                   "gamma_3n3", "gamma_3nm", "X1",        "F2_r", "F3_e"};

namespace {

struct Masks {
    CoordMask uxe, xe, xr, uxr;
    explicit Masks(const Chart& c) {
        uxe = c.all() & ~bit(kV);
        xe = uxe & ~bit(kU);
        xr = xe & ~bit(kX3);
        uxr = xr | bit(kU);
    }
};

Region region_for(const std::optional<Region>& r, const Chart& c) {
    Region out = r ? *r : Region::standard(c);
    if (out.dimension() != c.dimension()) throw Error("region dimension does not match the chart");
    return out;
}

std::vector<ScalarField> slots(const std::vector<ScalarField>& given, int T, const std::string& name) {
    if (given.empty()) return std::vector<ScalarField>(T);
    if (static_cast<int>(given.size()) != T)
        throw Error(name + " needs " + std::to_string(T) + " components, got " + std::to_string(given.size()));
    return given;
}

std::string leg_name(const std::string& base, int i) { return base + std::to_string(i + 3); }

void require_frame_mask(const TransverseFrame& m, CoordMask allowed, const std::string& context) {
    for (int i = 0; i < m.size(); ++i)
        for (int e = i; e < m.size(); ++e) require_mask(m(i, e), allowed, frame_entry_name(i, e), context);
}

// W_e = sum_i m_ie W_i
std::vector<ScalarField> coordinate_w(const TransverseFrame& m, const std::vector<ScalarField>& W) {
    int T = m.size();
    std::vector<ScalarField> out(T);
    for (int e = 0; e < T; ++e)
        for (int i = 0; i <= e; ++i) out[e] = out[e] + m(i, e) * W[i];
    return out;
}

// D_i f = m_i^e d_e f for v-independent f
ScalarField frame_derivative(const CCNVMetric& shape, int i, const ScalarField& f) {
    ScalarField out;
    for (int e = 0; e <= i; ++e) out = out + shape.inverse_frame(i, e) * differentiate(f, kX3 + e);
    return out;
}

CCNVMetric shape_only(const Chart& c, const TransverseFrame& m) {
    return CCNVMetric(c, 0.0, std::vector<ScalarField>(c.transverse_count()), m);
}

void check_region(const CCNVMetric& m, const Region& region) {
    validate_frame(m, sample_points(region, 64, 1));
}

}  // namespace

FamilyPair build_case_1_1_i(const Case11iSpec& s) {
    const Chart& c = s.chart;
    Masks k(c);
    int T = c.transverse_count();
    Region region = region_for(s.region, c);
    if (!region.u_excludes_zero()) throw DomainError("this family carries 1/u: the region must exclude u = 0");
    require_mask(s.f2, k.xe, "f2");
    require_mask(s.g2, bit(kU), "g2");
    auto B = slots(s.B, T, "B");
    for (int i = 0; i < T; ++i) require_mask(B[i], k.xe, leg_name("B", i));
    TransverseFrame frame = s.frame ? *s.frame : TransverseFrame::identity(T);
    require_frame_mask(frame, k.xe, "the frame must be u-independent");

    ScalarField u = ScalarField::coordinate(kU);
    ScalarField H = s.f2 / (u * u) - differentiate(s.g2, kU) / u + s.g2 / (u * u);
    std::vector<ScalarField> W(T);
    for (int i = 0; i < T; ++i) W[i] = B[i] / u;
    CCNVMetric m(c, H, coordinate_w(frame, W), frame);
    check_region(m, region);
    return {m, {u, (s.f2 + s.g2) / u, 0.0}};
}

FamilyPair build_case_1_1_ii(const Case11iiSpec& s) {
    const Chart& c = s.chart;
    Masks k(c);
    int T = c.transverse_count();
    Region region = region_for(s.region, c);
    require_mask(s.F2, k.xe, "F2");
    require_mask(s.A0, k.uxr, "A0");
    auto C = slots(s.C, T, "C");
    for (int i = 0; i < T; ++i) require_mask(C[i], k.xe, leg_name("C", i));
    TransverseFrame frame = s.frame ? *s.frame : TransverseFrame::identity(T);
    require_frame_mask(frame, k.xe, "the frame must be u-independent");

    CCNVMetric shape = shape_only(c, frame);
    std::vector<ScalarField> W(T);
    for (int i = 0; i < T; ++i) W[i] = antiderivative(frame_derivative(shape, i, s.A0), kU, 0.0) + C[i];
    CCNVMetric m(c, s.F2 + s.A0, coordinate_w(frame, W), frame);
    check_region(m, region);
    return {m, {1.0, s.F2, 0.0}};
}

FamilyPair build_case_2_2(const Case22Spec& s) {
    const Chart& c = s.chart;
    Masks k(c);
    int T = c.transverse_count();
    Region region = region_for(s.region, c);
    require_mask(s.F1, bit(kU) | bit(kX3), "F1");
    require_mask(s.A6, k.uxr, "A6");
    ScalarField f13 = differentiate(s.F1, kX3);
    if (f13.is_zero()) throw Error("F1 must depend on x3");
    // a sign change means a zero in between
    bool pos = false, neg = false;
    for (const auto& p : sample_points(region, 256, 2)) {
        double d = f13(p);
        pos |= d >= 0.0;
        neg |= d <= 0.0;
    }
    if (pos && neg) throw SingularFrameError("F1,3 vanishes inside the region");

    std::vector<std::vector<ScalarField>> rows(T, std::vector<ScalarField>(T));
    rows[0][0] = f13;
    if (s.rest) {
        if (s.rest->size() != T - 1) throw Error("the m_nr block must be " + std::to_string(T - 1) + " square");
        for (int n = 1; n < T; ++n)
            for (int e = n; e < T; ++e) {
                require_mask((*s.rest)(n - 1, e - 1), k.xr, frame_entry_name(n, e), "m_nr depends on x^r only");
                rows[n][e] = (*s.rest)(n - 1, e - 1);
            }
    } else {
        for (int n = 1; n < T; ++n) rows[n][n] = 1.0;
    }
    TransverseFrame frame(rows);

    ScalarField F1u = differentiate(s.F1, kU);
    ScalarField F3 = -antiderivative(s.F1 * differentiate(f13, kU), kX3, 0.0) + s.A6;
    ScalarField F2 = 0.5 * s.F1 * F1u * F1u + F3 * F1u + s.k * s.F1 + s.c;
    ScalarField H = -s.F1 * differentiate(F1u, kU) - 0.5 * F1u * F1u - differentiate(F3, kU) - s.k;
    // D3 F1 = 1 because m33 = F1,3, so W_n = -D_n F3.
    CCNVMetric shape = shape_only(c, frame);
    std::vector<ScalarField> W(T);
    for (int n = 1; n < T; ++n) W[n] = -frame_derivative(shape, n, F3);
    CCNVMetric m(c, H, coordinate_w(frame, W), frame);
    check_region(m, region);
    return {m, {s.F1, F2, F3}};
}

namespace {

// Exact partials of everything the verifiers read.
struct Partials {
    int D, T;
    std::vector<ScalarField> dF2, dF3, dH, dm;  // dm[(i*T + e)*D + c]

    Partials(const CCNVMetric& m, const KillingCandidate& X) : D(m.dimension()), T(D - 2) {
        for (int c = 0; c < D; ++c) {
            dF2.push_back(differentiate(X.F2, c));
            dF3.push_back(differentiate(X.F3, c));
            dH.push_back(differentiate(m.H(), c));
        }
        dm.resize(T * T * D);
        for (int i = 0; i < T; ++i)
            for (int e = 0; e < T; ++e)
                for (int c = 0; c < D; ++c) dm[(i * T + e) * D + c] = differentiate(m.frame()(i, e), c);
    }
    static Eigen::VectorXd eval(const std::vector<ScalarField>& g, const Point& p) {
        Eigen::VectorXd out(g.size());
        for (std::size_t c = 0; c < g.size(); ++c) out(c) = g[c].is_zero() ? 0.0 : g[c](p);
        return out;
    }
    double m(int i, int e, int c, const Point& p) const {
        const ScalarField& f = dm[(i * T + e) * D + c];
        return f.is_zero() ? 0.0 : f(p);
    }
};

// D_i f for v-independent f from its coordinate gradient.
double Di(const FrameScalars& fs, int i, const Eigen::VectorXd& grad) {
    double s = 0.0;
    for (int e = 0; e <= i; ++e) s += fs.N(i, e) * grad(kX3 + e);
    return s;
}

void require_gauge(const CCNVMetric& m, const char* who) {
    if (!m.w3_gauge()) throw Error(std::string(who) + " works in the W3 = 0 gauge; W3 is nonzero");
}

double nonzero_f3(double f3, const Point& p) {
    if (f3 == 0.0) {
        std::string s;
        for (double x : p) s += (s.empty() ? "" : ", ") + std::to_string(x);
        throw DomainError("F3 vanishes at (" + s + ")");
    }
    return f3;
}

void killing_checks(const CCNVMetric& m, const KillingCandidate& X, std::span<const Point> sample, double tol,
                    ResidualReport& rep) {
    FrameCheckOptions opt;
    opt.tolerance = tol;
    rep.merge(frame_killing_residuals(X, m, sample, opt), "killing.");
    rep.merge(lie_residuals(to_coordinate_vector(X, m), m, sample, tol));
}

// Transport of the frame along the KV, shared by all subcases.
void transport(const Partials& P, const FrameScalars& fs, double X1, double F3, const Eigen::VectorXd& dF3,
               const Point& p, double tol, ResidualReport& rep) {
    int T = P.T;
    double m33 = fs.M(0, 0);
    rep.record("m33_transport", X1 * P.m(0, 0, kU, p) + dF3(kX3), p, tol);
    double mnr = 0.0, m3r = 0.0;
    for (int n = 1; n < T; ++n)
        for (int r = n; r < T; ++r)
            mnr = std::max(mnr, std::abs(X1 * P.m(n, r, kU, p) + P.m(n, r, kX3, p) * F3 / m33));
    for (int r = 1; r < T; ++r)
        m3r = std::max(m3r, std::abs(X1 * P.m(0, r, kU, p) + dF3(kX3 + r) +
                                     (P.m(0, r, kX3, p) - P.m(0, 0, kX3 + r, p)) * F3 / m33));
    rep.record("mnr_transport", mnr, p, tol);
    rep.record("m3r_transport", m3r, p, tol);
}

// Equations shared by subcase (iii) and Case 2.1.
void x1_zero_equations(const Partials& P, const FrameScalars& fs, double F3, const Eigen::VectorXd& dF2,
                       const Eigen::VectorXd& dF3, const Eigen::VectorXd& dH, const Point& p, double tol,
                       ResidualReport& rep) {
    double m33 = fs.M(0, 0);
    rep.record("m33_log", P.m(0, 0, kU, p) / m33 - Di(fs, 0, dF2) / F3 - dF3(kU) / F3, p, tol);
    double wn = 0.0;
    for (int n = 1; n < P.T; ++n) wn = std::max(wn, std::abs(m33 * fs.DW(n, 0) + m33 * Di(fs, n, dF2) / F3));
    rep.record("Wn_x3", wn, p, tol);
    rep.record("H_x3", dH(kX3) + m33 * dF2(kU) / F3, p, tol);
}

}  // namespace

ResidualReport verify_case_1_2(Case12Subcase sub, const CCNVMetric& m, const KillingCandidate& X,
                               std::span<const Point> sample, double tol) {
    require_gauge(m, "verify_case_1_2");
    if (sample.empty()) throw Error("verify_case_1_2 needs a nonempty sample");
    Partials P(m, X);
    ResidualReport rep;
    for (const auto& p : sample) {
        FrameScalars fs = frame_scalars_at(m, p);
        double u = p[kU], X1 = X.F1(p), F3 = X.F3(p), m33 = fs.M(0, 0);
        Eigen::VectorXd dF2 = Partials::eval(P.dF2, p), dF3 = Partials::eval(P.dF3, p), dH = Partials::eval(P.dH, p);
        double expect = sub == Case12Subcase::I ? u : sub == Case12Subcase::II ? 1.0 : 0.0;
        rep.record("X1", X1 - expect, p, tol);
        transport(P, fs, X1, F3, dF3, p, tol, rep);
        double d2F2 = dF2(kU), d2F3 = dF3(kU), d3F2 = Di(fs, 0, dF2), d3F3 = Di(fs, 0, dF3);
        auto wn = [&] {
            Eigen::MatrixXd K = frame_killing_matrix_at(X, m, p);
            return K.block(1, 3, 1, P.T - 1).cwiseAbs().maxCoeff();
        };
        switch (sub) {
            case Case12Subcase::I:
                rep.record("H",
                           m.H()(p) - (-d2F2 - F3 * d2F3 / u - F3 * d3F2 / u - F3 * F3 * d3F3 / (u * u)), p,
                           tol);
                rep.record("Wn", wn(), p, tol);
                break;
            case Case12Subcase::II:
                rep.record("F2_F3", d2F2 + F3 * d3F2 + F3 * d2F3 + F3 * F3 * d3F3, p, tol);
                rep.record("H_x3", dH(kX3) - (m33 * d2F3 + dF2(kX3) + F3 * dF3(kX3)), p, tol);
                rep.record("Wn", wn(), p, tol);
                break;
            case Case12Subcase::III: {
                nonzero_f3(F3, p);
                rep.record("F3_x3", dF3(kX3), p, tol);
                double mx3 = 0.0;
                for (int n = 1; n < P.T; ++n)
                    for (int r = n; r < P.T; ++r) mx3 = std::max(mx3, std::abs(P.m(n, r, kX3, p)));
                rep.record("mnr_x3", mx3, p, tol);
                x1_zero_equations(P, fs, F3, dF2, dF3, dH, p, tol, rep);
                break;
            }
        }
    }
    killing_checks(m, X, sample, tol, rep);
    return rep;
}

ResidualReport verify_case_2_1(const CCNVMetric& m, const KillingCandidate& X, std::span<const Point> sample,
                               double tol) {
    require_gauge(m, "verify_case_2_1");
    if (sample.empty()) throw Error("verify_case_2_1 needs a nonempty sample");
    Partials P(m, X);
    const int T = P.T;
    ResidualReport rep;
    for (const auto& p : sample) {
        FrameScalars fs = frame_scalars_at(m, p);
        Eigen::VectorXd dF2 = Partials::eval(P.dF2, p), dF3 = Partials::eval(P.dF3, p), dH = Partials::eval(P.dH, p);
        double m3r = 0.0, m33r = 0.0, mnr3 = 0.0, d3wn = 0.0, f2r = 0.0, f3e = 0.0;
        for (int r = 1; r < T; ++r) {
            m3r = std::max(m3r, std::abs(fs.M(0, r)));
            m33r = std::max(m33r, std::abs(P.m(0, 0, kX3 + r, p)));
            d3wn = std::max(d3wn, std::abs(fs.DW(r, 0)));
            f2r = std::max(f2r, std::abs(dF2(kX3 + r)));
            for (int e = r; e < T; ++e) mnr3 = std::max(mnr3, std::abs(P.m(r, e, kX3, p)));
        }
        for (int e = 0; e < T; ++e) f3e = std::max(f3e, std::abs(dF3(kX3 + e)));
        rep.record("m3r", m3r, p, tol);
        rep.record("m33_r", m33r, p, tol);
        rep.record("mnr_x3", mnr3, p, tol);
        rep.record("D3Wn", d3wn, p, tol);
        rep.record("gamma_3n2", fs.gamma_3n2.cwiseAbs().maxCoeff(), p, tol);
        rep.record("gamma_3n3", fs.gamma_3n3.cwiseAbs().maxCoeff(), p, tol);
        rep.record("gamma_3nm", fs.gamma_3nm.cwiseAbs().maxCoeff(), p, tol);
        rep.record("X1", X.F1(p), p, tol);
        rep.record("F2_r", f2r, p, tol);
        rep.record("F3_e", f3e, p, tol);
        double F3 = nonzero_f3(X.F3(p), p);
        x1_zero_equations(P, fs, F3, dF2, dF3, dH, p, tol, rep);
    }
    killing_checks(m, X, sample, tol, rep);
    return rep;
}

}  // namespace ccnv
