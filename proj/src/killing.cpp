#include "ccnv/killing.hpp"

#include <algorithm>
#include <cmath>

namespace ccnv {

const char* form_name(KillingForm f) {
    switch (f) {
        case KillingForm::A: return "A";
        case KillingForm::B: return "B";
        case KillingForm::C: return "C";
        case KillingForm::General: return "general";
    }
    return "?";
}

const char* case_name(CaseTag t) {
    switch (t) {
        case CaseTag::Case1: return "Case1";
        case CaseTag::Case2: return "Case2";
        case CaseTag::Both: return "Both";
        case CaseTag::Neither: return "Neither";
    }
    return "?";
}

const char* causal_name(CausalLabel l) {
    switch (l) {
        case CausalLabel::Timelike: return "timelike";
        case CausalLabel::Null: return "null";
        case CausalLabel::Spacelike: return "spacelike";
    }
    return "?";
}

KillingCandidate KillingCandidate::ell() { return {0.0, 1.0, 0.0}; }
KillingCandidate KillingCandidate::n() { return {1.0, 0.0, 0.0}; }

KillingForm KillingCandidate::form() const {
    if (F1.constant_value()) return KillingForm::A;
    if (F1.is_coordinate(kU)) return KillingForm::B;
    if ((F1.mask() & ~(bit(kU) | bit(kX3))) == 0) return KillingForm::C;
    return KillingForm::General;
}

CoordinateVector::CoordinateVector(std::vector<ScalarField> components) : x_(std::move(components)) {
    int D = dimension();
    dx_.resize(D * D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) dx_[a * D + b] = differentiate(x_[a], b);
}

Eigen::VectorXd CoordinateVector::at(const Point& p) const {
    Eigen::VectorXd out(dimension());
    for (int a = 0; a < dimension(); ++a) out(a) = x_[a](p);
    return out;
}

namespace {

// Frame components of a candidate as exact fields.
struct FrameFields {
    ScalarField X1, X2, X3, d3f1;
    std::vector<ScalarField> g1, g2, g3;  // coordinate gradients

    FrameFields(const KillingCandidate& X, const CCNVMetric& m) {
        for (auto [f, name] : {std::pair{&X.F1, "F1"}, std::pair{&X.F2, "F2"}, std::pair{&X.F3, "F3"}}) {
            if (f->depends_on(kV)) throw MaskError(name, kV, "Killing candidate slots are v-independent");
            if (f->mask() & ~m.chart().all()) throw Error(std::string(name) + " uses a coordinate outside the chart");
        }
        ScalarField v = ScalarField::coordinate(kV);
        d3f1 = m.inverse_frame(0, 0) * differentiate(X.F1, kX3);
        X1 = X.F1;
        X2 = X.F2 - v * differentiate(X.F1, kU);
        X3 = X.F3 - v * d3f1;
        int D = m.dimension();
        for (int c = 0; c < D; ++c) {
            g1.push_back(differentiate(X1, c));
            g2.push_back(differentiate(X2, c));
            g3.push_back(differentiate(X3, c));
        }
    }
};

// (D1, D2, D_3, ..., D_D) applied to a field with coordinate gradient `grad`.
Eigen::VectorXd frame_derivatives(const std::vector<ScalarField>& grad, const FrameScalars& fs, double H,
                                  const Eigen::VectorXd& What, const Point& p) {
    int D = static_cast<int>(grad.size()), T = D - 2;
    Eigen::VectorXd gv(D);
    for (int c = 0; c < D; ++c) gv(c) = grad[c].is_zero() ? 0.0 : grad[c](p);
    Eigen::VectorXd out(D);
    out(0) = gv(kV);
    out(1) = gv(kU) - H * gv(kV);
    for (int i = 0; i < T; ++i) {
        double s = 0.0;
        for (int e = 0; e < T; ++e) s += fs.N(i, e) * (gv(kX3 + e) - What(e) * gv(kV));
        out(2 + i) = s;
    }
    return out;
}

// Signed frame equations K(a, b), a <= b over (ell, n, m_3, ..., m_D).
Eigen::MatrixXd frame_matrix(const FrameFields& F, const CCNVMetric& m, const Point& p) {
    const int D = m.dimension(), T = D - 2;
    FrameScalars fs = frame_scalars_at(m, p);
    double H = m.H()(p);
    Eigen::VectorXd What(T);
    for (int e = 0; e < T; ++e) What(e) = m.W()[e](p);

    double X1 = F.X1(p);
    Eigen::VectorXd Xi = Eigen::VectorXd::Zero(T);
    Xi(0) = F.X3(p);
    Eigen::VectorXd d1 = frame_derivatives(F.g1, fs, H, What, p);
    Eigen::VectorXd d2 = frame_derivatives(F.g2, fs, H, What, p);
    // DX(i, a): frame derivative a of leg component X_i
    Eigen::MatrixXd DX = Eigen::MatrixXd::Zero(T, D);
    DX.row(0) = frame_derivatives(F.g3, fs, H, What, p).transpose();

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(D, D);
    K(0, 0) = d1(0);
    K(0, 1) = d1(1) + d2(0);
    for (int i = 0; i < T; ++i) K(0, 2 + i) = d1(2 + i) + DX(i, 0);
    K(1, 1) = d2(1) + fs.J.dot(Xi);
    for (int i = 0; i < T; ++i) {
        double s = d2(2 + i) + DX(i, 1) - fs.J(i) * X1;
        for (int j = 0; j < T; ++j) s -= (fs.A(j, i) + fs.B(i, j)) * Xi(j);
        K(1, 2 + i) = s;
    }
    for (int i = 0; i < T; ++i)
        for (int j = i; j < T; ++j) {
            double s = DX(j, 2 + i) + DX(i, 2 + j) + (fs.B(i, j) + fs.B(j, i)) * X1;
            for (int k = 0; k < T; ++k) s -= (fs.gamma(k, i, j) + fs.gamma(k, j, i)) * Xi(k);
            K(2 + i, 2 + j) = s;
        }
    return K;
}

void frame_residuals(const FrameFields& F, const CCNVMetric& m, const Point& p, double tol,
                     ResidualReport& rep) {
    const int D = m.dimension();
    Eigen::MatrixXd K = frame_matrix(F, m, p);
    rep.record("ell_ell", K(0, 0), p, tol);
    rep.record("ell_n", K(0, 1), p, tol);
    rep.record("ell_m", K.block(0, 2, 1, D - 2).cwiseAbs().maxCoeff(), p, tol);
    rep.record("n_n", K(1, 1), p, tol);
    rep.record("n_m", K.block(1, 2, 1, D - 2).cwiseAbs().maxCoeff(), p, tol);
    rep.record("m_m", K.block(2, 2, D - 2, D - 2).cwiseAbs().maxCoeff(), p, tol);
}

void check_gauge(const CCNVMetric& m, const FrameCheckOptions& opt) {
    if (opt.require_w3_gauge && !m.w3_gauge())
        throw Error("frame Killing equations requested in the W3 = 0 gauge, but W3 is nonzero");
}

double contract(const Eigen::VectorXd& x, const Eigen::MatrixXd& g) { return x.dot(g * x); }

}  // namespace

CoordinateVector to_coordinate_vector(const KillingCandidate& X, const CCNVMetric& m) {
    FrameFields F(X, m);
    int D = m.dimension();
    std::vector<ScalarField> c(D);
    ScalarField x3 = F.X3 * m.inverse_frame(0, 0);
    c[kU] = F.X1;
    c[kV] = F.X2 - F.X1 * m.H() - x3 * m.W()[0];
    c[kX3] = x3;
    return CoordinateVector(std::move(c));
}

Eigen::MatrixXd lie_residual_at(const CoordinateVector& X, const CCNVMetric& m, const Point& p) {
    int D = m.dimension();
    if (X.dimension() != D) throw Error("vector and metric dimensions differ");
    Eigen::MatrixXd g = assemble_metric(m, p);
    Eigen::VectorXd x = X.at(p);
    Eigen::MatrixXd dX(D, D);  // dX(c, a) = d_a X^c
    for (int c = 0; c < D; ++c)
        for (int a = 0; a < D; ++a) dX(c, a) = X.partial(c, a).is_zero() ? 0.0 : X.partial(c, a)(p);
    Eigen::MatrixXd L = g * dX;
    L = L + L.transpose().eval();
    for (int a = 0; a < D; ++a)
        for (int b = a; b < D; ++b) {
            double s = 0.0;
            for (int c = 0; c < D; ++c)
                if (x(c) != 0.0 && !m.dg(a, b, c).is_zero()) s += x(c) * m.dg(a, b, c)(p);
            L(a, b) += s;
            if (b != a) L(b, a) += s;
        }
    return L;
}

ResidualReport lie_residuals(const CoordinateVector& X, const CCNVMetric& m, std::span<const Point> sample,
                             double tolerance) {
    ResidualReport rep;
    for (const auto& p : sample) rep.record("lie", lie_residual_at(X, m, p).cwiseAbs().maxCoeff(), p, tolerance);
    return rep;
}

ResidualReport frame_killing_residuals_at(const KillingCandidate& X, const CCNVMetric& m, const Point& p,
                                          const FrameCheckOptions& opt) {
    check_gauge(m, opt);
    ResidualReport rep;
    frame_residuals(FrameFields(X, m), m, p, opt.tolerance, rep);
    return rep;
}

Eigen::MatrixXd frame_killing_matrix_at(const KillingCandidate& X, const CCNVMetric& m, const Point& p) {
    return frame_matrix(FrameFields(X, m), m, p);
}

ResidualReport frame_killing_residuals(const KillingCandidate& X, const CCNVMetric& m,
                                       std::span<const Point> sample, const FrameCheckOptions& opt) {
    check_gauge(m, opt);
    FrameFields F(X, m);
    ResidualReport rep;
    for (const auto& p : sample) frame_residuals(F, m, p, opt.tolerance, rep);
    return rep;
}

CaseVerdict classify_case(const KillingCandidate& X, const CCNVMetric& m, std::span<const Point> sample) {
    if (sample.empty()) throw Error("classify_case needs a nonempty sample");
    FrameFields F(X, m);
    CaseVerdict v;
    for (const auto& p : sample) {
        v.max_d3x1 = std::max(v.max_d3x1, std::abs(F.d3f1(p)));
        FrameScalars fs = frame_scalars_at(m, p);
        double g = 0.0;
        if (fs.gamma_3n2.size()) {
            g = std::max({fs.gamma_3n2.cwiseAbs().maxCoeff(), fs.gamma_3n3.cwiseAbs().maxCoeff(),
                          fs.gamma_3nm.cwiseAbs().maxCoeff()});
        }
        v.max_gamma = std::max(v.max_gamma, g);
    }
    bool c1 = v.max_d3x1 < CaseVerdict::kThreshold;
    bool c2 = v.max_gamma < CaseVerdict::kThreshold;
    v.tag = c1 && c2 ? CaseTag::Both : c1 ? CaseTag::Case1 : c2 ? CaseTag::Case2 : CaseTag::Neither;
    return v;
}

Eigen::VectorXd commutator_at(const CoordinateVector& X, const CoordinateVector& Y, const Point& p) {
    int D = X.dimension();
    if (Y.dimension() != D) throw Error("vector dimensions differ");
    Eigen::VectorXd x = X.at(p), y = Y.at(p), out = Eigen::VectorXd::Zero(D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) {
            if (x(b) != 0.0 && !Y.partial(a, b).is_zero()) out(a) += x(b) * Y.partial(a, b)(p);
            if (y(b) != 0.0 && !X.partial(a, b).is_zero()) out(a) -= y(b) * X.partial(a, b)(p);
        }
    return out;
}

BracketReport bracket_with_ell(const KillingCandidate& X, const CCNVMetric& m, std::span<const Point> sample) {
    if (sample.empty()) throw Error("bracket_with_ell needs a nonempty sample");
    CoordinateVector cx = to_coordinate_vector(X, m);
    CoordinateVector ell = to_coordinate_vector(KillingCandidate::ell(), m);
    FrameFields F(X, m);
    BracketReport r;
    r.form = X.form();
    double lo = INFINITY, hi = -INFINITY;
    r.min_norm = INFINITY;
    for (const auto& p : sample) {
        Eigen::VectorXd b = commutator_at(cx, ell, p);
        double amax = b.cwiseAbs().maxCoeff();
        if (r.worst.empty() || amax > r.max_abs) {
            r.max_abs = amax;
            r.worst = p;
        }
        for (int a = 0; a < b.size(); ++a)
            if (a != kV) r.max_off_ell = std::max(r.max_off_ell, std::abs(b(a)));
        if (&p == &sample.front()) r.sigma = b(kV);
        lo = std::min(lo, b(kV));
        hi = std::max(hi, b(kV));
        double nrm = contract(b, assemble_metric(m, p));
        double d3 = F.d3f1(p);
        r.max_d3f1 = std::max(r.max_d3f1, std::abs(d3));
        r.max_norm_mismatch = std::max(r.max_norm_mismatch, std::abs(nrm - d3 * d3));
        r.min_norm = std::min(r.min_norm, nrm);
    }
    r.sigma_spread = hi - lo;
    r.vanishes = r.max_abs < 1e-10;
    r.proportional = r.max_off_ell < 1e-10 && r.sigma_spread < 1e-10;
    return r;
}

double norm_at(const KillingCandidate& X, const CCNVMetric& m, const Point& p) {
    return contract(to_coordinate_vector(X, m).at(p), assemble_metric(m, p));
}

double frame_norm_at(const KillingCandidate& X, const CCNVMetric& m, const Point& p) {
    FrameFields F(X, m);
    double x3 = F.X3(p);
    return 2.0 * F.X1(p) * F.X2(p) + x3 * x3;
}

CausalReport causal_classify(const KillingCandidate& X, const CCNVMetric& m, const GridSpec& grid) {
    std::size_t n = grid.size();
    if (n == 0) throw Error("causal_classify needs a nonempty grid");
    CoordinateVector cx = to_coordinate_vector(X, m);
    const Interval& vb = grid.region.bounds[kV];
    double vmax = std::max(std::abs(vb.lo), std::abs(vb.hi));
    constexpr double kTol = 1e-9;

    CausalReport r;
    r.null_tolerance = kTol * (1.0 + vmax * vmax);
    r.points.reserve(n);
    r.norms.reserve(n);
    r.labels.reserve(n);
    r.max_c = r.max_printed = -INFINITY;
    bool a_zero = true, b_zero = true;
    ScalarField x1f2 = X.F1 * X.F2, f3sq = X.F3 * X.F3;
    for (std::size_t k = 0; k < n; ++k) {
        Point p = grid.point(k);
        Eigen::MatrixXd g = assemble_metric(m, p);
        double nrm = contract(cx.at(p), g);
        r.points.push_back(p);
        r.norms.push_back(nrm);
        CausalLabel l = std::abs(nrm) <= r.null_tolerance ? CausalLabel::Null
                        : nrm < 0.0                       ? CausalLabel::Timelike
                                                          : CausalLabel::Spacelike;
        r.labels.push_back(l);
        (l == CausalLabel::Null ? r.null : l == CausalLabel::Timelike ? r.timelike : r.spacelike)++;

        Point q = p;
        auto at_v = [&](double v) {
            q[kV] = v;
            return contract(cx.at(q), g);
        };
        double nm = at_v(-1.0), n0 = at_v(0.0), np = at_v(1.0);
        double a = 0.5 * (np + nm) - n0, b = 0.5 * (np - nm);
        a_zero = a_zero && std::abs(a) <= kTol;
        b_zero = b_zero && std::abs(b) <= kTol;
        r.max_c = std::max(r.max_c, n0);
        double printed = f3sq(p) - 2.0 * x1f2(p);
        r.max_printed = std::max(r.max_printed, printed);
    }
    r.d3x1_zero = a_zero;
    r.linear_term_zero = b_zero;
    r.inequality_direct = r.max_c <= kTol;
    r.inequality_printed = r.max_printed <= kTol;
    r.global_non_spacelike = a_zero && b_zero && r.inequality_direct;
    return r;
}

KillingCandidate null_normalize(const KillingCandidate& X) {
    auto c = X.F1.constant_value();
    if (!c) throw Error("null_normalize needs a constant F1");
    if (*c == 0.0) throw Error("F1 = 0: the vector is a multiple of ell and is disregarded");
    ScalarField f3 = X.F3 / *c;
    return {1.0, -0.5 * f3 * f3, f3};
}

}  // namespace ccnv
