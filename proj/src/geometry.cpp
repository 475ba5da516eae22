#include "ccnv/geometry.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace ccnv {

MaskError::MaskError(std::string function, int coord, const std::string& context)
    : Error(function + " must not depend on " + coordinate_label(coord) +
            (context.empty() ? "" : " (" + context + ")")),
      function_(std::move(function)),
      coord_(coord) {}

void require_mask(const ScalarField& f, CoordMask allowed, const std::string& name,
                  const std::string& context) {
    CoordMask bad = f.mask() & ~allowed;
    for (int c = 0; c < kMaxDimension; ++c)
        if (bad & bit(c)) throw MaskError(name, c, context);
}

std::string frame_entry_name(int i, int e) {
    std::string a = std::to_string(i + 3), b = std::to_string(e + 3);
    return "m" + a + (a.size() == 1 && b.size() == 1 ? "" : "_") + b;
}

namespace {

std::string point_str(const Point& p) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ")";
    return os.str();
}

}  // namespace

TransverseFrame TransverseFrame::identity(int size) {
    std::vector<std::vector<ScalarField>> rows(size, std::vector<ScalarField>(size));
    for (int i = 0; i < size; ++i) rows[i][i] = 1.0;
    return TransverseFrame(std::move(rows));
}

TransverseFrame::TransverseFrame(std::vector<std::vector<ScalarField>> rows) : m_(std::move(rows)) {
    for (const auto& r : m_)
        if (r.size() != m_.size()) throw Error("transverse frame must be square");
    for (int i = 0; i < size(); ++i)
        for (int e = 0; e < i; ++e)
            if (!m_[i][e].is_zero())
                throw Error("transverse frame must be upper-triangular: " + frame_entry_name(i, e) + " is nonzero");
}

CoordMask TransverseFrame::mask() const {
    CoordMask out = 0;
    for (const auto& r : m_)
        for (const auto& f : r) out |= f.mask();
    return out;
}

namespace detail {

struct MetricData {
    Chart chart;
    ScalarField H;
    std::vector<ScalarField> W;
    TransverseFrame frame;
    int D;
    int T;

    std::vector<ScalarField> g;    // a*D + b
    std::vector<ScalarField> dg;   // (a*D + b)*D + c
    std::vector<ScalarField> inv;  // i*T + e
    std::vector<ScalarField> dM;   // (i*T + e)*D + c
    std::vector<ScalarField> dW;   // e*D + c
    std::vector<ScalarField> dH;   // c

    mutable std::once_flag second_once;
    mutable std::vector<ScalarField> d2g;  // ((a*D + b)*D + c)*D + d

    MetricData(const Chart& c, ScalarField h, std::vector<ScalarField> w, TransverseFrame m)
        : chart(c), H(std::move(h)), W(std::move(w)), frame(std::move(m)),
          D(c.dimension()), T(c.transverse_count()) {}

    void build() {
        g.assign(D * D, ScalarField());
        auto set = [&](int a, int b, const ScalarField& f) {
            g[a * D + b] = f;
            g[b * D + a] = f;
        };
        set(kU, kV, 1.0);
        set(kU, kU, 2.0 * H);
        for (int e = 0; e < T; ++e) set(kU, kX3 + e, W[e]);
        for (int e = 0; e < T; ++e)
            for (int f = e; f < T; ++f) {
                ScalarField s;
                for (int i = 0; i <= e; ++i) s = s + frame(i, e) * frame(i, f);
                set(kX3 + e, kX3 + f, s);
            }
        dg.assign(D * D * D, ScalarField());
        for (int a = 0; a < D; ++a)
            for (int b = a; b < D; ++b)
                for (int c = 0; c < D; ++c) {
                    ScalarField d = differentiate(g[a * D + b], c);
                    dg[(a * D + b) * D + c] = d;
                    dg[(b * D + a) * D + c] = d;
                }

        // back substitution for V = M^-1 (upper); m_i^e = V(e, i)
        std::vector<ScalarField> V(T * T);
        for (int j = 0; j < T; ++j) {
            V[j * T + j] = 1.0 / frame(j, j);
            for (int i = j - 1; i >= 0; --i) {
                ScalarField s;
                for (int k = i + 1; k <= j; ++k) s = s + frame(i, k) * V[k * T + j];
                V[i * T + j] = -s / frame(i, i);
            }
        }
        inv.assign(T * T, ScalarField());
        for (int i = 0; i < T; ++i)
            for (int e = 0; e < T; ++e) inv[i * T + e] = V[e * T + i];

        dM.assign(T * T * D, ScalarField());
        for (int i = 0; i < T; ++i)
            for (int e = 0; e < T; ++e)
                for (int c = 0; c < D; ++c) dM[(i * T + e) * D + c] = differentiate(frame(i, e), c);
        dW.assign(T * D, ScalarField());
        for (int e = 0; e < T; ++e)
            for (int c = 0; c < D; ++c) dW[e * D + c] = differentiate(W[e], c);
        dH.assign(D, ScalarField());
        for (int c = 0; c < D; ++c) dH[c] = differentiate(H, c);
    }

    const std::vector<ScalarField>& second() const {
        std::call_once(second_once, [this] {
            d2g.assign(static_cast<std::size_t>(D) * D * D * D, ScalarField());
            for (int a = 0; a < D; ++a)
                for (int b = a; b < D; ++b)
                    for (int c = 0; c < D; ++c)
                        for (int d = c; d < D; ++d) {
                            ScalarField s = differentiate(dg[(a * D + b) * D + c], d);
                            for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}})
                                for (auto [z, w] : {std::pair{c, d}, std::pair{d, c}})
                                    d2g[((x * D + y) * D + z) * D + w] = s;
                        }
        });
        return d2g;
    }
};

}  // namespace detail

namespace {

void check_slot(const ScalarField& f, const std::string& name, const Chart& chart, bool v_check) {
    CoordMask outside = f.mask() & ~chart.all();
    if (outside)
        for (int c = 0; c < kMaxDimension; ++c)
            if (outside & bit(c)) throw MaskError(name, c, "not a chart coordinate");
    if (v_check && f.depends_on(kV)) throw MaskError(name, kV, "metric functions are v-independent");
}

}  // namespace

CCNVMetric::CCNVMetric(const Chart& chart, ScalarField H, std::vector<ScalarField> W,
                       TransverseFrame frame)
    : CCNVMetric(chart, std::move(H), std::move(W), std::move(frame), true) {}

CCNVMetric CCNVMetric::unchecked(const Chart& chart, ScalarField H, std::vector<ScalarField> W,
                                 TransverseFrame frame) {
    return CCNVMetric(chart, std::move(H), std::move(W), std::move(frame), false);
}

CCNVMetric::CCNVMetric(const Chart& chart, ScalarField H, std::vector<ScalarField> W,
                       TransverseFrame frame, bool check) {
    int T = chart.transverse_count();
    if (static_cast<int>(W.size()) != T)
        throw Error("expected " + std::to_string(T) + " components W_e, got " + std::to_string(W.size()));
    if (frame.size() != T)
        throw Error("transverse frame must be " + std::to_string(T) + "x" + std::to_string(T));
    check_slot(H, "H", chart, check);
    for (int e = 0; e < T; ++e) check_slot(W[e], "W" + std::to_string(e + 3), chart, check);
    for (int i = 0; i < T; ++i)
        for (int e = i; e < T; ++e)
            check_slot(frame(i, e), frame_entry_name(i, e), chart, check);
    for (int i = 0; i < T; ++i)
        if (frame(i, i).is_zero()) throw SingularFrameError("frame diagonal entry " + frame_entry_name(i, i) + " is zero");
    auto d = std::make_shared<detail::MetricData>(chart, std::move(H), std::move(W), std::move(frame));
    d->build();
    data_ = std::move(d);
}

const Chart& CCNVMetric::chart() const { return data_->chart; }
const ScalarField& CCNVMetric::H() const { return data_->H; }
const std::vector<ScalarField>& CCNVMetric::W() const { return data_->W; }
const TransverseFrame& CCNVMetric::frame() const { return data_->frame; }

const ScalarField& CCNVMetric::g(int a, int b) const { return data_->g[a * data_->D + b]; }

const ScalarField& CCNVMetric::dg(int a, int b, int c) const {
    int D = data_->D;
    return data_->dg[(a * D + b) * D + c];
}

const ScalarField& CCNVMetric::d2g(int a, int b, int c, int d) const {
    int D = data_->D;
    return data_->second()[((a * D + b) * D + c) * D + d];
}

const ScalarField& CCNVMetric::inverse_frame(int i, int e) const {
    return data_->inv[i * data_->T + e];
}

void validate_frame(const CCNVMetric& m, std::span<const Point> points) {
    int T = m.chart().transverse_count();
    for (const auto& p : points) {
        for (int i = 0; i < T; ++i)
            if (m.frame()(i, i)(p) == 0.0)
                throw SingularFrameError("frame diagonal " + frame_entry_name(i, i) + " vanishes at " + point_str(p));
        Eigen::MatrixXd g = assemble_metric(m, p).bottomRightCorner(T, T);
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() != Eigen::Success)
            throw SingularFrameError("transverse metric not positive definite at " + point_str(p));
    }
}

Eigen::MatrixXd assemble_metric(const CCNVMetric& m, const Point& p) {
    int D = m.dimension();
    Eigen::MatrixXd g(D, D);
    for (int a = 0; a < D; ++a)
        for (int b = a; b < D; ++b) g(a, b) = g(b, a) = m.g(a, b)(p);
    return g;
}

namespace {

std::vector<Eigen::MatrixXd> metric_gradient(const CCNVMetric& m, const Point& p) {
    int D = m.dimension();
    std::vector<Eigen::MatrixXd> dg(D, Eigen::MatrixXd::Zero(D, D));
    for (int a = 0; a < D; ++a)
        for (int b = a; b < D; ++b)
            for (int c = 0; c < D; ++c) {
                const ScalarField& f = m.dg(a, b, c);
                if (f.is_zero()) continue;
                dg[c](a, b) = dg[c](b, a) = f(p);
            }
    return dg;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& g, const Point& p) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    if (!lu.isInvertible()) throw SingularFrameError("metric is singular at " + point_str(p));
    return lu.inverse();
}

// Gamma^a_bc from g^-1 and dg[c](a, b) = d_c g_ab.
Tensor3 christoffel(const Eigen::MatrixXd& gi, const std::vector<Eigen::MatrixXd>& dg) {
    int D = static_cast<int>(gi.rows());
    Tensor3 lower(D);  // Gamma_ebc
    for (int e = 0; e < D; ++e)
        for (int b = 0; b < D; ++b)
            for (int c = b; c < D; ++c)
                lower(e, b, c) = lower(e, c, b) = 0.5 * (dg[b](e, c) + dg[c](e, b) - dg[e](b, c));
    Tensor3 gam(D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            for (int c = b; c < D; ++c) {
                double s = 0.0;
                for (int e = 0; e < D; ++e) s += gi(a, e) * lower(e, b, c);
                gam(a, b, c) = gam(a, c, b) = s;
            }
    return gam;
}

}  // namespace

Tensor3 christoffel_at(const CCNVMetric& m, const Point& p) {
    Eigen::MatrixXd gi = checked_inverse(assemble_metric(m, p), p);
    return christoffel(gi, metric_gradient(m, p));
}

ResidualReport ccnv_residual(const CCNVMetric& m, std::span<const Point> sample) {
    if (sample.empty()) throw Error("ccnv_residual needs a nonempty sample");
    int D = m.dimension();
    ResidualReport rep;
    for (const auto& p : sample) {
        Eigen::MatrixXd g = assemble_metric(m, p);
        checked_inverse(g, p);
        auto dg = metric_gradient(m, p);
        // l_b = g_bv and Gamma^c_ab l_c = Gamma_v,ab, no inverse needed
        double worst = 0.0;
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) {
                double s = dg[a](b, kV) - 0.5 * (dg[a](b, kV) + dg[b](a, kV) - dg[kV](a, b));
                worst = std::max(worst, std::abs(s));
            }
        rep.record("nabla_ell", worst, p, 1e-10);
        rep.record("ell_norm", g(kV, kV), p, 1e-10);
    }
    return rep;
}

FrameScalars frame_scalars_at(const CCNVMetric& m, const Point& p) {
    const auto& d = m.data();
    const int D = d.D, T = d.T;
    FrameScalars fs;
    fs.M = Eigen::MatrixXd::Zero(T, T);
    std::vector<Eigen::MatrixXd> dM(D, Eigen::MatrixXd::Zero(T, T));
    for (int i = 0; i < T; ++i)
        for (int e = i; e < T; ++e) {
            fs.M(i, e) = d.frame(i, e)(p);
            for (int c = 0; c < D; ++c) {
                const ScalarField& f = d.dM[(i * T + e) * D + c];
                if (!f.is_zero()) dM[c](i, e) = f(p);
            }
        }
    for (int i = 0; i < T; ++i)
        if (fs.M(i, i) == 0.0) throw SingularFrameError("singular transverse frame at " + point_str(p));
    Eigen::MatrixXd Minv =
        fs.M.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(T, T));
    fs.N = Minv.transpose();
    const Eigen::MatrixXd& N = fs.N;

    Eigen::VectorXd What(T);
    std::vector<Eigen::VectorXd> dWhat(D, Eigen::VectorXd::Zero(T));
    for (int e = 0; e < T; ++e) {
        What(e) = d.W[e](p);
        for (int c = 0; c < D; ++c) {
            const ScalarField& f = d.dW[e * D + c];
            if (!f.is_zero()) dWhat[c](e) = f(p);
        }
    }
    double H = d.H(p);
    Eigen::VectorXd dH = Eigen::VectorXd::Zero(D);
    for (int c = 0; c < D; ++c)
        if (!d.dH[c].is_zero()) dH(c) = d.dH[c](p);

    fs.E = Eigen::MatrixXd::Zero(D, D);
    fs.E(0, kV) = 1.0;
    fs.E(1, kU) = 1.0;
    fs.E(1, kV) = -H;
    for (int i = 0; i < T; ++i) {
        fs.E(2 + i, kV) = -N.row(i).dot(What);
        for (int e = 0; e < T; ++e) fs.E(2 + i, kX3 + e) = N(i, e);
    }

    fs.W = N * What;
    std::vector<Eigen::VectorXd> dW(D);  // d_c W_i
    for (int c = 0; c < D; ++c) {
        Eigen::MatrixXd dN = -N * dM[c].transpose() * N;
        dW[c] = dN * What + N * dWhat[c];
    }
    fs.DW = Eigen::MatrixXd::Zero(T, T);
    for (int i = 0; i < T; ++i)
        for (int j = 0; j < T; ++j)
            for (int e = 0; e < T; ++e) fs.DW(i, j) += N(j, e) * dW[kX3 + e](i);

    fs.B = dM[kU] * N.transpose();

    fs.D = Tensor3(T);
    for (int i = 0; i < T; ++i)
        for (int j = 0; j < T; ++j)
            for (int k = j + 1; k < T; ++k) {
                double s = 0.0;
                for (int e = 0; e < T; ++e)
                    for (int f = 0; f < T; ++f)
                        s += dM[kX3 + f](i, e) * (N(j, e) * N(k, f) - N(k, e) * N(j, f));
                fs.D(i, j, k) = s;
                fs.D(i, k, j) = -s;
            }

    fs.J = Eigen::VectorXd::Zero(T);
    for (int i = 0; i < T; ++i) {
        double DiH = 0.0;
        for (int e = 0; e < T; ++e) DiH += N(i, e) * dH(kX3 + e);
        double s = DiH - dW[kU](i);
        for (int j = 0; j < T; ++j) s -= fs.B(j, i) * fs.W(j);
        fs.J(i) = s;
    }

    fs.A = Eigen::MatrixXd::Zero(T, T);
    for (int i = 0; i < T; ++i)
        for (int j = i + 1; j < T; ++j) {
            double s = fs.DW(i, j) - fs.DW(j, i);
            for (int k = 0; k < T; ++k) s += fs.D(k, i, j) * fs.W(k);
            fs.A(i, j) = s;
            fs.A(j, i) = -s;
        }

    fs.gamma = Tensor3(T);
    for (int k = 0; k < T; ++k)
        for (int i = 0; i < T; ++i)
            for (int j = 0; j < T; ++j)
                fs.gamma(k, i, j) = 0.5 * (fs.D(k, j, i) - fs.D(i, j, k) - fs.D(j, i, k));

    fs.gamma_3n2 = Eigen::VectorXd::Zero(T - 1);
    fs.gamma_3n3 = Eigen::VectorXd::Zero(T - 1);
    fs.gamma_3nm = Eigen::MatrixXd::Zero(T - 1, T - 1);
    for (int n = 1; n < T; ++n) {
        fs.gamma_3n2(n - 1) = 0.5 * (fs.B(n, 0) - fs.B(0, n) - fs.A(n, 0));
        fs.gamma_3n3(n - 1) = fs.gamma(0, n, 0);
        for (int q = 1; q < T; ++q) fs.gamma_3nm(n - 1, q - 1) = fs.gamma(0, n, q);
    }
    return fs;
}

CurvatureSample curvature_at(const CCNVMetric& m, const Point& p) {
    const int D = m.dimension();
    const auto& d2 = m.data().second();
    Eigen::MatrixXd g = assemble_metric(m, p);
    Eigen::MatrixXd gi = checked_inverse(g, p);
    auto dg = metric_gradient(m, p);
    auto second = [&](int a, int b, int c, int e) -> double {
        const ScalarField& f = d2[((a * D + b) * D + c) * D + e];
        return f.is_zero() ? 0.0 : f(p);
    };

    CurvatureSample cs;
    cs.christoffel = christoffel(gi, dg);
    const Tensor3& G = cs.christoffel;

    // dG[f](a, b, c) = d_f Gamma^a_bc
    Tensor3 lower(D);
    for (int e = 0; e < D; ++e)
        for (int b = 0; b < D; ++b)
            for (int c = 0; c < D; ++c)
                lower(e, b, c) = 0.5 * (dg[b](e, c) + dg[c](e, b) - dg[e](b, c));
    std::vector<Tensor3> dG(D, Tensor3(D));
    for (int f = 0; f < D; ++f) {
        Eigen::MatrixXd dgi = -gi * dg[f] * gi;
        Tensor3 dlower(D);
        for (int e = 0; e < D; ++e)
            for (int b = 0; b < D; ++b)
                for (int c = b; c < D; ++c)
                    dlower(e, b, c) = dlower(e, c, b) =
                        0.5 * (second(e, c, b, f) + second(e, b, c, f) - second(b, c, e, f));
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b)
                for (int c = b; c < D; ++c) {
                    double s = 0.0;
                    for (int e = 0; e < D; ++e) s += dgi(a, e) * lower(e, b, c) + gi(a, e) * dlower(e, b, c);
                    dG[f](a, b, c) = dG[f](a, c, b) = s;
                }
    }

    cs.riemann = Tensor4(D);
    Tensor4& R = cs.riemann;
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            for (int c = 0; c < D; ++c)
                for (int e = c + 1; e < D; ++e) {
                    double s = dG[c](a, e, b) - dG[e](a, c, b);
                    for (int k = 0; k < D; ++k) s += G(a, c, k) * G(k, e, b) - G(a, e, k) * G(k, c, b);
                    R(a, b, c, e) = s;
                    R(a, b, e, c) = -s;
                }

    cs.ricci = Eigen::MatrixXd::Zero(D, D);
    for (int b = 0; b < D; ++b)
        for (int e = 0; e < D; ++e)
            for (int a = 0; a < D; ++a) cs.ricci(b, e) += R(a, b, a, e);

    cs.scalar = (gi.cwiseProduct(cs.ricci)).sum();
    Eigen::MatrixXd up = gi * cs.ricci * gi;
    cs.ricci_squared = (up.cwiseProduct(cs.ricci)).sum();

    // R_abcd R^abcd: lower the first index, raise the last three.
    Tensor4 low(D), rup(D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            for (int c = 0; c < D; ++c)
                for (int e = 0; e < D; ++e) {
                    double s = 0.0;
                    for (int k = 0; k < D; ++k) s += g(a, k) * R(k, b, c, e);
                    low(a, b, c, e) = s;
                }
    Tensor4 t1(D), t2(D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            for (int c = 0; c < D; ++c)
                for (int e = 0; e < D; ++e) {
                    double s = 0.0;
                    for (int k = 0; k < D; ++k) s += gi(b, k) * R(a, k, c, e);
                    t1(a, b, c, e) = s;
                }
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            for (int c = 0; c < D; ++c)
                for (int e = 0; e < D; ++e) {
                    double s = 0.0;
                    for (int k = 0; k < D; ++k) s += gi(c, k) * t1(a, b, k, e);
                    t2(a, b, c, e) = s;
                }
    double K = 0.0;
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            for (int c = 0; c < D; ++c)
                for (int e = 0; e < D; ++e) {
                    double s = 0.0;
                    for (int k = 0; k < D; ++k) s += gi(e, k) * t2(a, b, c, k);
                    K += low(a, b, c, e) * s;
                }
    (void)rup;
    cs.kretschmann = K;
    return cs;
}

InvariantProbe vsi_csi_probe(const CCNVMetric& m, std::span<const Point> sample) {
    if (sample.size() < 10) throw Error("vsi_csi_probe needs at least 10 sample points");
    InvariantProbe probe;
    std::array<double, 3> lo{}, hi{};
    lo.fill(INFINITY);
    hi.fill(-INFINITY);
    for (const auto& p : sample) {
        CurvatureSample cs = curvature_at(m, p);
        std::array<double, 3> v{cs.scalar, cs.ricci_squared, cs.kretschmann};
        probe.values.push_back(v);
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
            probe.magnitude[k] = std::max(probe.magnitude[k], std::abs(v[k]));
        }
    }
    probe.constant = probe.vanishing = true;
    for (int k = 0; k < 3; ++k) {
        probe.spread[k] = hi[k] - lo[k];
        probe.constant = probe.constant && probe.spread[k] <= InvariantProbe::kThreshold;
        probe.vanishing = probe.vanishing && probe.magnitude[k] <= InvariantProbe::kThreshold;
    }
    return probe;
}

}  // namespace ccnv
