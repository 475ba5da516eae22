#include <gtest/gtest.h>

#include <cmath>

#include "ccnv/geometry.hpp"
#include "ccnv/sampling.hpp"
#include "support/oracle.hpp"
#include "support/random_metric.hpp"

using namespace ccnv;

namespace {

CCNVMetric raw(const Chart& c, const std::string& H, std::vector<std::string> W = {},
               std::vector<std::vector<std::string>> m = {}) {
    int T = c.transverse_count();
    std::vector<ScalarField> w(T);
    for (std::size_t e = 0; e < W.size(); ++e) w[e] = parse_field(W[e], c);
    TransverseFrame frame = TransverseFrame::identity(T);
    if (!m.empty()) {
        std::vector<std::vector<ScalarField>> rows(T, std::vector<ScalarField>(T));
        for (int i = 0; i < T; ++i)
            for (int e = 0; e < T; ++e) rows[i][e] = parse_field(m[i][e], c);
        frame = TransverseFrame(rows);
    }
    return CCNVMetric(c, parse_field(H, c), w, frame);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// g(e_a, nabla_{e_c} e_b) in coordinates, differencing the frame vectors.
double frame_connection(const CCNVMetric& m, const Point& p, int a, int b, int c) {
    int D = m.dimension();
    FrameScalars fs = frame_scalars_at(m, p);
    Eigen::MatrixXd g = assemble_metric(m, p);
    Tensor3 G = christoffel_at(m, p);
    Eigen::VectorXd nabla = Eigen::VectorXd::Zero(D);
    for (int r = 0; r < D; ++r) {
        Point q = p;
        double x0 = p[r];
        double h = 1e-4 * (1 + std::abs(x0));
        Eigen::VectorXd db(D);
        for (int nu = 0; nu < D; ++nu)
            db(nu) = oracle::richardson(
                [&](double x) {
                    q[r] = x;
                    return frame_scalars_at(m, q).E(b, nu);
                },
                x0, h);
        nabla += fs.E(c, r) * db;
    }
    for (int nu = 0; nu < D; ++nu)
        for (int r = 0; r < D; ++r)
            for (int l = 0; l < D; ++l) nabla(nu) += G(nu, r, l) * fs.E(c, r) * fs.E(b, l);
    return fs.E.row(a).dot(g * nabla);
}

Region box(const Chart& c) { return Region::standard(c); }

}  // namespace

TEST(AssembleMetric, FlatAndConstantH) {
    Chart c(5);
    Eigen::MatrixXd g = assemble_metric(raw(c, "0"), Point(5, 0.3));
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(5, 5);
    expect(0, 1) = expect(1, 0) = 1;
    expect(2, 2) = expect(3, 3) = expect(4, 4) = 1;
    EXPECT_EQ(g, expect);
    expect(0, 0) = 2;
    EXPECT_EQ(assemble_metric(raw(c, "1"), Point(5, 0.3)), expect);
}

TEST(AssembleMetric, TransverseBlockFromFrame) {
    Chart c(4);
    CCNVMetric m = raw(c, "u*x3", {"x4", "u"}, {{"2", "x3"}, {"0", "1 + x4^2"}});
    Point p{1.5, 0.2, 0.5, -0.5};
    Eigen::MatrixXd g = assemble_metric(m, p);
    EXPECT_DOUBLE_EQ(g(0, 0), 1.5);
    EXPECT_DOUBLE_EQ(g(0, 2), -0.5);
    EXPECT_DOUBLE_EQ(g(0, 3), 1.5);
    EXPECT_DOUBLE_EQ(g(2, 2), 4);
    EXPECT_DOUBLE_EQ(g(2, 3), 1);
    EXPECT_DOUBLE_EQ(g(3, 3), 0.25 + 1.5625);
    EXPECT_EQ(g(1, 1), 0);
    EXPECT_EQ(g(1, 2), 0);
}

TEST(CCNVMetric, RejectsVDependenceNamingSlotAndCoordinate) {
    Chart c(5);
    try {
        raw(c, "0", {"0", "v*x3"});
        FAIL();
    } catch (const MaskError& e) {
        EXPECT_EQ(e.function(), "W4");
        EXPECT_EQ(e.coordinate(), kV);
    }
    EXPECT_THROW(raw(c, "u + v"), MaskError);
    EXPECT_THROW(raw(c, "0", {}, {{"1", "0", "0"}, {"0", "v", "0"}, {"0", "0", "1"}}), MaskError);
    EXPECT_THROW(raw(c, "0", {}, {{"1", "0", "0"}, {"x3", "1", "0"}, {"0", "0", "1"}}), Error);
    EXPECT_THROW(raw(c, "0", {}, {{"1", "0", "0"}, {"0", "0", "0"}, {"0", "0", "1"}}), SingularFrameError);
}

TEST(CCNVMetric, InverseFrameIsExact) {
    Chart c(5);
    FieldPool pool(4);
    CCNVMetric m = fixtures::random_metric(c, pool);
    for (const auto& p : sample_points(box(c), 20, 1)) {
        FrameScalars fs = frame_scalars_at(m, p);
        for (int i = 0; i < 3; ++i)
            for (int e = 0; e < 3; ++e)
                EXPECT_NEAR(m.inverse_frame(i, e)(p), fs.N(i, e), 1e-12);
        EXPECT_LT((fs.M.transpose() * fs.N - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-12);
    }
}

TEST(ValidateFrame, SingularAndIndefinite) {
    Chart c(4);
    CCNVMetric m = raw(c, "0", {}, {{"x3", "0"}, {"0", "1"}});
    Point bad{1, 0, 0, 0};
    EXPECT_THROW(validate_frame(m, std::vector<Point>{bad}), SingularFrameError);
    EXPECT_NO_THROW(validate_frame(m, std::vector<Point>{Point{1, 0, 0.5, 0}}));
    EXPECT_THROW(frame_scalars_at(m, bad), SingularFrameError);
}

TEST(Christoffel, FlatVanishes) {
    Chart c(5);
    Tensor3 G = christoffel_at(raw(c, "0"), Point(5, 0.7));
    EXPECT_EQ(max_abs(G.data()), 0.0);
}

TEST(Christoffel, AgreesWithFiniteDifferenceOracle) {
    Chart c(5);
    FieldPool pool(12);
    std::vector<CCNVMetric> metrics = {raw(c, "sin(u)*x3^2 + x4")};
    for (int k = 0; k < 4; ++k) metrics.push_back(fixtures::random_metric(c, pool));
    for (const auto& m : metrics)
        for (const auto& p : sample_points(box(c), 20, 3)) {
            Tensor3 G = christoffel_at(m, p), F = oracle::fd_christoffel(m, p);
            for (std::size_t i = 0; i < G.data().size(); ++i)
                ASSERT_NEAR(G.data()[i], F.data()[i], 1e-6);
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b) {
                    ASSERT_EQ(G(a, b, 1), 0.0);  // nothing is transported along v
                    ASSERT_NEAR(G(kU, a, b), 0.0, 1e-14);
                }
        }
}

TEST(CCNVResidual, FlatAndGeneric) {
    Chart c(5);
    auto pts = sample_points(box(c), 100, 9);
    ResidualReport r = ccnv_residual(raw(c, "0"), pts);
    EXPECT_EQ(r.at("nabla_ell").max_abs, 0.0);
    EXPECT_EQ(r.at("ell_norm").max_abs, 0.0);
    FieldPool pool(5);
    EXPECT_LT(ccnv_residual(fixtures::random_metric(c, pool), pts).max_residual(), 1e-10);
    EXPECT_THROW(ccnv_residual(raw(c, "0"), std::vector<Point>{}), Error);
}

TEST(CCNVResidual, VDependentHBreaksIt) {
    Chart c(5);
    CCNVMetric m = CCNVMetric::unchecked(c, parse_field("x3^2 + 0.1*v", c), std::vector<ScalarField>(3),
                                         TransverseFrame::identity(3));
    ResidualReport r = ccnv_residual(m, sample_points(box(c), 100, 9));
    EXPECT_GT(r.at("nabla_ell").max_abs, 1e-3);
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(r.at("nabla_ell").worst.size(), 5u);
}

TEST(FrameScalars, TrivialCases) {
    Chart c(5);
    FrameScalars fs = frame_scalars_at(raw(c, "0"), Point(5, 0.4));
    EXPECT_EQ(fs.W.norm(), 0.0);
    EXPECT_EQ(fs.J.norm(), 0.0);
    EXPECT_EQ(fs.B.norm(), 0.0);
    CCNVMetric m = raw(c, "u*x3", {"x4", "x3"}, {{"1 + x4^2", "x3", "0"}, {"0", "2", "x5"}, {"0", "0", "exp(x3)"}});
    for (const auto& p : sample_points(box(c), 10, 2)) EXPECT_EQ(frame_scalars_at(m, p).B.norm(), 0.0);
}

TEST(FrameScalars, Antisymmetries) {
    Chart c(6);
    FieldPool pool(8);
    CCNVMetric m = fixtures::random_metric(c, pool);
    for (const auto& p : sample_points(box(c), 10, 2)) {
        FrameScalars fs = frame_scalars_at(m, p);
        EXPECT_EQ((fs.A + fs.A.transpose()).norm(), 0.0);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) {
                    EXPECT_EQ(fs.D(i, j, k), -fs.D(i, k, j));
                    EXPECT_EQ(fs.gamma(k, i, j), -fs.gamma(i, k, j));
                }
    }
}

TEST(FrameScalars, FrameIsNullOrthonormal) {
    Chart c(5);
    FieldPool pool(31);
    CCNVMetric m = fixtures::random_metric(c, pool);
    for (const auto& p : sample_points(box(c), 10, 2)) {
        FrameScalars fs = frame_scalars_at(m, p);
        Eigen::MatrixXd eta = fs.E * assemble_metric(m, p) * fs.E.transpose();
        Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(5, 5);
        expect(0, 0) = expect(1, 1) = 0;
        expect(0, 1) = expect(1, 0) = 1;
        EXPECT_LT((eta - expect).norm(), 1e-12);
    }
}

TEST(FrameScalars, ConnectionMatchesCoordinateComputation) {
    Chart c(5);
    FieldPool pool(77);
    const int L = 0, Nn = 1;
    for (int k = 0; k < 3; ++k) {
        CCNVMetric m = fixtures::random_metric(c, pool);
        for (const auto& p : sample_points(box(c), 4, 6 + k)) {
            FrameScalars fs = frame_scalars_at(m, p);
            for (int i = 0; i < 3; ++i) {
                // J_i = g(n, nabla_n m_i)
                EXPECT_NEAR(fs.J(i), frame_connection(m, p, Nn, 2 + i, Nn), 1e-6);
                for (int j = 0; j < 3; ++j) {
                    EXPECT_NEAR(0.5 * (fs.B(i, j) - fs.B(j, i) - fs.A(i, j)), frame_connection(m, p, 2 + j, 2 + i, Nn), 1e-6);
                    for (int q = 0; q < 3; ++q)
                        EXPECT_NEAR(fs.gamma(q, i, j), frame_connection(m, p, 2 + q, 2 + i, 2 + j), 1e-6);
                }
                EXPECT_NEAR(frame_connection(m, p, L, 2 + i, Nn), 0.0, 1e-6);
            }
            for (int n = 1; n < 3; ++n) {
                EXPECT_EQ(fs.gamma_3n3(n - 1), fs.gamma(0, n, 0));
                EXPECT_NEAR(fs.gamma_3n2(n - 1), frame_connection(m, p, 2, 2 + n, Nn), 1e-6);
            }
        }
    }
}

TEST(FrameScalars, ShiftedFrameGivesAdvectedB) {
    Chart c(5);
    double eps = 0.7;
    ScalarField m33 = shift(parse_field("exp(0.4*x3)*(1 + 0.2*x4^2)", c), eps);
    std::vector<std::vector<ScalarField>> rows(3, std::vector<ScalarField>(3));
    rows[0][0] = m33;
    rows[1][1] = rows[2][2] = 1.0;
    CCNVMetric m(c, 0.0, std::vector<ScalarField>(3), TransverseFrame(rows));
    for (const auto& p : sample_points(box(c), 10, 2)) {
        FrameScalars fs = frame_scalars_at(m, p);
        double expect = -eps * oracle::fd(m33, kX3, p) / m33(p);
        EXPECT_NEAR(fs.B(0, 0), expect, 1e-8);
    }
}

TEST(Curvature, FlatVanishes) {
    Chart c(5);
    CurvatureSample cs = curvature_at(raw(c, "0"), Point(5, 0.2));
    EXPECT_EQ(max_abs(cs.riemann.data()), 0.0);
    EXPECT_EQ(cs.scalar, 0.0);
    EXPECT_EQ(cs.kretschmann, 0.0);
}

TEST(Curvature, PpWaveIsVSI) {
    Chart c(5);
    CCNVMetric m = raw(c, "x3^2");
    auto pts = sample_points(box(c), 10, 2);
    for (const auto& p : pts) {
        CurvatureSample cs = curvature_at(m, p);
        EXPECT_EQ(cs.scalar, 0.0);
        EXPECT_EQ(cs.ricci_squared, 0.0);
        EXPECT_EQ(cs.kretschmann, 0.0);
        EXPECT_EQ(cs.riemann(1, 0, 0, 2), 0.0);
        EXPECT_NE(cs.ricci(0, 0), 0.0);
    }
}

TEST(Curvature, RiemannAgreesWithOracleAndSymmetries) {
    Chart c(5);
    FieldPool pool(19);
    for (int k = 0; k < 2; ++k) {
        CCNVMetric m = fixtures::random_metric(c, pool);
        for (const auto& p : sample_points(box(c), 20, 40 + k)) {
            CurvatureSample cs = curvature_at(m, p);
            Tensor4 F = oracle::fd_riemann(m, p);
            const Tensor4& R = cs.riemann;
            double scale = 1 + max_abs(R.data());
            for (std::size_t i = 0; i < R.data().size(); ++i) ASSERT_NEAR(R.data()[i], F.data()[i], 1e-6 * scale);
            Eigen::MatrixXd g = assemble_metric(m, p);
            EXPECT_LT((cs.ricci - cs.ricci.transpose()).norm(), 1e-9 * scale);
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b)
                    for (int cc = 0; cc < 5; ++cc)
                        for (int d = 0; d < 5; ++d) {
                            EXPECT_EQ(R(a, b, cc, d), -R(a, b, d, cc));
                            EXPECT_NEAR(R(a, b, cc, d) + R(a, cc, d, b) + R(a, d, b, cc), 0.0, 1e-9 * scale);
                            double lab = 0.0, lba = 0.0;
                            for (int e = 0; e < 5; ++e) {
                                lab += g(a, e) * R(e, b, cc, d);
                                lba += g(b, e) * R(e, a, cc, d);
                            }
                            EXPECT_NEAR(lab, -lba, 1e-9 * scale);
                        }
        }
    }
}

TEST(VsiCsiProbe, FlatTransverseVanishes) {
    Chart c(5);
    auto pts = sample_points(box(c), 50, 8);
    InvariantProbe flat = vsi_csi_probe(raw(c, "0"), pts);
    EXPECT_TRUE(flat.constant);
    EXPECT_TRUE(flat.vanishing);
    InvariantProbe pp = vsi_csi_probe(raw(c, "sin(u*x3)*x4 + x5^3", {"u*x4*x3", "x3^2", "u*x5"}), pts);
    EXPECT_TRUE(pp.vanishing);
    for (int k = 0; k < 3; ++k) EXPECT_LT(pp.magnitude[k], 1e-9);
}

TEST(VsiCsiProbe, InhomogeneousFrameIsNotCSI) {
    Chart c(5);
    CCNVMetric m = raw(c, "0", {}, {{"1 + x4^2", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}});
    InvariantProbe probe = vsi_csi_probe(m, sample_points(box(c), 20, 8));
    EXPECT_FALSE(probe.constant);
    EXPECT_FALSE(probe.vanishing);
    EXPECT_GT(probe.spread[0], 1e-8);
}

TEST(VsiCsiProbe, NeedsTenPoints) {
    Chart c(4);
    EXPECT_THROW(vsi_csi_probe(raw(c, "0"), sample_points(box(c), 9, 1)), Error);
}
