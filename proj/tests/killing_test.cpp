#include <gtest/gtest.h>

#include <cmath>

#include "ccnv/killing.hpp"
#include "support/random_metric.hpp"

using namespace ccnv;

namespace {

const Chart kChart(5);

ScalarField P(const std::string& s) { return parse_field(s, kChart); }

CCNVMetric flat() { return CCNVMetric(kChart, 0.0, std::vector<ScalarField>(3), TransverseFrame::identity(3)); }

std::vector<Point> sample(int n, std::uint64_t seed) { return sample_points(Region::standard(kChart), n, seed); }

KillingCandidate random_candidate(FieldPool& pool, bool general_f1) {
    CoordMask all = kChart.all() & ~bit(kV);
    CoordMask ux3 = bit(kU) | bit(kX3);
    return {P(pool.expression(general_f1 ? all : ux3, 2)), P(pool.expression(all, 2)), P(pool.expression(all, 2))};
}

}  // namespace

TEST(KillingCandidate, Forms) {
    EXPECT_EQ(KillingCandidate::ell().form(), KillingForm::A);
    EXPECT_EQ(KillingCandidate::n().form(), KillingForm::A);
    EXPECT_EQ((KillingCandidate{P("u"), 0.0, 0.0}).form(), KillingForm::B);
    EXPECT_EQ((KillingCandidate{P("u + x3"), 0.0, 0.0}).form(), KillingForm::C);
    EXPECT_EQ((KillingCandidate{P("u*x4"), 0.0, 0.0}).form(), KillingForm::General);
}

TEST(ToCoordinateVector, EllAndN) {
    FieldPool pool(3);
    CCNVMetric m = fixtures::random_metric(kChart, pool);
    CoordinateVector ell = to_coordinate_vector(KillingCandidate::ell(), m);
    for (const auto& p : sample(5, 1)) {
        Eigen::VectorXd x = ell.at(p);
        EXPECT_EQ(x, (Eigen::VectorXd(5) << 0, 1, 0, 0, 0).finished());
    }
    Eigen::VectorXd n = to_coordinate_vector(KillingCandidate::n(), flat()).at(Point(5, 0.5));
    EXPECT_EQ(n, (Eigen::VectorXd(5) << 1, 0, 0, 0, 0).finished());
}

TEST(ToCoordinateVector, RejectsVDependentSlot) {
    KillingCandidate X{P("u"), P("v"), 0.0};
    try {
        to_coordinate_vector(X, flat());
        FAIL();
    } catch (const MaskError& e) {
        EXPECT_EQ(e.function(), "F2");
        EXPECT_EQ(e.coordinate(), kV);
    }
}

TEST(LieResidual, EllIsKillingOnEveryCCNVMetric) {
    FieldPool pool(5);
    for (int k = 0; k < 3; ++k) {
        CCNVMetric m = fixtures::random_metric(kChart, pool);
        CoordinateVector ell = to_coordinate_vector(KillingCandidate::ell(), m);
        for (const auto& p : sample(20, k)) EXPECT_LT(lie_residual_at(ell, m, p).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(LieResidual, VTimesEllOnFlat) {
    CoordinateVector X({0.0, P("v"), 0.0, 0.0, 0.0});
    Eigen::MatrixXd L = lie_residual_at(X, flat(), Point{1, 2, 0, 0, 0});
    EXPECT_EQ(L(kU, kV), 1.0);
    EXPECT_EQ(L(kV, kU), 1.0);
    L(kU, kV) = L(kV, kU) = 0.0;
    EXPECT_EQ(L.cwiseAbs().maxCoeff(), 0.0);
}

TEST(FrameResiduals, EllOnFlat) {
    ResidualReport r = frame_killing_residuals_at(KillingCandidate::ell(), flat(), Point(5, 0.3));
    EXPECT_EQ(r.entries().size(), 6u);
    EXPECT_EQ(r.max_residual(), 0.0);
}

// The frame equations are the frame components of L_X g; with n_n carrying a factor 1/2.
TEST(FrameResiduals, EqualProjectedLieDerivative) {
    FieldPool pool(77);
    for (int k = 0; k < 6; ++k) {
        CCNVMetric m = fixtures::random_metric(kChart, pool);
        ASSERT_FALSE(m.w3_gauge());
        KillingCandidate X = random_candidate(pool, k % 2 == 1);
        CoordinateVector cx = to_coordinate_vector(X, m);
        for (const auto& p : sample(5, k)) {
            FrameScalars fs = frame_scalars_at(m, p);
            Eigen::MatrixXd L = fs.E * lie_residual_at(cx, m, p) * fs.E.transpose();
            ResidualReport r = frame_killing_residuals_at(X, m, p);
            double tol = 1e-9 * (1 + L.cwiseAbs().maxCoeff());
            EXPECT_NEAR(r.at("ell_ell").max_abs, std::abs(L(0, 0)), tol);
            EXPECT_NEAR(r.at("ell_n").max_abs, std::abs(L(0, 1)), tol);
            EXPECT_NEAR(r.at("ell_m").max_abs, L.block(0, 2, 1, 3).cwiseAbs().maxCoeff(), tol);
            EXPECT_NEAR(r.at("n_n").max_abs, 0.5 * std::abs(L(1, 1)), tol);
            EXPECT_NEAR(r.at("n_m").max_abs, L.block(1, 2, 1, 3).cwiseAbs().maxCoeff(), tol);
            EXPECT_NEAR(r.at("m_m").max_abs, L.block(2, 2, 3, 3).cwiseAbs().maxCoeff(), tol);
        }
    }
}

TEST(FrameResiduals, GaugeCanBeDemanded) {
    FieldPool pool(1);
    CCNVMetric m = fixtures::random_metric(kChart, pool);
    FrameCheckOptions strict;
    strict.require_w3_gauge = true;
    EXPECT_THROW(frame_killing_residuals_at(KillingCandidate::ell(), m, Point(5, 0.5), strict), Error);
    EXPECT_NO_THROW(frame_killing_residuals_at(KillingCandidate::ell(), flat(), Point(5, 0.5), strict));
}

TEST(ClassifyCase, EllOnFlatIsBoth) {
    EXPECT_EQ(classify_case(KillingCandidate::ell(), flat(), sample(10, 1)).tag, CaseTag::Both);
    KillingCandidate X{P("u + x3"), 0.0, 0.0};
    CaseVerdict v = classify_case(X, flat(), sample(10, 1));
    EXPECT_EQ(v.tag, CaseTag::Case2);
    EXPECT_DOUBLE_EQ(v.max_d3x1, 1.0);
    EXPECT_THROW(classify_case(X, flat(), std::vector<Point>{}), Error);
}

TEST(Commutator, CoordinateFields) {
    CoordinateVector du({1.0, 0.0, 0.0, 0.0, 0.0});
    CoordinateVector udv({0.0, P("u"), 0.0, 0.0, 0.0});
    Eigen::VectorXd b = commutator_at(du, udv, Point(5, 0.4));
    EXPECT_EQ(b, (Eigen::VectorXd(5) << 0, 1, 0, 0, 0).finished());
    EXPECT_EQ(commutator_at(udv, du, Point(5, 0.4)), -b);
}

TEST(Bracket, FormAOnFlatCommutes) {
    BracketReport r = bracket_with_ell(KillingCandidate::n(), flat(), sample(10, 2));
    EXPECT_TRUE(r.vanishes);
    EXPECT_EQ(r.form, KillingForm::A);
}

TEST(Bracket, FormBGivesPlusEll) {
    FieldPool pool(9);
    CCNVMetric m = fixtures::random_metric(kChart, pool);
    KillingCandidate X{P("u"), P(pool.expression(kChart.all() & ~bit(kV))), P("x4*u")};
    BracketReport r = bracket_with_ell(X, m, sample(20, 2));
    EXPECT_TRUE(r.proportional);
    EXPECT_DOUBLE_EQ(r.sigma, 1.0);
    EXPECT_LT(r.sigma_spread, 1e-12);
}

TEST(Bracket, FormCNormIsD3F1Squared) {
    FieldPool pool(10);
    for (int k = 0; k < 3; ++k) {
        CCNVMetric m = fixtures::random_metric(kChart, pool);
        KillingCandidate X{P("u + x3 + 0.3*u*x3^2"), P("x4"), P("x5*u")};
        BracketReport r = bracket_with_ell(X, m, sample(20, k));
        EXPECT_EQ(r.form, KillingForm::C);
        EXPECT_LT(r.max_norm_mismatch, 1e-8);
        EXPECT_GT(r.min_norm, 0.0);
        EXPECT_FALSE(r.proportional);
    }
}

TEST(Norm, FrameAndCoordinateAgree) {
    FieldPool pool(12);
    for (int k = 0; k < 6; ++k) {
        CCNVMetric m = fixtures::random_metric(kChart, pool);
        KillingCandidate X = random_candidate(pool, k % 2 == 0);
        for (const auto& p : sample(20, k)) {
            double a = norm_at(X, m, p), b = frame_norm_at(X, m, p);
            EXPECT_NEAR(a, b, 1e-10 * (1 + std::abs(b)));
        }
        EXPECT_EQ(norm_at(KillingCandidate::ell(), m, Point(5, 0.5)), 0.0);
    }
}

TEST(CausalClassify, EllIsNullEverywhere) {
    FieldPool pool(2);
    CCNVMetric m = fixtures::random_metric(kChart, pool);
    GridSpec grid{Region::standard(kChart), {3, 3, 3, 3, 3}};
    CausalReport r = causal_classify(KillingCandidate::ell(), m, grid);
    EXPECT_EQ(r.null, grid.size());
    EXPECT_TRUE(r.global_non_spacelike);
    EXPECT_DOUBLE_EQ(r.null_tolerance, 1e-9 * 5);
}

TEST(CausalClassify, LabelsInvariantUnderPositiveScaling) {
    FieldPool pool(14);
    CCNVMetric m = fixtures::random_metric(kChart, pool);
    KillingCandidate X = random_candidate(pool, false);
    KillingCandidate Y{2.5 * X.F1, 2.5 * X.F2, 2.5 * X.F3};
    GridSpec grid{Region::standard(kChart), {3, 4, 3, 2, 2}};
    CausalReport a = causal_classify(X, m, grid), b = causal_classify(Y, m, grid);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_FALSE(a.d3x1_zero);
    EXPECT_FALSE(a.global_non_spacelike);
}

TEST(CausalClassify, QuadraticFlags) {
    // X = n - ell: norm -2 everywhere; with F3 = 1 the printed and direct tests disagree.
    GridSpec grid{Region::standard(kChart), {2, 3, 2, 2, 2}};
    CausalReport r = causal_classify({1.0, -1.0, 0.0}, flat(), grid);
    EXPECT_EQ(r.timelike, grid.size());
    EXPECT_TRUE(r.global_non_spacelike);
    CausalReport s = causal_classify({1.0, -1.0, 1.0}, flat(), grid);
    EXPECT_TRUE(s.inequality_direct);  // 1 - 2 <= 0
    EXPECT_FALSE(s.inequality_printed);  // 1 + 2 > 0
    EXPECT_DOUBLE_EQ(s.max_c, -1.0);
    CausalReport t = causal_classify({P("u"), 0.0, 0.0}, flat(), grid);
    EXPECT_TRUE(t.d3x1_zero);
    EXPECT_FALSE(t.linear_term_zero);
    EXPECT_FALSE(t.global_non_spacelike);
}

TEST(NullNormalize, Recipes) {
    KillingCandidate n = null_normalize({1.0, P("x3"), 0.0});
    EXPECT_TRUE(n.F2.is_zero());
    EXPECT_TRUE(n.F3.is_zero());
    EXPECT_EQ(n.F1.constant_value().value_or(0), 1.0);
    KillingCandidate r = null_normalize({2.0, 0.0, 0.0});
    EXPECT_EQ(r.F1.constant_value().value_or(0), 1.0);
    EXPECT_TRUE(r.F2.is_zero());
    EXPECT_THROW(null_normalize({0.0, 1.0, 0.0}), Error);
    EXPECT_THROW(null_normalize({P("u"), 1.0, 0.0}), Error);

    FieldPool pool(6);
    CCNVMetric m = fixtures::random_metric(kChart, pool);
    KillingCandidate X = null_normalize({1.0, 0.0, 0.7 * m.frame()(0, 0)});
    for (const auto& p : sample(100, 3)) EXPECT_LT(std::abs(norm_at(X, m, p)), 1e-10);
}
