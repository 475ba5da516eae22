#include <gtest/gtest.h>

#include <cmath>

#include "ccnv/examples.hpp"

using namespace ccnv;

namespace {

const Chart k4(4);
const Chart k5(5);

ScalarField P(const std::string& s, const Chart& c = k5) { return parse_field(s, c); }

std::vector<Point> sample(const Chart& c, int n, std::uint64_t seed) {
    return sample_points(Region::standard(c), n, seed);
}

double lie_max(const CCNVMetric& m, const KillingCandidate& X, std::span<const Point> pts) {
    return lie_residuals(to_coordinate_vector(X, m), m, pts).max_residual();
}

TransverseFrame profile5() {
    return TransverseFrame({{P("1.2 + 0.3*sin(x3) + 0.1*x4^2"), P("0.2*x3*x5"), P("0.1*x4")},
                            {0.0, P("1.5 + 0.2*x3^2"), P("0.3*x5")},
                            {0.0, 0.0, P("1 + 0.1*cos(x3 + x4)")}});
}

ExampleISpec example_I_general() {
    return {k5, 0.7, profile5(), P("sin(u)*x3 + 0.3*u^2*x4 - 0.2*x5*x3*u"), P("0.4*x3*x4 + 0.1*x5"),
            {P("0.2*x3 + x5"), P("cos(x3)*x4")}, std::nullopt};
}

ExampleISeparableSpec example_I_separable(double p3) {
    return {k5,
            0.7,
            {p3, 1.0, 2.0},
            {P("1.1 + 0.2*x4*x5"), P("0.3 + x4"), P("0.5*x5^2")},
            P("0.3*u*x4 + sin(u)*x5"),
            TransverseFrame({{P("1.5 + 0.2*x3^2"), P("0.3*x5")}, {0.0, P("1 + 0.1*cos(x3 + x4)")}}),
            P("0.4*x3*x4 + 0.1*x5"),
            {P("0.2*x3 + x5"), P("cos(x3)*x4")},
            std::nullopt};
}

ExampleIISpec example_II_general() {
    return {k5,
            0.7,
            profile5(),
            P("sin(u*x3) + x4*x3^2*u + 0.3*x5*u^2"),
            P("0.3*x3^2*x4 - 0.5 + x5"),
            P("x3*x4 + 0.2*x5*x3^2 + sin(x3)*x5"),
            {P("0.2*x3 + x5"), P("cos(x3)*x4")},
            std::nullopt};
}

ExampleIIAnalyticSpec example_II_analytic() {
    return {k5,
            0.7,
            profile5(),
            P("sin(x3)*x4 + x3^2*x5"),
            P("0.3*x3^2*x4 - 0.5 + x5"),
            P("x3*x4 + 0.2*x5*x3^2 + x3^3*x4*x5"),
            {P("0.2*x3 + x5"), P("cos(x3)*x4")},
            4,
            std::nullopt};
}

void expect_advection(const ExampleTriple& t, double eps) {
    const TransverseFrame& m = t.metric.frame();
    for (const auto& p : sample(t.metric.chart(), 10, 40))
        for (int i = 0; i < m.size(); ++i)
            for (int e = i; e < m.size(); ++e)
                EXPECT_NEAR(differentiate(m(i, e), kU)(p) + eps * differentiate(m(i, e), kX3)(p), 0.0, 1e-13);
}

}  // namespace

TEST(ExampleISeparable, TrivialProfileIsConstantH) {
    ExampleISeparableSpec s{k5, 1.0, {}, {}, 0.0, std::nullopt, 0.0, {}, std::nullopt};
    ExampleTriple t = build_example_I_separable(s);
    auto pts = sample(k5, 100, 1);
    for (const auto& p : pts) {
        EXPECT_NEAR(t.metric.H()(p), -1.0, 1e-15);
        EXPECT_NEAR(t.kv.F2(p), -(p[kX3] - p[kU]), 1e-15);
    }
    EXPECT_LT(lie_max(t.metric, t.kv, pts), 1e-10);
}

TEST(ExampleISeparable, W3AtZeroP3IsPureA) {
    ExampleISeparableSpec s{k5, 0.5, {}, {}, 0.0, std::nullopt, P("x3*x4"), {}, std::nullopt};
    ExampleTriple t = build_example_I_separable(s);
    for (const auto& p : sample(k5, 20, 2)) {
        double y = p[kX3] - 0.5 * p[kU];
        EXPECT_NEAR(t.metric.W()[0](p), -y * p[3] / (0.5 * p[kU]), 1e-14);
    }
}

TEST(ExampleISeparable, GenericInstanceIsKilling) {
    ExampleTriple t = build_example_I_separable(example_I_separable(0.0));
    auto pts = sample(k5, 100, 3);
    EXPECT_LT(lie_max(t.metric, t.kv, pts), 1e-10);
    EXPECT_LT(frame_killing_residuals(t.kv, t.metric, pts).max_residual(), 1e-10);
    EXPECT_LT(ccnv_residual(t.metric, pts).max_residual(), 1e-10);
    expect_advection(t, 0.7);
}

TEST(ExampleISeparable, PositiveP3) {
    // y = x3 - 0.7 u > 0 keeps y^(2p3-1) real for p3 = 1.5
    Region r = Region::standard(k5);
    r.bounds[kX3] = {1.5, 2.5};
    ExampleISeparableSpec s = example_I_separable(1.5);
    s.region = r;
    ExampleTriple t = build_example_I_separable(s);
    auto pts = sample_points(r, 50, 4);
    EXPECT_LT(lie_max(t.metric, t.kv, pts), 1e-9);
}

TEST(ExampleISeparable, MatchesGeneralBuilder) {
    for (double p3 : {0.0, 1.0}) {
        SCOPED_TRACE(p3);
        ExampleISeparableSpec s = example_I_separable(p3);
        ExampleTriple sep = build_example_I_separable(s);
        // the same inputs through the quadrature path
        std::vector<std::vector<ScalarField>> rows(3, std::vector<ScalarField>(3));
        for (int e = 0; e < 3; ++e) rows[0][e] = pow(P("x3"), s.p[e]) * s.h[e];
        for (int n = 1; n < 3; ++n)
            for (int e = n; e < 3; ++e) rows[n][e] = (*s.rest)(n - 1, e - 1);
        ScalarField y = P("x3") - s.eps * P("u");
        ScalarField F2 = -s.eps / (2 * p3 + 1) * pow(y, 2 * p3 + 1) * s.h[0] * s.h[0] + s.g;
        ExampleTriple gen = build_example_I({k5, s.eps, TransverseFrame(rows), F2, s.A, s.B, std::nullopt});
        for (const auto& p : sample(k5, 15, 5)) {
            EXPECT_NEAR(sep.metric.H()(p), gen.metric.H()(p), 1e-9);
            for (int e = 0; e < 3; ++e) EXPECT_NEAR(sep.metric.W()[e](p), gen.metric.W()[e](p), 1e-9) << e;
            EXPECT_NEAR(sep.kv.F3(p), gen.kv.F3(p), 1e-12);
        }
    }
}

TEST(ExampleISeparable, Errors) {
    ExampleISeparableSpec s{k5, 1.0, {-0.5, 0.0, 0.0}, {}, 0.0, std::nullopt, 0.0, {}, std::nullopt};
    EXPECT_THROW(build_example_I_separable(s), Error);
    s.p.clear();
    s.eps = 0.0;
    EXPECT_THROW(build_example_I_separable(s), Error);
    s.eps = 1.0;
    s.g = P("x3");
    EXPECT_THROW(build_example_I_separable(s), MaskError);
}

TEST(ExampleI, GeneralInstanceIsKilling) {
    ExampleTriple t = build_example_I(example_I_general());
    auto pts = sample(k5, 100, 6);
    EXPECT_LT(lie_max(t.metric, t.kv, pts), 1e-8);
    EXPECT_LT(frame_killing_residuals(t.kv, t.metric, pts).max_residual(), 1e-8);
    EXPECT_LT(ccnv_residual(t.metric, pts).max_residual(), 1e-10);
    expect_advection(t, 0.7);
}

TEST(ExampleI, NormClosedForm) {
    ExampleTriple t = build_example_I(example_I_general());
    for (const auto& p : sample(k5, 20, 7)) EXPECT_NEAR(t.norm(p), norm_at(t.kv, t.metric, p), 1e-7);
    Point q{1.0, 0.0, 0.3, -0.2, 0.4};
    double phi = t.kv.F2(q), mu = t.metric.frame()(0, 0)(q);
    EXPECT_NEAR(t.norm(q), 2 * phi + 0.49 * mu * mu, 1e-14);
}

TEST(ExampleI, FormBAndConstantRescaling) {
    ExampleTriple t = build_example_I_separable(example_I_separable(0.0));
    EXPECT_EQ(t.kv.form(), KillingForm::B);
    auto pts = sample(k5, 30, 8);
    BracketReport b = bracket_with_ell(t.kv, t.metric, pts);
    EXPECT_TRUE(b.proportional);
    EXPECT_NEAR(b.sigma, 1.0, 1e-12);
    CaseTag tag = classify_case(t.kv, t.metric, pts).tag;
    EXPECT_TRUE(tag == CaseTag::Case1 || tag == CaseTag::Both);
}

TEST(ExampleI, Errors) {
    ExampleISpec s = example_I_general();
    s.eps = 0.0;
    EXPECT_THROW(build_example_I(s), Error);
    s = example_I_general();
    s.A = P("u*x4");
    EXPECT_THROW(build_example_I(s), MaskError);
    s = example_I_general();
    Region r = Region::standard(k5);
    r.bounds[kU] = {0.0, 1.0};
    s.region = r;
    EXPECT_THROW(build_example_I(s), DomainError);
}

TEST(ExampleI, TimelikePatch) {
    // F2 = -(x3 - u) - 4 < 0 on u > 0
    Chart c = k4;
    ExampleISeparableSpec s{c, 1.0, {}, {}, P("-4", c), std::nullopt, 0.0, {}, std::nullopt};
    ExampleTriple t = build_example_I_separable(s);
    Region r = Region::standard(c);
    r.bounds[kV] = {0.5, 2.0};
    CausalReport rep = causal_classify(t.kv, t.metric, GridSpec{r, {8, 8, 8, 8}});
    EXPECT_EQ(rep.timelike, rep.points.size());
    for (std::size_t i = 0; i < rep.points.size(); ++i) EXPECT_NEAR(rep.norms[i], t.norm(rep.points[i]), 1e-12);
}

TEST(ExampleI, IsCase12SubcaseOneAfterGauge) {
    ExampleTriple t = build_example_I_separable(example_I_separable(0.0));
    ASSERT_FALSE(t.metric.w3_gauge());
    FamilyPair g = to_w3_gauge(t.metric, t.kv);
    EXPECT_TRUE(g.metric.w3_gauge());
    auto pts = sample(k5, 30, 9);
    // the norm is a scalar: compare at the same event, v' = v + phi
    ScalarField phi = antiderivative(t.metric.W()[0], kX3, 0.0);
    for (const auto& p : pts) {
        Point q = p;
        q[kV] += phi(p);
        EXPECT_NEAR(norm_at(g.kv, g.metric, q), norm_at(t.kv, t.metric, p), 1e-9);
    }
    ResidualReport r = verify_case_1_2(Case12Subcase::I, g.metric, g.kv, pts);
    for (const auto& e : r.entries()) EXPECT_LT(e.max_abs, 1e-8) << e.name;
}

TEST(ExampleII, FlatProfileTimelike) {
    ExampleIISpec s{k5, 1.0, std::nullopt, 0.0, -1.0, 0.0, {}, std::nullopt};
    ExampleTriple t = build_example_II(s);
    auto pts = sample(k5, 30, 10);
    for (const auto& p : pts) {
        EXPECT_NEAR(t.norm(p), -1.0, 1e-15);
        EXPECT_NEAR(norm_at(t.kv, t.metric, p), -1.0, 1e-14);
    }
    EXPECT_LT(lie_max(t.metric, t.kv, pts), 1e-12);
}

TEST(ExampleII, NullRecipe) {
    ExampleIISpec s = example_II_general();
    ScalarField m33 = (*s.profile)(0, 0);
    s.F2 = -0.5 * s.eps * s.eps * m33 * m33;
    ExampleTriple t = build_example_II(s);
    auto pts = sample(k5, 30, 11);
    for (const auto& p : pts) {
        EXPECT_NEAR(t.norm(p), 0.0, 1e-14);
        EXPECT_NEAR(norm_at(t.kv, t.metric, p), 0.0, 1e-12);
    }
    EXPECT_LT(lie_max(t.metric, t.kv, pts), 1e-8);
    EXPECT_LT(lie_max(t.metric, KillingCandidate::ell(), pts), 1e-12);
}

TEST(ExampleII, GeneralInstanceCommutesWithEll) {
    ExampleTriple t = build_example_II(example_II_general());
    auto pts = sample(k5, 100, 12);
    EXPECT_EQ(t.kv.form(), KillingForm::A);
    EXPECT_LT(lie_max(t.metric, t.kv, pts), 1e-8);
    EXPECT_LT(frame_killing_residuals(t.kv, t.metric, pts).max_residual(), 1e-8);
    EXPECT_LT(ccnv_residual(t.metric, pts).max_residual(), 1e-10);
    EXPECT_TRUE(bracket_with_ell(t.kv, t.metric, pts).vanishes);
    for (const auto& p : std::span(pts).first(20)) EXPECT_NEAR(t.norm(p), norm_at(t.kv, t.metric, p), 1e-7);
    expect_advection(t, 0.7);
    CaseTag tag = classify_case(t.kv, t.metric, pts).tag;
    EXPECT_TRUE(tag == CaseTag::Case1 || tag == CaseTag::Both);
}

TEST(ExampleII, NormIsUTranslationCovariant) {
    ExampleTriple t = build_example_II(example_II_general());
    for (const auto& p : sample(k5, 10, 13)) {
        Point q = p;
        q[kU] += 0.3;
        q[kX3] += 0.7 * 0.3;
        q[kV] += 1.1;
        EXPECT_NEAR(t.norm(p), t.norm(q), 1e-14);
    }
}

TEST(ExampleIIAnalytic, ZeroFIsPureE) {
    ExampleIIAnalyticSpec s = example_II_analytic();
    s.f = 0.0;
    ExampleTriple t = build_example_II_analytic(s);
    EXPECT_TRUE(t.warnings.empty());
    for (const auto& p : sample(k5, 10, 14)) {
        double y = p[kX3] - 0.7 * p[kU];
        Point q = p;
        q[kX3] = y;
        EXPECT_NEAR(t.metric.W()[1](p), s.E[0](q), 1e-15);
        EXPECT_NEAR(t.metric.W()[0](p), -(s.H(q) - s.F2(q)) / 0.7, 1e-14);
    }
}

TEST(ExampleIIAnalytic, LinearSeriesTerm) {
    ExampleIIAnalyticSpec s{k5, 2.0, std::nullopt, 0.0, 0.0, P("x3*x4"), {}, 1, std::nullopt};
    ExampleTriple t = build_example_II_analytic(s);
    EXPECT_TRUE(t.warnings.empty());
    for (const auto& p : sample(k5, 10, 15)) EXPECT_NEAR(t.metric.W()[1](p), p[kX3] * p[kX3] / 4.0, 1e-15);
}

TEST(ExampleIIAnalytic, PolynomialIsExact) {
    ExampleTriple t = build_example_II_analytic(example_II_analytic());
    EXPECT_TRUE(t.warnings.empty());
    auto pts = sample(k5, 100, 16);
    EXPECT_LT(lie_max(t.metric, t.kv, pts), 1e-9);
    EXPECT_TRUE(bracket_with_ell(t.kv, t.metric, pts).vanishes);
}

TEST(ExampleIIAnalytic, TruncationWarning) {
    ExampleIIAnalyticSpec s = example_II_analytic();
    s.f = P("sin(x3)*x4");
    s.order = 2;
    ExampleTriple t = build_example_II_analytic(s);
    ASSERT_EQ(t.warnings.size(), 1u);
    EXPECT_NE(t.warnings[0].find("W4"), std::string::npos);
    EXPECT_GT(lie_max(t.metric, t.kv, sample(k5, 20, 17)), 1e-6);
}

TEST(ExampleII, IsCase12SubcaseTwoAfterGauge) {
    ExampleTriple t = build_example_II_analytic(example_II_analytic());
    FamilyPair g = to_w3_gauge(t.metric, t.kv);
    auto pts = sample(k5, 20, 18);
    EXPECT_LT(lie_max(g.metric, g.kv, pts), 1e-8);
    ResidualReport r = verify_case_1_2(Case12Subcase::II, g.metric, g.kv, pts);
    for (const auto& e : r.entries()) EXPECT_LT(e.max_abs, 1e-8) << e.name;
}

TEST(ExampleII, Errors) {
    ExampleIISpec s = example_II_general();
    s.F2 = P("u");
    EXPECT_THROW(build_example_II(s), MaskError);
    s = example_II_general();
    s.E = {0.0};
    EXPECT_THROW(build_example_II(s), Error);
    ExampleIIAnalyticSpec a = example_II_analytic();
    a.H = P("u*x4");
    EXPECT_THROW(build_example_II_analytic(a), MaskError);
}
