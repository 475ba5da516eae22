#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccnv/families.hpp"
#include "ccnv/sampling.hpp"

namespace ccnv {

struct ExampleTriple {
    CCNVMetric metric;
    KillingCandidate kv;
    ScalarField norm;  // closed-form g(X, X)
    std::vector<std::string> warnings;
};

// Profile slots are written in (x3, x^n) and evaluated at x3 - eps*u, so
// "x3" in a profile stands for y = x3 - eps*u. Vector slots (B, E) are
// indexed by leg 4..D. Missing slots default to zero, frames to the identity.

// X1 = u, F3 = eps u m33.
struct ExampleISpec {
    Chart chart;
    double eps = 1.0;
    std::optional<TransverseFrame> profile;  // m_is(y, x^n)
    ScalarField F2;                          // F2(u, x^e)
    ScalarField A;                           // A(y, x^n)
    std::vector<ScalarField> B;              // B_n(y, x^m)
    std::optional<Region> region;
};

// m_3s = y^p_s h_s(x^n), F2 = -eps y^(2 p3 + 1) h3^2 / (2 p3 + 1) + g(u, x^n).
struct ExampleISeparableSpec {
    Chart chart;
    double eps = 1.0;
    std::vector<double> p;                // p_s, s = 3..D
    std::vector<ScalarField> h;           // h_s(x^n), s = 3..D; default h3 = 1, others 0
    ScalarField g;                        // g(u, x^n)
    std::optional<TransverseFrame> rest;  // rows 4..D of the profile, functions of (y, x^n)
    ScalarField A;
    std::vector<ScalarField> B;
    std::optional<Region> region;
};

// X1 = 1, F3 = eps m33.
struct ExampleIISpec {
    Chart chart;
    double eps = 1.0;
    std::optional<TransverseFrame> profile;
    ScalarField H;               // H(u, x^e)
    ScalarField F2;              // F2(y, x^n)
    ScalarField f;               // f(x^e)
    std::vector<ScalarField> E;  // E_n(y, x^m)
    std::optional<Region> region;
};

// H = H(y, x^n) and f expanded about x3 = 0 to the given order.
struct ExampleIIAnalyticSpec {
    Chart chart;
    double eps = 1.0;
    std::optional<TransverseFrame> profile;
    ScalarField H;  // H(y, x^n)
    ScalarField F2;
    ScalarField f;
    std::vector<ScalarField> E;
    int order = 4;
    std::optional<Region> region;
};

ExampleTriple build_example_I(const ExampleISpec& spec);
ExampleTriple build_example_I_separable(const ExampleISeparableSpec& spec);
ExampleTriple build_example_II(const ExampleIISpec& spec);
ExampleTriple build_example_II_analytic(const ExampleIIAnalyticSpec& spec);

// v -> v + phi with phi = int_0^x3 W3, which removes W3. F2 and F3 pick up
// phi D2 F1 and phi D3 F1 so the vector is unchanged.
FamilyPair to_w3_gauge(const CCNVMetric& m, const KillingCandidate& X);

}  // namespace ccnv
