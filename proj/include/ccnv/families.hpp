#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ccnv/geometry.hpp"
#include "ccnv/killing.hpp"
#include "ccnv/sampling.hpp"

namespace ccnv {

struct FamilyPair {
    CCNVMetric metric;
    KillingCandidate kv;
};

// Free functions default to zero, the frame to the identity, the region to
// Region::standard. Frame-component slots (B, C) are indexed by leg 3..D.

// X1 = u. f2(x^e), g2(u), B_i(x^e), u-independent frame m(x^e).
struct Case11iSpec {
    Chart chart;
    ScalarField f2;
    ScalarField g2;
    std::vector<ScalarField> B;
    std::optional<TransverseFrame> frame;
    std::optional<Region> region;
};

// X1 = 1. F2(x^e), A0(u, x^r), C_i(x^e), frame m(x^e).
struct Case11iiSpec {
    Chart chart;
    ScalarField F2;
    ScalarField A0;
    std::vector<ScalarField> C;
    std::optional<TransverseFrame> frame;
    std::optional<Region> region;
};

// X1 = F1(u, x3) with F1,3 != 0. m33 = F1,3, m3r = 0, and the remaining
// (D-3)x(D-3) block m_nr(x^r). k and c are the constants in F2.
struct Case22Spec {
    Chart chart;
    ScalarField F1;
    ScalarField A6;
    std::optional<TransverseFrame> rest;
    double k = 0.0;
    double c = 0.0;
    std::optional<Region> region;
};

FamilyPair build_case_1_1_i(const Case11iSpec& spec);
FamilyPair build_case_1_1_ii(const Case11iiSpec& spec);
FamilyPair build_case_2_2(const Case22Spec& spec);

// Subcases by X1: (i) X1 = u, (ii) X1 = 1, (iii) X1 = 0; F3 != 0 throughout.
enum class Case12Subcase { I, II, III };

// Residuals of the subcase constraints on a supplied (metric, KV) pair in the
// W3 = 0 gauge, followed by the two Killing checks (prefixed "killing." and
// "lie"). Integral relations are checked in differentiated form.
ResidualReport verify_case_1_2(Case12Subcase subcase, const CCNVMetric& m, const KillingCandidate& X,
                               std::span<const Point> sample, double tolerance = 1e-8);

// Case 2.1: structure residuals (frame shape, connection components, X1 = 0,
// F2,r = 0, F3,e = 0), the transport equations and both Killing checks.
ResidualReport verify_case_2_1(const CCNVMetric& m, const KillingCandidate& X, std::span<const Point> sample,
                               double tolerance = 1e-8);

// Names of the structure entries in verify_case_2_1.
extern const std::vector<std::string> kCase21Structure;

}  // namespace ccnv
