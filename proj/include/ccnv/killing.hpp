#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "ccnv/geometry.hpp"
#include "ccnv/report.hpp"
#include "ccnv/sampling.hpp"

namespace ccnv {

// A: F1 constant. B: F1 = u. C: F1 = F1(u, x3). General: anything else.
enum class KillingForm { A, B, C, General };
const char* form_name(KillingForm f);

// Frame components X1 = F1, X2 = -v D2(F1) + F2, X3 = -v D3(F1) + F3, X_n = 0.
// F1, F2, F3 are functions of (u, x^e).
struct KillingCandidate {
    ScalarField F1;
    ScalarField F2;
    ScalarField F3;

    static KillingCandidate ell();  // (0, 1, 0)
    static KillingCandidate n();    // (1, 0, 0)
    KillingForm form() const;
};

// Coordinate components X^a with their exact partials.
class CoordinateVector {
public:
    explicit CoordinateVector(std::vector<ScalarField> components);

    int dimension() const { return static_cast<int>(x_.size()); }
    const ScalarField& operator[](int a) const { return x_[a]; }
    // d_b X^a
    const ScalarField& partial(int a, int b) const { return dx_[a * dimension() + b]; }
    Eigen::VectorXd at(const Point& p) const;

private:
    std::vector<ScalarField> x_;
    std::vector<ScalarField> dx_;
};

CoordinateVector to_coordinate_vector(const KillingCandidate& X, const CCNVMetric& m);

// (L_X g)_ab at p.
Eigen::MatrixXd lie_residual_at(const CoordinateVector& X, const CCNVMetric& m, const Point& p);
// Entry "lie": max |(L_X g)_ab| over the sample.
ResidualReport lie_residuals(const CoordinateVector& X, const CCNVMetric& m,
                             std::span<const Point> sample, double tolerance = 1e-8);

struct FrameCheckOptions {
    double tolerance = 1e-8;
    // The equations hold in any gauge; set this to insist on W3 = 0 anyway.
    bool require_w3_gauge = false;
};

// Frame components (L_X g)(e_a, e_b) grouped as
// ell_ell, ell_n, ell_m, n_n, n_m, m_m.
ResidualReport frame_killing_residuals_at(const KillingCandidate& X, const CCNVMetric& m,
                                          const Point& p, const FrameCheckOptions& opt = {});
ResidualReport frame_killing_residuals(const KillingCandidate& X, const CCNVMetric& m,
                                       std::span<const Point> sample,
                                       const FrameCheckOptions& opt = {});
// The same equations with signs, upper triangle over (ell, n, m_3, ..., m_D).
Eigen::MatrixXd frame_killing_matrix_at(const KillingCandidate& X, const CCNVMetric& m, const Point& p);

enum class CaseTag { Case1, Case2, Both, Neither };
const char* case_name(CaseTag t);

struct CaseVerdict {
    static constexpr double kThreshold = 1e-9;
    CaseTag tag = CaseTag::Neither;
    double max_d3x1 = 0.0;   // max |D3 X1|
    double max_gamma = 0.0;  // max of |Gamma_3n2|, |Gamma_3n3|, |Gamma_3nm|
};

CaseVerdict classify_case(const KillingCandidate& X, const CCNVMetric& m, std::span<const Point> sample);

// [X, Y]^a = X^b d_b Y^a - Y^b d_b X^a
Eigen::VectorXd commutator_at(const CoordinateVector& X, const CoordinateVector& Y, const Point& p);

// [X, ell] over a sample.
struct BracketReport {
    KillingForm form = KillingForm::General;
    double max_abs = 0.0;        // max |[X, ell]^a|
    double max_off_ell = 0.0;    // max over components other than v
    double sigma = 0.0;          // [X, ell]^v at the first point
    double sigma_spread = 0.0;   // max - min of [X, ell]^v
    bool vanishes = false;       // max_abs < 1e-10
    bool proportional = false;   // constant multiple of ell to 1e-10
    // Norm of [X, ell] against (D3 F1)^2.
    double max_norm_mismatch = 0.0;
    double min_norm = 0.0;
    double max_d3f1 = 0.0;
    Point worst;
};

BracketReport bracket_with_ell(const KillingCandidate& X, const CCNVMetric& m, std::span<const Point> sample);

// g(X, X) by contraction of the coordinate components.
double norm_at(const KillingCandidate& X, const CCNVMetric& m, const Point& p);
// 2 X1 X2 + X3^2 from the frame components.
double frame_norm_at(const KillingCandidate& X, const CCNVMetric& m, const Point& p);

enum class CausalLabel { Timelike, Null, Spacelike };
const char* causal_name(CausalLabel l);

struct CausalReport {
    std::vector<Point> points;
    std::vector<double> norms;
    std::vector<CausalLabel> labels;
    double null_tolerance = 0.0;
    std::size_t timelike = 0, null = 0, spacelike = 0;

    // norm(v) = a v^2 + b v + c at each (u, x), coefficients from norm_at.
    bool d3x1_zero = false;           // a = 0 everywhere
    bool linear_term_zero = false;    // b = 0 everywhere
    bool inequality_direct = false;   // c = F3^2 + 2 X1 F2 <= tol everywhere
    bool inequality_printed = false;  // F3^2 - 2 X1 F2 <= tol everywhere
    double max_c = 0.0;
    double max_printed = 0.0;
    // a = 0, b = 0 and c <= tol: non-spacelike for every v.
    bool global_non_spacelike = false;
};

CausalReport causal_classify(const KillingCandidate& X, const CCNVMetric& m, const GridSpec& grid);

// Requires constant F1 = c != 0. Returns (1, -F3^2/(2c^2), F3/c), which has norm zero.
KillingCandidate null_normalize(const KillingCandidate& X);

}  // namespace ccnv
