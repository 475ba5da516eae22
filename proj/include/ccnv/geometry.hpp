#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ccnv/field.hpp"
#include "ccnv/report.hpp"

namespace ccnv {

// A function slot depends on a coordinate it must not depend on.
class MaskError : public Error {
public:
    MaskError(std::string function, int coord, const std::string& context = "");
    const std::string& function() const { return function_; }
    int coordinate() const { return coord_; }

private:
    std::string function_;
    int coord_;
};

// Throws MaskError naming the first coordinate of f outside `allowed`.
void require_mask(const ScalarField& f, CoordMask allowed, const std::string& name,
                  const std::string& context = "");
// "m34" for single-digit labels, "m3_10" otherwise. Leg and column are 0-based.
std::string frame_entry_name(int i, int e);

class SingularFrameError : public Error {
public:
    using Error::Error;
};

class Tensor3 {
public:
    explicit Tensor3(int n = 0) : n_(n), d_(static_cast<std::size_t>(n) * n * n, 0.0) {}
    double& operator()(int a, int b, int c) { return d_[(a * n_ + b) * n_ + c]; }
    double operator()(int a, int b, int c) const { return d_[(a * n_ + b) * n_ + c]; }
    int dim() const { return n_; }
    std::vector<double>& data() { return d_; }
    const std::vector<double>& data() const { return d_; }

private:
    int n_;
    std::vector<double> d_;
};

class Tensor4 {
public:
    explicit Tensor4(int n = 0) : n_(n), d_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}
    double& operator()(int a, int b, int c, int d) { return d_[((a * n_ + b) * n_ + c) * n_ + d]; }
    double operator()(int a, int b, int c, int d) const {
        return d_[((a * n_ + b) * n_ + c) * n_ + d];
    }
    int dim() const { return n_; }
    std::vector<double>& data() { return d_; }
    const std::vector<double>& data() const { return d_; }

private:
    int n_;
    std::vector<double> d_;
};

// Upper-triangular m_ie; rows are frame legs i = 3..D, columns coordinates x^e.
// Stored 0-based: entry (i-3, e-3).
class TransverseFrame {
public:
    static TransverseFrame identity(int size);
    explicit TransverseFrame(std::vector<std::vector<ScalarField>> rows);

    int size() const { return static_cast<int>(m_.size()); }
    const ScalarField& operator()(int i, int e) const { return m_[i][e]; }
    CoordMask mask() const;
    bool u_dependent() const { return (mask() & bit(kU)) != 0; }

private:
    std::vector<std::vector<ScalarField>> m_;
};

namespace detail {
struct MetricData;
}

// ds^2 = 2 du (dv + H du + W_e dx^e) + g_ef dx^e dx^f with g_ef = sum_i m_ie m_if.
class CCNVMetric {
public:
    CCNVMetric(const Chart& chart, ScalarField H, std::vector<ScalarField> W, TransverseFrame frame);

    // Skips the v-independence check. Only for deliberately broken metrics in tests.
    static CCNVMetric unchecked(const Chart& chart, ScalarField H, std::vector<ScalarField> W,
                                TransverseFrame frame);

    const Chart& chart() const;
    int dimension() const { return chart().dimension(); }
    const ScalarField& H() const;
    const std::vector<ScalarField>& W() const;  // coordinate components W_e, e = 3..D
    const TransverseFrame& frame() const;
    bool w3_gauge() const { return W().front().is_zero(); }

    const ScalarField& g(int a, int b) const;
    const ScalarField& dg(int a, int b, int c) const;
    const ScalarField& d2g(int a, int b, int c, int d) const;
    // Inverse frame m_i^e, lower-triangular, exact.
    const ScalarField& inverse_frame(int i, int e) const;

    const detail::MetricData& data() const { return *data_; }

private:
    CCNVMetric(const Chart& chart, ScalarField H, std::vector<ScalarField> W, TransverseFrame frame,
               bool check);
    std::shared_ptr<const detail::MetricData> data_;
};

// Checks the frame diagonal is nonzero and g_ef positive definite at every point.
void validate_frame(const CCNVMetric& m, std::span<const Point> points);

Eigen::MatrixXd assemble_metric(const CCNVMetric& m, const Point& p);

// Gamma^a_bc, second kind.
Tensor3 christoffel_at(const CCNVMetric& m, const Point& p);

// max |nabla_a l_b| for l = d/dv, and |l.l|.
ResidualReport ccnv_residual(const CCNVMetric& m, std::span<const Point> sample);

// Frame quantities at a point. Leg indices are 0-based (leg 3 -> 0).
// Frame vectors: l = d_v, n = d_u - H d_v, m_i = m_i^e (d_e - W_e d_v).
// Connection: Gamma_abc = g(e_a, nabla_{e_c} e_b).
struct FrameScalars {
    Eigen::MatrixXd M;      // m_ie
    Eigen::MatrixXd N;      // m_i^e
    Eigen::MatrixXd E;      // rows: l, n, m_3, ... as coordinate vectors
    Eigen::MatrixXd B;      // B_ij = m_ie,u m_j^e
    Eigen::VectorXd W;      // W_i = m_i^e W_e
    Eigen::MatrixXd DW;     // DW(i, j) = D_j W_i
    Eigen::VectorXd J;      // J_i = Gamma_2i2
    Eigen::MatrixXd A;      // A_ij = D_j W_i - D_i W_j + D_kij W_k
    Tensor3 D;              // D_ijk = m_ie,f (m_j^e m_k^f - m_k^e m_j^f)
    Tensor3 gamma;          // gamma(k, i, j) = g(m_k, nabla_{m_j} m_i)
    Eigen::VectorXd gamma_3n2;  // g(m_3, nabla_n m_n), n = 4..D
    Eigen::VectorXd gamma_3n3;  // g(m_3, nabla_{m_3} m_n)
    Eigen::MatrixXd gamma_3nm;  // (n, m) -> g(m_3, nabla_{m_m} m_n)
};

FrameScalars frame_scalars_at(const CCNVMetric& m, const Point& p);

struct CurvatureSample {
    Tensor3 christoffel;    // Gamma^a_bc
    Tensor4 riemann;        // R^a_bcd
    Eigen::MatrixXd ricci;  // R_bd = R^a_bad
    double scalar = 0.0;
    double ricci_squared = 0.0;
    double kretschmann = 0.0;
};

CurvatureSample curvature_at(const CCNVMetric& m, const Point& p);

// Numerical probe for constant / vanishing scalar invariants. Not a proof.
struct InvariantProbe {
    static constexpr double kThreshold = 1e-8;
    static constexpr const char* kNames[3] = {"R", "Ric2", "Riem2"};

    std::vector<std::array<double, 3>> values;
    std::array<double, 3> spread{};
    std::array<double, 3> magnitude{};
    bool constant = false;
    bool vanishing = false;
};

InvariantProbe vsi_csi_probe(const CCNVMetric& m, std::span<const Point> sample);

}  // namespace ccnv
