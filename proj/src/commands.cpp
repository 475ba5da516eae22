#include "ccnv/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace ccnv {

namespace {

using json = nlohmann::ordered_json;

json num(double x) { return std::isfinite(x) ? json(x) : json(std::isnan(x) ? "nan" : x > 0 ? "inf" : "-inf"); }

std::string text(const json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

json point_json(const Point& p) {
    json a = json::array();
    for (double x : p) a.push_back(num(x));
    return a;
}

std::string point_str(const Point& p) {
    std::string s = "(";
    for (std::size_t c = 0; c < p.size(); ++c)
        s += (c ? ", " : "") + coordinate_label(static_cast<int>(c)) + "=" + text(num(p[c]));
    return s + ")";
}

// Runs f on the whole sample; if it throws, finds the first point that
// reproduces the failure and reports it.
template <class F>
auto locate(const std::vector<Point>& pts, const std::string& what, F f,
            std::function<void(const Point&)> single = nullptr) {
    try {
        return f(std::span<const Point>(pts));
    } catch (const Error& e) {
        for (const auto& p : pts) {
            try {
                if (single) single(p);
                else f(std::span<const Point>(&p, 1));
            } catch (const Error& inner) {
                throw Error(what + ": " + inner.what() + " at " + point_str(p));
            }
        }
        throw Error(what + ": " + e.what());
    }
}

class Run {
public:
    Run(const std::string& command, const Scene& sc, const CommandOptions& opt)
        : command_(command), sc_(sc), m_(*sc.metric) {
        seed_ = opt.seed.value_or(sc.seed);
        samples_ = opt.samples.value_or(sc.samples);
        if (samples_ < 1) throw Error("--samples must be positive");
        pts_ = sample_points(sc.region, samples_, seed_);
        bool has_ell = false;
        for (const auto& k : sc.kvs) has_ell |= k.name == "ell";
        if (!has_ell) kvs_.push_back({"ell", KillingCandidate::ell(), "", std::nullopt, ""});
        for (const auto& k : sc.kvs) kvs_.push_back(k);
        tol_ = sc.quadrature ? 1e-7 : 1e-8;
    }

    void check(const std::string& name, double value, double tolerance, const Point& worst, bool pass,
               json extra = json::object()) {
        json c;
        c["name"] = name;
        c["pass"] = pass;
        c["value"] = num(value);
        c["tolerance"] = num(tolerance);
        c["worst"] = worst.empty() ? json(nullptr) : point_json(worst);
        for (auto& [k, v] : extra.items()) c[k] = v;
        checks_.push_back(std::move(c));
        pass_ = pass_ && pass;
    }

    void residuals(const ResidualReport& r, const std::string& prefix) {
        for (const auto& e : r.entries()) check(prefix + e.name, e.max_abs, e.tolerance, e.worst, e.pass());
    }

    void verify();
    void classify(const std::string& grid_out);
    void invariants();
    void bracket();

    CommandResult finish() const;

private:
    std::string command_;
    const Scene& sc_;
    const CCNVMetric& m_;
    std::uint64_t seed_;
    int samples_;
    std::vector<Point> pts_;
    std::vector<SceneKV> kvs_;
    double tol_;
    json checks_ = json::array();
    json details_ = json::object();
    bool pass_ = true;
};

void Run::verify() {
    residuals(locate(pts_, "ccnv check", [&](std::span<const Point> s) { return ccnv_residual(m_, s); }), "ccnv.");
    for (const auto& k : kvs_) {
        std::string pre = "kv." + k.name + ".";
        CoordinateVector cx = to_coordinate_vector(k.kv, m_);
        FrameCheckOptions opt;
        opt.tolerance = tol_;
        ResidualReport frame, lie, agree;
        locate(pts_, "KV '" + k.name + "'", [&](std::span<const Point> s) {
            for (const auto& p : s) {
                frame.merge(frame_killing_residuals_at(k.kv, m_, p, opt));
                Eigen::MatrixXd L = lie_residual_at(cx, m_, p);
                lie.record("lie", L.cwiseAbs().maxCoeff(), p, tol_);
                // both paths compute frame components of L_X g; n_n carries 1/2
                FrameScalars fs = frame_scalars_at(m_, p);
                Eigen::MatrixXd Pf = fs.E * L * fs.E.transpose();
                Pf(1, 1) *= 0.5;
                Eigen::MatrixXd K = frame_killing_matrix_at(k.kv, m_, p);
                double d = 0.0;
                for (int a = 0; a < K.rows(); ++a)
                    for (int b = a; b < K.cols(); ++b) d = std::max(d, std::abs(K(a, b) - Pf(a, b)));
                agree.record("agreement", d, p, tol_);
            }
            return 0;
        });
        residuals(frame, pre + "frame.");
        residuals(lie, pre);
        residuals(agree, pre);
        if (!k.verify.empty()) {
            ResidualReport r = [&] {
                if (k.verify == "C21") return verify_case_2_1(m_, k.kv, pts_, tol_);
                Case12Subcase sub = k.verify == "C12i"    ? Case12Subcase::I
                                    : k.verify == "C12ii" ? Case12Subcase::II
                                                          : Case12Subcase::III;
                return verify_case_1_2(sub, m_, k.kv, pts_, tol_);
            }();
            residuals(r, pre + k.verify + ".");
        }
    }
}

void Run::classify(const std::string& grid_out) {
    GridSpec grid{sc_.region, sc_.grid};
    json per = json::object();
    std::ostringstream csv;
    csv << "kv";
    for (int c = 0; c < sc_.chart.dimension(); ++c) csv << "," << coordinate_label(c);
    csv << ",norm,label\n";
    for (const auto& k : kvs_) {
        std::string pre = "kv." + k.name + ".";
        CaseVerdict v = locate(pts_, "classify '" + k.name + "'",
                               [&](std::span<const Point> s) { return classify_case(k.kv, m_, s); });
        CausalReport c;
        try {
            c = causal_classify(k.kv, m_, grid);
        } catch (const Error& e) {
            for (std::size_t i = 0; i < grid.size(); ++i) {
                Point p = grid.point(i);
                try {
                    norm_at(k.kv, m_, p);
                } catch (const Error& inner) {
                    throw Error("causal grid '" + k.name + "': " + inner.what() + " at " + point_str(p));
                }
            }
            throw;
        }
        double n = static_cast<double>(c.points.size());
        json d;
        d["case"] = case_name(v.tag);
        d["max_d3x1"] = num(v.max_d3x1);
        d["max_gamma"] = num(v.max_gamma);
        d["case_threshold"] = num(CaseVerdict::kThreshold);
        json g;
        g["points"] = c.points.size();
        g["timelike"] = c.timelike;
        g["null"] = c.null;
        g["spacelike"] = c.spacelike;
        g["timelike_percent"] = num(100.0 * c.timelike / n);
        g["null_percent"] = num(100.0 * c.null / n);
        g["spacelike_percent"] = num(100.0 * c.spacelike / n);
        g["null_tolerance"] = num(c.null_tolerance);
        d["grid"] = g;
        json f;
        f["d3x1_zero"] = c.d3x1_zero;
        f["linear_term_zero"] = c.linear_term_zero;
        f["inequality_direct"] = c.inequality_direct;
        f["inequality_printed"] = c.inequality_printed;
        f["max_c"] = num(c.max_c);
        f["max_printed"] = num(c.max_printed);
        f["global_non_spacelike"] = c.global_non_spacelike;
        d["flags"] = f;
        per[k.name] = d;

        if (k.expect_case) {
            bool ok = v.tag == *k.expect_case;
            check(pre + "case", ok ? 0.0 : 1.0, 0.0, {}, ok,
                  json{{"expected", case_name(*k.expect_case)}, {"found", case_name(v.tag)}});
        }
        if (!k.expect_causal.empty()) {
            // worst = the violating point furthest on the wrong side
            std::size_t bad = 0;
            double worst_norm = 0.0, score = -1.0;
            Point worst;
            for (std::size_t i = 0; i < c.points.size(); ++i) {
                CausalLabel l = c.labels[i];
                const std::string& want = k.expect_causal;
                bool ok = want == "timelike"    ? l == CausalLabel::Timelike
                          : want == "null"      ? l == CausalLabel::Null
                          : want == "spacelike" ? l == CausalLabel::Spacelike
                                                : l != CausalLabel::Spacelike;
                if (ok) continue;
                ++bad;
                double s = want == "spacelike" ? -c.norms[i] : want == "null" ? std::abs(c.norms[i]) : c.norms[i];
                if (s > score) score = s, worst_norm = c.norms[i], worst = c.points[i];
            }
            json extra{{"expected", k.expect_causal}, {"violations", bad}};
            if (bad) extra["worst_norm"] = num(worst_norm);
            check(pre + "causal", static_cast<double>(bad), 0.0, worst, bad == 0, extra);
        }
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            csv << k.name;
            for (double x : c.points[i]) csv << "," << text(num(x));
            csv << "," << text(num(c.norms[i])) << "," << causal_name(c.labels[i]) << "\n";
        }
    }
    details_["kvs"] = per;
    if (!grid_out.empty()) {
        std::ofstream out(grid_out, std::ios::binary);
        if (!out) throw Error("cannot write grid file " + grid_out);
        out << csv.str();
        details_["grid_file"] = grid_out;
    }
}

void Run::invariants() {
    InvariantProbe probe = locate(
        pts_, "invariants", [&](std::span<const Point> s) { return vsi_csi_probe(m_, s); },
        [&](const Point& p) { curvature_at(m_, p); });
    json names = json::array(), spread = json::array(), mag = json::array(), values = json::array();
    for (int k = 0; k < 3; ++k) {
        names.push_back(InvariantProbe::kNames[k]);
        spread.push_back(num(probe.spread[k]));
        mag.push_back(num(probe.magnitude[k]));
    }
    for (const auto& v : probe.values) values.push_back(json::array({num(v[0]), num(v[1]), num(v[2])}));
    details_["names"] = names;
    details_["threshold"] = num(InvariantProbe::kThreshold);
    details_["spread"] = spread;
    details_["magnitude"] = mag;
    details_["constant"] = probe.constant;
    details_["vanishing"] = probe.vanishing;
    details_["values"] = values;

    const std::string& want = sc_.expect_invariants;
    if (want.empty()) return;
    bool vsi = want == "vsi" || want == "not-vsi";
    // worst point: largest |value| for VSI, furthest from the first value for CSI
    double value = 0.0, best = -1.0;
    Point worst;
    for (std::size_t i = 0; i < probe.values.size(); ++i)
        for (int k = 0; k < 3; ++k) {
            double s = vsi ? std::abs(probe.values[i][k]) : std::abs(probe.values[i][k] - probe.values[0][k]);
            if (s > best) best = s, worst = pts_[i];
        }
    for (int k = 0; k < 3; ++k) value = std::max(value, vsi ? probe.magnitude[k] : probe.spread[k]);
    bool pass = want == "vsi"       ? probe.vanishing
                : want == "csi"     ? probe.constant
                : want == "not-vsi" ? !probe.vanishing
                                    : !probe.constant;
    check("invariants." + want, value, InvariantProbe::kThreshold, worst, pass);
}

void Run::bracket() {
    CoordinateVector ell = to_coordinate_vector(KillingCandidate::ell(), m_);
    json per = json::object();
    for (const auto& k : kvs_) {
        std::string pre = "kv." + k.name + ".bracket.";
        BracketReport b = locate(pts_, "bracket '" + k.name + "'",
                                 [&](std::span<const Point> s) { return bracket_with_ell(k.kv, m_, s); });
        CoordinateVector cx = to_coordinate_vector(k.kv, m_);
        json comps = json::array();
        for (const auto& p : pts_) {
            Eigen::VectorXd c = commutator_at(cx, ell, p);
            json row = json::array();
            for (int a = 0; a < c.size(); ++a) row.push_back(num(c(a)));
            comps.push_back(row);
        }
        json d;
        d["form"] = form_name(b.form);
        d["max_abs"] = num(b.max_abs);
        d["max_off_ell"] = num(b.max_off_ell);
        d["sigma"] = num(b.sigma);
        d["sigma_spread"] = num(b.sigma_spread);
        d["vanishes"] = b.vanishes;
        d["proportional"] = b.proportional;
        d["max_d3f1"] = num(b.max_d3f1);
        d["norm_vs_d3f1_squared"] = num(b.max_norm_mismatch);
        d["min_norm"] = num(b.min_norm);
        d["components"] = comps;
        per[k.name] = d;
        switch (b.form) {
            case KillingForm::A:
                check(pre + "zero", b.max_abs, 1e-10, b.worst, b.max_abs < 1e-10);
                break;
            case KillingForm::B: {
                check(pre + "off_ell", b.max_off_ell, 1e-10, b.worst, b.max_off_ell < 1e-10);
                check(pre + "sigma_spread", b.sigma_spread, 1e-10, b.worst, b.sigma_spread < 1e-10);
                double dev = std::abs(std::abs(b.sigma) - 1.0);
                check(pre + "sigma_unit", dev, 1e-10, b.worst, dev < 1e-10,
                      json{{"sigma", num(b.sigma)}, {"sigma_stated", -1.0}});
                break;
            }
            case KillingForm::C:
                check(pre + "norm", b.max_norm_mismatch, 1e-8, b.worst, b.max_norm_mismatch < 1e-8);
                check(pre + "positive", b.min_norm, 0.0, b.worst, b.min_norm > 0.0);
                break;
            case KillingForm::General:
                break;
        }
    }
    details_["samples"] = json::array();
    for (const auto& p : pts_) details_["samples"].push_back(point_json(p));
    details_["kvs"] = per;
}

CommandResult Run::finish() const {
    json r;
    r["tool"] = "ccnv";
    r["version"] = kToolVersion;
    r["command"] = command_;
    r["scene_digest"] = sc_.digest;
    r["source"] = sc_.source;
    if (!sc_.tag.empty()) r["tag"] = sc_.tag;
    r["dimension"] = sc_.chart.dimension();
    r["seed"] = seed_;
    r["samples"] = samples_;
    r["mutated"] = sc_.mutated;
    r["warnings"] = sc_.warnings;
    r["pass"] = pass_;
    r["checks"] = checks_;
    r["details"] = details_;

    std::ostringstream s;
    s << command_ << " " << sc_.origin << "  digest " << sc_.digest << "  seed " << seed_ << "  samples " << samples_
      << "\n";
    for (const auto& w : sc_.warnings) s << "warning: " << w << "\n";
    for (const auto& c : checks_) {
        s << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << "  value "
          << text(c["value"]) << "  tol " << text(c["tolerance"]);
        if (!c["worst"].is_null()) {
            Point p;
            for (const auto& x : c["worst"]) p.push_back(x.is_number() ? x.get<double>() : NAN);
            s << "  at " << point_str(p);
        }
        s << "\n";
    }
    if (command_ == "classify")
        for (const auto& [name, d] : details_["kvs"].items())
            s << "kv " << name << ": " << d["case"].get<std::string>() << ", timelike "
              << text(d["grid"]["timelike_percent"]) << "%, null " << text(d["grid"]["null_percent"])
              << "%, spacelike " << text(d["grid"]["spacelike_percent"]) << "%, global non-spacelike "
              << (d["flags"]["global_non_spacelike"].get<bool>() ? "yes" : "no") << "\n";
    if (command_ == "invariants")
        s << "invariants: spread " << details_["spread"].dump() << ", magnitude " << details_["magnitude"].dump()
          << ", constant " << (details_["constant"].get<bool>() ? "yes" : "no") << ", vanishing "
          << (details_["vanishing"].get<bool>() ? "yes" : "no") << "\n";
    if (command_ == "bracket")
        for (const auto& [name, d] : details_["kvs"].items())
            s << "kv " << name << ": form " << d["form"].get<std::string>() << ", max " << text(d["max_abs"])
              << ", sigma " << text(d["sigma"]) << "\n";
    s << (pass_ ? "result: PASS" : "result: FAIL") << " (" << checks_.size() << " checks)\n";
    return {r.dump(2) + "\n", s.str(), pass_};
}

}  // namespace

CommandResult run_command(const std::string& command, const Scene& scene, const CommandOptions& options) {
    if (!scene.metric) throw Error("scene has no metric");
    Run run(command, scene, options);
    if (command == "verify") run.verify();
    else if (command == "classify") run.classify(options.grid_out);
    else if (command == "invariants") run.invariants();
    else if (command == "bracket") run.bracket();
    else throw Error("unknown command '" + command + "'");
    return run.finish();
}

}  // namespace ccnv
