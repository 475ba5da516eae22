#include "ccnv/scene.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace ccnv {

SceneError::SceneError(const std::string& origin, int line, int column, const std::string& message)
    : Error(origin + (line > 0 ? ":" + std::to_string(line) + (column > 0 ? ":" + std::to_string(column) : "") : "") +
            ": " + message),
      line_(line),
      column_(column) {}

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

struct Entry {
    std::string value;
    int line = 0;
    int column = 0;
    bool used = false;
};

struct Section {
    std::string name;  // "chart", "metric", "expect" or "kv"
    std::string label; // kv name
    int line = 0;
    std::map<std::string, Entry> keys;
    std::vector<std::string> order;
};

class Reader {
public:
    Reader(std::string origin, const Chart& chart) : origin_(std::move(origin)), chart_(chart) {}

    [[noreturn]] void fail(const Entry& e, const std::string& msg, int offset = 0) const {
        throw SceneError(origin_, e.line, e.column + offset, msg);
    }
    [[noreturn]] void fail(int line, const std::string& msg) const { throw SceneError(origin_, line, 0, msg); }

    Entry* find(Section& s, const std::string& key) const {
        auto it = s.keys.find(key);
        if (it == s.keys.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    ScalarField expr(Entry& e) const {
        try {
            return parse_field(e.value, chart_);
        } catch (const ParseError& p) {
            fail(e, p.what(), static_cast<int>(p.position()));
        }
    }

    ScalarField expr(Section& s, const std::string& key, ScalarField fallback = 0.0) const {
        Entry* e = find(s, key);
        return e ? expr(*e) : fallback;
    }

    std::optional<ScalarField> optional_expr(Section& s, const std::string& key) const {
        Entry* e = find(s, key);
        if (!e) return std::nullopt;
        return expr(*e);
    }

    std::vector<double> numbers(Entry& e) const {
        std::vector<double> out;
        std::istringstream in(e.value);
        std::string tok;
        while (in >> tok) {
            double d = 0.0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
            if (ec != std::errc() || ptr != tok.data() + tok.size())
                fail(e, "expected a number, got '" + tok + "'");
            out.push_back(d);
        }
        return out;
    }

    double number(Section& s, const std::string& key, double fallback) const {
        Entry* e = find(s, key);
        if (!e) return fallback;
        auto v = numbers(*e);
        if (v.size() != 1) fail(*e, key + " takes one number");
        return v[0];
    }

    long long integer(Entry& e, long long lo, long long hi) const {
        long long v = 0;
        const char* end = e.value.data() + e.value.size();
        auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
        if (ec != std::errc() || ptr != end) fail(e, "expected an integer, got '" + e.value + "'");
        if (v < lo || v > hi)
            fail(e, "value " + e.value + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    }

    std::string word(Section& s, const std::string& key, const std::vector<std::string>& allowed,
                     bool required = false) const {
        Entry* e = find(s, key);
        if (!e) {
            if (required) fail(s.line, "[" + s.name + "] needs '" + key + "'");
            return "";
        }
        for (const auto& a : allowed)
            if (e->value == a) return a;
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(*e, "unknown " + key + " '" + e->value + "' (expected one of " + list + ")");
    }

    // Legs first..T-1 of a frame read from keys m<leg><coord>; missing entries
    // default to the identity.
    std::optional<TransverseFrame> frame(Section& s, int first) const {
        int T = chart_.transverse_count();
        bool any = false;
        int R = T - first;
        std::vector<std::vector<ScalarField>> rows(R, std::vector<ScalarField>(R));
        for (int i = first; i < T; ++i)
            for (int e = i; e < T; ++e) {
                Entry* en = find(s, frame_entry_name(i, e));
                any |= en != nullptr;
                rows[i - first][e - first] = en ? expr(*en) : ScalarField(i == e ? 1.0 : 0.0);
            }
        if (!any) return std::nullopt;
        return TransverseFrame(rows);
    }

    std::vector<ScalarField> legs(Section& s, const std::string& base, int first) const {
        int T = chart_.transverse_count();
        std::vector<ScalarField> out;
        bool any = false;
        for (int i = first; i < T; ++i) {
            Entry* e = find(s, base + std::to_string(i + 3));
            any |= e != nullptr;
            out.push_back(e ? expr(*e) : ScalarField(0.0));
        }
        if (!any) out.clear();
        return out;
    }

    void unused(const Section& s) const {
        for (const auto& k : s.order) {
            const Entry& e = s.keys.at(k);
            if (!e.used) throw SceneError(origin_, e.line, 1, "unknown key '" + k + "' in [" + s.name + "]");
        }
    }

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    const Chart& chart_;
};

std::vector<Section> split(std::string_view text, const std::string& origin) {
    std::vector<Section> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    bool header = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (!header) {
            if (s != "ccnv-scene 1")
                throw SceneError(origin, line, 1, "expected header 'ccnv-scene 1', got '" + s + "'");
            header = true;
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') throw SceneError(origin, line, 1, "unterminated section header");
            std::string inner = trim(std::string_view(s).substr(1, s.size() - 2));
            Section sec;
            sec.line = line;
            if (inner == "chart" || inner == "metric" || inner == "expect") {
                sec.name = inner;
            } else if (inner.rfind("kv ", 0) == 0) {
                sec.name = "kv";
                sec.label = trim(std::string_view(inner).substr(3));
                bool ok = !sec.label.empty() && !std::isdigit(static_cast<unsigned char>(sec.label[0]));
                for (char c : sec.label) ok &= std::isalnum(static_cast<unsigned char>(c)) || c == '_';
                if (!ok) throw SceneError(origin, line, 5, "bad KV name '" + sec.label + "'");
            } else {
                throw SceneError(origin, line, 2, "unknown section [" + inner + "]");
            }
            for (const auto& o : out) {
                if (o.name != "kv" && o.name == sec.name)
                    throw SceneError(origin, line, 1, "duplicate section [" + sec.name + "]");
                if (o.name == "kv" && sec.name == "kv" && o.label == sec.label)
                    throw SceneError(origin, line, 1, "duplicate KV '" + sec.label + "'");
            }
            out.push_back(std::move(sec));
            continue;
        }
        if (out.empty()) throw SceneError(origin, line, 1, "key outside any section");
        auto eq = raw.find('=');
        if (eq == std::string::npos) throw SceneError(origin, line, 1, "expected 'key = value'");
        std::string key = trim(std::string_view(raw).substr(0, eq));
        std::size_t vstart = eq + 1;
        while (vstart < raw.size() && std::isspace(static_cast<unsigned char>(raw[vstart]))) ++vstart;
        std::string value = trim(std::string_view(raw).substr(eq + 1));
        if (key.empty()) throw SceneError(origin, line, 1, "empty key");
        if (value.empty()) throw SceneError(origin, line, static_cast<int>(eq) + 2, "empty value for '" + key + "'");
        Section& sec = out.back();
        if (sec.keys.count(key)) throw SceneError(origin, line, 1, "duplicate key '" + key + "'");
        sec.keys[key] = Entry{value, line, static_cast<int>(vstart) + 1, false};
        sec.order.push_back(key);
    }
    if (!header) throw SceneError(origin, 0, 0, "empty scene: expected header 'ccnv-scene 1'");
    return out;
}

Section* find_section(std::vector<Section>& all, const std::string& name) {
    for (auto& s : all)
        if (s.name == name) return &s;
    return nullptr;
}

// Rethrows a mask error with the line of the offending key when it can be found.
[[noreturn]] void relocate(const MaskError& e, Section& s, const std::string& origin) {
    auto it = s.keys.find(e.function());
    if (it != s.keys.end()) throw SceneError(origin, it->second.line, it->second.column, e.what());
    throw SceneError(origin, s.line, 0, e.what());
}

void read_chart(Scene& sc, Section& s, const std::string& origin) {
    Reader boot(origin, sc.chart);
    Entry* d = boot.find(s, "dimension");
    if (!d) throw SceneError(origin, s.line, 0, "[chart] needs 'dimension'");
    sc.chart = Chart(static_cast<int>(boot.integer(*d, 4, kMaxDimension)));
    Reader r(origin, sc.chart);
    sc.region = Region::standard(sc.chart);
    for (int c = 0; c < sc.chart.dimension(); ++c) {
        Entry* e = r.find(s, "region." + coordinate_label(c));
        if (!e) continue;
        auto v = r.numbers(*e);
        if (v.size() != 2 || !(v[0] < v[1])) r.fail(*e, "region takes two numbers lo < hi");
        sc.region.bounds[c] = {v[0], v[1]};
    }
    if (Entry* e = r.find(s, "samples")) sc.samples = static_cast<int>(r.integer(*e, 1, 1000000));
    if (Entry* e = r.find(s, "seed")) sc.seed = static_cast<std::uint64_t>(r.integer(*e, 0, (1LL << 62)));
    sc.grid.assign(sc.chart.dimension(), 6);
    if (Entry* e = r.find(s, "grid")) {
        auto v = r.numbers(*e);
        if (v.size() == 1) v.assign(sc.chart.dimension(), v[0]);
        if (static_cast<int>(v.size()) != sc.chart.dimension())
            r.fail(*e, "grid takes one count or one per coordinate");
        for (std::size_t c = 0; c < v.size(); ++c) {
            if (v[c] < 1 || v[c] != static_cast<int>(v[c]) || v[c] > 1000) r.fail(*e, "grid counts are integers in [1, 1000]");
            sc.grid[c] = static_cast<int>(v[c]);
        }
    }
    r.unused(s);
}

struct Built {
    std::optional<CCNVMetric> metric;
    std::optional<KillingCandidate> kv;
};

Built build_raw(const Scene& sc, Section& s, const Reader& r) {
    int T = sc.chart.transverse_count();
    ScalarField H = r.expr(s, "H");
    std::vector<ScalarField> W;
    for (int e = 0; e < T; ++e) W.push_back(r.expr(s, "W" + std::to_string(e + 3)));
    auto m = r.frame(s, 0);
    return {CCNVMetric(sc.chart, H, W, m ? *m : TransverseFrame::identity(T)), std::nullopt};
}

Built build_family(Scene& sc, Section& s, const Reader& r) {
    sc.tag = r.word(s, "family", {"C11i", "C11ii", "C22"}, true);
    std::optional<Region> region = sc.region;
    FamilyPair f = [&] {
        if (sc.tag == "C11i")
            return build_case_1_1_i({sc.chart, r.expr(s, "f2"), r.expr(s, "g2"), r.legs(s, "B", 0), r.frame(s, 0),
                                     region});
        if (sc.tag == "C11ii")
            return build_case_1_1_ii({sc.chart, r.expr(s, "F2"), r.expr(s, "A0"), r.legs(s, "C", 0),
                                      r.frame(s, 0), region});
        return build_case_2_2({sc.chart, r.expr(s, "F1"), r.expr(s, "A6"), r.frame(s, 1), r.number(s, "k", 0.0),
                               r.number(s, "c", 0.0), region});
    }();
    return {f.metric, f.kv};
}

Built build_example(Scene& sc, Section& s, const Reader& r) {
    std::string which = r.word(s, "example", {"I", "I-separable", "II", "II-analytic"}, true);
    sc.tag = "example" + which;
    double eps = r.number(s, "eps", 1.0);
    std::optional<Region> region = sc.region;
    int T = sc.chart.transverse_count();
    ExampleTriple t = [&] {
        if (which == "I")
            return build_example_I(
                {sc.chart, eps, r.frame(s, 0), r.expr(s, "F2"), r.expr(s, "A"), r.legs(s, "B", 1), region});
        if (which == "I-separable") {
            std::vector<double> p;
            std::vector<ScalarField> h;
            bool any_h = false;
            for (int i = 0; i < T; ++i) {
                std::string n = std::to_string(i + 3);
                p.push_back(r.number(s, "p" + n, 0.0));
                auto hi = r.optional_expr(s, "h" + n);
                any_h |= hi.has_value();
                h.push_back(hi ? *hi : ScalarField(i == 0 ? 1.0 : 0.0));
            }
            if (!any_h) h.clear();
            return build_example_I_separable({sc.chart, eps, p, h, r.expr(s, "g"), r.frame(s, 1),
                                              r.expr(s, "A"), r.legs(s, "B", 1), region});
        }
        if (which == "II")
            return build_example_II({sc.chart, eps, r.frame(s, 0), r.expr(s, "H"), r.expr(s, "F2"),
                                     r.expr(s, "f"), r.legs(s, "E", 1), region});
        int order = 4;
        if (Entry* e = r.find(s, "order")) order = static_cast<int>(r.integer(*e, 0, 40));
        return build_example_II_analytic({sc.chart, eps, r.frame(s, 0), r.expr(s, "H"), r.expr(s, "F2"),
                                          r.expr(s, "f"), r.legs(s, "E", 1), order, region});
    }();
    for (auto& w : t.warnings) sc.warnings.push_back(w);
    return {t.metric, t.kv};
}

CCNVMetric mutate(const Scene& sc, const CCNVMetric& m, Section& s, const Reader& r, bool& mutated) {
    int T = sc.chart.transverse_count();
    ScalarField H = m.H();
    std::vector<ScalarField> W = m.W();
    std::vector<std::vector<ScalarField>> rows(T, std::vector<ScalarField>(T));
    for (int i = 0; i < T; ++i)
        for (int e = i; e < T; ++e) rows[i][e] = m.frame()(i, e);
    if (auto d = r.optional_expr(s, "mutate.H")) H = H + *d, mutated = true;
    for (int e = 0; e < T; ++e)
        if (auto d = r.optional_expr(s, "mutate.W" + std::to_string(e + 3))) W[e] = W[e] + *d, mutated = true;
    for (int i = 0; i < T; ++i)
        for (int e = i; e < T; ++e)
            if (auto d = r.optional_expr(s, "mutate." + frame_entry_name(i, e)))
                rows[i][e] = rows[i][e] + *d, mutated = true;
    if (!mutated) return m;
    return CCNVMetric::unchecked(sc.chart, H, W, TransverseFrame(rows));
}

bool uses_quadrature(const CCNVMetric& m) {
    if (m.H().has_quadrature()) return true;
    for (const auto& w : m.W())
        if (w.has_quadrature()) return true;
    for (int i = 0; i < m.frame().size(); ++i)
        for (int e = i; e < m.frame().size(); ++e)
            if (m.frame()(i, e).has_quadrature()) return true;
    return false;
}

}  // namespace

Scene parse_scene(std::string_view text, const std::string& origin) {
    Scene sc;
    sc.origin = origin;
    sc.digest = fnv1a64_hex(text);
    auto sections = split(text, origin);

    Section* chart = find_section(sections, "chart");
    if (!chart) throw SceneError(origin, 0, 0, "missing [chart] section");
    read_chart(sc, *chart, origin);
    Reader r(origin, sc.chart);

    Section* ms = find_section(sections, "metric");
    if (!ms) throw SceneError(origin, 0, 0, "missing [metric] section");
    sc.source = r.word(*ms, "source", {"raw", "family", "example"}, true);
    Built b;
    try {
        if (sc.source == "raw") b = build_raw(sc, *ms, r);
        else if (sc.source == "family") b = build_family(sc, *ms, r);
        else b = build_example(sc, *ms, r);
        sc.metric = mutate(sc, *b.metric, *ms, r, sc.mutated);
    } catch (const MaskError& e) {
        relocate(e, *ms, origin);
    } catch (const SceneError&) {
        throw;
    } catch (const Error& e) {
        throw SceneError(origin, ms->line, 0, e.what());
    }
    bool gauge = r.word(*ms, "gauge", {"w3", "none"}) == "w3";
    r.unused(*ms);

    for (auto& s : sections) {
        if (s.name != "kv") continue;
        SceneKV k;
        k.name = s.label;
        std::string preset = r.word(s, "preset", {"ell", "n", "builder"});
        if (preset.empty()) {
            k.kv = {r.expr(s, "F1"), r.expr(s, "F2"), r.expr(s, "F3")};
        } else if (preset == "ell") {
            k.kv = KillingCandidate::ell();
        } else if (preset == "n") {
            k.kv = KillingCandidate::n();
        } else {
            if (!b.kv) r.fail(*r.find(s, "preset"), "preset 'builder' needs a family or example metric");
            k.kv = *b.kv;
        }
        k.verify = r.word(s, "verify", {"C12i", "C12ii", "C12iii", "C21"});
        std::string ec = r.word(s, "expect.case", {"Case1", "Case2", "Both", "Neither"});
        if (ec == "Case1") k.expect_case = CaseTag::Case1;
        if (ec == "Case2") k.expect_case = CaseTag::Case2;
        if (ec == "Both") k.expect_case = CaseTag::Both;
        if (ec == "Neither") k.expect_case = CaseTag::Neither;
        k.expect_causal = r.word(s, "expect.causal", {"timelike", "null", "spacelike", "non-spacelike"});
        r.unused(s);
        for (const ScalarField* f : {&k.kv.F1, &k.kv.F2, &k.kv.F3}) {
            try {
                require_mask(*f, sc.chart.all() & ~bit(kV), "F");
            } catch (const MaskError& e) {
                std::string fn = f == &k.kv.F1 ? "F1" : f == &k.kv.F2 ? "F2" : "F3";
                auto it = s.keys.find(fn);
                int line = it != s.keys.end() ? it->second.line : s.line;
                throw SceneError(origin, line, 0,
                                 "KV '" + k.name + "': " + fn + " depends on " + coordinate_label(e.coordinate()));
            }
        }
        sc.kvs.push_back(std::move(k));
    }

    if (gauge) {
        CCNVMetric base = *sc.metric;
        for (auto& k : sc.kvs) {
            FamilyPair g = to_w3_gauge(base, k.kv);
            k.kv = g.kv;
            sc.metric = g.metric;
        }
        if (sc.kvs.empty()) sc.metric = to_w3_gauge(base, KillingCandidate::ell()).metric;
    }

    if (Section* ex = find_section(sections, "expect")) {
        sc.expect_invariants = r.word(*ex, "invariants", {"vsi", "csi", "not-vsi", "not-csi"});
        r.unused(*ex);
    }

    sc.quadrature = uses_quadrature(*sc.metric);
    for (const auto& k : sc.kvs)
        sc.quadrature |= k.kv.F1.has_quadrature() || k.kv.F2.has_quadrature() || k.kv.F3.has_quadrature();
    return sc;
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SceneError(path, 0, 0, "cannot open scene file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene(buf.str(), path);
}

}  // namespace ccnv
