#include "ccnv/sampling.hpp"

#include <cstdio>

namespace ccnv {

Region Region::standard(const Chart& chart) {
    Region r;
    r.bounds.assign(chart.dimension(), Interval{-1.0, 1.0});
    r.bounds[kU] = {0.5, 2.0};
    r.bounds[kV] = {-2.0, 2.0};
    return r;
}

std::vector<Point> sample_points(const Region& region, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> out(count, Point(region.dimension()));
    for (auto& p : out)
        for (int c = 0; c < region.dimension(); ++c)
            p[c] = rng.uniform(region.bounds[c].lo, region.bounds[c].hi);
    return out;
}

std::size_t GridSpec::size() const {
    std::size_t n = 1;
    for (int k : counts) n *= static_cast<std::size_t>(k);
    return n;
}

// Row-major with the last coordinate varying fastest.
Point GridSpec::point(std::size_t index) const {
    int d = region.dimension();
    Point p(d);
    for (int c = d - 1; c >= 0; --c) {
        std::size_t k = static_cast<std::size_t>(counts[c]);
        std::size_t i = index % k;
        index /= k;
        const Interval& iv = region.bounds[c];
        p[c] = k == 1 ? 0.5 * (iv.lo + iv.hi)
                      : iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / static_cast<double>(k - 1);
    }
    return p;
}

std::string FieldPool::coefficient() {
    char buf[32];
    double c = rng_.uniform(-1.0, 1.0);
    if (c > -0.1 && c < 0.1) c += c < 0 ? -0.2 : 0.2;
    std::snprintf(buf, sizeof buf, "%.3f", c);
    return buf;
}

std::string FieldPool::atom(CoordMask allowed) {
    std::vector<int> coords;
    for (int c = 0; c < kMaxDimension; ++c)
        if (allowed & bit(c)) coords.push_back(c);
    if (coords.empty()) return "1";
    std::string x = coordinate_label(coords[rng_.integer(0, static_cast<int>(coords.size()) - 1)]);
    char buf[64];
    double a = rng_.uniform(0.3, 1.2);
    switch (rng_.integer(0, 6)) {
        case 0: return x;
        case 1: return x + "^2";
        case 2: return x + "^3";
        case 3: std::snprintf(buf, sizeof buf, "sin(%.3f*%s)", a, x.c_str()); return buf;
        case 4: std::snprintf(buf, sizeof buf, "cos(%.3f*%s)", a, x.c_str()); return buf;
        case 5: std::snprintf(buf, sizeof buf, "exp(%.3f*%s)", a * 0.5, x.c_str()); return buf;
        default: return "(1 + " + x + ")";
    }
}

std::string FieldPool::expression(CoordMask allowed, int terms) {
    if (allowed == 0) return coefficient();
    std::string out;
    for (int t = 0; t < terms; ++t) {
        if (t) out += " + ";
        out += coefficient() + "*" + atom(allowed);
        if (rng_.uniform() < 0.5) out += "*" + atom(allowed);
    }
    return out;
}

std::string FieldPool::positive(CoordMask allowed) {
    return "exp(0.3*(" + expression(allowed, 2) + "))";
}

std::string FieldPool::small(CoordMask allowed, double scale) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", scale);
    return std::string(buf) + "*(" + expression(allowed, 2) + ")";
}

}  // namespace ccnv
