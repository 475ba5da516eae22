#include "ccnv/report.hpp"

#include <algorithm>
#include <cmath>

namespace ccnv {

void ResidualReport::record(const std::string& name, double residual, const Point& p,
                            double tolerance) {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const ResidualEntry& e) { return e.name == name; });
    if (it == entries_.end()) {
        entries_.push_back({name, 0.0, {}, tolerance});
        it = entries_.end() - 1;
    }
    double r = std::abs(residual);
    if (std::isnan(r)) r = INFINITY;
    if (it->worst.empty() || r > it->max_abs) {
        it->max_abs = r;
        it->worst = p;
    }
}

void ResidualReport::merge(const ResidualReport& other, const std::string& prefix) {
    for (const auto& e : other.entries_) record(prefix + e.name, e.max_abs, e.worst, e.tolerance);
}

const ResidualEntry& ResidualReport::at(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e;
    throw Error("no residual named '" + name + "'");
}

bool ResidualReport::contains(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const ResidualEntry& e) { return e.name == name; });
}

double ResidualReport::max_residual() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, e.max_abs);
    return m;
}

bool ResidualReport::pass() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const ResidualEntry& e) { return e.pass(); });
}

}  // namespace ccnv
