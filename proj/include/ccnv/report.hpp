#pragma once

#include <string>
#include <vector>

#include "ccnv/field.hpp"

namespace ccnv {

struct ResidualEntry {
    std::string name;
    double max_abs = 0.0;
    Point worst;  // empty until a sample has been recorded
    double tolerance = 0.0;

    bool pass() const { return max_abs < tolerance; }
};

// Max-abs residuals keyed by equation name, in first-recorded order. The worst
// point is the first point attaining the maximum, so results depend only on
// the order in which samples are fed in.
class ResidualReport {
public:
    void record(const std::string& name, double residual, const Point& p, double tolerance);
    void merge(const ResidualReport& other, const std::string& prefix = "");

    const std::vector<ResidualEntry>& entries() const { return entries_; }
    const ResidualEntry& at(const std::string& name) const;
    bool contains(const std::string& name) const;
    double max_residual() const;
    bool pass() const;

private:
    std::vector<ResidualEntry> entries_;
};

}  // namespace ccnv
