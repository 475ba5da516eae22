#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccnv/examples.hpp"
#include "ccnv/families.hpp"

namespace ccnv {

// Input problem located in a scene file. Line and column are 1-based; 0 when
// the problem is not tied to a position.
class SceneError : public Error {
public:
    SceneError(const std::string& origin, int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct SceneKV {
    std::string name;
    KillingCandidate kv;
    std::string verify;       // "", C12i, C12ii, C12iii or C21
    std::optional<CaseTag> expect_case;
    std::string expect_causal;  // "", timelike, null, spacelike, non-spacelike
};

struct Scene {
    std::string origin;
    std::string digest;  // FNV-1a 64 of the file bytes, hex
    Chart chart{4};
    Region region;
    int samples = 100;
    std::uint64_t seed = 1;
    std::vector<int> grid;
    std::string source;  // raw, family or example
    std::string tag;     // family or example name
    std::optional<CCNVMetric> metric;
    bool mutated = false;
    bool quadrature = false;  // some metric or KV field integrates numerically
    std::vector<SceneKV> kvs;
    std::string expect_invariants;  // "", vsi, csi, not-vsi, not-csi
    std::vector<std::string> warnings;
};

Scene load_scene(const std::string& path);
Scene parse_scene(std::string_view text, const std::string& origin = "<scene>");

std::string fnv1a64_hex(std::string_view bytes);

}  // namespace ccnv
