#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace bundletrade {

/// One failed check. slack is negative by the amount the check failed.
struct ReportEntry {
    std::string constraint;
    std::optional<std::size_t> t;
    std::optional<std::size_t> s;
    std::optional<std::size_t> item;
    double slack = 0.0;
};

struct Report {
    std::size_t checked = 0;
    std::vector<ReportEntry> violations;

    bool ok() const { return violations.empty(); }
    std::size_t count(const std::string& constraint) const {
        std::size_t k = 0;
        for (const auto& v : violations) k += v.constraint == constraint;
        return k;
    }
    void merge(const Report& other) {
        checked += other.checked;
        violations.insert(violations.end(), other.violations.begin(), other.violations.end());
    }
};

/// {"checked": int, "violations": [{"constraint", "t", "s", "slack"}]}; "item"
/// is added when the violation is pinned to an item type.
std::string report_to_json(const Report& report);

}  // namespace bundletrade
