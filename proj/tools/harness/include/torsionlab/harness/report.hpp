#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "torsionlab/harness/suite.hpp"

namespace torsionlab::harness {

/// Full nested report. Non-finite numbers are written as the strings "inf",
/// "-inf" and "nan" so that report_from_json reproduces every field exactly.
nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& doc);

/// Flat verdict table: name, anchor, domain, b, p, level, lhs, rhs, margin,
/// satisfied. One row per verdict.
std::string report_csv(const Report& report);

/// Cross-section of the torsion functions along the domain's horizontal
/// centre line and a bar chart of the smallest relative margin per anchor at
/// the finest level.
std::string domain_svg(const Report& report, const std::string& domain);

/// Writes report.json, verdicts.csv and one <domain>.svg per domain for the
/// requested formats. Returns the written paths. Throws Error when the
/// directory cannot be created or written.
std::vector<std::filesystem::path> emit_report(const Report& report, const std::filesystem::path& dir,
                                               const std::vector<std::string>& formats);

}  // namespace torsionlab::harness
