#include "confspec/json_io.hpp"

namespace confspec {

Json to_json(const SpectrumReport& report) {
    Json j;
    j["eigenvalues"] = report.eigenvalues;
    j["normalized"] = report.normalized;
    j["total_mass"] = report.total_mass;
    j["clusters"] = report.clusters;
    j["residuals"] = report.residuals;
    if (!report.warnings.empty()) j["warnings"] = report.warnings;
    return j;
}

SpectrumReport spectrum_from_json(const Json& j) {
    SpectrumReport r;
    r.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    r.normalized = j.at("normalized").get<std::vector<double>>();
    r.total_mass = j.at("total_mass").get<double>();
    r.clusters = j.at("clusters").get<std::vector<std::vector<int>>>();
    r.residuals = j.at("residuals").get<std::vector<double>>();
    if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
    return r;
}

}  // namespace confspec
