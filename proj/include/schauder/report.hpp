#pragma once

// Named diagnostic results with provenance, serialized deterministically
// (sorted JSON keys, 17-significant-digit CSV, LF line endings).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace schauder {

struct DiagnosticReport {
    std::string name;
    std::string module;    // producing module
    std::string quantity;  // what the numbers measure
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> series;
    std::optional<bool> pass;

    nlohmann::json to_json() const;
};

// 17 significant digits, '.' decimal separator, LF endings.
std::string format_number(double v);

void write_csv_table(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace schauder
