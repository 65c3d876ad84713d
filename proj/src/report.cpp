#include "schauder/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace schauder {

nlohmann::json DiagnosticReport::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["provenance"] = {{"module", module}, {"quantity", quantity}};
    for (const auto& [k, v] : scalars) j["scalars"][k] = v;
    for (const auto& [k, v] : series) j["series"][k] = v;
    if (pass.has_value()) j["pass"] = *pass;
    return j;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv_table(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
    if (!out) throw std::runtime_error("write_csv_table: cannot open " + path);
    for (size_t c = 0; c < header.size(); ++c) {
        if (c) out << ',';
        out << header[c];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_number(row[c]);
        }
        out << '\n';
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
    out << content;
}

}  // namespace schauder
