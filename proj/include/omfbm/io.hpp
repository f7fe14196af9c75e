#pragma once

#include "omfbm/kernel_diagnostics.hpp"
#include "omfbm/montecarlo.hpp"
#include "omfbm/onsager_machlup.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace omfbm {

using json = nlohmann::json;

// %.17g; non-finite values are written as "nan" / "inf" / "-inf".
std::string fmt_double(double x);

// Non-finite doubles become null.
json num(double x);
json num_array(const std::vector<double>& v);

json to_json(const NormKind& k);
json to_json(const McEstimate& e);
json to_json(const ScalingReport& r);
json to_json(const TraceReport& r);
json to_json(const OmReport& r);
json to_json(const OmRatioReport& r);
json to_json(const ProbeReport& r);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

// The flat Monte Carlo table: epsilon, estimate, stderr, n_accepted.
CsvTable mc_table(const std::vector<McEstimate>& es);

void write_text_file(const std::string& file, const std::string& content);
void write_json_file(const std::string& file, const json& j);
void write_csv_file(const std::string& file, const CsvTable& t);
void write_path_file(const std::string& file, const Path& p);

}  // namespace omfbm
