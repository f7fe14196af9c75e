#include "omfbm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace omfbm {

std::string fmt_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json num_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

json to_json(const NormKind& k) { return to_string(k); }

json to_json(const McEstimate& e) {
    return {{"epsilon", num(e.epsilon)},   {"mean", num(e.mean)},       {"stderr", num(e.std_err)},
            {"n_total", e.n_total},        {"n_accepted", e.n_accepted}, {"seed", e.seed},
            {"norm", to_json(e.norm)},     {"flagged", e.flagged}};
}

json to_json(const ScalingReport& r) {
    json u = json::array();
    for (bool b : r.usable) u.push_back(b);
    return {{"exponent", num(r.exponent)},
            {"epsilons", num_array(r.epsilons)},
            {"hits", r.hits},
            {"probs", num_array(r.probs)},
            {"log_probs", num_array(r.log_probs)},
            {"log_stderr", num_array(r.log_stderr)},
            {"rescaled", num_array(r.rescaled)},
            {"usable", u},
            {"stability_ratio", num(r.stability_ratio)},
            {"all_negative", r.all_negative},
            {"N", r.N},
            {"seed", r.seed}};
}

json to_json(const TraceReport& r) {
    return {{"trace_numeric", num(r.trace_numeric)}, {"trace_identity", num(r.trace_identity)},
            {"r_schedule", num_array(r.r_schedule)}, {"per_r", num_array(r.per_r)},
            {"extrapolated", num(r.extrapolated)},   {"abs_error", num(r.abs_error)}};
}

json to_json(const OmReport& r) {
    return {{"j_value", num(r.j_value)},
            {"cm_term", num(r.cm_term)},
            {"div_term", num(r.div_term)},
            {"cm_norm_h", num(r.cm_norm_h)}};
}

json to_json(const OmRatioReport& r) {
    json rows = json::array();
    for (const auto& x : r.rows)
        rows.push_back({{"epsilon", num(x.epsilon)},
                        {"n_x", x.n_x},
                        {"n_b", x.n_b},
                        {"n_both", x.n_both},
                        {"ratio", num(x.ratio)},
                        {"log_ratio", num(x.log_ratio)},
                        {"log_stderr", num(x.log_stderr)},
                        {"flagged", x.flagged}});
    return {{"rows", rows}, {"om", to_json(r.om)}, {"N", r.N}, {"seed", r.seed}, {"norm", to_json(r.norm)}};
}

json to_json(const ProbeReport& r) {
    json es = json::array();
    for (const auto& e : r.estimates) es.push_back(to_json(e));
    return {{"m", r.m},
            {"m_max", r.m_max},
            {"alpha", num(r.alpha)},
            {"estimates", es},
            {"limsup_bound", num(r.limsup_bound)},
            {"consistent_with_limsup_le_1", r.consistent}};
}

CsvTable mc_table(const std::vector<McEstimate>& es) {
    CsvTable t;
    t.header = {"epsilon", "estimate", "stderr", "n_accepted"};
    for (const auto& e : es)
        t.add({fmt_double(e.epsilon), fmt_double(e.mean), fmt_double(e.std_err), std::to_string(e.n_accepted)});
    return t;
}

void write_text_file(const std::string& file, const std::string& content) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + file + "' for writing");
    os << content;
    if (!os) throw std::runtime_error("write to '" + file + "' failed");
}

void write_json_file(const std::string& file, const json& j) { write_text_file(file, j.dump(2) + "\n"); }

void write_csv_file(const std::string& file, const CsvTable& t) {
    std::ostringstream os;
    for (size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << "\n";
    for (const auto& r : t.rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    }
    write_text_file(file, os.str());
}

void write_path_file(const std::string& file, const Path& p) {
    std::ostringstream os;
    write_path_csv(os, p);
    write_text_file(file, os.str());
}

}  // namespace omfbm
