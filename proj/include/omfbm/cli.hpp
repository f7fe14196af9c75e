#pragma once

#include "omfbm/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace omfbm {

// Every field can come from a JSON config (same key) and be overridden by a flag.
struct RunConfig {
    std::string subcommand;
    double H = 0.3;
    int n = 256;
    int d = 1;
    std::uint64_t seed = 1;
    std::string norm = "sup";
    std::string drift = "zero";
    std::vector<double> drift_params;
    long N = 100000;
    std::vector<double> epsilons;
    std::string output_dir = "out";
    int threads = 0;

    std::string method = "cholesky";  // sample
    std::uint64_t index = 0;
    std::string h = "zero";           // zero | identity | sin
    std::string h_file;               // path CSV, overrides h
    std::string G = "constant";
    std::vector<double> G_params;     // empty: constant means 1
    std::string functional = "exp_skorokhod_G";
    double c = 1.0;                   // exp_linear
    double s = 1.0;
    int m = 1;
    double alpha = 0.0;
    std::vector<double> endpoint;     // mpp; empty means free endpoint
    int basis_size = 32;
    int max_iter = 400;
    double tol = 1e-6;
    std::string cm_method = "derivative";
    std::vector<double> r_schedule;

    json to_json() const;
    // Unknown keys are rejected. A run manifest ({"config": ...}) is accepted as well.
    static RunConfig from_json(const json& j);
    // Field-level std::invalid_argument on the first problem found.
    void validate() const;
    ScalarFn scalar_fn() const;
};

extern const std::vector<std::string> kSubcommands;

// Runs a validated config, writes report.json, CSV tables and manifest.json under output_dir.
// Returns 0, 2 (validation) or 3 (numerical failure).
int run(const RunConfig& cfg);

// argv front end: flag > OMFBM_OUTPUT_DIR (output_dir only) > --config > defaults.
int cli_main(int argc, char** argv);

}  // namespace omfbm
