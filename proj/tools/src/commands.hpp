#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "experiment_config.hpp"

namespace lmpkit::app {

struct CommonArgs {
    std::filesystem::path config;        ///< empty: all defaults
    std::vector<std::string> overrides;  ///< --set key.path=value
    std::filesystem::path data;          ///< optional dataset dir written by `gen`
};

void cmd_gen(const CommonArgs& args, const std::filesystem::path& out, std::ostream& os);
void cmd_train(const CommonArgs& args, std::ostream& os);
void cmd_eval(const CommonArgs& args, const std::filesystem::path& checkpoint, std::ostream& os);
void cmd_entropy(const CommonArgs& args, const std::vector<std::filesystem::path>& checkpoints, std::ostream& os);
void cmd_pooldemo(std::ostream& os);
void cmd_flops(const CommonArgs& args, const std::filesystem::path& checkpoint, std::ostream& os);

/// Dense/sparse 2x2 table for the three kernels, one "kernel, input, output" row each.
std::string pooldemo_table();

/// CSV header "kind_or_thr,match_mode,kp1..kpK,avg" plus one row per report.
std::string pck_csv_header(std::size_t k);
std::string pck_csv_row(const std::string& label, MatchMode mode, const PckReport& r);

/// "pooling,mean_entropy,std_entropy,n_images"
std::string entropy_csv_header();
std::string entropy_csv_row(const std::string& pooling, const EntropySummary& s);

}  // namespace lmpkit::app
