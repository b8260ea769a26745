#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace specnet::cli {

struct InferOverrides {
  std::optional<long> seed;
  std::optional<long> n_samples;
  std::optional<long> burn_in;
  std::optional<long> n_average;
  bool no_similarity = false;
};

void cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                  std::optional<long> seed_override);

void cmd_infer(const std::filesystem::path& data_dir,
               const std::optional<std::filesystem::path>& config_path,
               const std::filesystem::path& out_dir, const InferOverrides& overrides);

void cmd_eval(const std::filesystem::path& pred_path, const std::filesystem::path& truth_path,
              const std::filesystem::path& out_dir, std::optional<double> threshold);

// Full front end; tools/dss.cpp forwards to this so tests can drive it in-process.
int dss_main(int argc, const char* const* argv);

}  // namespace specnet::cli
