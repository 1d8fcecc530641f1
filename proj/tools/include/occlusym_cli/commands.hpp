#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "occlusym_cli/config.hpp"

namespace occlusym::cli {

// Output layout below RunConfig::out_dir().
struct Layout {
  std::filesystem::path root;

  std::filesystem::path masks() const { return root / "masks"; }
  std::filesystem::path dataset() const { return root / "dataset"; }
  std::filesystem::path train() const { return root / "train"; }
  std::filesystem::path checkpoint() const { return train() / "model.ocsym"; }
  std::filesystem::path loss_csv() const { return train() / "loss.csv"; }
  std::filesystem::path samples() const { return root / "samples"; }
  std::filesystem::path eval() const { return root / "eval"; }
  std::filesystem::path metrics_json() const { return eval() / "metrics.json"; }
  std::filesystem::path report() const { return root / "report"; }
};

// Each command returns the files it wrote, in write order.
using Written = std::vector<std::filesystem::path>;

Written cmd_gen_masks(const RunConfig& rc);
Written cmd_gen_dataset(const RunConfig& rc);
Written cmd_train(const RunConfig& rc);
Written cmd_sample(const RunConfig& rc);
Written cmd_eval(const RunConfig& rc);
Written cmd_report(const RunConfig& rc);

// Deterministic text renderings, exposed for tests.
std::string format_double(double v);
std::string loss_csv(const std::vector<double>& losses);
std::vector<double> parse_loss_csv(const std::string& text, const std::filesystem::path& source);
std::string loss_svg(const std::vector<double>& losses);

}  // namespace occlusym::cli
