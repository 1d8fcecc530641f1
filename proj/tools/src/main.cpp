#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "occlusym/error.hpp"
#include "occlusym_cli/commands.hpp"

namespace {

using occlusym::cli::Json;

int fail(std::string_view kind, std::string_view command, const std::string& what, int code) {
  std::cerr << Json{{"error", {{"kind", kind}, {"command", command}, {"message", what}}}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace occlusym::cli;
  const std::map<std::string, Written (*)(const RunConfig&)> commands = {
      {"gen-masks", cmd_gen_masks}, {"gen-dataset", cmd_gen_dataset}, {"train", cmd_train},
      {"sample", cmd_sample},       {"eval", cmd_eval},               {"report", cmd_report}};

  CLI::App app{"Occlusion-aware 3D generation toolkit"};
  app.require_subcommand(1);
  std::string config;
  std::vector<std::string> overrides;
  int jobs = 1;
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run config")->required();
    sub->add_option("--set", overrides, "override a config value, key.sub=value");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", "", e.what(), 2);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const RunConfig rc = load_config(config, overrides, jobs);
    for (const auto& path : commands.at(name)(rc)) std::cout << path.string() << "\n";
  } catch (const occlusym::Error& e) {
    return fail(e.kind(), name, e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", name, e.what(), 1);
  }
  return 0;
}
