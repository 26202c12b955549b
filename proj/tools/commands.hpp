#pragma once

#include <CLI11.hpp>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace ost::cli {

// Run manifest collected while a subcommand executes.
struct Run {
  std::string subcommand;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> inputs, outputs;
  nlohmann::json results = nlohmann::json::object();

  void input(const std::string& p) { inputs.push_back(p); }
  void output(const std::string& p) { outputs.push_back(p); }
};

using Action = std::function<void(Run&)>;

// Registers every subcommand on `app`; the chosen one stores its action in `out`.
void register_commands(CLI::App& app, Action& out, std::string& name);

}  // namespace ost::cli
