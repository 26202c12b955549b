#include <chrono>
#include <cstdio>
#include <iostream>

#include "commands.hpp"
#include "ost/errors.hpp"
#include "ost/io.hpp"
#include "ost/volume.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int fail(int code, const char* kind, const std::string& reason) {
  std::fprintf(stderr, "error code=%d kind=%s reason=%s\n", code, kind, nlohmann::json(one_line(reason)).dump().c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orientation scores of 3D images"};
  app.set_version_flag("--version", kVersion);
  int threads = 0;
  std::string report;
  app.add_option("--threads", threads, "worker threads (0: library default)");
  app.add_option("--report", report, "write the run report here instead of stdout");
  app.require_subcommand(1);
  app.fallthrough();

  ost::cli::Action action;
  std::string name;
  ost::cli::register_commands(app, action, name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "parameter", e.what());
  }

  if (threads < 0) return fail(2, "parameter", "threads must be >= 0");
  ost::set_threads(threads);

  ost::cli::Run run;
  run.subcommand = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    action(run);
  } catch (const ost::ParameterError& e) {
    return fail(2, "parameter", e.what());
  } catch (const ost::FormatError& e) {
    return fail(3, "format", e.what());
  } catch (const ost::NumericError& e) {
    return fail(4, "numeric", e.what());
  } catch (const std::exception& e) {
    return fail(4, "numeric", e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json j;
  j["subcommand"] = run.subcommand;
  j["version"] = kVersion;
  j["threads"] = threads;
  j["params"] = run.params;
  j["inputs"] = nlohmann::json::object();
  for (const auto& p : run.inputs) j["inputs"][p] = ost::file_hash(p);
  j["outputs"] = nlohmann::json::object();
  for (const auto& p : run.outputs) j["outputs"][p] = ost::file_hash(p);
  j["results"] = run.results;
  j["timing"] = {{"seconds", secs}};
  try {
    if (report.empty())
      std::cout << j.dump(2) << '\n';
    else
      ost::write_json(j, report);
  } catch (const ost::FormatError& e) {
    return fail(3, "format", e.what());
  }
  return 0;
}
