#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "magicspin/magicspin.hpp"

namespace fs = std::filesystem;
using namespace magicspin;
using namespace magicspin::cli;

namespace {

using Command = Output (*)(const RunConfig&, const Options&, std::ostream&);

struct Invocation {
  std::string config;
  std::string out;
  std::string format;
  int threads = 1;
  std::uint64_t seed = 0;
  Command command = nullptr;
};

void write_output(const Output& output, const RunConfig& rc, const Invocation& inv) {
  std::string format = inv.format;
  if (format.empty()) format = rc.format == OutputFormat::json ? "json" : "csv";
  std::string out = inv.out;
  if (out.empty() && rc.output_path) out = *rc.output_path;

  if (out.empty() || out == "-") {
    output.tables.front().second.write(std::cout, format);
    for (std::size_t i = 1; i < output.tables.size(); ++i)
      std::cerr << "table '" << output.tables[i].first << "' is written only with --out\n";
    return;
  }
  const fs::path path(out);
  for (std::size_t i = 0; i < output.tables.size(); ++i) {
    fs::path p = path;
    if (i > 0) p.replace_filename(path.stem().string() + "_" + output.tables[i].first + "." + format);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    output.tables[i].second.write(os, format);
    if (!os) throw std::runtime_error("write failed: " + p.string());
  }
}

void report_frontier(const InfeasibleDesignError& e) {
  const auto& f = e.frontier();
  std::cerr << "infeasible design: " << e.what() << '\n';
  if (f.max_tilt < kMagicAngle) std::cerr << "  the magic angle is out of reach; raise n_c or the B1 tilt\n";
  else std::cerr << "  choose a flip on the magic contour, or change n_c\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magicspin: magic-angle decoupling protocols for nuclear spin networks"};
  app.require_subcommand(1);
  Invocation inv;
  bool seed_given = false;

  const std::pair<const char*, Command> commands[] = {
      {"design", cmd_design}, {"simulate", cmd_simulate}, {"map", cmd_map},
      {"scan", cmd_scan},     {"optimize", cmd_optimize},
  };
  const char* help[] = {
      "Solve the final-step timings for a magic rotation",
      "Effective couplings and entropy growth under the protocol",
      "Decoupling map over lattice edges using spin clusters",
      "Parameter scans (wait_time, landscape, sensitivity, tertiary, convergence, position)",
      "Nelder-Mead search over protocol timings",
  };
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--config,-c", inv.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", inv.out, "Output file; '-' for stdout");
    sub->add_option("--format", inv.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", inv.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", inv.seed, "Override the optimizer RNG seed")->each([&](const std::string&) {
      seed_given = true;
    });
    const Command cmd = commands[i].second;
    sub->callback([&inv, cmd] { inv.command = cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage_error;
  }

  Options opt;
  opt.threads = inv.threads;
  if (seed_given) opt.seed = inv.seed;
  try {
    const RunConfig rc = load_run_config(inv.config);
    const Output output = inv.command(rc, opt, std::cerr);
    write_output(output, rc, inv);
    return ok;
  } catch (const InfeasibleDesignError& e) {
    report_frontier(e);
    return infeasible;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return usage_error;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const NetworkError& e) {
    std::cerr << "network error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return runtime_failure;
  }
}
