#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "parablab/errors.hpp"
#include "parablab/experiment.hpp"

namespace fs = std::filesystem;
using namespace parablab;

namespace {

// Exit codes: 0 ok, 1 asserted check failed, 2 bad input, 3 solver abort.
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const SolverAbort& e) {
    std::cerr << "solver aborted: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

std::string default_out(const std::string& cfg_path) { return (fs::path("runs") / fs::path(cfg_path).stem()).string(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parablab: numerical checks of gradient estimates for parabolic flows"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out;
  std::uint64_t seed = 0;
  bool report_only = false;
  int threads = 1;
  app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "seed override");
  auto* assert_flag = app.add_flag("--assert", "nonzero exit code when an asserted check fails (default)");
  app.add_flag("--report-only", report_only, "never fail on check results")->excludes(assert_flag);
  app.add_option("--threads", threads, "worker threads for sweep")->check(CLI::PositiveNumber);

  std::string cfg_path;
  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
  bool no_fields = false;
  run->add_flag("--no-fields", no_fields, "skip the per-snapshot CSV files");

  std::string grid_spec;
  auto* sweep = app.add_subcommand("sweep", "run a config over a parameter grid");
  sweep->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid_spec, "path=v1,v2;path2=w1,w2")->required();

  std::string id;
  int dim = 2;
  auto* cert = app.add_subcommand("certify", "certificate for a norm id or a flow id");
  cert->add_option("id", id, "norm or flow id")->required();
  cert->add_option("--dim", dim, "spatial dimension for norms")->check(CLI::Range(1, 3));

  app.add_subcommand("list", "list catalogs");

  CLI11_PARSE(app, argc, argv);

  RunOptions opt;
  if (*seed_opt) opt.seed = seed;
  opt.assert_checks = !report_only;

  if (app.got_subcommand("list")) {
    std::cout << catalog_listing();
    return 0;
  }
  if (app.got_subcommand("run")) {
    return guarded([&] {
      const Config cfg = Config::load(cfg_path);
      opt.out_dir = out.empty() ? default_out(cfg_path) : out;
      opt.write_fields = !no_fields;
      const RunResult r = run_experiment(cfg, opt);
      std::ifstream sum(fs::path(opt.out_dir) / "summary.txt");
      std::cout << sum.rdbuf();
      std::cout << "artifacts: " << opt.out_dir << '\n';
      return r.exit_code();
    });
  }
  if (app.got_subcommand("sweep")) {
    return guarded([&] {
      const Config cfg = Config::load(cfg_path);
      const auto axes = parse_sweep_grid(grid_spec);
      opt.out_dir = out.empty() ? default_out(cfg_path) + "-sweep" : out;
      opt.write_fields = false;
      fs::create_directories(opt.out_dir);
      std::ofstream csv(fs::path(opt.out_dir) / "sweep.csv", std::ios::binary);
      const int code = run_sweep(cfg, axes, opt, threads, csv);
      csv.close();
      std::ifstream in(fs::path(opt.out_dir) / "sweep.csv");
      std::cout << in.rdbuf();
      return report_only ? 0 : code;
    });
  }
  return guarded([&] {
    const auto j = certify_id(id, dim, *seed_opt ? seed : 1);
    const std::string text = j.dump(2) + "\n";
    if (!out.empty()) {
      fs::create_directories(out);
      std::string name = id;
      for (char& c : name)
        if (c == ':' || c == ';' || c == ',' || c == '/') c = '_';
      std::ofstream(fs::path(out) / (name + ".json"), std::ios::binary) << text;
    }
    std::cout << text;
    return 0;
  });
}
