// Command-line front end: solve | simulate | compare | render | generate-map.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "qvts/config.hpp"
#include "qvts/gridworld.hpp"
#include "qvts/offline.hpp"
#include "qvts/render.hpp"
#include "qvts/simulator.hpp"

namespace {

using namespace qvts;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitMissing = 3;
constexpr int kExitNotConverged = 4;

// Thrown for bad user input that is not already a library error type.
class InputError : public Error {
 public:
  using Error::Error;
};

struct CommonArgs {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "key = value config file");
  for (const std::string& key : config_keys()) {
    cmd->add_option("--" + key, args.overrides[key], "config key '" + key + "'");
  }
}

RunConfig resolve(const CLI::App* cmd, const CommonArgs& args) {
  ConfigFile file;
  if (!args.config_path.empty()) file = ConfigFile::load(args.config_path);
  for (const auto& [key, value] : args.overrides) {
    if (cmd->count("--" + key) > 0) file.set(key, value);
  }
  return to_run_config(file);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Scenario load_scenario(const RunConfig& config) {
  if (config.map_path.empty()) throw InputError("no map given (use --map)");
  return Scenario(parse_map(read_file(config.map_path)), config.model);
}

void print_report(const Scenario& s, const SolveReport& r) {
  auto origin = [](bool cached) { return cached ? " (cached)" : ""; };
  std::cout << "model: " << s.model.num_states() << " states, "
            << s.model.num_actions() << " actions, "
            << s.model.num_observations() << " observations\n";
  std::cout << "upper bound: " << r.fib_iterations << " iterations"
            << (r.fib_converged ? "" : " (not converged)") << origin(r.fib_cached)
            << "\n";
  std::cout << "belief set: " << r.belief_points << " points"
            << origin(r.beliefs_cached) << "\n";
  std::cout << "lower bound: " << r.pbvi_vectors << " vectors"
            << origin(r.pbvi_cached) << "\n";
  std::cout << "mdp: " << r.mdp_iterations << " iterations"
            << (r.mdp_converged ? "" : " (not converged)") << origin(r.mdp_cached)
            << "\n";
  std::cout << "value at b0: upper " << r.upper_at_b0 << ", lower "
            << r.lower_at_b0 << ", gap " << r.upper_at_b0 - r.lower_at_b0 << "\n";
  std::cout << "offline time: " << r.seconds << " s\n";
}

int cmd_solve(const RunConfig& config) {
  const Scenario scenario = load_scenario(config);
  SolveReport report;
  load_or_solve(scenario, config.solver, config.resolved_cache_dir(), true,
                &report);
  print_report(scenario, report);
  return report.converged() ? kExitOk : kExitNotConverged;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

int cmd_simulate(RunConfig config, bool no_solve, bool compare) {
  if (compare) {
    config.batch.planners = {PlannerKind::kAstar, PlannerKind::kMdp,
                             PlannerKind::kQvts};
  }
  const Scenario scenario = load_scenario(config);
  SolveReport report;
  const OfflineSolution offline = load_or_solve(
      scenario, config.solver, config.resolved_cache_dir(), !no_solve, &report);

  const BatchResult result = run_batch(scenario, offline, config.batch);
  std::filesystem::create_directories(config.output_dir);
  std::ostringstream episodes, timing, summary;
  for (std::size_t p = 0; p < result.logs.size(); ++p) {
    write_episode_csv(episodes, result.logs[p], p == 0);
    write_timing_csv(timing, result.logs[p], p == 0);
  }
  write_summary_csv(summary, result.summaries);
  write_text(config.output_dir + "/episodes.csv", episodes.str());
  write_text(config.output_dir + "/timing.csv", timing.str());
  write_text(config.output_dir + "/summary.csv", summary.str());
  std::cout << format_summary_table(result.summaries);
  std::cout << "wrote " << config.output_dir << "/{episodes,summary,timing}.csv\n";
  return report.converged() ? kExitOk : kExitNotConverged;
}

struct RenderArgs {
  std::string episodes;
  std::string planner;
  long long seed = -1;
  long long step = -1;
  std::string format = "ppm";
  int cell_px = 16;
  std::string out;
  bool no_belief = false;
  bool no_path = false;
};

int cmd_render(const RunConfig& config, const RenderArgs& args) {
  const Scenario scenario = load_scenario(config);
  std::ifstream in(args.episodes);
  if (!in) throw InputError("cannot open '" + args.episodes + "'");
  const std::vector<EpisodeCsvRow> rows = read_episode_csv(in);

  // First episode matching the filters; rows of one episode are contiguous.
  std::vector<StepRecord> steps;
  const EpisodeCsvRow* first = nullptr;
  for (const EpisodeCsvRow& row : rows) {
    if (!args.planner.empty() && to_string(row.planner) != args.planner) continue;
    if (args.seed >= 0 && row.seed != static_cast<std::uint64_t>(args.seed)) continue;
    if (first == nullptr) first = &row;
    if (row.planner != first->planner || row.seed != first->seed) break;
    steps.push_back(row.record);
  }
  if (steps.empty()) throw InputError("no matching episode in the CSV");
  const PomdpModel& model = scenario.model;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const StepRecord& s = steps[k];
    if (s.step != k || s.state >= model.num_states() ||
        s.next_state >= model.num_states() || s.action >= model.num_actions() ||
        s.observation >= model.num_observations()) {
      throw InputError("episode CSV does not match the map");
    }
  }

  const std::size_t upto = args.step < 0
                               ? steps.size()
                               : std::min<std::size_t>(static_cast<std::size_t>(args.step),
                                                       steps.size());
  Belief belief = model.initial_belief();
  RenderInput input;
  input.map = &scenario.map;
  input.path.push_back(steps.front().state);
  for (std::size_t k = 0; k < upto; ++k) {
    belief = belief_update(model, belief, steps[k].action, steps[k].observation);
    input.path.push_back(steps[k].next_state);
  }
  input.belief.assign(belief.probs().begin(), belief.probs().end());

  RenderSpec spec;
  spec.cell_px = args.cell_px;
  spec.belief = !args.no_belief;
  spec.path = !args.no_path;
  if (args.format == "svg") {
    spec.format = RenderSpec::Format::kSvg;
  } else if (args.format != "ppm") {
    throw InputError("format must be ppm or svg");
  }
  const std::string out =
      args.out.empty() ? std::string("render.") + args.format : args.out;
  write_render(out, input, spec);
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

struct MapArgs {
  LandmarkMapParams params;
  std::string out;
};

int cmd_generate_map(const MapArgs& args) {
  const std::string text = serialize_map(generate_landmark_map(args.params));
  if (args.out.empty()) {
    std::cout << text;
  } else {
    write_text(args.out, text);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QV-tree search planner for noisy grid worlds"};
  app.require_subcommand(1);

  CommonArgs solve_args, sim_args, cmp_args, render_args;
  bool sim_no_solve = false;
  bool cmp_no_solve = false;

  CLI::App* solve = app.add_subcommand("solve", "compute and cache offline bounds");
  add_common(solve, solve_args);

  CLI::App* simulate = app.add_subcommand("simulate", "run a batch of episodes");
  add_common(simulate, sim_args);
  simulate->add_flag("--no-solve", sim_no_solve, "fail instead of solving when caches are missing");

  CLI::App* compare = app.add_subcommand("compare", "simulate A*, MDP and QVTS on the same seeds");
  add_common(compare, cmp_args);
  compare->add_flag("--no-solve", cmp_no_solve, "fail instead of solving when caches are missing");

  RenderArgs rargs;
  CLI::App* render = app.add_subcommand("render", "draw an episode from its CSV");
  add_common(render, render_args);
  render->add_option("--csv", rargs.episodes, "episode CSV written by simulate")->required();
  render->add_option("--planner", rargs.planner, "planner to pick from the CSV");
  render->add_option("--episode-seed", rargs.seed, "episode seed to pick from the CSV");
  render->add_option("--step", rargs.step, "draw the belief before this step (default: whole episode)");
  render->add_option("--format", rargs.format, "ppm or svg");
  render->add_option("--cell-px", rargs.cell_px, "pixels per cell");
  render->add_option("-o,--out", rargs.out, "output file");
  render->add_flag("--no-belief", rargs.no_belief, "omit the belief overlay");
  render->add_flag("--no-path", rargs.no_path, "omit the path polyline");

  MapArgs margs;
  CLI::App* genmap = app.add_subcommand("generate-map", "write a random landmark map");
  genmap->add_option("--width", margs.params.width);
  genmap->add_option("--height", margs.params.height);
  genmap->add_option("--landmarks", margs.params.num_landmarks);
  genmap->add_option("--min-block", margs.params.min_block);
  genmap->add_option("--max-block", margs.params.max_block);
  genmap->add_option("--clearance", margs.params.clearance);
  genmap->add_option("--seed", margs.params.seed);
  genmap->add_option("-o,--out", margs.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (solve->parsed()) return cmd_solve(resolve(solve, solve_args));
    if (simulate->parsed()) return cmd_simulate(resolve(simulate, sim_args), sim_no_solve, false);
    if (compare->parsed()) return cmd_simulate(resolve(compare, cmp_args), cmp_no_solve, true);
    if (render->parsed()) return cmd_render(resolve(render, render_args), rargs);
    if (genmap->parsed()) return cmd_generate_map(margs);
  } catch (const MissingPrerequisite& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const MapParseError& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
