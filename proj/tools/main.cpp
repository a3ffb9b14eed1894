// Copyright 2026 The POIR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// poir command line: demo generation, offline training, the online loop,
// evaluation, noise sweeps, and plotting, all driven by one JSON config whose
// every field can be overridden by a flag.  exit codes: 0 ok, 2 bad config,
// 3 io failure, 4 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poir/checkpoint.hpp"
#include "poir/errors.hpp"
#include "poir/harness.hpp"

namespace {

using poir::AgentKind;
using poir::ExperimentConfig;
using poir::MetricsRow;

// string shadows for the enum-valued fields; converted after parsing
struct Shadow {
  std::string agent;
  std::string reward_kind;
  std::string eval_point;
};

// the config file is applied before flag defaults are bound, so flags always
// win; find it with a pre-scan instead of a second parse pass
std::string scan_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return "";
}

void add_config_flags(CLI::App* cmd, ExperimentConfig& cfg, Shadow& shadow) {
  cmd->add_option("--config", "JSON config file (applied before all flags)");
  cmd->add_option("--env-name", cfg.env.env_name, "point_reach | toy_lift");
  cmd->add_option("--sigma-init", cfg.env.sigma_init,
                  "start-state noise at deployment");
  cmd->add_option("--sigma-action", cfg.env.sigma_action,
                  "action noise at deployment");
  cmd->add_option("--env-horizon", cfg.env.horizon, "episode length");
  cmd->add_option("--demos-path", cfg.demos.path,
                  "demo file (empty: generate in memory)");
  cmd->add_option("--demos-count", cfg.demos.count, "episodes to generate");
  cmd->add_option("--demos-seed", cfg.demos.seed, "demo generation seed");
  cmd->add_option("--hidden-width", cfg.model.hidden_width, "mlp hidden width");
  cmd->add_option("--depth", cfg.model.depth, "mlp hidden layers");
  cmd->add_option("--activation", cfg.model.activation, "relu | tanh");
  cmd->add_option("--ensemble-size", cfg.model.ensemble_size,
                  "members per ensemble");
  cmd->add_option("--learning-rate", cfg.model.learning_rate, "adam lr");
  cmd->add_option("--epochs", cfg.model.epochs, "offline training epochs");
  cmd->add_option("--batch-size", cfg.model.batch_size, "training batch size");
  cmd->add_flag("--wm-delta,!--no-wm-delta", cfg.model.wm_predict_delta,
                "dynamics nets model the state change instead of the next "
                "state directly");
  cmd->add_option("--planner-horizon", cfg.planner.horizon, "rollout length");
  cmd->add_option("--num-trajectories", cfg.planner.num_trajectories,
                  "rollouts per action selection");
  cmd->add_option("--noise-sigma", cfg.planner.noise_sigma,
                  "proposal noise around the bc action");
  cmd->add_option("--top-k", cfg.planner.top_k, "trajectories averaged");
  cmd->add_flag("--use-bc-prior,!--no-bc-prior", cfg.planner.use_bc_prior,
                "sample around the bc prior (vs uniform)");
  cmd->add_option("--reward", shadow.reward_kind, "l2 | dril | morel");
  cmd->add_option("--eval-point", shadow.eval_point,
                  "current_state | next_state");
  cmd->add_option("--total-env-steps", cfg.schedule.total_env_steps,
                  "online environment steps");
  cmd->add_option("--eval-every", cfg.schedule.eval_every,
                  "steps between evaluations");
  cmd->add_option("--eval-episodes", cfg.schedule.eval_episodes,
                  "episodes per evaluation");
  cmd->add_option("--train-every", cfg.schedule.train_every,
                  "steps between fine-tune rounds (0: never)");
  cmd->add_option("--grad-steps-per-round", cfg.schedule.grad_steps_per_round,
                  "gradient steps per fine-tune round");
  cmd->add_option("--agent", shadow.agent,
                  "poir | ebc | bc_single | poir_no_prior");
  cmd->add_option("--seeds", cfg.seeds, "run seeds")->delimiter(',');
  cmd->add_flag_callback("--normalize", [&cfg] { cfg.normalize = true; },
                         "force expert-moment normalization");
  cmd->add_flag_callback("--no-normalize", [&cfg] { cfg.normalize = false; },
                         "force raw coordinates");
  cmd->add_option("--out-dir", cfg.out_dir, "default output directory");
}

void finalize_config(ExperimentConfig& cfg, const Shadow& shadow) {
  cfg.agent = poir::agent_kind_from_string(shadow.agent);
  cfg.reward_kind = poir::reward_kind_from_string(shadow.reward_kind);
  cfg.reward_eval_point = poir::eval_point_from_string(shadow.eval_point);
  cfg.validate();
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw poir::IoError("cannot create directory: " + parent.string());
}

std::vector<AgentKind> parse_agents(const std::string& csv) {
  std::vector<AgentKind> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(poir::agent_kind_from_string(item));
  if (out.empty()) throw poir::ConfigError("no agents given");
  return out;
}

// ---------------------------------------------------------------------------
// plotting: summary rows against the noise axis, or eval rows against
// environment steps, averaged over seeds, rendered as a standalone svg

struct CsvRow {
  std::string agent;
  double sigma_init = 0.0;
  double sigma_action = 0.0;
  std::uint64_t seed = 0;
  long env_step = 0;
  double success_rate = 0.0;
  std::string row_kind;
};

std::vector<CsvRow> read_metrics_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw poir::IoError("cannot read csv: " + path);
  std::string line;
  if (!std::getline(f, line) || line != poir::metrics_csv_header())
    throw poir::IoError("unrecognized csv header in " + path);
  std::vector<CsvRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 10)
      throw poir::IoError("malformed csv line in " + path + ": " + line);
    try {
      CsvRow row;
      row.agent = fields[0];
      row.sigma_init = std::stod(fields[1]);
      row.sigma_action = std::stod(fields[2]);
      row.seed = std::stoull(fields[3]);
      row.env_step = std::stol(fields[4]);
      row.success_rate = std::stod(fields[5]);
      row.row_kind = fields[9];
      rows.push_back(std::move(row));
    } catch (const std::exception&) {
      throw poir::IoError("malformed csv line in " + path + ": " + line);
    }
  }
  return rows;
}

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // sorted by x
};

std::string format_tick(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

std::string render_svg(const std::string& title, const std::string& xlabel,
                       const std::vector<Series>& series) {
  const double width = 760, height = 460;
  const double l = 70, r = 600, t = 50, b = 400;  // plot box corners
  double xmin = 0, xmax = 1;
  bool first = true;
  for (const Series& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = first ? x : std::min(xmin, x);
      xmax = first ? x : std::max(xmax, x);
      first = false;
    }
  if (first) throw poir::IoError("csv has no plottable rows");
  if (xmax == xmin) xmax = xmin + 1;
  const auto sx = [&](double x) { return l + (x - xmin) / (xmax - xmin) * (r - l); };
  const auto sy = [&](double y) { return b - y * (b - t); };  // y in [0,1]
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "' viewBox='0 0 " << width << " " << height
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << (l + r) / 2 << "' y='28' text-anchor='middle' "
      << "font-family='sans-serif' font-size='16'>" << title << "</text>\n";
  for (int i = 0; i <= 5; ++i) {  // y grid and ticks
    const double y = i / 5.0;
    svg << "<line x1='" << l << "' y1='" << sy(y) << "' x2='" << r << "' y2='"
        << sy(y) << "' stroke='#dddddd'/>\n<text x='" << l - 8 << "' y='"
        << sy(y) + 4 << "' text-anchor='end' font-family='sans-serif' "
        << "font-size='11'>" << format_tick(y) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {  // x ticks
    const double x = xmin + (xmax - xmin) * i / 5.0;
    svg << "<line x1='" << sx(x) << "' y1='" << b << "' x2='" << sx(x)
        << "' y2='" << b + 5 << "' stroke='black'/>\n<text x='" << sx(x)
        << "' y='" << b + 20 << "' text-anchor='middle' "
        << "font-family='sans-serif' font-size='11'>" << format_tick(x)
        << "</text>\n";
  }
  svg << "<line x1='" << l << "' y1='" << t << "' x2='" << l << "' y2='" << b
      << "' stroke='black'/>\n<line x1='" << l << "' y1='" << b << "' x2='"
      << r << "' y2='" << b << "' stroke='black'/>\n"
      << "<text x='" << (l + r) / 2 << "' y='" << b + 40
      << "' text-anchor='middle' font-family='sans-serif' font-size='13'>"
      << xlabel << "</text>\n<text x='20' y='" << (t + b) / 2
      << "' text-anchor='middle' font-family='sans-serif' font-size='13' "
      << "transform='rotate(-90 20 " << (t + b) / 2
      << ")'>success rate</text>\n";
  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 8];
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='2' "
        << "points='";
    for (const auto& [x, y] : series[i].points)
      svg << sx(x) << "," << sy(y) << " ";
    svg << "'/>\n";
    for (const auto& [x, y] : series[i].points)
      svg << "<circle cx='" << sx(x) << "' cy='" << sy(y)
          << "' r='3' fill='" << color << "'/>\n";
    const double ly = t + 18 * static_cast<double>(i);
    svg << "<rect x='" << r + 14 << "' y='" << ly - 9
        << "' width='12' height='12' fill='" << color << "'/>\n<text x='"
        << r + 32 << "' y='" << ly + 2 << "' font-family='sans-serif' "
        << "font-size='12'>" << series[i].name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_plot(const std::string& csv_path, const std::string& out_path,
                const std::string& x_mode) {
  const std::vector<CsvRow> rows = read_metrics_csv(csv_path);
  std::vector<CsvRow> summaries;
  for (const CsvRow& row : rows)
    if (row.row_kind == "final_offline" || row.row_kind == "final_online")
      summaries.push_back(row);
  std::map<std::pair<double, double>, int> noise_levels;
  for (const CsvRow& row : summaries)
    ++noise_levels[{row.sigma_init, row.sigma_action}];
  const bool noise_mode =
      x_mode == "noise" || (x_mode == "auto" && noise_levels.size() > 1);

  // key -> x -> (sum, count); map keeps series and points deterministically
  // ordered
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  std::string xlabel;
  if (noise_mode) {
    if (summaries.empty())
      throw poir::IoError("csv has no summary rows to plot");
    bool init_varies = false;
    for (const CsvRow& row : summaries)
      if (row.sigma_init != summaries.front().sigma_init) init_varies = true;
    xlabel = init_varies ? "sigma_init" : "sigma_action";
    for (const CsvRow& row : summaries) {
      const double x = init_varies ? row.sigma_init : row.sigma_action;
      const std::string key =
          row.agent + (row.row_kind == "final_offline" ? " offline" : " online");
      auto& cell = acc[key][x];
      cell.first += row.success_rate;
      cell.second += 1;
    }
  } else {
    xlabel = "environment steps";
    for (const CsvRow& row : rows) {
      if (row.row_kind != "eval") continue;
      auto& cell = acc[row.agent][static_cast<double>(row.env_step)];
      cell.first += row.success_rate;
      cell.second += 1;
    }
  }
  std::vector<Series> series;
  for (const auto& [name, points] : acc) {
    Series s;
    s.name = name;
    for (const auto& [x, sum_count] : points)
      s.points.emplace_back(x, sum_count.first / sum_count.second);
    series.push_back(std::move(s));
  }
  const std::string svg =
      render_svg("success rate vs " + xlabel, xlabel, series);
  ensure_parent_dir(out_path);
  std::ofstream f(out_path);
  if (!f) throw poir::IoError("cannot write plot: " + out_path);
  f << svg;
  if (!f) throw poir::IoError("error while writing plot: " + out_path);
  std::cout << "wrote " << out_path << " (" << series.size() << " series)\n";
}

// ---------------------------------------------------------------------------

int run_cli(int argc, char** argv) {
  const std::string config_path = scan_config_path(argc, argv);
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    if (!std::filesystem::exists(config_path))
      throw poir::IoError("config file not found: " + config_path);
    cfg = poir::experiment_config_from_json(poir::read_json_file(config_path));
  }
  Shadow shadow;
  shadow.agent = poir::to_string(cfg.agent);
  shadow.reward_kind = poir::to_string(cfg.reward_kind);
  shadow.eval_point = poir::to_string(cfg.reward_eval_point);

  CLI::App app{"POIR: planning from offline imitation rewards"};
  app.require_subcommand(1);

  std::string out_path, bundle_dir, axis_name = "sigma_init";
  std::string agents_csv = "poir,ebc", x_mode = "auto", csv_path;
  std::vector<double> axis_values;
  std::uint64_t seed_flag = 0;
  bool seed_given = false;

  CLI::App* gen = app.add_subcommand("gen-demos", "generate expert demos");
  add_config_flags(gen, cfg, shadow);
  gen->add_option("--out", out_path, "output jsonl path");

  CLI::App* train = app.add_subcommand("train-offline", "train one bundle");
  add_config_flags(train, cfg, shadow);
  train->add_option("--seed", seed_flag, "run seed (default: first of seeds)")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  train->add_option("--bundle-dir", bundle_dir, "bundle output directory");

  CLI::App* online = app.add_subcommand(
      "run-online", "offline training plus the online loop, all seeds");
  add_config_flags(online, cfg, shadow);
  online->add_option("--bundle-dir", bundle_dir,
                     "load this bundle instead of training (single seed only)");
  online->add_option("--out", out_path, "metrics csv path");

  CLI::App* eval = app.add_subcommand("evaluate", "evaluate a bundle offline");
  add_config_flags(eval, cfg, shadow);
  eval->add_option("--seed", seed_flag, "run seed (default: first of seeds)")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  eval->add_option("--bundle-dir", bundle_dir,
                   "load this bundle instead of training");

  CLI::App* sweep = app.add_subcommand("sweep", "noise sweep over agents");
  add_config_flags(sweep, cfg, shadow);
  sweep->add_option("--axis", axis_name, "sigma_init | sigma_action");
  sweep->add_option("--values", axis_values, "axis values")->delimiter(',');
  sweep->add_option("--agents", agents_csv, "comma-separated agent kinds");
  sweep->add_option("--out", out_path, "metrics csv path");

  CLI::App* plot = app.add_subcommand("plot", "render a metrics csv as svg");
  plot->add_option("--csv", csv_path, "metrics csv to plot")->required();
  plot->add_option("--out", out_path, "svg output path");
  plot->add_option("--x", x_mode, "auto | noise | step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (plot->parsed()) {
    write_plot(csv_path, out_path.empty() ? cfg.out_dir + "/plot.svg" : out_path,
               x_mode);
    return 0;
  }

  finalize_config(cfg, shadow);
  const std::uint64_t one_seed = seed_given ? seed_flag : cfg.seeds.front();

  if (gen->parsed()) {
    const auto demos =
        poir::generate_demos(cfg.env, cfg.demos.count, cfg.demos.seed);
    std::string path = out_path;
    if (path.empty())
      path = cfg.demos.path.empty() ? cfg.out_dir + "/demos.jsonl"
                                    : cfg.demos.path;
    ensure_parent_dir(path);
    poir::save_trajectories_jsonl(path, demos);
    std::cout << "wrote " << demos.size() << " demos to " << path << "\n";
    return 0;
  }

  if (train->parsed()) {
    const auto demos = poir::load_or_generate_demos(cfg);
    std::cerr << "training " << shadow.agent << " bundle, seed " << one_seed
              << " (" << demos.size() << " demos)\n";
    const poir::OfflineBundle bundle = poir::run_offline(cfg, demos, one_seed);
    std::string dir = bundle_dir;
    if (dir.empty())
      dir = cfg.out_dir + "/bundle_" + shadow.agent + "_s" +
            std::to_string(one_seed);
    poir::save_bundle(dir, bundle);
    std::cout << "wrote bundle to " << dir << "\n";
    return 0;
  }

  if (eval->parsed()) {
    const auto demos = poir::load_or_generate_demos(cfg);
    const poir::OfflineBundle bundle =
        bundle_dir.empty() ? poir::run_offline(cfg, demos, one_seed)
                           : poir::load_bundle(bundle_dir, demos);
    const auto policy = poir::make_policy(cfg.agent, bundle, cfg.planner);
    const poir::EvalResult r =
        poir::evaluate(*policy, bundle, cfg.env, cfg.schedule.eval_episodes,
                       poir::derive_seed(one_seed, "eval", 0));
    std::cout << "agent=" << shadow.agent << " sigma_init=" << cfg.env.sigma_init
              << " sigma_action=" << cfg.env.sigma_action
              << " episodes=" << cfg.schedule.eval_episodes
              << " success_rate=" << r.success_rate
              << " mean_return=" << r.mean_return << "\n";
    return 0;
  }

  if (online->parsed()) {
    const auto demos = poir::load_or_generate_demos(cfg);
    if (!bundle_dir.empty() && cfg.seeds.size() != 1)
      throw poir::ConfigError("--bundle-dir needs exactly one seed");
    std::vector<MetricsRow> all_rows;
    for (const std::uint64_t seed : cfg.seeds) {
      std::cerr << "run-online " << shadow.agent << " seed " << seed << "\n";
      poir::OfflineBundle bundle =
          bundle_dir.empty() ? poir::run_offline(cfg, demos, seed)
                             : poir::load_bundle(bundle_dir, demos);
      const auto rows = poir::run_online(cfg, bundle, seed);
      std::cerr << "  offline success " << rows.front().success_rate
                << ", final success " << rows.back().success_rate << "\n";
      all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    }
    const std::string path =
        out_path.empty() ? cfg.out_dir + "/metrics.csv" : out_path;
    ensure_parent_dir(path);
    poir::write_metrics_csv(path, all_rows);
    std::cout << "wrote " << all_rows.size() << " rows to " << path << "\n";
    return 0;
  }

  // sweep
  const auto demos = poir::load_or_generate_demos(cfg);
  poir::SweepAxis axis = axis_name == "sigma_action"
                             ? poir::default_sigma_action_axis()
                             : poir::default_sigma_init_axis();
  axis.name = axis_name;
  if (!axis_values.empty()) axis.values = axis_values;
  const std::vector<AgentKind> agents = parse_agents(agents_csv);
  std::cerr << "sweep: " << agents.size() << " agents x " << cfg.seeds.size()
            << " seeds x " << axis.values.size() << " levels\n";
  const auto rows = poir::run_sweep(cfg, axis, agents, demos);
  const std::string path =
      out_path.empty() ? cfg.out_dir + "/sweep.csv" : out_path;
  ensure_parent_dir(path);
  poir::write_metrics_csv(path, rows);
  std::cout << "wrote " << rows.size() << " rows to " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const poir::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const poir::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const poir::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
