// shyi: prompt parsing, loss evaluation, guidance runs and gradient checks.
//
// Exit codes: 0 success, 1 check failure, 2 bad input, 3 I/O, 4 numeric abort.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shyi/shyi.hpp"

#ifndef SHYI_VERSION
#define SHYI_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kCheckFailed = 1, kBadInput = 2, kIo = 3, kNumeric = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw shyi::IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw shyi::IoError("cannot write " + path.string());
  out << text;
}

// --config, else $SHYI_DEFAULT_CONFIG, else built-in defaults.
shyi::GuidanceConfig resolve_config(const std::string& flag, std::string* used = nullptr) {
  std::string path = flag;
  if (path.empty()) {
    if (const char* env = std::getenv("SHYI_DEFAULT_CONFIG"); env && *env) path = env;
  }
  if (used) *used = path.empty() ? "<defaults>" : path;
  if (path.empty()) return shyi::GuidanceConfig{};
  return shyi::load_config(path);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

// ---- parse -----------------------------------------------------------------

struct ParseArgs {
  std::string prompt;
  std::string file;
  std::string format = "annotated";
  std::string out;
  std::string verbs;
  std::string prepositions;
};

int cmd_parse(const ParseArgs& a) {
  if (a.prompt.empty() == a.file.empty()) {
    std::cerr << "error: give exactly one of --prompt or --file\n";
    return kBadInput;
  }
  const std::string text = a.file.empty() ? a.prompt : read_file(a.file);
  shyi::SemanticHypergraph g;
  if (a.format == "annotated") {
    g = shyi::parse_annotated(text);
  } else {
    const auto verbs = a.verbs.empty() ? shyi::default_verb_lexicon() : shyi::load_lexicon(a.verbs);
    const auto preps = a.prepositions.empty() ? shyi::default_preposition_lexicon()
                                              : shyi::load_lexicon(a.prepositions);
    g = shyi::parse_template(text, verbs, preps);
  }
  const auto json = shyi::serialize(g);
  if (a.out.empty()) {
    std::cout << json;
  } else {
    write_file(a.out, json);
  }
  return kOk;
}

// ---- optimize --------------------------------------------------------------

struct OptimizeArgs {
  std::string config;
  std::string graph;
  std::vector<std::uint64_t> seeds{4913};
  std::string out;
  std::size_t jobs = 1;
};

nlohmann::json manifest_json(const OptimizeArgs& a, const std::string& config_used,
                             const std::vector<std::uint64_t>& seeds, const fs::path& out) {
  return {{"config", config_used},     {"prompt_source", a.graph},
          {"seeds", seeds},            {"output_directory", out.string()},
          {"tool_version", SHYI_VERSION}, {"timestamp", utc_timestamp()}};
}

struct SeedOutcome {
  int code = kOk;
  std::string message;
};

SeedOutcome run_seed(const shyi::SemanticHypergraph& graph, shyi::GuidanceConfig config,
                     std::uint64_t seed, const fs::path& dir, const nlohmann::json& manifest) {
  config.model.seed = seed;
  fs::create_directories(dir);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(dir / "config.json", shyi::to_json(config).dump(2) + "\n");
  try {
    const auto traj = shyi::run_toy_guidance(graph, config);
    shyi::write_trajectory(dir, traj);
    std::ostringstream msg;
    msg << "seed " << seed << ": iou " << traj.initial_iou << " -> " << traj.final_iou;
    for (std::size_t i = 0; i < traj.linked.size(); ++i) {
      msg << ", adjacency " << traj.linked[i].u << "-" << traj.linked[i].v << " "
          << traj.initial_adjacency[i] << " -> " << traj.final_adjacency[i];
    }
    return {kOk, msg.str()};
  } catch (const shyi::GuidanceAbort& abort) {
    const auto& partial = abort.partial();
    shyi::write_trajectory(dir, partial);
    nlohmann::json dump = {{"error", abort.what()},
                           {"step", abort.step()},
                           {"iteration", abort.iteration()},
                           {"rows_recorded", partial.rows.size()}};
    const auto& z = partial.final_latent;
    std::size_t non_finite = 0;
    double max_abs = 0.0;
    for (double v : z.values) {
      if (!std::isfinite(v)) {
        ++non_finite;
      } else {
        max_abs = std::max(max_abs, std::abs(v));
      }
    }
    dump["latent"] = {{"non_finite_entries", non_finite}, {"max_abs_finite", max_abs}};
    if (!partial.rows.empty()) dump["last_breakdown"] = shyi::breakdown_json(partial.rows.back().breakdown);
    write_file(dir / "abort.json", dump.dump(2) + "\n");
    return {kNumeric, "seed " + std::to_string(seed) + ": aborted: " + abort.what()};
  }
}

int cmd_optimize(const OptimizeArgs& a) {
  std::string config_used;
  const auto config = resolve_config(a.config, &config_used);
  const auto graph = shyi::deserialize(read_file(a.graph));
  const fs::path out(a.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw shyi::IoError("cannot create " + out.string() + ": " + ec.message());

  const auto manifest = manifest_json(a, config_used, a.seeds, out);
  write_file(out / "manifest.json", manifest.dump(2) + "\n");

  std::vector<SeedOutcome> outcomes(a.seeds.size());
  const std::size_t jobs = std::max<std::size_t>(1, a.jobs);
  for (std::size_t begin = 0; begin < a.seeds.size(); begin += jobs) {
    std::vector<std::future<SeedOutcome>> running;
    for (std::size_t i = begin; i < std::min(a.seeds.size(), begin + jobs); ++i) {
      const auto seed = a.seeds[i];
      running.push_back(std::async(std::launch::async, [&, seed] {
        return run_seed(graph, config, seed, out / ("seed_" + std::to_string(seed)), manifest);
      }));
    }
    for (std::size_t k = 0; k < running.size(); ++k) outcomes[begin + k] = running[k].get();
  }
  int code = kOk;
  for (const auto& o : outcomes) {
    (o.code == kOk ? std::cout : std::cerr) << o.message << '\n';
    code = std::max(code, o.code);
  }
  return code;
}

// ---- gradcheck -------------------------------------------------------------

struct GradcheckArgs {
  std::string config;
  std::size_t trials = 20;
  std::uint64_t seed = 4913;
  std::string inject_sign_flip;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  if (a.trials < 1) {
    std::cerr << "error: --trials must be at least 1\n";
    return kBadInput;
  }
  const auto config = resolve_config(a.config);
  shyi::GradcheckOptions opt;
  opt.trials = a.trials;
  opt.seed = a.seed;
  if (!a.inject_sign_flip.empty()) opt.fault.flip_sign = shyi::parse_objective(a.inject_sign_flip);

  const auto start = std::chrono::steady_clock::now();
  const auto report = shyi::run_gradcheck(config, opt);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::size_t compared = 0;
  for (const auto& c : report.cases) compared += c.result.compared;
  std::cout << "gradcheck: " << report.cases.size() << " cases over " << a.trials
            << " trials, " << compared << " entries compared, " << report.failures
            << " above tolerance " << shyi::kGradientTolerance << '\n';
  std::cout << "worst relative error: " << std::setprecision(3) << report.worst_relative << " ("
            << report.worst_label << ")\n";
  std::cout << "elapsed: " << std::setprecision(3) << seconds << " s\n";
  std::cout << (report.passed() ? "PASS" : "FAIL") << '\n';
  return report.passed() ? kOk : kCheckFailed;
}

// ---- eval-loss -------------------------------------------------------------

struct EvalArgs {
  std::string graph;
  std::string maps;
  std::string previous;
  std::string config;
  std::string pairs_out;
};

std::vector<shyi::AttentionMap> load_map_dir(const fs::path& dir, std::size_t count) {
  if (!fs::is_directory(dir)) throw shyi::IoError("no such map directory " + dir.string());
  std::vector<shyi::AttentionMap> maps;
  for (std::size_t j = 0; j < count; ++j) {
    const auto path = dir / ("token_" + std::to_string(j) + ".csv");
    if (!fs::exists(path)) {
      throw shyi::InputError("missing map for token " + std::to_string(j) + " (" +
                             path.string() + ")");
    }
    maps.push_back(shyi::load_csv(path.string()));
    if (!maps.back().same_shape(maps.front())) {
      throw shyi::InputError("map for token " + std::to_string(j) + " is " +
                             std::to_string(maps.back().height()) + "x" +
                             std::to_string(maps.back().width()) + ", expected " +
                             std::to_string(maps.front().height()) + "x" +
                             std::to_string(maps.front().width()));
    }
  }
  return maps;
}

int cmd_eval_loss(const EvalArgs& a) {
  const auto config = resolve_config(a.config);
  const auto graph = shyi::deserialize(read_file(a.graph));
  const auto maps = load_map_dir(a.maps, graph.tokens.size());
  std::vector<shyi::AttentionMap> previous;
  if (!a.previous.empty()) {
    previous = load_map_dir(a.previous, graph.tokens.size());
    if (!previous.front().same_shape(maps.front())) {
      throw shyi::InputError("previous-step maps differ in shape from current maps");
    }
  }
  const auto params = config.loss_params();
  shyi::detail::check_kernel_fits(maps.front().height(), maps.front().width(), params.big_kernel);
  const auto pairs = shyi::build_pairs(graph, !previous.empty());
  if (!a.pairs_out.empty()) write_file(a.pairs_out, shyi::to_json(pairs).dump(2) + "\n");

  const shyi::MapSet set{maps, {}, previous};
  const auto eval =
      shyi::evaluate_losses(pairs, set, params, config.weights, shyi::ObjectiveMask::all());
  auto doc = shyi::breakdown_json(eval.breakdown);
  doc["dropped_pair_sets"] = pairs.dropped;
  std::cout << doc.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypergraph contrastive adjacency guidance for cross-attention maps", "shyi"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SHYI_VERSION);

  ParseArgs pa;
  auto* parse = app.add_subcommand("parse", "Parse a prompt into a semantic hypergraph (JSON)");
  auto* prompt_opt = parse->add_option("-p,--prompt", pa.prompt, "Prompt text");
  auto* file_opt = parse->add_option("--file", pa.file, "Read the prompt from a file");
  prompt_opt->excludes(file_opt);
  parse->add_option("--format", pa.format, "Input syntax")
      ->check(CLI::IsMember({"annotated", "template"}))
      ->capture_default_str();
  parse->add_option("--out", pa.out, "Write graph JSON here instead of stdout");
  parse->add_option("--verbs", pa.verbs, "Verb lexicon file for --format template");
  parse->add_option("--prepositions", pa.prepositions,
                    "Preposition lexicon file for --format template");

  OptimizeArgs oa;
  auto* optimize = app.add_subcommand("optimize", "Run guidance on the toy attention model");
  optimize->add_option("--config", oa.config, "GuidanceConfig JSON (default: $SHYI_DEFAULT_CONFIG)");
  optimize->add_option("--graph", oa.graph, "Graph JSON from 'parse'")->required();
  optimize->add_option("--seed", oa.seeds, "One or more run seeds")->capture_default_str();
  optimize->add_option("--out", oa.out, "Output directory (one seed_<N>/ per seed)")->required();
  optimize->add_option("--jobs", oa.jobs, "Seeds run in parallel")->capture_default_str();

  GradcheckArgs ga;
  auto* gradcheck =
      app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gradcheck->add_option("--config", ga.config, "GuidanceConfig JSON (default: $SHYI_DEFAULT_CONFIG)");
  gradcheck->add_option("--trials", ga.trials, "Random instances to check")->capture_default_str();
  gradcheck->add_option("--seed", ga.seed, "Instance generator seed")->capture_default_str();
#ifdef SHYI_FAULT_INJECTION
  gradcheck->add_option("--inject-sign-flip", ga.inject_sign_flip,
                        "Negate one objective's gradient (mutation test)");
#endif

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval-loss", "Evaluate the losses on attention map CSVs");
  eval->add_option("--graph", ea.graph, "Graph JSON")->required();
  eval->add_option("--maps", ea.maps, "Directory with token_<j>.csv per token")->required();
  eval->add_option("--previous", ea.previous,
                   "Directory with previous-step maps (omit for the first step)");
  eval->add_option("--config", ea.config, "GuidanceConfig JSON (default: $SHYI_DEFAULT_CONFIG)");
  eval->add_option("--pairs-out", ea.pairs_out, "Write the pair sets as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (parse->parsed()) return cmd_parse(pa);
    if (optimize->parsed()) return cmd_optimize(oa);
    if (gradcheck->parsed()) return cmd_gradcheck(ga);
    if (eval->parsed()) return cmd_eval_loss(ea);
  } catch (const shyi::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kBadInput;
  } catch (const shyi::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const shyi::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const shyi::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  }
  return kBadInput;
}
