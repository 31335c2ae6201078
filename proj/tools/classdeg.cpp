// classdeg: class-degree computation, relative joinings, and splicing
// experiments on shifts of finite type, with reproducible seeded
// reports.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "classdeg/class_degree.hpp"
#include "classdeg/delta.hpp"
#include "classdeg/entropy_est.hpp"
#include "classdeg/instance_io.hpp"
#include "classdeg/joinings.hpp"
#include "classdeg/report_json.hpp"
#include "classdeg/splicing.hpp"
#include "classdeg/version.hpp"

using namespace classdeg;
using Json = nlohmann::ordered_json;

namespace {

struct CommonFlags {
  std::string format = "json";
  std::uint64_t seed = 7;
  int workers = default_workers();
  int lmax = 6;
};

char hex_digit(unsigned v) { return v < 10 ? char('0' + v) : char('a' + v - 10); }

std::string hash_hex(std::uint64_t h) {
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex_digit(h & 0xF);
    h >>= 4;
  }
  return out;
}

Json meta_json(const Instance& inst, const CommonFlags& flags, const Json& config) {
  Json resolved = config;
  resolved["seed"] = flags.seed;
  resolved["workers"] = flags.workers;
  return Json{{"tool", "classdeg"},
              {"version", kVersion},
              {"instance", inst.path},
              {"instance_hash", hash_hex(inst.file_hash)},
              {"config", resolved}};
}

void emit(const Json& report, const std::string& format) {
  if (format == "json") {
    std::cout << report.dump(2) << "\n";
  } else if (format == "text") {
    for (const auto& [key, value] : report.items()) {
      if (key == "meta") continue;
      std::cout << key << ": " << value.dump() << "\n";
    }
  } else {
    throw BadInstanceFile("unsupported format '" + format + "' for this subcommand");
  }
}

FactorTriple require_triple(const Instance& inst) {
  if (!inst.triple)
    throw BadInstanceFile("this subcommand needs an instance with a 'code'");
  return *inst.triple;
}

Word parse_word_arg(const Sft& sft, const std::string& arg) {
  return sft.parse_word(detail::split_word_key(arg, sft.alphabet.names));
}

Word parse_y_word_arg(const FactorTriple& triple, const std::string& arg) {
  return triple.parse_y_word(detail::split_word_key(arg, triple.y_alphabet.names));
}

TransitionBlock resolve_tb(const FactorTriple& triple, const PushforwardMeasure& nu,
                           const std::string& tb_arg, int lmax, int workers) {
  if (tb_arg == "auto")
    return minimal_transition_block(triple, nu, lmax, workers).block;
  throw BadInstanceFile("--tb only supports 'auto'");
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--format", flags.format, "json or text")->default_val("json");
  cmd->add_option("--seed", flags.seed, "RNG seed")->default_val(7);
  cmd->add_option("--workers", flags.workers, "worker threads")
      ->default_val(default_workers());
}

struct GridSpec {
  std::vector<int> ns{8, 16, 32};
  std::vector<double> ps{0.05, 0.1, 0.25};
};

GridSpec parse_grid(const std::vector<std::string>& tokens) {
  GridSpec grid;
  for (const auto& token : tokens) {
    auto eq = token.find('=');
    if (eq == std::string::npos)
      throw BadInstanceFile("grid token must look like N=8,16,32 or p=0.05,0.1");
    std::string key = token.substr(0, eq);
    std::string rest = token.substr(eq + 1);
    std::vector<std::string> parts;
    std::string cur;
    for (char c : rest) {
      if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    if (key == "N") {
      grid.ns.clear();
      for (const auto& s : parts) grid.ns.push_back(std::stoi(s));
    } else if (key == "p") {
      grid.ps.clear();
      for (const auto& s : parts) grid.ps.push_back(std::stod(s));
    } else {
      throw BadInstanceFile("grid key must be N or p");
    }
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbolic-dynamics toolkit: class degree, joinings, splicing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // shared option storage; each subcommand reads what it declares
  CommonFlags flags;
  std::string instance_path, measure_path, mu1_path, mu2_path, potential_path;
  std::string a_word_arg, y_word_arg, tb_arg = "auto";
  long trials = 100000, path_len = 200000, length = 1000, window = 10000;
  long dist_trials = 200000;
  int n_param = 8;
  double p_param = 0.1;
  std::vector<std::string> grid_tokens;

  auto* degree = app.add_subcommand("degree", "class degree via a nu-minimal transition block");
  degree->add_option("instance", instance_path)->required();
  degree->add_option("--measure", measure_path)->required();
  degree->add_option("--lmax", flags.lmax)->default_val(6);
  add_common(degree, flags);

  auto* min_tb = app.add_subcommand("min-tb", "nu-minimal transition block");
  min_tb->add_option("instance", instance_path)->required();
  min_tb->add_option("--measure", measure_path)->required();
  min_tb->add_option("--lmax", flags.lmax)->default_val(6);
  add_common(min_tb, flags);

  auto* routing = app.add_subcommand("routing-table", "routing certificate of the minimal block");
  routing->add_option("instance", instance_path)->required();
  routing->add_option("--measure", measure_path)->required();
  routing->add_option("--lmax", flags.lmax)->default_val(6);
  add_common(routing, flags);

  auto* parry = app.add_subcommand("parry", "measure of maximal entropy");
  parry->add_option("instance", instance_path)->required();
  add_common(parry, flags);

  auto* equilibrium = app.add_subcommand("equilibrium", "equilibrium state of a potential");
  equilibrium->add_option("instance", instance_path)->required();
  equilibrium->add_option("--potential", potential_path)->required();
  add_common(equilibrium, flags);

  auto* entropy_cmd = app.add_subcommand("entropy", "entropy of a Markov measure");
  entropy_cmd->add_option("instance", instance_path)->required();
  entropy_cmd->add_option("--measure", measure_path)->required();
  add_common(entropy_cmd, flags);

  auto* sample = app.add_subcommand("sample", "stationary path sample");
  sample->add_option("instance", instance_path)->required();
  sample->add_option("--measure", measure_path)->required();
  sample->add_option("--length", length)->default_val(1000);
  add_common(sample, flags);

  auto* joining = app.add_subcommand("joining-stats", "class-diagonal mass of the joining");
  joining->add_option("instance", instance_path)->required();
  joining->add_option("--mu1", mu1_path)->required();
  joining->add_option("--mu2", mu2_path)->required();
  joining->add_option("--tb", tb_arg)->default_val("auto");
  joining->add_option("--trials", trials)->default_val(100000);
  joining->add_option("--window", window)->default_val(10000);
  joining->add_option("--lmax", flags.lmax)->default_val(6);
  add_common(joining, flags);

  auto* pointroute = app.add_subcommand("pointroute-check", "common-routing check on sampled pairs");
  pointroute->add_option("instance", instance_path)->required();
  pointroute->add_option("--mu1", mu1_path)->required();
  pointroute->add_option("--mu2", mu2_path)->required();
  pointroute->add_option("--trials", trials)->default_val(100);
  pointroute->add_option("--window", window)->default_val(10000);
  pointroute->add_option("--lmax", flags.lmax)->default_val(6);
  add_common(pointroute, flags);

  auto* jump = app.add_subcommand("jump-entropy", "jump-extension entropy identity check");
  jump->add_option("instance", instance_path)->required();
  jump->add_option("--measure", measure_path)->required();
  jump->add_option("--a-word", a_word_arg)->required();
  jump->add_option("--N", n_param)->default_val(4);
  jump->add_option("--p", p_param)->default_val(0.25);
  jump->add_option("--path-len", path_len)->default_val(1000000);
  add_common(jump, flags);

  auto* delta = app.add_subcommand("delta", "full splicing pipeline over an (N, p) grid");
  delta->add_option("instance", instance_path)->required();
  delta->add_option("--mu1", mu1_path)->required();
  delta->add_option("--mu2", mu2_path)->required();
  delta->add_option("--potential", potential_path)->required();
  delta->add_option("--grid", grid_tokens)->expected(0, 2);
  delta->add_option("--trials", trials)->default_val(50);
  delta->add_option("--path-len", path_len)->default_val(200000);
  delta->add_option("--dist-trials", dist_trials)->default_val(200000);
  delta->add_option("--lmax", flags.lmax)->default_val(6);
  add_common(delta, flags);

  auto* bound = app.add_subcommand("bound-report", "feasible (N, p) selection from measured Hstar");
  bound->add_option("instance", instance_path)->required();
  bound->add_option("--mu1", mu1_path)->required();
  bound->add_option("--mu2", mu2_path)->required();
  bound->add_option("--potential", potential_path)->required();
  bound->add_option("--grid", grid_tokens)->expected(0, 2);
  bound->add_option("--dist-trials", dist_trials)->default_val(200000);
  bound->add_option("--lmax", flags.lmax)->default_val(6);
  add_common(bound, flags);

  auto* oracle = app.add_subcommand("oracle-classes", "periodic-point transition-class count");
  oracle->add_option("instance", instance_path)->required();
  oracle->add_option("--y", y_word_arg)->required();
  add_common(oracle, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    Instance inst = load_instance(instance_path);

    if (*degree || *min_tb || *routing) {
      FactorTriple triple = require_triple(inst);
      PushforwardMeasure nu = load_nu_file(measure_path, triple);
      MinimalBlockResult res = minimal_transition_block(triple, nu, flags.lmax, flags.workers);
      Json config{{"measure", measure_path}, {"lmax", flags.lmax}};
      Json report = block_json(triple, res.block);
      report["certificate_size"] = res.certificate.entries.size();
      report["nu_w"] = nu.word_probability(res.block.w);
      if (*routing) {
        Json entries = Json::array();
        for (const auto& [u, routes] : res.certificate.entries)
          entries.push_back({{"u", word_json(triple.x.alphabet, u)},
                             {"routes", word_json(triple.x.alphabet, routes)}});
        report["entries"] = entries;
      }
      report["meta"] = meta_json(inst, flags, config);
      emit(report, flags.format);
      return 0;
    }

    if (*parry) {
      MarkovMeasure mu = parry_measure(inst.sft);
      Json report{{"entropy_nats", classdeg::entropy(mu)},
                  {"alphabet", inst.sft.alphabet.names},
                  {"transition", mu.transition},
                  {"stationary", mu.stationary}};
      report["meta"] = meta_json(inst, flags, Json::object());
      emit(report, flags.format);
      return 0;
    }

    if (*equilibrium) {
      Potential v = load_potential_file(potential_path, inst.sft);
      EquilibriumState eq = equilibrium_state(inst.sft, v);
      Json report{{"pressure_nats", eq.pressure},
                  {"entropy_nats", classdeg::entropy(eq.measure)},
                  {"block_len", eq.block_len},
                  {"alphabet", eq.measure.sft.alphabet.names},
                  {"transition", eq.measure.transition},
                  {"stationary", eq.measure.stationary}};
      report["meta"] = meta_json(inst, flags, Json{{"potential", potential_path}});
      emit(report, flags.format);
      return 0;
    }

    if (*entropy_cmd) {
      MarkovMeasure mu = load_measure_file(measure_path, inst.sft);
      Json report{{"entropy_nats", classdeg::entropy(mu)}};
      report["meta"] = meta_json(inst, flags, Json{{"measure", measure_path}});
      emit(report, flags.format);
      return 0;
    }

    if (*sample) {
      MarkovMeasure mu = load_measure_file(measure_path, inst.sft);
      Word path = sample_path(mu, length, flags.seed);
      Json report{{"length", length}, {"word", word_json(inst.sft.alphabet, path)}};
      report["meta"] =
          meta_json(inst, flags, Json{{"measure", measure_path}, {"length", length}});
      emit(report, flags.format);
      return 0;
    }

    if (*joining) {
      FactorTriple triple = require_triple(inst);
      MarkovMeasure m1 = load_measure_file(mu1_path, triple.x);
      MarkovMeasure m2 = load_measure_file(mu2_path, triple.x);
      RijSampler sampler = make_rij_sampler(m1, m2, triple);
      TransitionBlock tb = resolve_tb(triple, sampler.nu, tb_arg, flags.lmax, flags.workers);
      DiagonalReport dr =
          estimate_class_diagonal_mass(sampler, tb, trials, window, flags.seed, flags.workers);
      Json report = diagonal_json(dr);
      report["tb"] = block_json(triple, tb);
      report["meta"] = meta_json(inst, flags,
                                 Json{{"mu1", mu1_path},
                                      {"mu2", mu2_path},
                                      {"tb", tb_arg},
                                      {"trials", trials},
                                      {"window", window}});
      emit(report, flags.format);
      return 0;
    }

    if (*pointroute) {
      FactorTriple triple = require_triple(inst);
      MarkovMeasure m1 = load_measure_file(mu1_path, triple.x);
      MarkovMeasure m2 = load_measure_file(mu2_path, triple.x);
      RijSampler sampler = make_rij_sampler(m1, m2, triple);
      TransitionBlock tb =
          minimal_transition_block(triple, sampler.nu, flags.lmax, flags.workers).block;
      long occurrences_checked = 0, violations = 0;
      for (long t = 0; t < trials; ++t) {
        PairPath pair =
            rij_sample(sampler, window, Rng::derive(flags.seed, static_cast<std::uint64_t>(t)));
        auto viol = common_routing_check(triple, tb, pair);
        occurrences_checked +=
            static_cast<long>(mark_occurrences(pair.y, tb.w).size());
        violations += static_cast<long>(viol.size());
      }
      Json report{{"occurrences_checked", occurrences_checked},
                  {"violations", violations},
                  {"tb", block_json(triple, tb)}};
      report["meta"] = meta_json(inst, flags,
                                 Json{{"mu1", mu1_path},
                                      {"mu2", mu2_path},
                                      {"trials", trials},
                                      {"window", window}});
      emit(report, flags.format);
      return 0;
    }

    if (*jump) {
      MarkovMeasure mu = load_measure_file(measure_path, inst.sft);
      Word a_word = parse_word_arg(inst.sft, a_word_arg);
      JumpEntropyReport jr =
          jump_entropy_check(mu, a_word, EtaParams{n_param, p_param}, path_len, flags.seed);
      Json report = jump_entropy_json(jr);
      report["meta"] = meta_json(inst, flags,
                                 Json{{"measure", measure_path},
                                      {"a_word", a_word_arg},
                                      {"N", n_param},
                                      {"p", p_param},
                                      {"path_len", path_len}});
      emit(report, flags.format);
      return 0;
    }

    if (*delta) {
      FactorTriple triple = require_triple(inst);
      MarkovMeasure m1 = load_measure_file(mu1_path, triple.x);
      MarkovMeasure m2 = load_measure_file(mu2_path, triple.x);
      Potential v = load_potential_file(potential_path, triple.x);
      RijSampler sampler = make_rij_sampler(m1, m2, triple);
      TransitionBlock tb =
          minimal_transition_block(triple, sampler.nu, flags.lmax, flags.workers).block;
      GridSpec grid = parse_grid(grid_tokens);
      DeltaOptions opts;
      opts.dist_trials = dist_trials;
      DeltaGrid result = run_delta_grid(sampler, v, tb, grid.ns, grid.ps, path_len, trials,
                                        flags.seed, flags.workers, opts);
      Json config{{"mu1", mu1_path},       {"mu2", mu2_path},
                  {"potential", potential_path}, {"trials", trials},
                  {"path_len", path_len},  {"dist_trials", dist_trials},
                  {"grid_N", grid.ns},     {"grid_p", grid.ps}};
      if (flags.format == "csv") {
        std::cout << "N,p,delta_hat,delta_ci_low,delta_ci_high,h_lambda,h_lambda_prime,"
                     "h1_bound,h2_bound,h3_bound,pstar,hstar,bound_value\n";
        for (const auto& c : result.cells) {
          std::printf("%d,%g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      c.n_param, c.p_param, c.delta_hat, c.delta_ci_low, c.delta_ci_high,
                      c.h_lambda.value, c.h_lambda_prime.value, c.h1_bound, c.h2_bound,
                      c.h3_bound, c.pstar, c.hstar, c.bound_value);
        }
        return 0;
      }
      Json cells = Json::array();
      for (const auto& c : result.cells) cells.push_back(delta_json(c));
      Json report{{"tb", block_json(triple, tb)},
                  {"cells", cells},
                  {"selection", selection_json(result.selection)}};
      report["meta"] = meta_json(inst, flags, config);
      emit(report, flags.format);
      return result.selection.feasible ? 0 : 3;
    }

    if (*bound) {
      FactorTriple triple = require_triple(inst);
      MarkovMeasure m1 = load_measure_file(mu1_path, triple.x);
      MarkovMeasure m2 = load_measure_file(mu2_path, triple.x);
      Potential v = load_potential_file(potential_path, triple.x);
      RijSampler sampler = make_rij_sampler(m1, m2, triple);
      TransitionBlock tb =
          minimal_transition_block(triple, sampler.nu, flags.lmax, flags.workers).block;
      GridSpec grid = parse_grid(grid_tokens);
      auto separator = choose_separator(triple.x, m1, m2);
      int w_len = static_cast<int>(tb.w.size());
      double nu_w = sampler.nu.word_probability(tb.w);
      double c2 = 2.0 * (static_cast<double>(w_len) * v.max_abs() + v.variation_tail_sum());
      auto measure_hstar = [&](int n) {
        if (!separator) {
          DistinguishabilityReport r;
          r.pstar = 1.0;
          r.hstar = std::log(2.0);
          r.separator = "degenerate";
          return r;
        }
        return distinguishability(m1, m2, *separator, n, w_len, dist_trials,
                                  Rng::derive(flags.seed, 0xB0B0 + static_cast<std::uint64_t>(n)),
                                  flags.workers);
      };
      std::vector<DeltaReport> cells;
      for (int n : grid.ns) {
        auto dist = measure_hstar(n);
        for (double p : grid.ps) {
          DeltaReport cell;
          cell.n_param = n;
          cell.p_param = p;
          cell.hstar = dist.hstar;
          cell.pstar = dist.pstar;
          cell.c3 = nu_w;  // analytic constants: density correction 1
          cell.c4 = nu_w;
          cell.c5 = 2.0 * w_len * nu_w * (2.0 * std::log(triple.x.size()) + c2);
          cells.push_back(cell);
        }
      }
      Json report;
      int exit_code = 0;
      try {
        BoundSelection sel = bound_report(cells, measure_hstar);
        report["selection"] = selection_json(sel);
      } catch (const NoFeasibleCell& e) {
        report["selection"] = Json{{"feasible", false}, {"message", e.what()}};
        exit_code = 3;
      }
      Json grid_hstar = Json::array();
      for (const auto& c : cells)
        if (c.p_param == grid.ps.front())
          grid_hstar.push_back({{"N", c.n_param}, {"hstar", c.hstar}, {"pstar", c.pstar}});
      report["grid_hstar"] = grid_hstar;
      report["tb"] = block_json(triple, tb);
      report["meta"] = meta_json(inst, flags,
                                 Json{{"mu1", mu1_path},
                                      {"mu2", mu2_path},
                                      {"potential", potential_path},
                                      {"dist_trials", dist_trials},
                                      {"grid_N", grid.ns},
                                      {"grid_p", grid.ps}});
      emit(report, flags.format);
      return exit_code;
    }

    if (*oracle) {
      FactorTriple triple = require_triple(inst);
      Word y = parse_y_word_arg(triple, y_word_arg);
      int classes = count_transition_classes_periodic(triple, y);
      Json report{{"classes", classes}, {"period", y.size()}};
      report["meta"] = meta_json(inst, flags, Json{{"y", y_word_arg}});
      emit(report, flags.format);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
