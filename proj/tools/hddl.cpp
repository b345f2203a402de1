// hddl: check, ground, validate, solve and bench from the command line.
// Exit codes: 0 success, 1 semantic failure, 2 operational failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "hddl/grounding.hpp"
#include "hddl/parser.hpp"
#include "hddl/planner.hpp"
#include "hddl/validator.hpp"

namespace fs = std::filesystem;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string display_name(const std::string& path) { return path == "-" ? "<stdin>" : path; }

void print_notes(const std::vector<hddl::Diagnostic>& ds) {
  for (const auto& d : ds) std::cerr << d.str() << "\n";
}

int cmd_check(const std::string& dpath, const std::string& ppath) {
  auto dom = hddl::parse_domain(read_input(dpath), display_name(dpath));
  std::vector<hddl::Diagnostic> diags = dom.notes;
  if (ppath.empty()) {
    auto more = hddl::validate_model(dom);
    diags.insert(diags.end(), more.begin(), more.end());
  } else {
    auto prob = hddl::parse_problem(read_input(ppath), display_name(ppath));
    diags.insert(diags.end(), prob.notes.begin(), prob.notes.end());
    auto more = hddl::validate_model(dom, prob);
    diags.insert(diags.end(), more.begin(), more.end());
  }
  print_notes(diags);
  return hddl::has_errors(diags) ? 1 : 0;
}

int cmd_ground(const std::string& dpath, const std::string& ppath, bool dump) {
  auto dom = hddl::parse_domain(read_input(dpath), display_name(dpath));
  auto prob = hddl::parse_problem(read_input(ppath), display_name(ppath));
  auto diags = hddl::validate_model(dom, prob);
  if (hddl::has_errors(diags)) {
    print_notes(diags);
    return 1;
  }
  auto gm = hddl::ground_problem(dom, prob);
  print_notes(gm.diagnostics);
  if (dump) {
    std::cout << hddl::dump_ground_json(gm) << "\n";
    return 0;
  }
  std::cout << "actions: " << gm.actions.size() << "\nmethods: " << gm.methods.size()
            << "\ninitial networks: " << gm.initial_networks.size() << "\npruned (static): " << gm.stats.pruned_static
            << "\npruned (methods): " << gm.stats.pruned_methods << "\n";
  for (const auto& [name, n] : gm.stats.instances) std::cout << "  " << name << ": " << n << "\n";
  return 0;
}

int cmd_validate(const std::string& dpath, const std::string& ppath, const std::string& plan_path,
                 const std::string& format, bool show_explain, bool audit) {
  if ((dpath == "-") + (ppath == "-") + (plan_path == "-") > 1) throw IoError("only one input may be read from stdin");
  hddl::ValidateOptions opts;
  opts.audit = audit;
  auto v = hddl::validate_text(read_input(dpath), read_input(ppath), read_input(plan_path), opts,
                               {display_name(dpath), display_name(ppath), display_name(plan_path)});
  if (format == "json") {
    std::cout << hddl::verdict_json(v) << "\n";
    if (show_explain) std::cerr << hddl::explain(v);
  } else if (show_explain) {
    std::cout << hddl::explain(v);
  } else if (v.valid) {
    std::cout << "VALID (makespan " << v.stats.makespan << ", " << v.stats.happenings << " happenings, depth "
              << v.stats.depth << ")\n";
  } else {
    std::cout << "INVALID\n";
    for (const auto& e : v.errors) std::cout << "  " << e.str() << "\n";
  }
  return v.valid ? 0 : 1;
}

struct SolveOutcome {
  hddl::PlanResult result;
  std::string text;  // printed plan
  bool valid = false;
  std::string invalid_reason;
};

SolveOutcome solve_instance(const hddl::Domain& dom, const hddl::Problem& prob, const hddl::PlannerConfig& cfg) {
  SolveOutcome out;
  auto gm = hddl::ground_problem(dom, prob);
  out.result = hddl::plan(gm, cfg);
  if (!out.result.plan) return out;
  out.text = hddl::print_plan(*out.result.plan);
  // Certify what is printed, not the in-memory document.
  auto v = hddl::validate(dom, prob, gm, hddl::parse_plan(out.text, "<solver output>"));
  out.valid = v.valid;
  if (!v.valid && !v.errors.empty()) out.invalid_reason = v.errors.front().str();
  return out;
}

int cmd_solve(const std::string& dpath, const std::string& ppath, const hddl::PlannerConfig& cfg) {
  auto dom = hddl::parse_domain(read_input(dpath), display_name(dpath));
  auto prob = hddl::parse_problem(read_input(ppath), display_name(ppath));
  auto diags = hddl::validate_model(dom, prob);
  if (hddl::has_errors(diags)) {
    print_notes(diags);
    return 2;
  }
  auto out = solve_instance(dom, prob, cfg);
  if (!out.result.plan) {
    std::cerr << "no plan: " << out.result.reason << " (" << out.result.networks << " networks, "
              << out.result.schedule_nodes << " schedule nodes)\n";
    return 1;
  }
  if (!out.valid) {
    std::cerr << "internal error: emitted plan does not validate: " << out.invalid_reason << "\n";
    return 2;
  }
  if (cfg.optimize) std::cout << ";; makespan: " << out.result.makespan << "\n";
  std::cout << out.text;
  return 0;
}

struct Instance {
  std::string name;
  fs::path domain, problem;
  bool expect_fail = false;
};

struct BenchRow {
  std::string instance;
  std::string status;  // solved, failed, expected-fail, invalid, error
  bool ok = false;
  std::int64_t makespan = 0;
  std::size_t nodes = 0;
  double ms = 0;
  std::string detail;
};

std::vector<Instance> collect_corpus(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("'" + root.string() + "' is not a directory");
  std::vector<Instance> out;
  std::vector<fs::path> dirs{root};
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    fs::path dom = dir / "domain.hddl";
    if (!fs::exists(dom)) continue;
    std::vector<fs::path> probs;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".hddl" && e.path().filename() != "domain.hddl")
        probs.push_back(e.path());
    std::sort(probs.begin(), probs.end());
    for (const auto& p : probs) {
      Instance in;
      in.name = (dir == root ? std::string() : dir.filename().string() + "/") + p.stem().string();
      in.domain = dom;
      in.problem = p;
      in.expect_fail = fs::exists(fs::path(p).replace_extension(".expect-fail"));
      out.push_back(std::move(in));
    }
  }
  return out;
}

BenchRow run_instance(const Instance& in, const hddl::PlannerConfig& cfg) {
  BenchRow row;
  row.instance = in.name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    auto dom = hddl::parse_domain(read_input(in.domain.string()), in.domain.string());
    auto prob = hddl::parse_problem(read_input(in.problem.string()), in.problem.string());
    auto out = solve_instance(dom, prob, cfg);
    row.nodes = out.result.networks + out.result.schedule_nodes;
    if (!out.result.plan) {
      row.status = in.expect_fail ? "expected-fail" : "failed";
      row.ok = in.expect_fail;
      row.detail = out.result.reason;
    } else if (!out.valid) {
      row.status = "invalid";
      row.detail = out.invalid_reason;
    } else {
      row.status = "solved";
      row.ok = true;
      row.makespan = out.result.makespan;
    }
  } catch (const std::exception& e) {
    row.status = "error";
    row.detail = e.what();
  }
  row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

int cmd_bench(const std::string& dir, const hddl::PlannerConfig& cfg, unsigned jobs, std::optional<unsigned> seed,
              const std::string& format) {
  auto instances = collect_corpus(dir);
  if (instances.empty()) {
    std::cerr << "no instances under '" << dir << "'\n";
    return 2;
  }
  if (seed) std::shuffle(instances.begin(), instances.end(), std::mt19937(*seed));
  std::vector<BenchRow> rows(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < instances.size();) rows[k] = run_instance(instances[k], cfg);
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  bool all_ok = std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.ok; });
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
      arr.push_back({{"instance", r.instance}, {"status", r.status}, {"solved", r.status == "solved"},
                     {"makespan", r.makespan}, {"nodes", r.nodes}, {"ms", r.ms}, {"detail", r.detail}});
    std::cout << nlohmann::json{{"ok", all_ok}, {"rows", arr}}.dump(2) << "\n";
  } else {
    std::size_t w = 8;
    for (const auto& r : rows) w = std::max(w, r.instance.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(w + 2)) << "instance" << std::setw(15) << "status" << std::setw(10)
       << "makespan" << std::setw(12) << "nodes" << "ms\n";
    for (const auto& r : rows) {
      os << std::left << std::setw(static_cast<int>(w + 2)) << r.instance << std::setw(15) << r.status << std::setw(10)
         << (r.status == "solved" ? std::to_string(r.makespan) : "-") << std::setw(12) << r.nodes << std::fixed
         << std::setprecision(1) << r.ms;
      if (!r.detail.empty()) os << "  " << r.detail;
      os << "\n";
    }
    std::cout << os.str();
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HDDL 2.1 toolkit: check, ground, validate and solve hierarchical temporal planning problems"};
  app.require_subcommand(1);

  std::string domain, problem, plan_path, format = "text";
  bool dump = false, show_explain = false, audit = false, optimize = false;
  int max_depth = 8;
  std::int64_t horizon = 0;
  unsigned jobs = 1, seed = 0;
  std::string corpus;

  auto* check = app.add_subcommand("check", "parse and check a domain (and optionally a problem)");
  check->add_option("domain", domain, "domain file")->required();
  check->add_option("problem", problem, "problem file");

  auto* ground = app.add_subcommand("ground", "ground a problem and report instance counts");
  ground->add_option("domain", domain, "domain file")->required();
  ground->add_option("problem", problem, "problem file")->required();
  ground->add_flag("--dump-ground", dump, "print the ground model as JSON");

  auto* validate = app.add_subcommand("validate", "validate a timed hierarchical plan");
  validate->add_option("domain", domain, "domain file")->required();
  validate->add_option("problem", problem, "problem file")->required();
  validate->add_option("plan", plan_path, "plan file, or - for standard input")->required();
  validate->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
  validate->add_flag("--explain", show_explain, "narrate the timeline");
  validate->add_flag("--audit", audit, "report every independent error");

  auto* solve = app.add_subcommand("solve", "find a plan with the reference planner");
  solve->add_option("domain", domain, "domain file")->required();
  solve->add_option("problem", problem, "problem file")->required();

  auto* bench = app.add_subcommand("bench", "solve and validate every instance of a corpus");
  bench->add_option("corpus", corpus, "corpus directory")->required();
  bench->add_option("--jobs", jobs, "parallel instances")->check(CLI::PositiveNumber);
  auto* seed_opt = bench->add_option("--seed", seed, "shuffle the instance order");
  bench->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  CLI::Option* horizon_opt = nullptr;
  for (auto* sub : {solve, bench}) {
    sub->add_option("--max-depth", max_depth, "decomposition depth bound")->check(CLI::PositiveNumber);
    auto* h = sub->add_option("--horizon", horizon, "latest admissible date")->check(CLI::PositiveNumber);
    if (sub == solve) horizon_opt = h;
    sub->add_flag("--optimize", optimize, "minimize makespan");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  hddl::PlannerConfig cfg;
  cfg.max_depth = max_depth;
  cfg.optimize = optimize;
  if (horizon > 0 || (horizon_opt && horizon_opt->count())) cfg.horizon = horizon;

  try {
    if (*check) return cmd_check(domain, problem);
    if (*ground) return cmd_ground(domain, problem, dump);
    if (*validate) return cmd_validate(domain, problem, plan_path, format, show_explain, audit);
    if (*solve) return cmd_solve(domain, problem, cfg);
    if (*bench) return cmd_bench(corpus, cfg, jobs, seed_opt->count() ? std::optional<unsigned>(seed) : std::nullopt, format);
  } catch (const hddl::ParseError& e) {
    std::cerr << e.diagnostic().str() << "\n";
    return *check || *validate ? 1 : 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const hddl::GroundingError& e) {
    std::cerr << "grounding error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
