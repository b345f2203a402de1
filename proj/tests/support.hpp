#pragma once

// Corpus access and small builders shared by the test executables.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hddl/parser.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path corpus_dir() { return fs::path(HDDL_CORPUS_DIR); }

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CorpusInstance {
  std::string name;  // domain/problem
  fs::path domain, problem;
  std::optional<fs::path> plan;  // golden plan, when shipped
};

inline std::vector<CorpusInstance> corpus_instances() {
  std::vector<CorpusInstance> out;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(corpus_dir()))
    if (e.is_directory() && fs::exists(e.path() / "domain.hddl")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    std::vector<fs::path> probs;
    for (const auto& e : fs::directory_iterator(d))
      if (e.path().extension() == ".hddl" && e.path().filename() != "domain.hddl") probs.push_back(e.path());
    std::sort(probs.begin(), probs.end());
    for (const auto& p : probs) {
      CorpusInstance ci{d.filename().string() + "/" + p.stem().string(), d / "domain.hddl", p, std::nullopt};
      auto plan = fs::path(p).replace_extension(".plan");
      if (fs::exists(plan)) ci.plan = plan;
      out.push_back(std::move(ci));
    }
  }
  return out;
}

struct Loaded {
  hddl::Domain domain;
  hddl::Problem problem;
  std::optional<hddl::PlanDocument> plan;
};

inline Loaded load(const CorpusInstance& ci) {
  Loaded l{hddl::parse_domain(read_text(ci.domain), ci.domain.string()),
           hddl::parse_problem(read_text(ci.problem), ci.problem.string()), std::nullopt};
  if (ci.plan) l.plan = hddl::parse_plan(read_text(*ci.plan), ci.plan->string());
  return l;
}

inline const CorpusInstance& instance(const std::string& name) {
  static const auto all = corpus_instances();
  for (const auto& ci : all)
    if (ci.name == name) return ci;
  throw std::runtime_error("no corpus instance " + name);
}

inline hddl::Atom atom(const std::string& pred, std::vector<std::string> args = {}) {
  hddl::Atom a;
  a.predicate = pred;
  for (auto& x : args) a.args.push_back(hddl::Term::constant(std::move(x)));
  return a;
}

inline hddl::Atom vatom(const std::string& pred, std::vector<std::string> vars) {
  hddl::Atom a;
  a.predicate = pred;
  for (auto& x : vars) a.args.push_back(hddl::Term::variable(std::move(x)));
  return a;
}

inline hddl::Formula lit(const std::string& pred, std::vector<std::string> args = {}) {
  return hddl::Formula::of(atom(pred, std::move(args)));
}

}  // namespace testing_support
