#pragma once

// Converged maps for the demo workspaces, built once per test process.

#include "oracles.hpp"

#include <map>
#include <mutex>
#include <string>

namespace fixture {

struct Built {
  conav::WorkspaceFile file;
  conav::CompositeMap cm;
  conav::IterationReport report;
  conav::SphereWorld sw;
};

inline const Built& built(const std::string& name) {
  static std::map<std::string, Built> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto it = cache.find(name);
  if (it == cache.end()) {
    auto wf = conav::load_workspace(oracle::workspace(name));
    auto [cm, report] = conav::run_koebe(wf.workspace);
    auto sw = conav::fit_circles(cm);
    it = cache.emplace(name, Built{std::move(wf), std::move(cm), std::move(report), std::move(sw)}).first;
  }
  return it->second;
}

}  // namespace fixture
