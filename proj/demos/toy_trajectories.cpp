// Excess risk trajectories of the two synthetic problems, a few seeds each.
#include <cstdio>

#include "asgd/theory.hpp"

namespace {

void print(const asgd::theory::ExperimentReport& r) {
  std::printf("%s (%zu seeds)\n%10s", r.problem.c_str(), r.seeds, "step");
  for (const auto& a : r.arms) std::printf("  %11s", a.name.c_str());
  std::printf("\n");
  for (std::size_t k = 0; k < r.steps.size(); ++k) {
    std::printf("%10llu", static_cast<unsigned long long>(r.steps[k]));
    for (const auto& a : r.arms) std::printf("  %11.4g", a.excess[k].mean);
    std::printf("\n");
  }
  std::printf("\n");
}

}  // namespace

int main() {
  asgd::theory::ExperimentOptions o;
  o.seeds = 4;
  o.points = 10;
  o.steps = 10000;
  print(asgd::theory::run_toy1(o));
  o.steps = 30000;
  print(asgd::theory::run_toy2(o));
}
