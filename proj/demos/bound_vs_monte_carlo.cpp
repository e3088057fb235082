// t·E‖θ̄_t − θ*‖²_A for linear SA against its finite-sample bound, for a few
// values of the schedule exponent c (c = 1 with a = λ0 is outside the bound).
#include <cstdio>

#include "asgd/theory.hpp"

int main() {
  using namespace asgd;
  using namespace asgd::theory;
  VerifyOptions o;
  o.theorem1_condition = 30.0;
  LinearSaConfig cfg = make_theorem1_case(o);
  const Spectrum sp = spectrum(cfg.A);
  for (double c : {0.5, 2.0 / 3.0, 0.75, 0.9}) {
    cfg.schedule = Schedule::make(1.0 / sp.lambda1, sp.lambda0, c);
    const auto rep = verify_theorem1(cfg, 100, {100, 1000, 10000});
    std::printf("c = %.3f   tr(A^-1 S) = %.3f\n", c, rep.params.trace_AinvS);
    for (const auto& r : rep.rows)
      std::printf("  t=%-6llu estimate %9.3f +- %6.3f   bound %10.3f\n", static_cast<unsigned long long>(r.t),
                  r.estimate, r.std_error, r.bound);
  }
}
