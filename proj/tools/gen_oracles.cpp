// Regenerates tests/oracle/oracles.json from the brute-force reference solver.
//   build/tools/gen_oracles tests/oracle/oracles.json

#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "brute_force.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: gen_oracles OUT.json\n";
    return 2;
  }
  constexpr long kNodes = 1'000'000;
  constexpr double kTol = 1e-10;
  nlohmann::ordered_json doc;
  doc["generator"] = "build/tools/gen_oracles tests/oracle/oracles.json";
  doc["method"] = "fixed-step RK4 with closed-form H, " + std::to_string(kNodes) +
                  " steps on [-1, 1], bisection on c to width 1e-10";
  doc["reaction"] = "2 (s - mu)(1 - s^2)";
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (double p : {1.5, 2.0, 3.0}) {
    const oracle::Problem pr{p, -0.25};
    const double c = oracle::critical_speed(pr, kNodes, kTol);
    std::fprintf(stderr, "p = %g: c* = %.12f\n", p, c);
    cases.push_back({{"p", p}, {"mu", pr.mu}, {"c_star", c}});
  }
  doc["critical_speeds"] = cases;
  std::ofstream out(argv[1]);
  out << doc.dump(2) << "\n";
  return out ? 0 : 1;
}
