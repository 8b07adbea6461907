// End-to-end exercises of the command-line surface: subcommands, file
// formats and exit codes. Takes the CLI path as argv[1].

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int g_failures = 0;
std::string g_cli;

void expect(bool ok, const std::string& what) {
  std::printf("%s %s\n", ok ? "PASS" : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

int run(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " 2>/dev/null";
  return std::system(cmd.c_str());
}

int run_env(const std::string& env, const std::string& args) {
  const std::string cmd = env + " \"" + g_cli + "\" " + args + " 2>/dev/null";
  return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int exit_code(int system_rc) { return WEXITSTATUS(system_rc); }

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::puts("FAIL missing CLI path");
    return 1;
  }
  g_cli = argv[1];

  // dimension-3 selector: only applicable checks run, exit 0
  expect(exit_code(run("check --metric sphere:n=3 --points 6 --out cli_s3.json")) == 0,
         "check --metric sphere:n=3 exits 0");
  {
    const std::string doc = slurp("cli_s3.json");
    expect(doc.find("\"check_id\":\"dim3_void\"") != std::string::npos &&
               doc.find("\"schema\":1") != std::string::npos,
           "dimension-3 report contains the void-quadratic check");
    expect(doc.find("\"metric\":\"sphere:n=4") == std::string::npos,
           "report is restricted to the selected metric");
  }

  // flow CSV: documented header, exact linear state, constant (T-t)max|Rm|
  expect(exit_code(run("flow --family product_spheres --p 2 --q 2 --a0 1 --b0 1 --dt 1e-3 "
                       "--steps 100 --out cli_flow.csv")) == 0,
         "flow subcommand exits 0");
  {
    std::ifstream in("cli_flow.csv");
    std::string header;
    std::getline(in, header);
    expect(header == "t,a2,b2,R,ric_norm2,max_rm,gap_max_rm", "flow CSV header is fixed");
    std::string line;
    bool states_ok = true, gap_ok = true;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::vector<double> v;
      std::string cell;
      while (std::getline(ls, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
      if (v.size() != 7) continue;
      states_ok = states_ok && std::abs(v[1] - (1 - 2 * v[0])) < 1e-12;
      gap_ok = gap_ok && std::abs(v[6] - std::sqrt(2.0)) < 1e-9;
    }
    expect(states_ok, "flow CSV reproduces a^2 = 1 - 2t");
    expect(gap_ok, "flow CSV shows the constant type-I quantity sqrt(2)");
  }

  // bryant: CSV plus JSON residual summary
  expect(exit_code(run("bryant --n 4 --length 1 --tol 1e-6 --out cli_bryant.csv "
                       "--summary cli_bryant.json")) == 0,
         "bryant subcommand exits 0");
  {
    const std::string sum = slurp("cli_bryant.json");
    expect(sum.find("\"eigen_pattern\":\"Split(3,1)\"") != std::string::npos,
           "profile summary reports the split eigenstructure");
    std::ifstream in("cli_bryant.csv");
    std::string header;
    std::getline(in, header);
    expect(header == "t,h,hp,hpp,fp,R,lambda,mu", "bryant CSV header is fixed");
  }

  // catalog listing
  expect(exit_code(run("list --out cli_list.json")) == 0, "list subcommand exits 0");
  expect(slurp("cli_list.json").find("\"name\":\"euclidean\"") != std::string::npos,
         "list emits catalog documents");

  // usage errors exit 2
  expect(exit_code(run("frobnicate")) == 2, "unknown subcommand exits 2");
  expect(exit_code(run("check --wat")) == 2, "unknown flag exits 2");
  expect(exit_code(run("flow --family nope")) == 2, "bad family exits 2");

  // off-default parameters: fast-collapsing flows, scaled space forms,
  // mixed-dimension products
  expect(exit_code(run("check --points 6 --seed 5"
                       " --metric sphere:n=5,r=0.5"
                       " --metric hyperbolic:n=4,r=2"
                       " --metric cylinder_RxS:n=5,K=2"
                       " --metric product_spheres:p=2,q=3,a=0.8,b=1.4"
                       " --metric warped_interval:n=4,hk=2,K=-1"
                       " --out cli_varied.json")) == 0,
         "varied-parameter catalog selections pass the suite");
  std::remove("cli_varied.json");

  // identical configurations produce byte-identical reports regardless of
  // the thread budget
  expect(exit_code(run_env("WEYLFLOW_THREADS=1",
                           "check --metric perturbed_flat:n=4 --points 6 --out cli_t1.json")) == 0,
         "single-thread run exits 0");
  expect(exit_code(run_env("WEYLFLOW_THREADS=4",
                           "check --metric perturbed_flat:n=4 --points 6 --out cli_t4.json")) == 0,
         "multi-thread run exits 0");
  expect(slurp("cli_t1.json") == slurp("cli_t4.json"),
         "reports are byte-identical across thread budgets");

  for (const char* f : {"cli_s3.json", "cli_flow.csv", "cli_bryant.csv", "cli_bryant.json",
                        "cli_list.json", "cli_t1.json", "cli_t4.json"})
    std::remove(f);

  if (g_failures) {
    std::printf("%d CLI check(s) failed\n", g_failures);
    return 1;
  }
  return 0;
}
