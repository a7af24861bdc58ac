#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <doctest.h>

namespace {

struct Run {
  int code;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run run(const std::string& args) {
  const std::string cmd = std::string(ESDIRK_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

double last_order(const std::string& csv) {
  const auto ls = lines(csv);
  const std::string& last = ls.back();
  return std::stod(last.substr(last.rfind(',') + 1));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("verify ESDIRK34") {
  const auto r = run("verify ESDIRK34");
  CHECK(r.code == 0);
  CHECK(r.out.find("all checks pass") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("verify ESDIRK12 reports the unbounded embedded R") {
  const auto r = run("verify ESDIRK12 --format csv");
  CHECK(r.code == 0);
  CHECK(lines(r.out).front() == "method,check,expected,measured,residual,status");
  CHECK(r.out.find("ESDIRK12,embedded |R(inf)|,inf,inf") != std::string::npos);
}

TEST_CASE("verify with stability details") {
  const auto r = run("verify ESDIRK23 --stability");
  CHECK(r.code == 0);
  CHECK(r.out.find("ESDIRK23 embedded") != std::string::npos);
  CHECK(r.out.find("|R(inf)| = inf") != std::string::npos);
}

TEST_CASE("verify a perturbed tableau file") {
  const std::string path = "esdirk_cli_perturbed.txt";
  {
    std::ofstream f(path);
    f << "name: perturbed\n0\n0.5 0.5\n0.3 0.3 0.5\n"
         "b: 0.3 0.2 0.5\nc: 0 1 1\np: 2\n";
  }
  const auto r = run("verify --file " + path);
  std::remove(path.c_str());
  CHECK(r.code == 1);
  CHECK(r.out.find("failing:") != std::string::npos);
  CHECK(r.out.find("consistency") != std::string::npos);
}

TEST_CASE("parse errors and unknown names") {
  const std::string path = "esdirk_cli_broken.txt";
  {
    std::ofstream f(path);
    f << "0\n0.5 x\n";
  }
  const auto r = run("verify --file " + path);
  std::remove(path.c_str());
  CHECK(r.code == 2);
  CHECK(r.out.find(":2:5:") != std::string::npos);

  const auto u = run("verify RK4");
  CHECK(u.code == 2);
  CHECK(u.out.find("ESDIRK43b") != std::string::npos);
  CHECK(run("solve --problem nowhere").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("solve").code == 2);
  CHECK(run("solve --problem linear --method ESDIRK45c").code == 2);
}

TEST_CASE("convergence tables") {
  const auto r12 = run("convergence --method ESDIRK12 --problem forced_linear --h0 0.1 --halvings 5");
  const auto r23 = run("convergence --method ESDIRK23 --halvings 5");
  const auto r34 = run("convergence --method ESDIRK34 --halvings 5");
  CHECK(r12.code == 0);
  CHECK(lines(r23.out).size() == 7);
  CHECK(std::abs(last_order(r12.out) - 1.0) <= 0.2);
  CHECK(std::abs(last_order(r23.out) - 2.0) <= 0.2);
  CHECK(std::abs(last_order(r34.out) - 3.0) <= 0.2);
  CHECK(run("convergence --problem vdp1").code == 2);
}

TEST_CASE("solve output") {
  const auto a = run("solve --problem vdp1 --method ESDIRK34 --rtol 1e-5 --atol 1e-5 --dense 3");
  const auto b = run("solve --problem vdp1 --method ESDIRK34 --rtol 1e-5 --atol 1e-5 --dense 3");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const auto ls = lines(a.out);
  CHECK(ls.front() == "t,h,err_norm,accepted,interp,x_1,x_2");
  CHECK(ls[1] == "0,0,0,1,0,2,0");
  CHECK(a.out.find("status,t_final,steps") != std::string::npos);

  const std::string out = "esdirk_cli_solve.csv";
  const auto c = run("solve --problem robertson_dae --atol 1e-6,1e-10,1e-6 --out " + out);
  CHECK(c.code == 0);
  std::ifstream stats(out + ".stats.csv");
  std::string header, row;
  std::getline(stats, header);
  std::getline(stats, row);
  CHECK(row.rfind("success,10000,", 0) == 0);
  std::remove(out.c_str());
  std::remove((out + ".stats.csv").c_str());
}

TEST_CASE("numerical failure exit code") {
  CHECK(run("solve --problem vdp1000 --max-steps 10").code == 3);
}

TEST_CASE("events") {
  const auto r = run("events --method ESDIRK34");
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  CHECK(ls.front() == "t_event,spec_index,terminal,x_1,x_2");
  CHECK(ls.size() == 6);
  CHECK(ls[1].rfind("0.4515236", 0) == 0);
  CHECK(run("events --method ESDIRK32c").code == 2);
  CHECK(run("events --problem vdp1").code == 2);
}

}
