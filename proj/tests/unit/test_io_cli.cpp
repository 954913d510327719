#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#ifndef KGLAB_CLI_PATH
#error "KGLAB_CLI_PATH must point at the command-line binary"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fresh_dir() {
  char tmpl[] = "/tmp/kglab_cli_XXXXXX";
  char* d = mkdtemp(tmpl);
  REQUIRE(d != nullptr);
  return d;
}

// env prefix goes in front of the binary; args after the subcommand
RunResult run(const std::string& args, const std::string& env = "") {
  const std::string dir = fresh_dir();
  const std::string out = dir + "/stdout.txt", err = dir + "/stderr.txt";
  std::string cmd = env;
  if (!env.empty()) cmd += " ";
  cmd += std::string(KGLAB_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cov: canonical undamped value on stdout plus a JSON summary") {
  const std::string dir = fresh_dir();
  const RunResult r = run("cov --a 0 --m 0 --p 1,0 --q 1,0 --out " + dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out == "0.25\n");
  const std::string j = slurp(dir + "/cov.json");
  CHECK(contains(j, "\"version\""));
  CHECK(contains(j, "\"value\""));
  CHECK(contains(j, "\"regime\""));
}

TEST_CASE("argument errors exit with the config status") {
  CHECK(run("").exit_code == 2);                               // no subcommand
  CHECK(run("frobnicate").exit_code == 2);                     // unknown subcommand
  CHECK(run("cov --p").exit_code == 2);                        // missing value
  CHECK(run("cov p 1,0").exit_code == 2);                      // bare token
  const RunResult bad_T = run("cov --p 1,0 --q 1,0 --T -1");
  CHECK(bad_T.exit_code == 2);
  CHECK(contains(bad_T.err, "'T'"));
  const RunResult no_p = run("cov --q 1,0");
  CHECK(no_p.exit_code == 2);
  CHECK(contains(no_p.err, "'p'"));
}

TEST_CASE("sample: replica artifacts are byte-stable across reruns and workers") {
  const std::string d1 = fresh_dir(), d2 = fresh_dir(), d3 = fresh_dir();
  const std::string base =
      "sample --points \"1,0;1.5,0.5;2,-0.3\" --replicas 8 --seed 99 --a 1 --m 0.5 --T 4";
  CHECK(run(base + " --workers 1 --out " + d1).exit_code == 0);
  CHECK(run(base + " --workers 1 --out " + d2).exit_code == 0);
  CHECK(run(base + " --workers 3 --out " + d3).exit_code == 0);
  const std::string csv1 = slurp(d1 + "/sample.csv");
  CHECK(!csv1.empty());
  CHECK(csv1 == slurp(d2 + "/sample.csv"));
  CHECK(csv1 == slurp(d3 + "/sample.csv"));
  CHECK(contains(csv1, "index,t,x,w,z,value,replica,sampler"));
  CHECK(contains(slurp(d1 + "/sample.json"), "\"design_var\""));
}

TEST_CASE("config file keys are overridden by flags") {
  const std::string dir = fresh_dir();
  {
    std::ofstream cfg(dir + "/run.cfg");
    cfg << "# damping setting\n"
        << "a = 2\n"
        << "m = 1\n";
  }
  const RunResult r = run("cov --config " + dir + "/run.cfg --a 0 --m 0 --p 1,0 --q 1,0 --out " + dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out == "0.25\n");  // the a=0 flag wins over a=2 in the file
}

TEST_CASE("malformed config file is a config error naming the file") {
  const std::string dir = fresh_dir();
  {
    std::ofstream cfg(dir + "/bad.cfg");
    cfg << "this line has no equals sign\n";
  }
  const RunResult r = run("cov --config " + dir + "/bad.cfg --p 1,0 --q 1,0");
  CHECK(r.exit_code == 2);
  CHECK(contains(r.err, "config"));
  CHECK(run("cov --config " + dir + "/missing.cfg --p 1,0 --q 1,0").exit_code == 2);
}

TEST_CASE("KGLAB_OUT env var overrides the output directory") {
  const std::string flag_dir = fresh_dir(), env_dir = fresh_dir();
  const RunResult r =
      run("cov --a 0 --m 0 --p 1,0 --q 1,0 --out " + flag_dir, "KGLAB_OUT=" + env_dir);
  CHECK(r.exit_code == 0);
  CHECK(!slurp(env_dir + "/cov.json").empty());
  CHECK(slurp(flag_dir + "/cov.json").empty());
}

TEST_CASE("validate subcommand passes its property suite") {
  const std::string dir = fresh_dir();
  const RunResult r = run("validate --out " + dir);
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "checks passed"));
  CHECK(!contains(r.out, "[FAIL]"));
  CHECK(contains(slurp(dir + "/validate.json"), "\"passed\": true"));
}

TEST_CASE("mc: degenerate single-point interval runs clean") {
  const std::string dir = fresh_dir();
  const RunResult r = run(
      "mc --z_lo 0.7 --z_hi 0.7 --w0 1 --n_lo 12 --n_hi 14 --replicas 5 "
      "--a 1 --m 0.5 --T 4 --seed 7 --out " + dir);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir + "/mc.csv");
  CHECK(contains(csv, "n,h,w,z,numerator,ratio_lil,ratio_mc,replica_id"));
  CHECK(contains(slurp(dir + "/mc.json"), "\"median_sup\""));
}

TEST_CASE("picard: critically coupled run writes field artifacts in one sweep") {
  const std::string dir = fresh_dir();
  const RunResult r = run(
      "picard --a 2 --m 1 --T 1 --step 0.125 --x_lo -1 --x_hi 1 --seed 5 --out " + dir);
  CHECK(r.exit_code == 0);
  const std::string j = slurp(dir + "/picard.json");
  CHECK(contains(j, "\"iterations\": 1"));
  CHECK(contains(j, "\"converged\": true"));
  CHECK(contains(slurp(dir + "/picard_field.csv"), "t,x,value"));
  CHECK(!slurp(dir + "/picard_field.bin").empty());
  CHECK(run("picard --a 2 --m 1 --T 1 --step 0.3 --x_lo -1 --x_hi 1").exit_code == 2);
}
