#include <cstdlib>
#include <fstream>
#include <string>

#include "doctest.h"
#include "test_helpers.hpp"

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(BNMC_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string tmp_path(const std::string& name) {
  return std::string("/tmp/bnmc_cli_") + name;
}

}  // namespace

TEST_CASE("cli exit codes: success, usage error, model and data errors") {
  const std::string models = MODELS_DIR;

  // 0: well-formed describe.
  CHECK(run("describe --model " + models + "/lda.bn") == 0);

  // 1: usage problems.
  CHECK(run("describe") == 1);                 // missing --model
  CHECK(run("frobnicate") == 1);               // unknown subcommand
  CHECK(run("describe --model x --bogus y") == 1);

  // 2: model errors.
  const std::string bad_model = tmp_path("bad.bn");
  {
    std::ofstream out(bad_model);
    out << "model() { x = Frobnitz(1).sample() }\n";
  }
  CHECK(run("describe --model " + bad_model) == 2);
  CHECK(run("describe --model /nonexistent/path.bn") == 2);

  // 2: data problems (missing observed array).
  const std::string bad_data = tmp_path("bad.json");
  {
    std::ofstream out(bad_data);
    out << "{\"hyper\": {\"N\": 4, \"K\": 2, \"V\": 2}, \"arrays\": {}}\n";
  }
  CHECK(run("infer --model " + models + "/catmix.bn --data " + bad_data + " --samples 1") == 2);
}

TEST_CASE("cli end-to-end: gen, infer, trace, determinism") {
  const std::string models = MODELS_DIR;
  const std::string data = tmp_path("catmix.json");
  const std::string t1 = tmp_path("t1.json");
  const std::string t2 = tmp_path("t2.json");

  CHECK(run("gen --fixture catmix --n 12 --k 2 --vocab 3 --seed 5 --out " + data) == 0);
  CHECK(run("infer --model " + models + "/catmix.bn --data " + data +
            " --method gibbs --samples 16 --seed 42 --threads 1 --omit-timing --out " + t1) == 0);
  CHECK(run("infer --model " + models + "/catmix.bn --data " + data +
            " --method gibbs --samples 16 --seed 42 --threads 8 --omit-timing --out " + t2) == 0);

  const std::string a = bnmc::test::read_file(t1);
  const std::string b = bnmc::test::read_file(t2);
  CHECK(a == b);
  CHECK(a.find("\"log_joint\"") != std::string::npos);
  CHECK(a.find("\"map_state\"") != std::string::npos);
}
