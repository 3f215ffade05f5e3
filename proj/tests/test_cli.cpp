#include <cmath>
#include <sstream>

#include "cli_runner.hpp"
#include "doctest.h"
#include "hmmbw/io.hpp"
#include "support.hpp"

using namespace hmmbw;
using namespace hmmbw::testing;

namespace {

const char* kSingleState = R"({"schema_version": 1, "n_states": 1,
  "emission": {"kind": "categorical", "n_symbols": 2, "probs": [[0.25, 0.75]]},
  "pi": [1], "trans": [[1]]})";

double first_number_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size()));
}

}  // namespace

TEST_CASE("usage errors exit 1 with the error prefix") {
  ScratchDir dir("hmmbw_cli");
  auto none = run_cli("", dir.path);
  CHECK(none.exit_code == 1);
  CHECK(none.err.rfind("error:", 0) == 0);

  auto unknown = run_cli("frobnicate", dir.path);
  CHECK(unknown.exit_code == 1);

  auto bad_emission = run_cli("init --states 2 --emission poisson --model-out " + dir.file("m.json"), dir.path);
  CHECK(bad_emission.exit_code == 1);
  CHECK(bad_emission.err.rfind("error:", 0) == 0);

  auto zero_states = run_cli("init --states 0 --emission gaussian --model-out " + dir.file("m.json"), dir.path);
  CHECK(zero_states.exit_code == 1);

  io::save_model(two_state_model(), dir.file("two.json"));
  write_text(dir.file("d.txt"), "0 1\n");
  auto bad_tol = run_cli("train --model-in " + dir.file("two.json") + " --data " + dir.file("d.txt") +
                             " --model-out " + dir.file("o.json") + " --tolerance 0",
                         dir.path);
  CHECK(bad_tol.exit_code == 1);
  auto bad_floor = run_cli("train --model-in " + dir.file("two.json") + " --data " + dir.file("d.txt") +
                               " --model-out " + dir.file("o.json") + " --transition-floor -1",
                           dir.path);
  CHECK(bad_floor.exit_code == 1);

  CHECK(run_cli("--help", dir.path).exit_code == 0);
}

TEST_CASE("data errors exit 2") {
  ScratchDir dir("hmmbw_cli");
  auto missing = run_cli("loglik --model-in " + dir.file("nope.json") + " --data " + dir.file("nope.txt"), dir.path);
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.rfind("error:", 0) == 0);

  write_text(dir.file("bad.json"), R"({"schema_version": 1, "n_states": 1,
    "emission": {"kind": "categorical", "n_symbols": 2, "probs": [[0.5, 0.4]]},
    "pi": [1], "trans": [[1]]})");
  write_text(dir.file("d.txt"), "0 1\n");
  auto invalid = run_cli("loglik --model-in " + dir.file("bad.json") + " --data " + dir.file("d.txt"), dir.path);
  CHECK(invalid.exit_code == 2);
  CHECK(invalid.err.find("emission row 0") != std::string::npos);

  write_text(dir.file("one.json"), kSingleState);
  write_text(dir.file("range.txt"), "0 1\n0 5\n");
  auto range = run_cli("decode --model-in " + dir.file("one.json") + " --data " + dir.file("range.txt"), dir.path);
  CHECK(range.exit_code == 2);
  CHECK(range.err.find("sequence 1") != std::string::npos);

  std::string zeros;
  for (int t = 0; t < 60; ++t) zeros += "0 ";
  write_text(dir.file("long.txt"), zeros + "\n");
  io::save_model(two_state_model(), dir.file("two.json"));
  auto big = run_cli("oracle --model-in " + dir.file("two.json") + " --data " + dir.file("long.txt"), dir.path);
  CHECK(big.exit_code == 2);
}

TEST_CASE("loglik decode and oracle outputs") {
  ScratchDir dir("hmmbw_cli");
  write_text(dir.file("one.json"), kSingleState);
  write_text(dir.file("d.txt"), "1 1\n");
  auto ll = run_cli("loglik --model-in " + dir.file("one.json") + " --data " + dir.file("d.txt"), dir.path);
  REQUIRE(ll.exit_code == 0);
  CHECK(first_number_after(ll.out, "total ") == doctest::Approx(2.0 * std::log(0.75)).epsilon(1e-15));
  CHECK(first_number_after(ll.out, "sequence 0 ") == doctest::Approx(2.0 * std::log(0.75)).epsilon(1e-15));

  io::save_model(two_state_model(), dir.file("two.json"));
  write_text(dir.file("zz.txt"), "0 0\n");
  auto dec = run_cli("decode --model-in " + dir.file("two.json") + " --data " + dir.file("zz.txt"), dir.path);
  REQUIRE(dec.exit_code == 0);
  CHECK(dec.out.substr(0, dec.out.find('\n')) == "0 0");
  CHECK(first_number_after(dec.out, "log_joint ") == doctest::Approx(std::log(0.3402)).epsilon(1e-14));

  write_text(dir.file("zo.txt"), "0 1\n");
  auto orc = run_cli("oracle --model-in " + dir.file("two.json") + " --data " + dir.file("zo.txt"), dir.path);
  REQUIRE(orc.exit_code == 0);
  CHECK(first_number_after(orc.out, "likelihood ") == doctest::Approx(0.209).epsilon(1e-15));
  CHECK(first_number_after(orc.out, "gamma 0 ") == doctest::Approx(837.0 / 1045.0).epsilon(1e-14));
}

TEST_CASE("init sample and train") {
  ScratchDir dir("hmmbw_cli");
  REQUIRE(run_cli("init --states 3 --emission categorical:4 --seed 5 --model-out " + dir.file("a.json"), dir.path)
              .exit_code == 0);
  REQUIRE(run_cli("init --states 3 --emission categorical:4 --seed 5 --model-out " + dir.file("b.json"), dir.path)
              .exit_code == 0);
  CHECK(slurp(dir.file("a.json")) == slurp(dir.file("b.json")));
  CHECK(io::load_model(dir.file("a.json")) == random_init(3, EmissionSpec::categorical(4), 5));

  REQUIRE(run_cli("init --states 2 --emission gaussian --seed 1 --model-out " + dir.file("g.json"), dir.path)
              .exit_code == 0);
  CHECK(io::load_model(dir.file("g.json")).emission_kind() == EmissionKind::gaussian);

  io::save_model(two_state_model(), dir.file("truth.json"));
  REQUIRE(run_cli("sample --model-in " + dir.file("truth.json") +
                      " --count 4 --length 30 --seed 9 --data-out " + dir.file("s.txt") +
                      " --states-out " + dir.file("q.txt"),
                  dir.path)
              .exit_code == 0);
  const auto seqs = io::load_sequences(dir.file("s.txt"), EmissionKind::categorical);
  CHECK(seqs.size() == 4);
  for (const auto& s : seqs) CHECK(s.size() == 30);
  auto to_stdout = run_cli("sample --model-in " + dir.file("truth.json") + " --count 4 --length 30 --seed 9", dir.path);
  CHECK(to_stdout.out == slurp(dir.file("s.txt")));

  write_text(dir.file("wide.txt"), "0 1 3\n");
  auto out_of_range = run_cli("train --model-in " + dir.file("truth.json") + " --data " + dir.file("wide.txt") +
                                  " --model-out " + dir.file("x.json"),
                              dir.path);
  CHECK(out_of_range.exit_code == 2);
  CHECK(out_of_range.err.rfind("error:", 0) == 0);

  REQUIRE(run_cli("init --states 2 --emission categorical:2 --seed 3 --model-out " + dir.file("init.json"), dir.path)
              .exit_code == 0);
  auto capped = run_cli("train --model-in " + dir.file("init.json") + " --data " + dir.file("s.txt") +
                            " --model-out " + dir.file("fit1.json") + " --max-iterations 1",
                        dir.path);
  CHECK(capped.exit_code == 3);
  CHECK(capped.out.find("converged false") != std::string::npos);
  CHECK(io::load_model(dir.file("fit1.json")).n_states() == 2);
}
