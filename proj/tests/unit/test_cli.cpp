#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "agecohort/io.hpp"
#include "support/fake_transport.hpp"

namespace fs = std::filesystem;
using agecohort::io::read_file;

namespace {

const fs::path kFixtures = AGECOHORT_E2E_FIXTURES;

struct Run {
  int code;
  std::string err;
};

Run cli(const fs::path& cwd, const std::string& args) {
  const auto err_file = fs::temp_directory_path() / ("agecohort-cli-err-" + std::to_string(::getpid()));
  const std::string cmd = "cd '" + cwd.string() + "' && '" + AGECOHORT_CLI + "' " + args + " >/dev/null 2>'" +
                          err_file.string() + "'";
  const int rc = std::system(cmd.c_str());
  Run r{WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, read_file(err_file)};
  fs::remove(err_file);
  return r;
}

nlohmann::json last_json_line(const std::string& err) {
  const auto start = err.rfind("\n{");
  return nlohmann::json::parse(err.substr(start == std::string::npos ? err.find('{') : start + 1));
}

}  // namespace

TEST_CASE("no sources exits 2") {
  testgen::TempDir out("cli-nosrc");
  const auto r = cli(kFixtures, "-c agecohort.conf -o '" + out.path().string() + "' fuse");
  CHECK(r.code == 2);
  CHECK(last_json_line(r.err)["exit_code"] == 2);
}

TEST_CASE("missing inputs exit 3") {
  testgen::TempDir out("cli-missing");
  auto r = cli(kFixtures, "-o '" + out.path().string() + "' folds --dataset nope.csv");
  CHECK(r.code == 3);
  CHECK(last_json_line(r.err)["error"] == "MissingInput");
  r = cli(kFixtures, "-c agecohort.conf -o '" + out.path().string() + "' infer --addresses nope.txt");
  CHECK(r.code == 3);
  CHECK(cli(kFixtures, "-c missing.conf folds").code != 0);
}

TEST_CASE("too few distinct points exits 4") {
  testgen::TempDir out("cli-k");
  const auto r = cli(kFixtures, "-o '" + out.path().string() + "' folds --dataset golden/fused.csv -k 500");
  CHECK(r.code == 4);
  CHECK(last_json_line(r.err)["error"] == "TooFewDistinctPoints");
}

TEST_CASE("sidecar handshake failure exits 5") {
  testgen::TempDir out("cli-sidecar");
  const auto r = cli(kFixtures, "-c agecohort.conf --set inference.sidecar_timeout_secs=2 -o '" + out.path().string() +
                                    "' infer --addresses addresses.txt --backend sidecar --sidecar '" +
                                    std::string(AGECOHORT_FAKE_SIDECAR) + " bad-handshake'");
  CHECK(r.code == 5);
  CHECK(last_json_line(r.err)["error"] == "BackendUnavailable");
}

TEST_CASE("empty address file") {
  testgen::TempDir out("cli-empty");
  std::ofstream(out.path() / "none.txt") << "# nothing to do\n";
  const auto r = cli(kFixtures, "-c agecohort.conf -o '" + out.path().string() + "' infer --addresses '" +
                                    (out.path() / "none.txt").string() + "'");
  CHECK(r.code == 0);
  CHECK(read_file(out.path() / "decisions.csv") == "address,decision,cohort,p_max,lat,lon,stage,p0,p1,p2,p3,p4\n");
  CHECK(read_file(out.path() / "predictions.csv") == "lat,lon,p0,p1,p2,p3,p4\n");
  CHECK(read_file(out.path() / "review.csv") == "address,lat,lon,p_max,stage,p0,p1,p2,p3,p4\n");
}

TEST_CASE("sidecar backend end to end") {
  testgen::TempDir out("cli-sidecar-ok");
  const auto r = cli(kFixtures, "-c agecohort.conf -o '" + out.path().string() + "' infer --addresses addresses.txt "
                                "--backend sidecar --sidecar '" + std::string(AGECOHORT_FAKE_SIDECAR) + " good'");
  // The fake sidecar reads probabilities from the tile file, which holds image bytes here.
  CHECK(r.code == 0);
  const auto decisions = read_file(out.path() / "decisions.csv");
  CHECK(decisions.find(",accepted,") == std::string::npos);
  CHECK(decisions.find("predict") != std::string::npos);
}

TEST_CASE("review file appends across runs and inputs stay untouched") {
  testgen::TempDir out("cli-append");
  const auto before = read_file(kFixtures / "addresses.txt");
  const std::string args = "-c agecohort.conf -o '" + out.path().string() + "' infer --addresses addresses.txt";
  REQUIRE(cli(kFixtures, args).code == 0);
  const auto once = read_file(out.path() / "review.csv");
  REQUIRE(cli(kFixtures, args).code == 0);
  const auto twice = read_file(out.path() / "review.csv");
  const auto header = std::string("address,lat,lon,p_max,stage,p0,p1,p2,p3,p4\n");
  CHECK(twice == once + once.substr(header.size()));
  CHECK(read_file(kFixtures / "addresses.txt") == before);
  CHECK(read_file(out.path() / "decisions.csv") == read_file(kFixtures / "golden" / "decisions.csv"));
}

TEST_CASE("energy join") {
  testgen::TempDir out("cli-energy");
  const auto r = cli(kFixtures, "-o '" + out.path().string() + "' energy --dataset golden/fused.csv");
  CHECK(r.code == 0);
  CHECK(r.err.find("upper_ceiling") != std::string::npos);
  const auto csv = read_file(out.path() / "energy.csv");
  CHECK(csv.rfind("lat,lon,chosen_year,chosen_source,cohort,roof,upper_ceiling,wall,floor\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 29);
}
