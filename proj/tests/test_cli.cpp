// End-to-end tests of the cmest binary (path injected by the build as
// CMEST_CLI_PATH). Each case runs the tool against fixture files in a
// scratch directory and inspects the written artifacts.
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("cmest_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, const std::string& log_name,
        const Scratch& scratch) {
  const std::string log = scratch.path(log_name);
  const std::string cmd =
      std::string(CMEST_CLI_PATH) + " " + args + " >" + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc < 0 ? rc : WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("generate writes scores and an exactly reproducible file") {
  Scratch s;
  REQUIRE(run("generate --n 100 --seed 13 --out " + s.path("a"), "log_a", s) == 0);
  const std::string first = slurp(s.path("a/scores.csv"));
  CHECK(count_lines(first) == 101);  // header + 100 rows
  CHECK(first.rfind("id,score,label\n", 0) == 0);

  REQUIRE(run("generate --n 100 --seed 13 --out " + s.path("b"), "log_b", s) == 0);
  CHECK(slurp(s.path("b/scores.csv")) == first);

  REQUIRE(run("generate --n 100 --seed 13 --groups majority_minority --out " +
                  s.path("c"),
              "log_c", s) == 0);
  CHECK(slurp(s.path("c/scores.csv")).find(",majority") != std::string::npos);
}

TEST_CASE("estimate produces the report files") {
  Scratch s;
  REQUIRE(run("generate --n 800 --seed 21 --out " + s.path("val"), "log1", s) == 0);
  REQUIRE(run("generate --n 600 --seed 22 --out " + s.path("test"), "log2", s) == 0);

  SUBCASE("unlabelled test: estimates and confusion only") {
    // Strip labels by rewriting the file without the label column.
    const std::string raw = slurp(s.path("test/scores.csv"));
    std::istringstream in(raw);
    std::string line, unlabelled = "id,score\n";
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto second_comma = line.find(',', line.find(',') + 1);
      unlabelled += line.substr(0, second_comma) + "\n";
    }
    write(s.path("unlabelled.csv"), unlabelled);

    REQUIRE(run("estimate --val " + s.path("val/scores.csv") + " --test " +
                    s.path("unlabelled.csv") + " --out " + s.path("est"),
                "log3", s) == 0);
    const std::string est = slurp(s.path("est/estimates.csv"));
    for (const char* method :
         {"cbpe", "naive_atc", "cm_atc", "naive_doc", "cm_doc"})
      CHECK(est.find(method) != std::string::npos);
    CHECK(fs::exists(s.path("est/confusion.csv")));
    CHECK(!fs::exists(s.path("est/realized.csv")));
    CHECK(!fs::exists(s.path("est/mae.csv")));
    CHECK(fs::exists(s.path("est/manifest.json")));
  }

  SUBCASE("labelled test identical to val: doc rows are exactly zero") {
    REQUIRE(run("estimate --val " + s.path("val/scores.csv") + " --test " +
                    s.path("val/scores.csv") + " --out " + s.path("same"),
                "log4", s) == 0);
    const std::string mae = slurp(s.path("same/mae.csv"));
    std::istringstream in(mae);
    std::string line;
    std::getline(in, line);  // header
    std::size_t doc_rows = 0;
    while (std::getline(in, line)) {
      if (line.rfind("naive_doc,", 0) == 0 || line.rfind("cm_doc,", 0) == 0) {
        std::istringstream cells(line);
        std::string group, metric, value;
        std::getline(cells, group, ',');
        std::getline(cells, metric, ',');
        std::getline(cells, value, ',');
        if (metric == "auc") continue;  // estimated by integration, not doc
        CHECK(value == "0");
        ++doc_rows;
      }
    }
    CHECK(doc_rows == 14);  // 7 counting metrics x 2 doc methods
    CHECK(fs::exists(s.path("same/realized.csv")));
  }

  SUBCASE("missing test file exits 2 naming the path") {
    CHECK(run("estimate --val " + s.path("val/scores.csv") + " --test " +
                  s.path("nope.csv") + " --out " + s.path("x"),
              "log5", s) == 2);
    CHECK(slurp(s.path("log5")).find("nope.csv") != std::string::npos);
  }

  SUBCASE("calibration stage writes the fit and keeps estimates flowing") {
    REQUIRE(run("estimate --val " + s.path("val/scores.csv") + " --test " +
                    s.path("test/scores.csv") + " --calibration csts --out " +
                    s.path("cal"),
                "log6", s) == 0);
    CHECK(fs::exists(s.path("cal/calibration.json")));
    CHECK(fs::exists(s.path("cal/estimates.csv")));
  }
}

TEST_CASE("simulate is deterministic and reruns from its manifest") {
  Scratch s;
  const std::string base =
      "simulate --kind prevalence --axis 0.3,0.5,0.7 --reps 2 --n 200 "
      "--val-n 1000 --pool-n 1000 --seed 5 ";
  REQUIRE(run(base + "--jobs 1 --out " + s.path("one"), "log1", s) == 0);
  REQUIRE(run(base + "--jobs 3 --out " + s.path("two"), "log2", s) == 0);
  CHECK(slurp(s.path("one/sweep.csv")) == slurp(s.path("two/sweep.csv")));
  CHECK(slurp(s.path("one/sweep_summary.csv")) ==
        slurp(s.path("two/sweep_summary.csv")));

  // Re-run from the manifest into a fresh directory.
  REQUIRE(run("simulate --config " + s.path("one/manifest.json") + " --out " +
                  s.path("three"),
              "log3", s) == 0);
  CHECK(slurp(s.path("three/sweep.csv")) == slurp(s.path("one/sweep.csv")));
  CHECK(slurp(s.path("three/manifest.json")) == slurp(s.path("one/manifest.json")));

  const std::string sweep = slurp(s.path("one/sweep.csv"));
  CHECK(sweep.find("\n0.3,2,") != std::string::npos);
  CHECK(sweep.find("\n0.5,2,") != std::string::npos);
  CHECK(sweep.find("\n0.7,2,") != std::string::npos);
}

TEST_CASE("covariate simulation from files") {
  Scratch s;
  REQUIRE(run("generate --n 1500 --latent beta:0.5,0.5 --seed 31 --out " +
                  s.path("maj"),
              "log1", s) == 0);
  REQUIRE(run("generate --n 1500 --latent beta:5,5 --distortion 2 --seed 32 "
              "--out " +
                  s.path("min"),
              "log2", s) == 0);
  REQUIRE(run("generate --n 1500 --latent beta:0.5,0.5 --seed 33 --out " +
                  s.path("val"),
              "log3", s) == 0);
  REQUIRE(run("simulate --kind covariate --axis 0,0.5,1 --reps 2 --n 300 "
              "--val " +
                  s.path("val/scores.csv") + " --pool " +
                  s.path("maj/scores.csv") + " --pool-minority " +
                  s.path("min/scores.csv") + " --seed 4 --out " + s.path("cov"),
              "log4", s) == 0);
  const std::string sweep = slurp(s.path("cov/sweep.csv"));
  CHECK(sweep.find("\n0,2,") != std::string::npos);
  CHECK(sweep.find("\n1,2,") != std::string::npos);
}

TEST_CASE("calibrate and evaluate subcommands") {
  Scratch s;
  REQUIRE(run("generate --n 2000 --distortion 2 --seed 41 --out " + s.path("g"),
              "log1", s) == 0);
  REQUIRE(run("calibrate --val " + s.path("g/scores.csv") +
                  " --mode ts --apply " + s.path("g/scores.csv") + " --out " +
                  s.path("cal"),
              "log2", s) == 0);
  CHECK(slurp(s.path("cal/calibration.json")).find("\"mode\": \"global\"") !=
        std::string::npos);
  CHECK(fs::exists(s.path("cal/calibrated.csv")));

  REQUIRE(run("evaluate --test " + s.path("g/scores.csv") + " --json 1 --out " +
                  s.path("ev"),
              "log3", s) == 0);
  const std::string realized = slurp(s.path("ev/realized.csv"));
  CHECK(realized.rfind("accuracy,", 0) == 0);
  CHECK(realized.find("rbs,ace") != std::string::npos);
  CHECK(slurp(s.path("ev/confusion.csv")).rfind("method,tp,fp,tn,fn\nrealized,",
                                                0) == 0);
  CHECK(fs::exists(s.path("ev/realized.json")));
}

TEST_CASE("flags beat config files") {
  Scratch s;
  write(s.path("gen.cfg"), "n=5\nseed=77\n");
  REQUIRE(run("generate --config " + s.path("gen.cfg") + " --n 9 --out " +
                  s.path("g"),
              "log1", s) == 0);
  CHECK(count_lines(slurp(s.path("g/scores.csv"))) == 10);
  const std::string manifest = slurp(s.path("g/manifest.json"));
  CHECK(manifest.find("\"n\": \"9\"") != std::string::npos);
  CHECK(manifest.find("\"seed\": \"77\"") != std::string::npos);

  SUBCASE("unknown config keys are rejected") {
    write(s.path("bad.cfg"), "bogus=1\n");
    CHECK(run("generate --config " + s.path("bad.cfg") + " --out " + s.path("x"),
              "log2", s) == 2);
    CHECK(slurp(s.path("log2")).find("bogus") != std::string::npos);
  }
}
