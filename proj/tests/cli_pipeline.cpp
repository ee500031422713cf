// End-to-end check of the command line tool: synth -> mask -> train ->
// segment -> eval, plus the exit-code contract. Takes the binary path as
// argv[1].

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "ok: " << what << "\n";
  } else {
    ++failures;
    std::cout << "FAIL: " << what << "\n";
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Runner {
  std::string binary;
  std::filesystem::path dir;
  std::filesystem::path log;

  int run(const std::string& args) {
    const std::string cmd =
        binary + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  void dump_log(const std::string& context) {
    std::cout << "  [" << context << "] " << slurp(log);
  }
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_pipeline <actseg-binary>\n";
    return 2;
  }
  Runner r;
  r.binary = argv[1];
  r.dir = std::filesystem::temp_directory_path() / "actseg_cli_pipeline";
  std::filesystem::remove_all(r.dir);
  std::filesystem::create_directories(r.dir);
  r.log = r.dir / "run.log";
  const std::string d = r.dir.string() + "/";

  int code = r.run("synth --scenario SHORT_MEAL --n 5 --seed 3 --out " + d +
                   "train.jsonl --alphabet-out " + d + "labels.txt");
  check(code == 0, "synth exits 0");
  if (code != 0) r.dump_log("synth");
  check(std::filesystem::exists(r.dir / "train.jsonl"), "synth wrote data");
  check(std::filesystem::exists(r.dir / "labels.txt"), "synth wrote alphabet");

  code = r.run("synth --scenario SHORT_MEAL --n 3 --seed 4 --out " + d +
               "test.jsonl");
  check(code == 0, "second synth exits 0");

  code = r.run("mask --data " + d + "train.jsonl --rho 0.3 --seed 11 --out " +
               d + "masked.jsonl");
  check(code == 0, "mask exits 0");
  if (code != 0) r.dump_log("mask");

  code = r.run("train --model crf --data " + d + "masked.jsonl --out " + d +
               "model.json --max-iterations 40");
  check(code == 0, "crf training exits 0");
  if (code != 0) r.dump_log("train");
  check(std::filesystem::exists(r.dir / "model.json"), "train wrote a model");

  code = r.run("segment --model " + d + "model.json --data " + d +
               "test.jsonl --out " + d + "pred.jsonl");
  check(code == 0, "segment exits 0");
  if (code != 0) r.dump_log("segment");

  code = r.run("eval --truth " + d + "test.jsonl --pred " + d +
               "pred.jsonl --out " + d + "report.csv --report-model crf");
  check(code == 0, "eval exits 0");
  if (code != 0) r.dump_log("eval");
  {
    const std::string report = slurp(r.dir / "report.csv");
    check(report.rfind("model,scenario,rho,repetition,label,precision,recall,"
                       "f1\n",
                       0) == 0,
          "report has the expected header");
    check(report.find("__macro__") != std::string::npos,
          "report has a macro row");
  }

  code = r.run("eval --truth " + d + "test.jsonl --pred " + d +
               "test.jsonl --out " + d + "self.csv");
  check(code == 0, "self-eval exits 0");
  check(slurp(r.dir / "self.csv")
                .find("__macro__,1.000000,1.000000,1.000000") !=
            std::string::npos,
        "truth against itself scores a perfect macro row");

  code = r.run("segment --model " + d + "model.json --data " + d +
               "masked.jsonl --out " + d + "constrained.jsonl --constrained");
  check(code == 0, "constrained segment exits 0");

  code = r.run("train --model bogus --data " + d + "masked.jsonl --out " + d +
               "x.json");
  check(code == 1, "unknown model family is a usage error");

  code = r.run("segment");
  check(code == 1, "missing required options are a usage error");

  code = r.run("mask --data " + d + "missing.jsonl --rho 0.2 --out " + d +
               "y.jsonl");
  check(code == 2, "missing input file is a data error");

  code = r.run("mask --data " + d + "train.jsonl --rho 1.0 --seed 1 --out " +
               d + "hidden.jsonl");
  check(code == 0, "full masking exits 0");
  code = r.run("train --model crf --data " + d + "hidden.jsonl --out " + d +
               "z.json");
  check(code == 3, "training without any visible label is a numerical error");

  std::filesystem::remove_all(r.dir);
  if (failures == 0) {
    std::cout << "cli pipeline: all checks passed\n";
    return 0;
  }
  std::cout << "cli pipeline: " << failures << " checks failed\n";
  return 1;
}
