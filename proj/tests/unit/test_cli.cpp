#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

const fs::path& work() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "uavad_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const auto log = work() / "out.txt";
  const std::string cmd = std::string(UAVAD_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += !line.empty();
  return n;
}

std::string p(const fs::path& f) { return f.string(); }

}  // namespace

TEST_CASE("generate") {
  const auto a = work() / "gen_a";
  const auto b = work() / "gen_b";
  REQUIRE(run("generate --world " UAVAD_WORLD " --n 100 --seed 4 --out " + p(a)).code == 0);
  REQUIRE(run("generate --world " UAVAD_WORLD " --n 100 --seed 4 --out " + p(b)).code == 0);
  CHECK(count_lines(a / "train.jsonl") == 60);
  CHECK(count_lines(a / "val.jsonl") == 10);
  CHECK(count_lines(a / "test.jsonl") == 30);
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "manifest.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }

  std::ofstream(work() / "bad_world.json") << R"({"grid": {"image_width": 1080}})";
  const auto bad = run("generate --world " + p(work() / "bad_world.json") + " --n 100 --seed 1 --out " + p(work() / "x"));
  CHECK(bad.code == 2);
  CHECK(bad.out.find("world") != std::string::npos);
  CHECK_FALSE(fs::exists(work() / "x"));
  CHECK(run("generate --world " UAVAD_WORLD " --n 5 --seed 1 --out " + p(work() / "y")).code == 2);
  CHECK(run("generate --world " UAVAD_WORLD " --n 100 --out " + p(work() / "z")).code == 2);
}

TEST_CASE("usage errors") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("train --data nowhere").code == 2);
  CHECK(run("train --variant vae --data nowhere --out x.json --seed 1").code == 2);
  CHECK(run("detect --ckpt missing.json --in missing.jsonl --out r.jsonl").code == 2);
  CHECK(run("inject --world " UAVAD_WORLD " --data missing.jsonl --task 4 --out o.jsonl --seed 1").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("training defaults") {
  const auto help = run("train --help");
  CHECK(help.code == 0);
  CHECK(help.out.find("64") != std::string::npos);
  CHECK(help.out.find("0.001") != std::string::npos);
  CHECK(help.out.find("32") != std::string::npos);
}

TEST_CASE("pipeline") {
  const auto data = work() / "pipe";
  REQUIRE(run("generate --world " UAVAD_WORLD " --n 60 --seed 9 --out " + p(data)).code == 0);

  // strip GPS from every record; the non-GPS variant must still train
  const auto nogps = work() / "nogps";
  fs::create_directories(nogps);
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl"}) {
    std::ifstream in(data / f);
    std::ofstream out(nogps / f);
    std::string line;
    while (std::getline(in, line)) {
      auto j = nlohmann::json::parse(line);
      j.erase("gps");
      out << j.dump() << "\n";
    }
  }
  fs::copy_file(data / "manifest.json", nogps / "manifest.json");
  const auto vae = work() / "vae.json";
  const auto r = run("train --variant vae --data " + p(nogps) + " --out " + p(vae) + " --seed 2 --max-epochs 2");
  REQUIRE(r.code == 0);
  CHECK(count_lines(work() / "vae.history.jsonl") == 2);
  CHECK(run("train --variant cvae --data " + p(nogps) + " --out " + p(work() / "c.json") + " --seed 2").code == 2);

  const auto uav = work() / "uav.json";
  REQUIRE(run("train --variant uav_adnet --data " + p(data) + " --out " + p(uav) + " --seed 2 --max-epochs 1 " +
              "--history " + p(work() / "uav_hist.jsonl"))
              .code == 0);
  CHECK(count_lines(work() / "uav_hist.jsonl") == 1);

  const auto bench = work() / "bench";
  fs::create_directories(bench);
  for (int t = 1; t <= 3; ++t) {
    const auto out = bench / ("task" + std::to_string(t) + ".jsonl");
    REQUIRE(run("inject --world " UAVAD_WORLD " --data " + p(data / "test.jsonl") + " --task " + std::to_string(t) +
                " --seed 5 --out " + p(out))
                .code == 0);
  }

  const auto reports = work() / "reports.jsonl";
  REQUIRE(run("detect --ckpt " + p(uav) + " --in " + p(bench / "task2.jsonl") + " --out " + p(reports)).code == 0);
  CHECK(count_lines(reports) == count_lines(bench / "task2.jsonl"));
  const auto first = slurp(reports);
  REQUIRE(run("detect --ckpt " + p(uav) + " --in " + p(bench / "task2.jsonl") + " --out " + p(reports)).code == 0);
  CHECK(slurp(reports) == first);
  CHECK(run("detect --ckpt " + p(uav) + " --in " + p(bench / "task2.jsonl") + " --out " + p(reports) +
            " --threshold 1.5")
            .code == 2);
  CHECK(run("detect --ckpt " + p(uav) + " --in " + p(nogps / "test.jsonl") + " --out " + p(reports)).code == 2);

  const auto result = work() / "result.json";
  const auto ev = run("eval --world " UAVAD_WORLD " --data " + p(data) + " --ckpts " + p(uav) + " " + p(vae) +
                      " --bench " + p(bench) + " --out " + p(result));
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("uav_adnet") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(result));
  CHECK(j.at("variants").size() == 2);
  CHECK(j.at("variants").at("vae").contains("task1_acc"));
  CHECK(run("eval --world " UAVAD_WORLD " --data " + p(data) + " --ckpts " + p(uav) + " " + p(uav) + " --bench " +
            p(bench) + " --out " + p(result))
            .code == 2);

  const auto render = run("render --in " + p(data / "test.jsonl") + " --index 3");
  CHECK(render.code == 0);
  CHECK(std::count(render.out.begin(), render.out.end(), '\n') == 16);
  CHECK(run("render --in " + p(data / "test.jsonl") + " --index 999").code == 2);

  std::ofstream(work() / "trunc.json") << slurp(uav).substr(0, 100);
  CHECK(run("detect --ckpt " + p(work() / "trunc.json") + " --in " + p(bench / "task2.jsonl") + " --out " +
            p(reports))
            .code == 2);
}

TEST_CASE("gradcheck") {
  const auto r = run("gradcheck");
  CHECK(r.code == 0);
  CHECK(r.out.find("max rel err") != std::string::npos);
}
