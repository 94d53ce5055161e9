#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcam/io.hpp"
#include "pcam/params.hpp"

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PCAM_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("config file parsing") {
  pcam::SimParams sim;
  pcam::HyperParams hyper;
  TempDir tmp("pcam_cli_cfg");
  const std::string cfg = tmp.str() + "/run.cfg";
  std::ofstream(cfg) << "# overrides\n"
                     << "dt = 0.05\n"
                     << "eta_train = 2.0\n"
                     << "street_widths = 5.0,6.0,7.0\n"
                     << "ttc_init_range = 2.0,4.0\n"
                     << "gamma = 0.95\n"
                     << "L_nominal = 5.0\n";
  pcam::apply_config_file(cfg, sim, hyper);
  CHECK(sim.dt == 0.05);
  CHECK(sim.eta_train == 2.0);
  CHECK(sim.street_widths == std::vector<double>{5.0, 6.0, 7.0});
  CHECK(sim.ttc_init_min == 2.0);
  CHECK(sim.ttc_init_max == 4.0);
  CHECK(hyper.gamma == 0.95);
  CHECK(sim.l_nominal == 5.0);

  std::ofstream(cfg) << "no_such_key = 1\n";
  CHECK_THROWS_AS(pcam::apply_config_file(cfg, sim, hyper), std::invalid_argument);

  // hash tracks every value
  pcam::SimParams default_sim;
  pcam::HyperParams default_hyper;
  CHECK(pcam::config_hash(sim, hyper) != pcam::config_hash(default_sim, default_hyper));
  CHECK(pcam::config_hash(default_sim, default_hyper) ==
        pcam::config_hash(pcam::SimParams{}, pcam::HyperParams{}));
}

TEST_CASE("shortest round-trip double formatting") {
  CHECK(pcam::fmt_double(0.1) == "0.1");
  CHECK(pcam::fmt_double(0.0) == "0");
  CHECK(pcam::fmt_double(13.889) == "13.889");
  CHECK(pcam::fmt_double(2.0) == "2");
}

TEST_CASE("usage errors exit with status 1") {
  CHECK(run("train --setting X --seed 0 --alpha-ped 0") == 1);
  CHECK(run("train --seed 0") == 1);                 // missing required flags
  CHECK(run("eval --setting 1 --alpha-ped 0") == 1); // checkpoints required
  CHECK(run("bogus") == 1);
}

TEST_CASE("smoke train, eval, and replay round trip through the CLI") {
  TempDir out("pcam_cli_smoke");
  const std::string train_out = out.str() + "/run";
  CHECK(run("train --setting 1 --seed 0 --alpha-ped 0.0 --episodes 30 --out " +
            train_out) == 0);
  const std::string ckpt_dir = train_out + "/1/0/0";
  CHECK(std::filesystem::exists(ckpt_dir + "/av.ckpt"));
  CHECK(std::filesystem::exists(ckpt_dir + "/trainlog.jsonl"));
  CHECK(std::filesystem::exists(ckpt_dir + "/manifest.json"));

  // 30-record smoke log
  std::ifstream log(ckpt_dir + "/trainlog.jsonl");
  int lines = 0;
  std::string line;
  while (std::getline(log, line)) ++lines;
  CHECK(lines == 30);

  const std::string eval_out = out.str() + "/eval";
  CHECK(run("eval --setting 1 --alpha-ped 0.0 --seed 0 --episodes 40"
            " --checkpoints " + train_out + " --out " + eval_out) == 0);
  const std::string metrics = slurp(eval_out + "/metrics.csv");
  CHECK(metrics.find("setting,alpha_ped,seed,n_episodes,") == 0);

  // identical eval seeds give identical bytes
  const std::string eval_out2 = out.str() + "/eval2";
  CHECK(run("eval --setting 1 --alpha-ped 0.0 --seed 0 --episodes 40"
            " --checkpoints " + train_out + " --out " + eval_out2) == 0);
  CHECK(slurp(eval_out2 + "/metrics.csv") == metrics);

  // missing checkpoint is a runtime error, not a crash
  CHECK(run("eval --setting 2 --alpha-ped 0.0 --seed 9 --episodes 10"
            " --checkpoints " + train_out + " --out " + eval_out) == 2);

  const std::string traj = out.str() + "/traj.jsonl";
  CHECK(run("replay --setting X --ttc-init 4.5 --out " + traj) == 0);
  CHECK(std::filesystem::exists(traj));
  const std::string traj_text = slurp(traj);
  CHECK(traj_text.find("\"t\":0") != std::string::npos);
  CHECK(traj_text.find("x_av_2") != std::string::npos);

  // identical flags produce identical trajectory bytes
  const std::string traj2 = out.str() + "/traj2.jsonl";
  CHECK(run("replay --setting X --ttc-init 4.5 --out " + traj2) == 0);
  CHECK(slurp(traj2) == traj_text);

  // invalid scenario spec rejected
  CHECK(run("replay --setting X --ttc-init 0 --out " + traj2) == 1);
}

TEST_CASE("setting X eval via CLI is collision free at zero noise") {
  TempDir out("pcam_cli_sx");
  CHECK(run("eval --setting X --alpha-ped 0.0 --alpha-av 0.0 --episodes 300 --out " +
            out.str()) == 0);
  const std::string metrics = slurp(out.str() + "/metrics.csv");
  CHECK(metrics.find("X,0,0,300,0,") != std::string::npos);
}
