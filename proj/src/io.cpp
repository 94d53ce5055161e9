#include "pcam/io.hpp"

#include <filesystem>
#include <fstream>

namespace pcam {

nlohmann::json config_json(const SimParams& sim, const HyperParams& hyper) {
  nlohmann::json j;
  j["dt"] = sim.dt;
  j["timeout"] = sim.timeout;
  j["zeta_av"] = sim.zeta_av;
  j["zeta_ped"] = sim.zeta_ped;
  j["eta_eval"] = sim.eta_eval;
  j["eta_train"] = sim.eta_train;
  j["v_limit"] = sim.v_limit;
  j["L_nominal"] = sim.l_nominal;
  j["street_widths"] = sim.street_widths;
  j["walk_speeds"] = sim.walk_speeds;
  j["ttc_init_range"] = {sim.ttc_init_min, sim.ttc_init_max};
  j["v_init_range"] = {sim.v_init_min, sim.v_init_max};
  j["gamma"] = hyper.gamma;
  j["n_step"] = hyper.n_step;
  j["batch_size"] = hyper.batch_size;
  j["lr"] = hyper.lr;
  j["hidden"] = hyper.hidden;
  j["target_sync"] = hyper.target_sync;
  j["replay_capacity"] = hyper.replay_capacity;
  j["eps_start"] = hyper.eps_start;
  j["eps_end"] = hyper.eps_end;
  j["random_episodes"] = hyper.random_episodes;
  j["exploration_episodes"] = hyper.exploration_episodes;
  j["grad_clip"] = hyper.grad_clip;
  j["huber_delta"] = hyper.huber_delta;
  j["av_explore_probs"] = hyper.av_explore_probs;
  j["config_hash"] = config_hash(sim, hyper);
  return j;
}

void write_manifest(const std::string& dir, const SimParams& sim,
                    const HyperParams& hyper, const nlohmann::json& run) {
  ensure_dir(dir);
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = config_json(sim, hyper);
  j["run"] = run;
  std::ofstream out(dir + "/manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << j.dump(2) << '\n';
}

TrajectoryWriter::TrajectoryWriter(const std::string& path)
    : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write trajectory: " + path);
}

void TrajectoryWriter::write(const StepRecord& rec) {
  nlohmann::json j;
  j["t"] = rec.t;
  j["x_av_1"] = rec.world.x_av[0];
  j["x_av_2"] = rec.world.x_av[1];
  j["v_av"] = rec.world.v_av;
  j["a_av"] = rec.world.a_av;
  j["x_ped_1"] = rec.world.x_ped[0];
  j["x_ped_2"] = rec.world.x_ped[1];
  j["v_ped"] = rec.world.v_ped;
  if (rec.u_av)
    j["u_av"] = *rec.u_av;
  else
    j["u_av"] = nullptr;
  if (rec.u_ped)
    j["u_ped"] = *rec.u_ped == PedAction::kWalk ? "walk" : "wait";
  else
    j["u_ped"] = nullptr;
  j["ttc"] = rec.ttc;
  j["collided"] = rec.collided;
  out_ << j.dump() << '\n';
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

}  // namespace pcam
