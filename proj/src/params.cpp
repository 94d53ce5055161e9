#include "pcam/params.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pcam/rng.hpp"

namespace pcam {

std::string fmt_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("fmt_double: to_chars failed");
  return std::string(buf, ptr);
}

namespace {

double parse_double(const std::string& text) {
  std::size_t pos = 0;
  const double v = std::stod(text, &pos);
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) throw std::invalid_argument("trailing characters in number: " + text);
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_line(const std::string& key, const std::string& value,
                       SimParams& sim, HyperParams& hyper) {
  if (key == "dt") sim.dt = parse_double(value);
  else if (key == "timeout") sim.timeout = parse_double(value);
  else if (key == "zeta_av") sim.zeta_av = parse_double(value);
  else if (key == "zeta_ped") sim.zeta_ped = parse_double(value);
  else if (key == "eta_eval") sim.eta_eval = parse_double(value);
  else if (key == "eta_train") sim.eta_train = parse_double(value);
  else if (key == "v_limit") sim.v_limit = parse_double(value);
  else if (key == "L_nominal" || key == "l_nominal") sim.l_nominal = parse_double(value);
  else if (key == "street_widths") sim.street_widths = parse_list(value);
  else if (key == "walk_speeds") sim.walk_speeds = parse_list(value);
  else if (key == "ttc_init_range") {
    auto r = parse_list(value);
    if (r.size() != 2) throw std::invalid_argument("ttc_init_range expects lo,hi");
    sim.ttc_init_min = r[0];
    sim.ttc_init_max = r[1];
  } else if (key == "v_init_range") {
    auto r = parse_list(value);
    if (r.size() != 2) throw std::invalid_argument("v_init_range expects lo,hi");
    sim.v_init_min = r[0];
    sim.v_init_max = r[1];
  } else if (key == "gamma") hyper.gamma = parse_double(value);
  else if (key == "n_step") hyper.n_step = static_cast<int>(parse_double(value));
  else if (key == "batch_size") hyper.batch_size = static_cast<int>(parse_double(value));
  else if (key == "lr") hyper.lr = parse_double(value);
  else if (key == "hidden") hyper.hidden = static_cast<int>(parse_double(value));
  else if (key == "target_sync") hyper.target_sync = static_cast<int>(parse_double(value));
  else if (key == "replay_capacity") hyper.replay_capacity = static_cast<int>(parse_double(value));
  else if (key == "eps_start") hyper.eps_start = parse_double(value);
  else if (key == "eps_end") hyper.eps_end = parse_double(value);
  else if (key == "random_episodes") hyper.random_episodes = static_cast<int>(parse_double(value));
  else if (key == "exploration_episodes") hyper.exploration_episodes = static_cast<int>(parse_double(value));
  else if (key == "grad_clip") hyper.grad_clip = parse_double(value);
  else if (key == "huber_delta") hyper.huber_delta = parse_double(value);
  else if (key == "av_explore_probs") {
    auto p = parse_list(value);
    if (p.size() != hyper.av_explore_probs.size())
      throw std::invalid_argument("av_explore_probs expects 6 values");
    for (std::size_t i = 0; i < p.size(); ++i) hyper.av_explore_probs[i] = p[i];
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

void apply_config_file(const std::string& path, SimParams& sim, HyperParams& hyper) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    apply_config_line(key, value, sim, hyper);
  }
}

std::string canonical_config(const SimParams& sim, const HyperParams& hyper) {
  std::ostringstream out;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += fmt_double(v[i]);
    }
    return s;
  };
  out << "dt=" << fmt_double(sim.dt) << '\n'
      << "timeout=" << fmt_double(sim.timeout) << '\n'
      << "zeta_av=" << fmt_double(sim.zeta_av) << '\n'
      << "zeta_ped=" << fmt_double(sim.zeta_ped) << '\n'
      << "eta_eval=" << fmt_double(sim.eta_eval) << '\n'
      << "eta_train=" << fmt_double(sim.eta_train) << '\n'
      << "v_limit=" << fmt_double(sim.v_limit) << '\n'
      << "L_nominal=" << fmt_double(sim.l_nominal) << '\n'
      << "street_widths=" << list(sim.street_widths) << '\n'
      << "walk_speeds=" << list(sim.walk_speeds) << '\n'
      << "ttc_init_range=" << fmt_double(sim.ttc_init_min) << ',' << fmt_double(sim.ttc_init_max) << '\n'
      << "v_init_range=" << fmt_double(sim.v_init_min) << ',' << fmt_double(sim.v_init_max) << '\n'
      << "gamma=" << fmt_double(hyper.gamma) << '\n'
      << "n_step=" << hyper.n_step << '\n'
      << "batch_size=" << hyper.batch_size << '\n'
      << "lr=" << fmt_double(hyper.lr) << '\n'
      << "hidden=" << hyper.hidden << '\n'
      << "target_sync=" << hyper.target_sync << '\n'
      << "replay_capacity=" << hyper.replay_capacity << '\n'
      << "eps_start=" << fmt_double(hyper.eps_start) << '\n'
      << "eps_end=" << fmt_double(hyper.eps_end) << '\n'
      << "random_episodes=" << hyper.random_episodes << '\n'
      << "exploration_episodes=" << hyper.exploration_episodes << '\n'
      << "grad_clip=" << fmt_double(hyper.grad_clip) << '\n'
      << "huber_delta=" << fmt_double(hyper.huber_delta) << '\n'
      << "av_explore_probs=";
  for (std::size_t i = 0; i < hyper.av_explore_probs.size(); ++i) {
    if (i) out << ',';
    out << fmt_double(hyper.av_explore_probs[i]);
  }
  out << '\n';
  return out.str();
}

std::uint64_t config_hash(const SimParams& sim, const HyperParams& hyper) {
  const std::string text = canonical_config(sim, hyper);
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace pcam
