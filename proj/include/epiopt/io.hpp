#pragma once

// Deterministic artifact IO: CSV/JSON writers, theta checkpoints and the flat
// key-value config format. All floating-point text goes through
// std::to_chars (shortest round-trip, locale-free); every file is written to
// a temporary name and renamed into place. Repeating a run with the same
// configuration and seed must reproduce every byte.

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "epiopt/adjoint.hpp"
#include "epiopt/control_net.hpp"
#include "epiopt/costate.hpp"
#include "epiopt/errors.hpp"
#include "epiopt/experiment.hpp"
#include "epiopt/verify.hpp"

namespace epiopt {

// Shortest round-trip decimal form of a double.
inline std::string fmt_double(double v) {
  if (v == 0.0) return "0";  // normalize the sign of zero
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// Write content to path atomically (temp file in the same directory, then
// rename). Creates parent directories as needed.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw io_error("short write: " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw io_error("rename failed: " + path.string() + " (" + ec.message() + ")");
}

// --- CSV ---------------------------------------------------------------

inline std::string csv_trajectory(const trajectory& traj) {
  std::string out = "t,S,I,R,u\n";
  for (std::size_t k = 0; k < traj.nodes(); ++k) {
    out += fmt_double(traj.t[k]);
    out += ',';
    out += fmt_double(traj.x[k].s);
    out += ',';
    out += fmt_double(traj.x[k].i);
    out += ',';
    out += fmt_double(traj.x[k].r);
    out += ',';
    out += fmt_double(traj.u[k]);
    out += '\n';
  }
  return out;
}

inline std::string csv_control(const trajectory& traj, const std::vector<double>& du) {
  std::string out = "t,u,du_dt\n";
  for (std::size_t k = 0; k < traj.nodes(); ++k) {
    out += fmt_double(traj.t[k]);
    out += ',';
    out += fmt_double(traj.u[k]);
    out += ',';
    out += fmt_double(k < du.size() ? du[k] : 0.0);
    out += '\n';
  }
  return out;
}

inline std::string csv_costate(const costate_solution& cs) {
  std::string out = "t,p1,p2,p3,q\n";
  for (std::size_t k = 0; k < cs.t.size(); ++k) {
    out += fmt_double(cs.t[k]);
    out += ',';
    out += fmt_double(cs.p1[k]);
    out += ',';
    out += fmt_double(cs.p2[k]);
    out += ',';
    out += fmt_double(cs.p3[k]);
    out += ',';
    out += fmt_double(cs.q[k]);
    out += '\n';
  }
  return out;
}

inline std::string csv_adjoint_diag(const trajectory& traj, const adjoint_profile& ap) {
  std::string out = "t,S,I,R,u,P_s,P_i,P_r,P_z,a_norm\n";
  for (std::size_t k = 0; k < traj.nodes() && k < ap.t.size(); ++k) {
    out += fmt_double(traj.t[k]);
    out += ',';
    out += fmt_double(traj.x[k].s);
    out += ',';
    out += fmt_double(traj.x[k].i);
    out += ',';
    out += fmt_double(traj.x[k].r);
    out += ',';
    out += fmt_double(traj.u[k]);
    for (int j = 0; j < 4; ++j) {
      out += ',';
      out += fmt_double(ap.p[k][j]);
    }
    out += ',';
    out += fmt_double(ap.a_norm[k]);
    out += '\n';
  }
  return out;
}

inline std::string csv_day_table(const day_table& tab) {
  std::string out = "day,infected,cumulative\n";
  for (std::size_t k = 0; k < tab.day.size(); ++k) {
    out += std::to_string(tab.day[k]);
    out += ',';
    out += std::to_string(tab.infected[k]);
    out += ',';
    out += std::to_string(tab.cumulative[k]);
    out += '\n';
  }
  return out;
}

// Cost-comparison curve over u in [0, 0.99].
inline std::string csv_cost_curve(double lambda = 1.0, int points = 100) {
  const cost_spec s1 = cost_spec::make(cost_kind::c1, lambda);
  const cost_spec s2 = cost_spec::make(cost_kind::c2, lambda);
  const cost_spec s3 = cost_spec::make(cost_kind::c3, lambda);
  const cost_spec s4 = cost_spec::make(cost_kind::c4, lambda);
  std::string out = "u,c1,c2,c3,c4\n";
  for (int k = 0; k < points; ++k) {
    // Ratio first so the final sample is exactly 0.99.
    const double u = 0.99 * (static_cast<double>(k) / (points - 1));
    out += fmt_double(u);
    out += ',';
    out += fmt_double(s1.value(u));
    out += ',';
    out += fmt_double(s2.value(u));
    out += ',';
    out += fmt_double(s3.value(u));
    out += ',';
    out += fmt_double(s4.value(u));
    out += '\n';
  }
  return out;
}

// --- theta checkpoints ---------------------------------------------------

// Binary little-endian doubles plus a text side file with the architecture.
inline void save_theta(const std::filesystem::path& base, const control_net& net,
                       std::uint64_t seed) {
  std::string blob(sizeof(double) * kNetParams, '\0');
  std::memcpy(blob.data(), net.theta.data(), blob.size());
  atomic_write(base.string() + ".bin", blob);
  std::string meta;
  meta += "format=theta-f64le\n";
  meta += "layers=1,10,10,10,10,10,1\n";
  meta += "params=" + std::to_string(kNetParams) + "\n";
  meta += "seed=" + std::to_string(seed) + "\n";
  meta += "time_scale=" + fmt_double(net.time_scale) + "\n";
  atomic_write(base.string() + ".meta", meta);
}

inline control_net load_theta(const std::filesystem::path& base) {
  std::ifstream in(base.string() + ".bin", std::ios::binary);
  if (!in) throw io_error("cannot open theta file: " + base.string() + ".bin");
  control_net net;
  in.read(reinterpret_cast<char*>(net.theta.data()), sizeof(double) * kNetParams);
  if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * kNetParams))
    throw io_error("theta file truncated: " + base.string() + ".bin");
  net.time_scale = 1.0;
  std::ifstream meta(base.string() + ".meta");
  std::string line;
  while (meta && std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    if (line.substr(0, eq) == "time_scale")
      net.time_scale = std::stod(line.substr(eq + 1));
  }
  return net;
}

// --- config ----------------------------------------------------------------

// Flat key=value configuration; keys are the experiment_config field names.
inline void apply_config_entry(experiment_config& cfg, const std::string& key,
                               const std::string& value) {
  auto as_double = [&](const std::string& v) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw config_error("bad numeric value for " + key + ": " + v);
    }
  };
  auto split_list = [](const std::string& v) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : v) {
      if (c == ',') {
        if (!cur.empty()) parts.push_back(cur);
        cur.clear();
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        cur += c;
      }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
  };

  if (key == "population") cfg.population = as_double(value);
  else if (key == "initial_infected") cfg.initial_infected = as_double(value);
  else if (key == "initial_removed") cfg.initial_removed = as_double(value);
  else if (key == "beta") cfg.beta = as_double(value);
  else if (key == "gamma") cfg.gamma = as_double(value);
  else if (key == "horizon") cfg.horizon = as_double(value);
  else if (key == "steps") cfg.steps = static_cast<int>(as_double(value));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_double(value));
  else if (key == "iters") cfg.iters = static_cast<int>(as_double(value));
  else if (key == "learning_rate") cfg.learning_rate = as_double(value);
  else if (key == "time_scale") cfg.time_scale = as_double(value);
  else if (key == "mode") cfg.mode = objective_mode_from_string(value);
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "lambdas") {
    cfg.lambdas.clear();
    for (const std::string& p : split_list(value)) cfg.lambdas.push_back(as_double(p));
  } else if (key == "costs") {
    cfg.costs.clear();
    for (const std::string& p : split_list(value))
      cfg.costs.push_back(cost_kind_from_string(p));
  } else {
    throw config_error("unknown config key: " + key);
  }
}

inline experiment_config parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config: " + path.string());
  experiment_config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\n");
      const auto e = s.find_last_not_of(" \t\r\n");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error(path.string() + ":" + std::to_string(lineno) +
                         ": expected key=value");
    apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

// --- JSON reports ------------------------------------------------------

inline nlohmann::json json_day_table(const day_table& tab) {
  return {{"day", tab.day}, {"infected", tab.infected}, {"cumulative", tab.cumulative}};
}

inline nlohmann::json json_theorem(const theorem_report& rep) {
  return {{"tau", rep.tau},
          {"tau_p1", rep.tau_p1},
          {"tau_switch", rep.tau_switch},
          {"tau_est", rep.tau_est},
          {"tau_structure", rep.tau_structure},
          {"structure_ok", rep.structure_ok},
          {"max_u", rep.max_u},
          {"min_u", rep.min_u},
          {"hypotheses_met", rep.hypotheses_met},
          {"sign_p1_negative", rep.sign_p1_negative},
          {"sign_switch_negative", rep.sign_switch_negative},
          {"sign_est_negative", rep.sign_est_negative},
          {"kkt_max_abs", rep.kkt_max_abs},
          {"kkt_max_ratio", rep.kkt_max_ratio},
          {"uprime_max_abs_dev", rep.uprime_max_abs_dev},
          {"uprime_max_rel_dev", rep.uprime_max_rel_dev},
          {"uprime_sign_agreement", rep.uprime_sign_agreement},
          {"costate_identity_dev", rep.costate_identity_dev},
          {"simplex_max_sum_dev", rep.simplex.max_sum_dev},
          {"simplex_min_component", rep.simplex.min_component},
          {"closed_form_dev_s", rep.closed_form.max_dev_s},
          {"closed_form_dev_r", rep.closed_form.max_dev_r}};
}

// Training outcome without wall-clock timing (reports must be bit-stable).
inline nlohmann::json json_cell(const cell_result& cell) {
  nlohmann::json j;
  j["cost"] = to_string(cell.kind);
  j["lambda"] = cell.lambda;
  if (cell.failed) {
    j["failed"] = true;
    j["error"] = cell.error;
    return j;
  }
  j["failed"] = false;
  j["objective_initial"] = cell.report.initial_objective;
  j["objective_final"] = cell.report.final_objective;
  j["objective_best"] = cell.report.best_objective;
  j["accepted_steps"] = cell.report.accepted_steps;
  j["backtracks"] = cell.report.backtracks;
  j["cost_integral"] = cell.cost_integral;
  j["objective_history"] = cell.report.objective_history;
  j["table"] = json_day_table(cell.table);
  j["theorem"] = json_theorem(cell.theorem);
  return j;
}

}  // namespace epiopt
