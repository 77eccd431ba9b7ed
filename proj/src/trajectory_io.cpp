#include "stocs/trajectory_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stocs/report.hpp"
#include "stocs/svg.hpp"

namespace stocs {

std::string format_trajectory_csv(const Scenario& scn, const ManipulationMode* mode,
                                  const StocsResult& result) {
  std::ostringstream o;
  const int P = result.index_set.size();
  const int nu = mode ? mode->nu() : 0;
  o << "# trajectory v1\n";
  o << "# scenario " << (scn.name.empty() ? "unnamed" : scn.name) << '\n';
  o << "# mode " << (mode ? mode->name : "none") << '\n';
  o << "# status " << to_string(result.status) << '\n';
  o << "# dt " << format_double(result.dt) << '\n';
  o << "# points " << P << '\n';
  for (int j = 0; j < P; ++j) {
    const IndexPoint& p = result.index_set.points[static_cast<size_t>(j)];
    o << "# point " << j << ' ' << p.id << ' ' << format_double(p.local.x()) << ' '
      << format_double(p.local.y()) << '\n';
  }
  o << "# columns t,x,y,theta,theta_unwrapped,vx,vy,omega";
  for (int i = 0; i < nu; ++i) o << ",u" << i;
  for (int j = 0; j < P; ++j) o << ",zn" << j << ",zp" << j << ",zm" << j << ",gamma" << j;
  o << '\n';
  for (size_t t = 0; t < result.trajectory.size(); ++t) {
    const TrajectoryState& s = result.trajectory[t];
    o << t << ',' << format_double(s.q.x) << ',' << format_double(s.q.y) << ','
      << format_double(s.q.theta) << ',' << format_double(s.theta_unwrapped) << ','
      << format_double(s.qdot.vx) << ',' << format_double(s.qdot.vy) << ','
      << format_double(s.qdot.omega);
    for (int i = 0; i < nu; ++i)
      o << ',' << format_double(i < s.u.size() ? s.u[i] : 0.0);
    for (int j = 0; j < P; ++j) {
      ContactForce f;
      double ga = 0.0;
      if (j < static_cast<int>(s.forces.size())) f = s.forces[static_cast<size_t>(j)];
      if (j < static_cast<int>(s.slack.size())) ga = s.slack[static_cast<size_t>(j)];
      o << ',' << format_double(f.zn) << ',' << format_double(f.zp) << ','
        << format_double(f.zm) << ',' << format_double(ga);
    }
    o << '\n';
  }
  return o.str();
}

void write_trajectory_csv(const std::string& path, const Scenario& scn,
                          const ManipulationMode* mode, const StocsResult& result) {
  write_text_file(path, format_trajectory_csv(scn, mode, result));
}

namespace {

StocsStatus status_from(const std::string& s) {
  if (s == "Converged") return StocsStatus::Converged;
  if (s == "Infeasible") return StocsStatus::Infeasible;
  if (s == "Aborted") return StocsStatus::Aborted;
  return StocsStatus::NotConverged;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

LoadedTrajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file '" + path + "'");
  LoadedTrajectory out;
  std::string line;
  int nu = 0;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string key;
      h >> key;
      if (key == "scenario") {
        h >> out.scenario_name;
      } else if (key == "mode") {
        h >> out.mode_name;
        if (out.mode_name == "none") out.mode_name.clear();
      } else if (key == "status") {
        std::string s;
        h >> s;
        out.status = status_from(s);
      } else if (key == "dt") {
        h >> out.dt;
      } else if (key == "point") {
        int j = 0;
        IndexPoint p;
        double lx = 0.0, ly = 0.0;
        h >> j >> p.id >> lx >> ly;
        p.local = Vec2(lx, ly);
        out.index_set.points.push_back(p);
      } else if (key == "columns") {
        std::string cols;
        h >> cols;
        nu = 0;
        for (const std::string& c : split_csv(cols))
          if (c.size() >= 2 && c[0] == 'u') ++nu;
        have_columns = true;
      }
      continue;
    }
    if (!have_columns) throw std::runtime_error("trajectory file missing '# columns' header");
    const std::vector<std::string> f = split_csv(line);
    const int P = out.index_set.size();
    const size_t expect = 8 + static_cast<size_t>(nu) + 4 * static_cast<size_t>(P);
    if (f.size() != expect)
      throw std::runtime_error("trajectory row has " + std::to_string(f.size()) +
                               " fields, expected " + std::to_string(expect));
    TrajectoryState s;
    s.q = Pose2(std::stod(f[1]), std::stod(f[2]), std::stod(f[3]));
    s.theta_unwrapped = std::stod(f[4]);
    s.qdot = Twist2{std::stod(f[5]), std::stod(f[6]), std::stod(f[7])};
    s.u = Eigen::VectorXd::Zero(nu);
    for (int i = 0; i < nu; ++i) s.u[i] = std::stod(f[static_cast<size_t>(8 + i)]);
    s.forces.resize(static_cast<size_t>(P));
    s.slack.resize(static_cast<size_t>(P));
    for (int j = 0; j < P; ++j) {
      const size_t base = 8 + static_cast<size_t>(nu) + 4 * static_cast<size_t>(j);
      s.forces[static_cast<size_t>(j)] =
          ContactForce{std::stod(f[base]), std::stod(f[base + 1]), std::stod(f[base + 2])};
      s.slack[static_cast<size_t>(j)] = std::stod(f[base + 3]);
    }
    out.states.push_back(std::move(s));
  }
  return out;
}

}  // namespace stocs
