#include "stocs/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stocs/report.hpp"

namespace stocs {

namespace {

struct Line {
  int no = 0;
  std::vector<std::string> tok;
};

std::vector<Line> lex(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) {
    ++no;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    Line l;
    l.no = no;
    std::istringstream ls(raw);
    std::string t;
    while (ls >> t) l.tok.push_back(t);
    if (!l.tok.empty()) out.push_back(std::move(l));
  }
  return out;
}

double to_num(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0' || end == s.c_str())
    throw ScenarioError(line, "expected a number, got '" + s + "'");
  return v;
}

class Cursor {
 public:
  explicit Cursor(std::vector<Line> lines) : lines_(std::move(lines)) {}

  bool done() const { return i_ >= lines_.size(); }
  const Line& peek() const { return lines_[i_]; }
  const Line& take() { return lines_[i_++]; }
  int last_line() const { return lines_.empty() ? 0 : lines_.back().no; }

 private:
  std::vector<Line> lines_;
  size_t i_ = 0;
};

void need_args(const Line& l, size_t count, const char* what) {
  if (l.tok.size() != count + 1)
    throw ScenarioError(l.no, std::string(what) + ": expected " + std::to_string(count) +
                                  " value(s), got " + std::to_string(l.tok.size() - 1));
}

double signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    a += cross2(p, q);
  }
  return 0.5 * a;
}

void parse_object(Cursor& c, ObjectModel& obj, bool& have_mass) {
  while (!c.done()) {
    const Line& l = c.take();
    const std::string& k = l.tok[0];
    if (k == "end") return;
    if (k == "mass") {
      need_args(l, 1, "object.mass");
      obj.mass = to_num(l.tok[1], l.no);
      if (!(obj.mass > 0.0)) throw ScenarioError(l.no, "physics.mass: must be positive");
      have_mass = true;
    } else if (k == "mu_env") {
      need_args(l, 1, "object.mu_env");
      obj.mu_env = to_num(l.tok[1], l.no);
      if (obj.mu_env < 0.0) throw ScenarioError(l.no, "physics.mu_env: must be nonnegative");
    } else if (k == "mu_mnp") {
      need_args(l, 1, "object.mu_mnp");
      obj.mu_mnp = to_num(l.tok[1], l.no);
      if (obj.mu_mnp < 0.0) throw ScenarioError(l.no, "physics.mu_mnp: must be nonnegative");
    } else if (k == "com") {
      need_args(l, 2, "object.com");
      obj.com = Vec2(to_num(l.tok[1], l.no), to_num(l.tok[2], l.no));
    } else if (k == "points") {
      need_args(l, 1, "object.points");
      const int n = static_cast<int>(to_num(l.tok[1], l.no));
      if (n < 3) throw ScenarioError(l.no, "object.points: need at least 3 boundary points");
      obj.boundary_points.clear();
      obj.boundary_points.reserve(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        if (c.done()) throw ScenarioError(l.no, "object.points: fewer coordinate lines than declared");
        const Line& pl = c.take();
        if (pl.tok.size() != 2)
          throw ScenarioError(pl.no, "object.points: expected 'x y' per line");
        obj.boundary_points.emplace_back(to_num(pl.tok[0], pl.no), to_num(pl.tok[1], pl.no));
      }
      if (signed_area(obj.boundary_points) <= 0.0)
        throw ScenarioError(l.no, "object.points: boundary must be counter-clockwise");
    } else {
      throw ScenarioError(l.no, "object: unknown key '" + k + "'");
    }
  }
  throw ScenarioError(c.last_line(), "object: missing 'end'");
}

void parse_environment(Cursor& c, EnvironmentModel& env) {
  while (!c.done()) {
    const Line& l = c.take();
    const std::string& k = l.tok[0];
    if (k == "end") return;
    if (k == "ground_height") {
      need_args(l, 1, "environment.ground_height");
      env.ground_height = to_num(l.tok[1], l.no);
    } else if (k == "region") {
      need_args(l, 1, "environment.region");
      const int n = static_cast<int>(to_num(l.tok[1], l.no));
      if (n < 3) throw ScenarioError(l.no, "environment.region: need at least 3 vertices");
      ConvexRegion r;
      r.verts.reserve(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        if (c.done())
          throw ScenarioError(l.no, "environment.region: fewer vertex lines than declared");
        const Line& pl = c.take();
        if (pl.tok.size() != 2)
          throw ScenarioError(pl.no, "environment.region: expected 'x y' per line");
        r.verts.emplace_back(to_num(pl.tok[0], pl.no), to_num(pl.tok[1], pl.no));
      }
      if (signed_area(r.verts) <= 0.0)
        throw ScenarioError(l.no, "environment.region: vertices must be counter-clockwise");
      for (size_t i = 0; i < r.verts.size(); ++i) {
        const Vec2 e0 = r.verts[(i + 1) % r.verts.size()] - r.verts[i];
        const Vec2 e1 = r.verts[(i + 2) % r.verts.size()] - r.verts[(i + 1) % r.verts.size()];
        if (cross2(e0, e1) < -1e-12)
          throw ScenarioError(l.no, "environment.region: vertices must be convex");
      }
      r.finalize();
      env.regions.push_back(std::move(r));
    } else {
      throw ScenarioError(l.no, "environment: unknown key '" + k + "'");
    }
  }
  throw ScenarioError(c.last_line(), "environment: missing 'end'");
}

void parse_mode(Cursor& c, const Line& head, std::vector<ManipulationMode>& modes) {
  need_args(head, 2, "mode");
  ManipulationMode m;
  m.name = head.tok[1];
  const std::string& kind = head.tok[2];
  if (kind == "slide") {
    m.kind = ModeKind::OnePointSlide;
  } else if (kind == "grasp") {
    m.kind = ModeKind::FixedPoints;
  } else {
    throw ScenarioError(head.no, "mode.kind: expected 'slide' or 'grasp', got '" + kind + "'");
  }
  for (const ManipulationMode& other : modes) {
    if (other.name == m.name)
      throw ScenarioError(head.no, "mode.name: duplicate '" + m.name + "'");
  }
  bool have_face = false;
  while (!c.done()) {
    const Line& l = c.take();
    const std::string& k = l.tok[0];
    if (k == "end") {
      if (m.kind == ModeKind::OnePointSlide && !have_face)
        throw ScenarioError(head.no, "mode.face: required for slide modes");
      if (m.kind == ModeKind::FixedPoints && m.points.empty())
        throw ScenarioError(head.no, "mode.points: need at least one contact point");
      modes.push_back(std::move(m));
      return;
    }
    if (k == "face") {
      need_args(l, 4, "mode.face");
      m.face_a = Vec2(to_num(l.tok[1], l.no), to_num(l.tok[2], l.no));
      m.face_b = Vec2(to_num(l.tok[3], l.no), to_num(l.tok[4], l.no));
      if ((m.face_b - m.face_a).norm() <= 0.0)
        throw ScenarioError(l.no, "mode.face: zero-length face");
      have_face = true;
    } else if (k == "point") {
      need_args(l, 2, "mode.point");
      m.points.emplace_back(to_num(l.tok[1], l.no), to_num(l.tok[2], l.no));
    } else if (k == "angles") {
      if (l.tok.size() < 2) throw ScenarioError(l.no, "mode.angles: expected at least one value");
      for (size_t i = 1; i < l.tok.size(); ++i)
        m.admissible_angles.push_back(to_num(l.tok[i], l.no));
    } else {
      throw ScenarioError(l.no, "mode: unknown key '" + k + "'");
    }
  }
  throw ScenarioError(c.last_line(), "mode: missing 'end'");
}

void parse_bounds(Cursor& c, ProblemBounds& b) {
  while (!c.done()) {
    const Line& l = c.take();
    const std::string& k = l.tok[0];
    if (k == "end") {
      if (!(b.ws_hi_x > b.ws_lo_x) || !(b.ws_hi_y > b.ws_lo_y))
        throw ScenarioError(l.no, "bounds.workspace: empty box");
      return;
    }
    if (k == "workspace") {
      need_args(l, 4, "bounds.workspace");
      b.ws_lo_x = to_num(l.tok[1], l.no);
      b.ws_lo_y = to_num(l.tok[2], l.no);
      b.ws_hi_x = to_num(l.tok[3], l.no);
      b.ws_hi_y = to_num(l.tok[4], l.no);
    } else if (k == "vel_lin") {
      need_args(l, 1, "bounds.vel_lin");
      b.vel_lin = to_num(l.tok[1], l.no);
      if (!(b.vel_lin > 0.0)) throw ScenarioError(l.no, "bounds.vel_lin: must be positive");
    } else if (k == "vel_ang") {
      need_args(l, 1, "bounds.vel_ang");
      b.vel_ang = to_num(l.tok[1], l.no);
      if (!(b.vel_ang > 0.0)) throw ScenarioError(l.no, "bounds.vel_ang: must be positive");
    } else if (k == "force_max") {
      need_args(l, 1, "bounds.force_max");
      b.force_max = to_num(l.tok[1], l.no);
      if (!(b.force_max > 0.0)) throw ScenarioError(l.no, "bounds.force_max: must be positive");
    } else if (k == "slide_rate") {
      need_args(l, 1, "bounds.slide_rate");
      b.slide_rate = to_num(l.tok[1], l.no);
      if (!(b.slide_rate > 0.0)) throw ScenarioError(l.no, "bounds.slide_rate: must be positive");
    } else {
      throw ScenarioError(l.no, "bounds: unknown key '" + k + "'");
    }
  }
  throw ScenarioError(c.last_line(), "bounds: missing 'end'");
}

}  // namespace

const ManipulationMode* Scenario::find_mode(const std::string& mode_name) const {
  for (const ManipulationMode& m : modes)
    if (m.name == mode_name) return &m;
  return nullptr;
}

Scenario parse_scenario(const std::string& text) {
  Cursor c(lex(text));
  Scenario s;
  bool have_mass = false, have_object = false, have_env = false;
  bool have_init = false, have_goal = false;
  while (!c.done()) {
    const Line l = c.take();
    const std::string& k = l.tok[0];
    if (k == "scenario") {
      need_args(l, 1, "scenario");
      s.name = l.tok[1];
    } else if (k == "gravity") {
      need_args(l, 1, "gravity");
      s.gravity = to_num(l.tok[1], l.no);
      if (!(s.gravity > 0.0)) throw ScenarioError(l.no, "physics.gravity: must be positive");
    } else if (k == "object") {
      parse_object(c, s.object, have_mass);
      have_object = true;
    } else if (k == "environment") {
      parse_environment(c, s.environment);
      have_env = true;
    } else if (k == "mode") {
      parse_mode(c, l, s.modes);
    } else if (k == "q_init") {
      need_args(l, 3, "q_init");
      s.q_init = Pose2(to_num(l.tok[1], l.no), to_num(l.tok[2], l.no), to_num(l.tok[3], l.no));
      have_init = true;
    } else if (k == "q_goal") {
      need_args(l, 3, "q_goal");
      s.q_goal = Pose2(to_num(l.tok[1], l.no), to_num(l.tok[2], l.no), to_num(l.tok[3], l.no));
      have_goal = true;
    } else if (k == "bounds") {
      parse_bounds(c, s.bounds);
    } else {
      throw ScenarioError(l.no, "unknown directive '" + k + "'");
    }
  }
  if (!have_object || s.object.boundary_points.size() < 3)
    throw ScenarioError(0, "object.points: need at least 3 boundary points");
  if (!have_mass) throw ScenarioError(0, "physics.mass: missing");
  if (!have_env || s.environment.regions.empty())
    throw ScenarioError(0, "environment.regions: need at least one region");
  if (!have_init) throw ScenarioError(0, "scenario.q_init: missing");
  if (!have_goal) throw ScenarioError(0, "scenario.q_goal: missing");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(0, "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream o;
  const auto num = [](double v) { return format_double(v); };
  o << "scenario " << (s.name.empty() ? "unnamed" : s.name) << '\n';
  o << "gravity " << num(s.gravity) << '\n';
  o << '\n';
  o << "object\n";
  o << "  mass " << num(s.object.mass) << '\n';
  o << "  mu_env " << num(s.object.mu_env) << '\n';
  o << "  mu_mnp " << num(s.object.mu_mnp) << '\n';
  o << "  com " << num(s.object.com.x()) << ' ' << num(s.object.com.y()) << '\n';
  o << "  points " << s.object.boundary_points.size() << '\n';
  for (const Vec2& p : s.object.boundary_points)
    o << "  " << num(p.x()) << ' ' << num(p.y()) << '\n';
  o << "end\n";
  o << '\n';
  o << "environment\n";
  o << "  ground_height " << num(s.environment.ground_height) << '\n';
  for (const ConvexRegion& r : s.environment.regions) {
    o << "  region " << r.verts.size() << '\n';
    for (const Vec2& p : r.verts) o << "  " << num(p.x()) << ' ' << num(p.y()) << '\n';
  }
  o << "end\n";
  for (const ManipulationMode& m : s.modes) {
    o << '\n';
    o << "mode " << m.name << ' ' << (m.kind == ModeKind::OnePointSlide ? "slide" : "grasp")
      << '\n';
    if (m.kind == ModeKind::OnePointSlide) {
      o << "  face " << num(m.face_a.x()) << ' ' << num(m.face_a.y()) << ' ' << num(m.face_b.x())
        << ' ' << num(m.face_b.y()) << '\n';
    } else {
      for (const Vec2& p : m.points) o << "  point " << num(p.x()) << ' ' << num(p.y()) << '\n';
    }
    if (!m.admissible_angles.empty()) {
      o << "  angles";
      for (double a : m.admissible_angles) o << ' ' << num(a);
      o << '\n';
    }
    o << "end\n";
  }
  o << '\n';
  o << "q_init " << num(s.q_init.x) << ' ' << num(s.q_init.y) << ' ' << num(s.q_init.theta)
    << '\n';
  o << "q_goal " << num(s.q_goal.x) << ' ' << num(s.q_goal.y) << ' ' << num(s.q_goal.theta)
    << '\n';
  o << '\n';
  o << "bounds\n";
  o << "  workspace " << num(s.bounds.ws_lo_x) << ' ' << num(s.bounds.ws_lo_y) << ' '
    << num(s.bounds.ws_hi_x) << ' ' << num(s.bounds.ws_hi_y) << '\n';
  o << "  vel_lin " << num(s.bounds.vel_lin) << '\n';
  o << "  vel_ang " << num(s.bounds.vel_ang) << '\n';
  o << "  force_max " << num(s.bounds.force_max) << '\n';
  o << "  slide_rate " << num(s.bounds.slide_rate) << '\n';
  o << "end\n";
  return o.str();
}

}  // namespace stocs
