#include "flatpoly/config.hpp"

#include <string>

#include "flatpoly/errors.hpp"

namespace flatpoly {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "' in " + where);
  }
  return obj.at(key);
}

double number(const json& j, const char* name) {
  if (!j.is_number()) throw ConfigError(std::string("field '") + name + "' must be a number");
  return j.get<double>();
}

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(std::string(name) + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
                      ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void check_size(const Vector& v, Eigen::Index n, const char* name) {
  if (v.size() != n) {
    throw ConfigError(std::string(name) + " must have " + std::to_string(n) + " entries, got " +
                      std::to_string(v.size()));
  }
}

pmsm::Schedule schedule_from_json(const json& j, const char* name) {
  pmsm::Schedule s;
  if (!j.is_object()) throw ConfigError(std::string(name) + " must be an object");
  if (j.contains("initial")) s.initial = number(j.at("initial"), name);
  if (j.contains("steps")) {
    const json& steps = j.at("steps");
    if (!steps.is_array()) throw ConfigError(std::string(name) + ".steps must be an array");
    for (const auto& st : steps) {
      if (!st.is_array() || st.size() != 2) throw ConfigError(std::string(name) + " steps are [time, value] pairs");
      s.steps.emplace_back(number(st[0], name), number(st[1], name));
    }
  }
  return s;
}

json schedule_to_json(const pmsm::Schedule& s) {
  json steps = json::array();
  for (const auto& [t, v] : s.steps) steps.push_back({t, v});
  return {{"initial", s.initial}, {"steps", steps}};
}

}  // namespace

Matrix matrix_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string(name) + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) throw ConfigError(std::string(name) + " must be an array of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(std::string(name) + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], name);
  }
  return m;
}

Vector vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string(name) + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], name);
  return v;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ModelConfig parse_model(const json& doc) {
  if (!doc.is_object()) throw ConfigError("model document must be a JSON object");
  const json& sys = require(doc, "system", "model");
  Matrix A = matrix_from_json(require(sys, "A", "system"), "system.A");
  Matrix B = matrix_from_json(require(sys, "B", "system"), "system.B");
  const auto n = A.rows();
  if (n < 1) throw ConfigError("system.A must be non-empty");
  check_shape(A, n, n, "system.A");
  if (B.rows() != n || B.cols() < 1) throw ConfigError("system.B must have n rows and at least one column");
  const auto m = B.cols();
  Vector d = Vector::Zero(n);
  if (sys.contains("d")) {
    d = vector_from_json(sys.at("d"), "system.d");
    check_size(d, n, "system.d");
  }

  const json& c = require(doc, "cost", "model");
  QuadraticCostSpec cost;
  cost.Q = matrix_from_json(require(c, "Q", "cost"), "cost.Q");
  check_shape(cost.Q, n, n, "cost.Q");
  cost.R = c.contains("R") ? matrix_from_json(c.at("R"), "cost.R") : Matrix(Matrix::Zero(m, m));
  check_shape(cost.R, m, m, "cost.R");
  cost.P = c.contains("P") ? matrix_from_json(c.at("P"), "cost.P") : Matrix(Matrix::Zero(n, n));
  check_shape(cost.P, n, n, "cost.P");
  cost.x_star = c.contains("x_star") ? vector_from_json(c.at("x_star"), "cost.x_star") : Vector(Vector::Zero(n));
  check_size(cost.x_star, n, "cost.x_star");
  if (c.contains("x_ref")) {
    cost.x_ref = vector_from_json(c.at("x_ref"), "cost.x_ref");
    check_size(*cost.x_ref, n, "cost.x_ref");
  }
  cost.horizon = number(require(c, "T", "cost"), "cost.T");
  if (!(cost.horizon > 0)) throw ConfigError("cost.T must be positive");
  if (c.contains("stage_offset")) cost.stage_offset = number(c.at("stage_offset"), "cost.stage_offset");

  LinearConstraintSpec cons;
  cons.G_x = Matrix::Zero(0, n);
  cons.G_u = Matrix::Zero(0, m);
  cons.g0 = Vector::Zero(0);
  if (doc.contains("constraints")) {
    const json& k = doc.at("constraints");
    cons.g0 = vector_from_json(require(k, "g0", "constraints"), "constraints.g0");
    const auto nc = cons.g0.size();
    cons.G_x = k.contains("G_x") ? matrix_from_json(k.at("G_x"), "constraints.G_x") : Matrix(Matrix::Zero(nc, n));
    cons.G_u = k.contains("G_u") ? matrix_from_json(k.at("G_u"), "constraints.G_u") : Matrix(Matrix::Zero(nc, m));
    if (nc == 0) {
      cons.G_x = Matrix::Zero(0, n);
      cons.G_u = Matrix::Zero(0, m);
    }
    check_shape(cons.G_x, nc, n, "constraints.G_x");
    check_shape(cons.G_u, nc, m, "constraints.G_u");
  }

  const json& basis = require(doc, "basis", "model");
  const json& nj = require(basis, "N", "basis");
  if (!nj.is_number_integer()) throw ConfigError("basis.N must be an integer");
  const int degree = nj.get<int>();

  Vector x0 = vector_from_json(require(doc, "initial_state", "model"), "initial_state");
  check_size(x0, n, "initial_state");

  try {
    return ModelConfig{
        .system = LtiSystem(std::move(A), std::move(B), std::move(d)),
        .cost = std::move(cost),
        .constraints = std::move(cons),
        .degree = degree,
        .x0 = std::move(x0),
    };
  } catch (const DimensionMismatch& e) {
    throw ConfigError(e.what());
  }
}

json model_to_json(const ModelConfig& model) {
  json cost = {
      {"Q", to_json(model.cost.Q)},
      {"R", to_json(model.cost.R)},
      {"P", to_json(model.cost.P)},
      {"x_star", to_json(model.cost.x_star)},
      {"T", model.cost.horizon},
      {"stage_offset", model.cost.stage_offset},
  };
  if (model.cost.x_ref) cost["x_ref"] = to_json(*model.cost.x_ref);
  return {
      {"system", {{"A", to_json(model.system.A())}, {"B", to_json(model.system.B())}, {"d", to_json(model.system.d())}}},
      {"cost", cost},
      {"constraints",
       {{"G_x", to_json(model.constraints.G_x)},
        {"G_u", to_json(model.constraints.G_u)},
        {"g0", to_json(model.constraints.g0)}}},
      {"basis", {{"N", model.degree}}},
      {"initial_state", to_json(model.x0)},
  };
}

pmsm::Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario document must be a JSON object");
  pmsm::Scenario s;
  auto num = [&](const char* key, double& dst) {
    if (doc.contains(key)) dst = number(doc.at(key), key);
  };
  num("horizon", s.horizon);
  num("dt", s.dt);
  num("duration", s.duration);
  num("q", s.q);
  num("inertia", s.inertia);
  num("friction", s.friction);
  num("kp", s.kp);
  num("ki", s.ki);
  num("torque_limit", s.torque_limit);
  num("state_backoff", s.state_backoff);
  if (doc.contains("degree")) {
    if (!doc.at("degree").is_number_integer()) throw ConfigError("degree must be an integer");
    s.degree = doc.at("degree").get<int>();
  }
  if (doc.contains("speed_ref")) s.speed_ref = schedule_from_json(doc.at("speed_ref"), "speed_ref");
  if (doc.contains("load_torque")) s.load_torque = schedule_from_json(doc.at("load_torque"), "load_torque");
  if (doc.contains("machine")) {
    const json& m = doc.at("machine");
    if (!m.is_object()) throw ConfigError("machine must be an object");
    auto mnum = [&](const char* key, double& dst) {
      if (m.contains(key)) dst = number(m.at(key), key);
    };
    mnum("resistance", s.machine.resistance);
    mnum("inductance", s.machine.inductance);
    mnum("flux", s.machine.flux);
    mnum("iron_resistance", s.machine.iron_resistance);
    mnum("current_max", s.machine.current_max);
    mnum("voltage_max", s.machine.voltage_max);
    mnum("rated_speed", s.machine.rated_speed);
    mnum("rated_torque", s.machine.rated_torque);
    if (m.contains("pole_pairs")) {
      if (!m.at("pole_pairs").is_number_integer()) throw ConfigError("pole_pairs must be an integer");
      s.machine.pole_pairs = m.at("pole_pairs").get<int>();
    }
  }
  s.validate();
  return s;
}

json scenario_to_json(const pmsm::Scenario& s) {
  const auto& m = s.machine;
  return {
      {"machine",
       {{"resistance", m.resistance},
        {"inductance", m.inductance},
        {"pole_pairs", m.pole_pairs},
        {"flux", m.flux},
        {"iron_resistance", m.iron_resistance},
        {"current_max", m.current_max},
        {"voltage_max", m.voltage_max},
        {"rated_speed", m.rated_speed},
        {"rated_torque", m.rated_torque}}},
      {"horizon", s.horizon},
      {"dt", s.dt},
      {"duration", s.duration},
      {"speed_ref", schedule_to_json(s.speed_ref)},
      {"load_torque", schedule_to_json(s.load_torque)},
      {"q", s.q},
      {"degree", s.degree},
      {"inertia", s.inertia},
      {"friction", s.friction},
      {"kp", s.kp},
      {"ki", s.ki},
      {"torque_limit", s.torque_limit},
      {"state_backoff", s.state_backoff},
  };
}

}  // namespace flatpoly
