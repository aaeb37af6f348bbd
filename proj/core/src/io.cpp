#include "lsa/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace lsa {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw Error(ErrorKind::Parse, msg);
}

void only_keys(const Json& j, const std::set<std::string>& allowed,
               const std::string& where) {
  if (!j.is_object()) fail(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(where + ": unknown key '" + k + "'");
  }
}

const Json& need(const Json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where + ": missing key '" + key + "'");
  return *it;
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) fail(what + ": expected a number");
  return j.get<double>();
}

long integer(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) fail(what + ": expected an integer");
  return j.get<long>();
}

}  // namespace

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], what);
  return v;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) fail(what + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) fail(what + ": expected rows");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) fail(what + ": ragged rows");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = number(j[i][k], what);
  }
  return m;
}

ObservationModel model_from_json(const Json& j) {
  only_keys(j, {"d", "S", "A", "b", "noise", "Abar", "bbar"}, "instance");
  ObservationModel m;
  m.d = static_cast<int>(integer(need(j, "d", "instance"), "d"));
  m.S = static_cast<int>(integer(need(j, "S", "instance"), "S"));
  if (m.d < 1 || m.S < 1) fail("instance: d and S must be positive");

  const Json& A = need(j, "A", "instance");
  const Json& b = need(j, "b", "instance");
  if (!A.is_array() || static_cast<int>(A.size()) != m.S) fail("A: expected S matrices");
  if (!b.is_array() || static_cast<int>(b.size()) != m.S) fail("b: expected S vectors");
  for (int z = 0; z < m.S; ++z) {
    Matrix Az = matrix_from_json(A[z], "A[" + std::to_string(z) + "]");
    Vector bz = vector_from_json(b[z], "b[" + std::to_string(z) + "]");
    if (Az.rows() != m.d || Az.cols() != m.d) fail("A: matrix size does not match d");
    if (bz.size() != m.d) fail("b: vector size does not match d");
    m.A.push_back(std::move(Az));
    m.b.push_back(std::move(bz));
  }
  if (j.contains("Abar")) m.Abar = matrix_from_json(j["Abar"], "Abar");
  if (j.contains("bbar")) m.bbar = vector_from_json(j["bbar"], "bbar");

  const Json& nz = need(j, "noise", "instance");
  if (!nz.is_object()) fail("noise: expected an object");
  const Json& variant = need(nz, "variant", "noise");
  if (!variant.is_string()) fail("noise.variant: expected a string");
  const std::string v = variant.get<std::string>();
  if (v == "iid") {
    only_keys(nz, {"variant", "weights"}, "noise");
    m.noise = IidNoise{vector_from_json(need(nz, "weights", "noise"), "weights")};
  } else if (v == "markov") {
    only_keys(nz, {"variant", "P", "xi", "t_mix"}, "noise");
    MarkovNoise mk;
    mk.P = matrix_from_json(need(nz, "P", "noise"), "P");
    mk.xi = vector_from_json(need(nz, "xi", "noise"), "xi");
    mk.t_mix = integer(need(nz, "t_mix", "noise"), "t_mix");
    m.noise = std::move(mk);
  } else if (v == "subgaussian") {
    only_keys(nz, {"variant", "weights", "sigma", "sigma_eps"}, "noise");
    SubGaussianNoise sg;
    sg.weights = vector_from_json(need(nz, "weights", "noise"), "weights");
    sg.sigma = matrix_from_json(need(nz, "sigma", "noise"), "sigma");
    sg.sigma_eps = number(need(nz, "sigma_eps", "noise"), "sigma_eps");
    m.noise = std::move(sg);
  } else {
    fail("noise.variant: expected iid, markov or subgaussian");
  }
  return m;
}

Json model_to_json(const ObservationModel& m) {
  Json j;
  j["d"] = m.d;
  j["S"] = m.S;
  j["A"] = Json::array();
  j["b"] = Json::array();
  for (int z = 0; z < m.S; ++z) {
    j["A"].push_back(matrix_to_json(m.A[z]));
    j["b"].push_back(vector_to_json(m.b[z]));
  }
  Json nz;
  if (const auto* iid = std::get_if<IidNoise>(&m.noise)) {
    nz["variant"] = "iid";
    nz["weights"] = vector_to_json(iid->weights);
  } else if (const auto* mk = std::get_if<MarkovNoise>(&m.noise)) {
    nz["variant"] = "markov";
    nz["P"] = matrix_to_json(mk->P);
    nz["xi"] = vector_to_json(mk->xi);
    nz["t_mix"] = mk->t_mix;
  } else {
    const auto& sg = std::get<SubGaussianNoise>(m.noise);
    nz["variant"] = "subgaussian";
    nz["weights"] = vector_to_json(sg.weights);
    nz["sigma"] = matrix_to_json(sg.sigma);
    nz["sigma_eps"] = sg.sigma_eps;
  }
  j["noise"] = std::move(nz);
  if (m.Abar) j["Abar"] = matrix_to_json(*m.Abar);
  if (m.bbar) j["bbar"] = vector_to_json(*m.bbar);
  return j;
}

ObservationModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open instance file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

Json report_to_json(const BoundReport& r) {
  Json j;
  j["bound_id"] = r.bound_id;
  j["components"] = {{"leading", r.leading},
                     {"fluctuation", r.fluctuation},
                     {"transient", r.transient},
                     {"bias", r.bias},
                     {"total", r.total}};
  Json inputs = Json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = v;
  j["inputs"] = std::move(inputs);
  j["eligible"] = r.eligible();
  j["eligibility"] = Json::array();
  for (const auto& c : r.eligibility) {
    j["eligibility"].push_back({{"name", c.name},
                                {"value", c.value},
                                {"threshold", c.threshold},
                                {"passed", c.passed}});
  }
  j["flags"] = r.flags;
  return j;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace lsa
