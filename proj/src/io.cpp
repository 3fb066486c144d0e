#include "palflow/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>

namespace palflow {

std::string fmt17(double v) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw StructuralError("matrix document must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      throw StructuralError("matrix document has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = j[i][c].get<double>();
  }
  return M;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw StructuralError("vector document must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Json problem_to_json(const CompositeProblem& p) {
  Json f;
  if (p.f.kind == SmoothFunction::Kind::Quadratic) {
    f = {{"kind", "quadratic"}, {"Q", matrix_to_json(p.f.Q)},
         {"q", vector_to_json(p.f.q)}};
  } else {
    Json labels = Json::array();
    for (Eigen::Index i = 0; i < p.f.labels.size(); ++i)
      labels.push_back(p.f.labels(i));
    f = {{"kind", "logistic-elastic"}, {"features", matrix_to_json(p.f.features)},
         {"labels", std::move(labels)}};
  }
  Json g;
  switch (p.g.kind) {
    case ProxFunction::Kind::EqualityIndicator:
      g = {{"kind", "equality-indicator"}, {"b", vector_to_json(p.g.b)}};
      break;
    case ProxFunction::Kind::InequalityIndicator:
      g = {{"kind", "inequality-indicator"}, {"b", vector_to_json(p.g.b)}};
      break;
    case ProxFunction::Kind::L1Norm:
      g = {{"kind", "l1-norm"}, {"weight", p.g.weight}};
      break;
  }
  return {{"f", std::move(f)}, {"g", std::move(g)},
          {"T", matrix_to_json(p.T)}, {"mu", p.mu}};
}

CompositeProblem problem_from_json(const Json& j) {
  try {
    const Json& jf = j.at("f");
    SmoothFunction f;
    const std::string f_kind = jf.at("kind").get<std::string>();
    if (f_kind == "quadratic") {
      f = make_quadratic(matrix_from_json(jf.at("Q")),
                         vector_from_json(jf.at("q")));
    } else if (f_kind == "logistic-elastic") {
      const auto labels_in = jf.at("labels").get<std::vector<int>>();
      Eigen::VectorXi labels(static_cast<Eigen::Index>(labels_in.size()));
      for (Eigen::Index i = 0; i < labels.size(); ++i)
        labels(i) = labels_in[static_cast<std::size_t>(i)];
      f = make_logistic_elastic(matrix_from_json(jf.at("features")), labels);
    } else {
      throw StructuralError("unknown f kind: " + f_kind);
    }

    const Json& jg = j.at("g");
    ProxFunction g;
    const std::string g_kind = jg.at("kind").get<std::string>();
    if (g_kind == "equality-indicator")
      g = make_equality_indicator(vector_from_json(jg.at("b")));
    else if (g_kind == "inequality-indicator")
      g = make_inequality_indicator(vector_from_json(jg.at("b")));
    else if (g_kind == "l1-norm")
      g = make_l1(jg.at("weight").get<double>());
    else
      throw StructuralError("unknown g kind: " + g_kind);

    return make_problem(std::move(f), std::move(g), matrix_from_json(j.at("T")),
                        j.at("mu").get<double>());
  } catch (const Json::exception& e) {
    throw StructuralError(std::string("malformed problem document: ") + e.what());
  }
}

CompositeProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open problem file: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  return problem_from_json(j);
}

Json certificate_to_json(const RateCertificate& c) {
  return {{"mu", c.mu},
          {"theorem1_threshold", c.mu_feasibility_threshold},
          {"rho0", c.rho0},
          {"beta_at_mu", c.beta_at_mu},
          {"mu_hat", c.mu_hat},
          {"valid", c.valid},
          {"kappa_p", c.kappa_p}};
}

Json lmi_report_to_json(const LmiReport& r) {
  return {{"rho", r.rho},
          {"lambda1", r.lambda1},
          {"lambda2", r.lambda2},
          {"alpha", r.alpha},
          {"matrix", matrix_to_json(r.matrix)},
          {"min_eig", r.min_eig},
          {"feasible", r.feasible}};
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j = {{"seed", cfg.seed},
            {"n", cfg.n},
            {"m", cfg.m},
            {"mu_values", cfg.mu_values},
            {"t_end", cfg.t_end},
            {"sample_count", cfg.sample_count},
            {"problem_family",
             cfg.problem_family == ProblemFamily::QpBox ? "qp-box"
                                                        : "logistic-elastic"},
            {"output_dir", cfg.output_dir},
            {"integrator", {{"rel_tol", cfg.integrator.rel_tol},
                            {"abs_tol", cfg.integrator.abs_tol}}}};
  if (cfg.spectrum)
    j["spectrum"] = {{"m_f", cfg.spectrum->m_f}, {"L_f", cfg.spectrum->L_f}};
  if (cfg.feature_count > 0) j["feature_count"] = cfg.feature_count;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  try {
    ExperimentConfig cfg;
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.n = j.at("n").get<int>();
    cfg.m = j.at("m").get<int>();
    cfg.mu_values = j.at("mu_values").get<std::vector<double>>();
    cfg.t_end = j.value("t_end", cfg.t_end);
    cfg.sample_count = j.value("sample_count", cfg.sample_count);
    const std::string family = j.value("problem_family", std::string("qp-box"));
    if (family == "qp-box")
      cfg.problem_family = ProblemFamily::QpBox;
    else if (family == "logistic-elastic")
      cfg.problem_family = ProblemFamily::LogisticElastic;
    else
      throw StructuralError("unknown problem_family: " + family);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    if (j.contains("spectrum"))
      cfg.spectrum = SpectrumTarget{j.at("spectrum").at("m_f").get<double>(),
                                    j.at("spectrum").at("L_f").get<double>()};
    if (j.contains("integrator")) {
      cfg.integrator.rel_tol =
          j.at("integrator").value("rel_tol", cfg.integrator.rel_tol);
      cfg.integrator.abs_tol =
          j.at("integrator").value("abs_tol", cfg.integrator.abs_tol);
    }
    cfg.feature_count = j.value("feature_count", 0);
    if (cfg.n < 1 || cfg.m < 1)
      throw StructuralError("config: n and m must be at least 1");
    for (double mu : cfg.mu_values)
      if (!(mu > 0.0)) throw ParameterError("config: mu values must be positive");
    if (cfg.sample_count < 2)
      throw ParameterError("config: sample_count must be at least 2");
    return cfg;
  } catch (const Json::exception& e) {
    throw StructuralError(std::string("malformed config document: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const bool with_dist = !traj.distances.empty();
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().x.size();
  const Eigen::Index m = traj.states.empty() ? 0 : traj.states.front().y.size();
  os << "t";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) os << ",y_" << i;
  if (with_dist) os << ",dist";
  os << "\n";
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    os << fmt17(traj.times[r]);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt17(traj.states[r].x(i));
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << fmt17(traj.states[r].y(i));
    if (with_dist) os << ',' << fmt17(traj.distances[r]);
    os << "\n";
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  write_trajectory_csv(out, traj);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace palflow
