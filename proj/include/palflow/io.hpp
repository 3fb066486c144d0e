#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "palflow/certify.hpp"
#include "palflow/experiments.hpp"
#include "palflow/integrate.hpp"

namespace palflow {

using Json = nlohmann::json;

/// Shortest decimal form with 17 significant digits (exact round trip).
std::string fmt17(double v);

Json matrix_to_json(const Matrix& M);  ///< nested arrays, one per row
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// Problem document: {"f": {...}, "g": {...}, "T": [[...]], "mu": ...};
/// see README for the full schema.
Json problem_to_json(const CompositeProblem& p);
CompositeProblem problem_from_json(const Json& j);
CompositeProblem load_problem(const std::filesystem::path& path);

Json certificate_to_json(const RateCertificate& c);
Json lmi_report_to_json(const LmiReport& r);

Json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// CSV with header t,x_1..x_n,y_1..y_m[,dist]; 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace palflow
