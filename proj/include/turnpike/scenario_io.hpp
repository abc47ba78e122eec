#pragma once

#include <memory>
#include <string>

#include "turnpike/core.hpp"
#include "turnpike/models.hpp"
#include "turnpike/nlp.hpp"
#include "turnpike/transcription.hpp"

namespace turnpike {

/// Everything a scenario file describes: the problem itself plus the
/// discretization, solver settings, and model parameters.
struct LoadedScenario {
  Scenario scenario;
  TranscriptionConfig transcription;
  SolverOptions solver;
  double hovercraft_r = 0.5;
};

/// Parses the flat key-value scenario format, or JSON when the document
/// starts with '{'. Unknown or duplicate keys are rejected; errors carry
/// the offending line number.
LoadedScenario parse_scenario(const std::string& text);

/// Reads and parses a scenario file. Throws ParseError on unreadable files.
LoadedScenario load_scenario_file(const std::string& path);

/// Canonical flat-format serialization; parse(serialize(s)) reproduces s
/// exactly.
std::string serialize_scenario(const LoadedScenario& s);

/// Model instance honoring the scenario's parameters.
std::shared_ptr<const Model> build_model(const LoadedScenario& s);

/// Shortest decimal string that round-trips the exact double value.
std::string format_double(double x);

/// Writes t, q_1..q_n, v_1..v_n, u_1..u_m columns (plus lambda_1..lambda_2n
/// when costates are attached), newline-terminated, locale-independent.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace turnpike
