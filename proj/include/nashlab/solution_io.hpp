#pragma once

#include <string>

#include "nashlab/mfg.hpp"
#include "nashlab/monotonicity.hpp"
#include "nashlab/nash_solver.hpp"
#include "nashlab/oracle.hpp"

namespace nashlab {

/// Solution directory layout: manifest.json plus one field container per
/// player for the values (u_<i>.nlf) and the feedback drifts (drift_<i>.nlf).
void save_solution(const NashSolution& sol, const std::string& dir);
NashSolution load_solution(const std::string& dir);

/// Mean-field layout: manifest.json, u_<l>.nlf / m_<l>.nlf per label, and the
/// mixture flow (mixture.nlf).
void save_mfg_solution(const MFGSolution& sol, const std::string& dir);
MFGSolution load_mfg_solution(const std::string& dir);

/// Coefficient table of a backward LQ trajectory: one record per time level
/// with P (row-major), q, r per player.
void save_riccati_json(const RiccatiSolution& sol, const std::string& path);

/// One record per time level; margins that were not computed appear as null.
std::string monotonicity_report_json(const SemimonotonicityReport& report);

}  // namespace nashlab
