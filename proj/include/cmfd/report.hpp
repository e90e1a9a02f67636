#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cmfd/experiments.hpp"

namespace cmfd {

/// CSV columns, one row per (level, method), ordered by decreasing h:
///
///   level,h,seed,method,num_faces,num_cells,flux_error,power,power_error,p1,p2,continuity
///
/// Missing values are written as "nan". Each fitted rate follows as a comment
/// line "# rate=<value> method=<name>". No timings, so reruns with the direct
/// solver produce identical bytes.
std::string report_to_csv(const ExperimentReport& report);
void export_csv(const ExperimentReport& report, const std::filesystem::path& path);

/// Machine-readable twin of the CSV; includes the config, timings and log.
nlohmann::json report_to_json(const ExperimentReport& report);

/// Writes a legacy ASCII VTK unstructured grid holding the surrogate
/// triangles of every face (cell data "flux": J_f / area), one vertex per cell
/// at b_c carrying the reconstructed field ("field"), and the dual segments
/// b_c -> b_f. Cell data "kind" is 0 for triangles, 1 for vertices, 2 for segments.
void export_vtk(const CurvedGrid& grid, const GridGeometry& geom, const ReconstructionSet& set,
                const Eigen::VectorXd& J, const std::filesystem::path& path);

/// recon.json: {"b_f": [...], "b_c": [...], "constraint_residual", "p1", "p2"}.
nlohmann::json recon_to_json(const ReconstructionSet& set, const ConsistencyReport& report);
/// Rebuilds the operators from b_f and b_c.
ReconstructionSet recon_from_json(const nlohmann::json& doc, const CurvedGrid& grid, const GridGeometry& geom);

/// bc.json: {"electrodes": {"0": 0.0, "1": 1.0}} or
/// {"potential": {"type": "linear", "gradient": [gx, gy, gz], "offset": c}} or
/// {"potential": {"type": "harmonic"}} for x^2 - 2y^2 + z^2.
BoundaryConditions bc_from_json(const nlohmann::json& doc);

nlohmann::json solution_to_json(const SolveResult& result, const std::vector<Vec3>& fields, double power);
/// Reads back J (and U) from a solution document.
SolveResult solution_from_json(const nlohmann::json& doc);

}  // namespace cmfd
