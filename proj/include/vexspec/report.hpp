#pragma once

// Serialization of results: JSON fragments, RFC 4180 CSV tables and the
// plain-text nodal dump.

#include <string>

#include <json.hpp>

#include "vexspec/solvers.hpp"

namespace vexspec {

nlohmann::ordered_json to_json(const EnergySnapshot& e);
nlohmann::ordered_json to_json(const NormResult& n);
/// Summary without the nodal values.
nlohmann::ordered_json to_json(const EigenPair& ep);
nlohmann::ordered_json to_json(const SweepRow& row);
nlohmann::ordered_json to_json(const RayleighReport& r);

/// Header lambda,residual,u_norm,I_value,iterations,mechanism,converged; CRLF line ends.
std::string sweep_csv(const SweepReport& rep);
std::string family_csv(const FamilyReport& rep, const ProblemData& pd);

/// Header lines (dimension, extents, spacing, origin) then one value per line.
std::string nodal_dump(const GridFunction& u, const StructuredGrid& g);

/// %.17g; round-trips every double.
std::string format_real(double v);

}  // namespace vexspec
