#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "balcl/assignment.hpp"
#include "balcl/cost.hpp"
#include "balcl/instance.hpp"

namespace balcl {

// Objective <-> CLI spelling ("kmedian" | "kmeans" | "kcenter").
std::string objective_name(Objective obj);
Objective parse_objective(const std::string& name);

// Point CSV: header "f0,f1,...,f{d-1}[,label]", one row per point.
Instance read_points_csv(const std::string& path);
void write_points_csv(const std::string& path, const Instance& inst);

// Distance-matrix CSV: n rows by n columns, no header.
Instance read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Instance& inst);

// Loads either CSV form, sniffing the header row for the point format.
Instance read_instance_csv(const std::string& path);

// Assignment JSON:
//   {"centers":[...], "assign":[[{"c":i,"m":1},...],...],
//    "objective":"kmedian", "value":..., "violations":{...}}
nlohmann::json assignment_to_json(const Assignment& a, Objective obj, double value,
                                  const ViolationReport& report);
Assignment assignment_from_json(const nlohmann::json& j);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace balcl
