#pragma once

#include "ddbh/dnls.hpp"
#include "ddbh/gutzwiller.hpp"
#include "ddbh/model.hpp"
#include "ddbh/soe.hpp"

#include <json.hpp>

#include <string>

namespace ddbh::io {

const char* version_string();  // e.g. "ddbh 0.1.0"

std::string format_double(double v);  // shortest round-trip decimal

void save_text(const std::string& path, const std::string& text);
nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

nlohmann::json params_to_json(const ModelParams& p);

/// Full-matrix snapshot, row-major [re, im] pairs.
nlohmann::json correlation_state_to_json(const CorrelationState& s);
CorrelationState correlation_state_from_json(const nlohmann::json& j);

nlohmann::json gutzwiller_state_to_json(const GutzwillerState& s);
GutzwillerState gutzwiller_state_from_json(const nlohmann::json& j);

// CSV writers for the documented file formats.
void write_field_trajectory_csv(const std::string& path,
                                const Trajectory& traj);  // t,site,re,im
void write_moment_trajectory_csv(
    const std::string& path,
    const Trajectory& traj);  // t,site,re,im,occupation
void write_gutzwiller_trajectory_csv(const std::string& path,
                                     const gutzwiller::Trajectory& traj);
void write_branch_csv(const std::string& path,
                      const dnls::StationaryBranch& branch);
/// Grid with Re/Im interleaved per column index.
void write_complex_matrix_csv(const std::string& path, const MatrixXcd& m,
                              const std::string& row_label);

}  // namespace ddbh::io
