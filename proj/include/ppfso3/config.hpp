#pragma once

#include "ppfso3/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ppfso3 {

/**
 * Flat configuration format: one `key = value` per line, `#` starts a
 * comment, vectors are comma lists. Keys:
 *
 *   duration, dt, seed
 *   filter            semi-direct | direct | passive[:k1] | mekf[:case]
 *   k1, mekf_case
 *   gamma, k_w
 *   xi0, xi_inf, ell, delta_bar, delta_under
 *   guard             strict | clamp | gate
 *   eps_sing, max_substep_angle, max_substeps
 *   gyro_bias         x,y,z
 *   gyro_noise_std, vector_noise_std
 *   ref1, ref2, ...   inertial reference vectors x,y,z
 *   vector_bias1, ... body-frame bias of each measured vector
 *   weights           s1,s2,...  (three entries when two vectors are given)
 *   init_angle_deg, init_axis, init_bias
 *   truth_angle_deg, truth_axis
 *   trajectory        reference | constant
 *   omega_const       x,y,z
 *   mekf_p_a0, mekf_p_b0
 *   windows           t0:t1,t0:t1,...
 *   preset            full ([1,15]) | steady ([7,15])
 *
 * Throws InvalidConfig on unknown keys or malformed values.
 */
void apply_config_entry(SimConfig& config, const std::string& key, const std::string& value);

SimConfig parse_config(std::istream& in, SimConfig base = SimConfig::reference_defaults());
SimConfig load_config(const std::filesystem::path& path,
                      SimConfig base = SimConfig::reference_defaults());

/**
 * Recorded measurement log: header row
 *   t,wx,wy,wz,b1x,b1y,b1z,b2x,b2y,b2z,...
 * with one body-frame triple per inertial reference in `config`. Units are
 * s, rad/s and (not necessarily normalized) direction vectors.
 */
std::vector<MeasurementFrame> read_measurement_log(std::istream& in, const SimConfig& config);
void write_measurement_log(std::ostream& out, const std::vector<MeasurementFrame>& frames,
                           std::size_t sensors);

/// Samples the simulated sensors of `config` at every step.
std::vector<MeasurementFrame> record_measurements(const SimConfig& config);

}  // namespace ppfso3
