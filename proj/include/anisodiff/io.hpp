#pragma once

#include <string>
#include <vector>

#include "anisodiff/forward.hpp"
#include "anisodiff/inversion.hpp"

namespace anisodiff {

/// CSV snapshot file: commented header declaring the grid ordering, then
/// one row per time with (n+1)^2 values at 17 significant digits.
struct SnapshotHeader {
    int n = 0;
    double t_f = 0.0;
    int steps = 0;
};

void write_snapshots(const std::string& path, const SnapshotHeader& header,
                     const Trajectory& traj);
std::pair<SnapshotHeader, Trajectory> read_snapshots(const std::string& path);

void write_measurements(const std::string& path, int n,
                        const MeasurementSet& set);
MeasurementSet read_measurements(const std::string& path, int& n_out);

void write_field_file(const std::string& path, const ChebGrid& grid,
                      const PrincipalField& field);
PrincipalField read_field_file(const std::string& path);

void write_history(const std::string& path,
                   const std::vector<LMRecord>& history);

/// Shortest decimal form that round-trips the double exactly.
std::string format_full(double v);

}  // namespace anisodiff
