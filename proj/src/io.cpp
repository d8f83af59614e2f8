#include "anisodiff/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace anisodiff {

namespace {

constexpr const char* kOrdering = "block-j,x-within-block";

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::vector<double> split_row(const std::string& line, const std::string& path) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        const std::string tok = line.substr(pos, comma - pos);
        try {
            values.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": malformed value \"" + tok + "\"");
        }
        pos = comma + 1;
        if (comma == line.size()) break;
    }
    return values;
}

double header_value(const std::string& line, const std::string& key,
                    const std::string& path) {
    const std::string tag = key + "=";
    const std::size_t at = line.find(tag);
    if (at == std::string::npos)
        throw std::runtime_error(path + ": missing header key " + key);
    return std::stod(line.substr(at + tag.size()));
}

}  // namespace

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_snapshots(const std::string& path, const SnapshotHeader& header,
                     const Trajectory& traj) {
    auto out = open_out(path);
    out << "# anisodiff snapshots\n";
    out << "# n=" << header.n << " t_f=" << format_full(header.t_f)
        << " steps=" << header.steps << "\n";
    out << "# ordering=" << kOrdering << "\n";
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        out << format_full(traj.times[static_cast<int>(s)]);
        const Eigen::VectorXd& u = traj.states[s];
        for (int r = 0; r < u.size(); ++r) out << ',' << format_full(u[r]);
        out << '\n';
    }
}

std::pair<SnapshotHeader, Trajectory> read_snapshots(const std::string& path) {
    auto in = open_in(path);
    SnapshotHeader header;
    Trajectory traj;
    std::string line;
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("n=") != std::string::npos &&
                line.find("t_f=") != std::string::npos) {
                header.n = static_cast<int>(header_value(line, "n", path));
                header.t_f = header_value(line, "t_f", path);
                header.steps =
                    static_cast<int>(header_value(line, "steps", path));
            }
            continue;
        }
        const std::vector<double> row = split_row(line, path);
        const int N = (header.n + 1) * (header.n + 1);
        if (static_cast<int>(row.size()) != N + 1)
            throw std::runtime_error(path + ": row has wrong length");
        times.push_back(row[0]);
        traj.states.push_back(
            Eigen::Map<const Eigen::VectorXd>(row.data() + 1, N));
    }
    if (times.empty()) throw std::runtime_error(path + ": no snapshots");
    traj.times = Eigen::Map<const Eigen::VectorXd>(times.data(),
                                                   (int)times.size());
    traj.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    return {header, traj};
}

void write_measurements(const std::string& path, int n,
                        const MeasurementSet& set) {
    auto out = open_out(path);
    out << "# anisodiff measurements\n";
    out << "# n=" << n << " t_f=" << format_full(set.times.back())
        << " steps=" << static_cast<int>(set.times.size())
        << " delta=" << format_full(set.delta) << "\n";
    out << "# ordering=" << kOrdering << "\n";
    for (std::size_t q = 0; q < set.times.size(); ++q) {
        out << format_full(set.times[q]);
        const Eigen::VectorXd& u = set.data[q];
        for (int r = 0; r < u.size(); ++r) out << ',' << format_full(u[r]);
        out << '\n';
    }
}

MeasurementSet read_measurements(const std::string& path, int& n_out) {
    auto in = open_in(path);
    MeasurementSet set;
    n_out = -1;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("delta=") != std::string::npos) {
                n_out = static_cast<int>(header_value(line, "n", path));
                set.delta = header_value(line, "delta", path);
            }
            continue;
        }
        if (n_out < 0)
            throw std::runtime_error(path + ": data before header");
        const std::vector<double> row = split_row(line, path);
        const int N = (n_out + 1) * (n_out + 1);
        if (static_cast<int>(row.size()) != N + 1)
            throw std::runtime_error(path + ": row has wrong length");
        set.times.push_back(row[0]);
        set.data.push_back(
            Eigen::Map<const Eigen::VectorXd>(row.data() + 1, N));
    }
    if (set.times.empty()) throw std::runtime_error(path + ": no measurements");
    return set;
}

void write_field_file(const std::string& path, const ChebGrid& grid,
                      const PrincipalField& field) {
    auto out = open_out(path);
    const int n = grid.n;
    out << "# anisodiff fields\n";
    out << "# n=" << n << "\n";
    out << "# i,j,x,y,k11,k22\n";
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            out << i << ',' << j << ',' << format_full(grid.nodes[i]) << ','
                << format_full(grid.nodes[j]) << ','
                << format_full(field.k11(i, j)) << ','
                << format_full(field.k22(i, j)) << '\n';
}

PrincipalField read_field_file(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    int n = -1;
    PrincipalField field;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("n=") != std::string::npos)
                n = static_cast<int>(header_value(line, "n", path));
            continue;
        }
        if (n < 0) throw std::runtime_error(path + ": data before header");
        if (field.k11.size() == 0) {
            field.k11.setZero(n + 1, n + 1);
            field.k22.setZero(n + 1, n + 1);
        }
        const std::vector<double> row = split_row(line, path);
        if (row.size() != 6)
            throw std::runtime_error(path + ": field row has wrong length");
        const int i = static_cast<int>(row[0]);
        const int j = static_cast<int>(row[1]);
        if (i < 0 || i > n || j < 0 || j > n)
            throw std::runtime_error(path + ": field index out of range");
        field.k11(i, j) = row[4];
        field.k22(i, j) = row[5];
    }
    if (n < 0) throw std::runtime_error(path + ": empty field file");
    return field;
}

void write_history(const std::string& path,
                   const std::vector<LMRecord>& history) {
    auto out = open_out(path);
    out << "# iteration,phi,res_norm,mu,accepted\n";
    for (const LMRecord& rec : history)
        out << rec.iteration << ',' << format_full(rec.phi) << ','
            << format_full(rec.res_norm) << ',' << format_full(rec.mu) << ','
            << (rec.accepted ? 1 : 0) << '\n';
}

}  // namespace anisodiff
