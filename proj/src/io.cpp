#include "torusflow/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

void put_f64_le(std::ostream& out, double v) {
    const uint64_t bits = std::bit_cast<uint64_t>(v);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_f64_le(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw IoError("checkpoint truncated");
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<uint64_t>(bytes[i]) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_checkpoint(const std::string& path, const Field& w, double lambda,
                      double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    const TorusGrid& g = w.grid();
    put_f64_le(out, g.a());
    put_f64_le(out, g.b());
    put_f64_le(out, static_cast<double>(g.nx()));
    put_f64_le(out, static_cast<double>(g.ny()));
    put_f64_le(out, lambda);
    put_f64_le(out, t);
    for (int i = 0; i < w.size(); ++i) put_f64_le(out, w[i]);
    if (!out) throw IoError("checkpoint write failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    const double a = get_f64_le(in);
    const double b = get_f64_le(in);
    const double nx_d = get_f64_le(in);
    const double ny_d = get_f64_le(in);
    Checkpoint cp;
    cp.lambda = get_f64_le(in);
    cp.t = get_f64_le(in);
    const int nx = static_cast<int>(nx_d);
    const int ny = static_cast<int>(ny_d);
    if (nx != nx_d || ny != ny_d) {
        throw IoError("checkpoint has non-integral grid sizes");
    }
    auto grid = std::make_shared<TorusGrid>(a, b, nx, ny);
    cp.w = Field(grid);
    for (int i = 0; i < cp.w.size(); ++i) cp.w[i] = get_f64_le(in);
    return cp;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRecord>& records,
                          const std::string& config_hash) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open trajectory CSV for writing: " + path);
    const bool have_dist =
        !records.empty() && std::isfinite(records.front().dist_l2);
    out << "# torusflow " << kArtifactVersion << " config=" << config_hash
        << "\n";
    out << "t,E,grad_l2,grad_Vstar,mass,min_u,max_u,dissipation,bc_ratio,"
           "wt_l2";
    if (have_dist) out << ",dist_l2,dist_V";
    out << "\n";
    for (const auto& r : records) {
        out << format_g17(r.t) << ',' << format_g17(r.energy_E) << ','
            << format_g17(r.grad_E_l2) << ',' << format_g17(r.grad_E_Vstar)
            << ',' << format_g17(r.mass) << ',' << format_g17(r.min_u) << ','
            << format_g17(r.max_u) << ',' << format_g17(r.dissipation) << ','
            << format_g17(r.bc_max) << ',' << format_g17(r.wt_l2);
        if (have_dist) {
            out << ',' << format_g17(r.dist_l2) << ',' << format_g17(r.dist_V);
        }
        out << "\n";
    }
    if (!out) throw IoError("trajectory CSV write failed: " + path);
}

std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory CSV: " + path);
    std::vector<TrajectoryRecord> records;
    std::string line;
    bool have_dist = false;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            have_dist = line.find("dist_l2") != std::string::npos;
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            vals.push_back(std::stod(cell));
        }
        if (vals.size() < 10) throw IoError("malformed CSV row: " + line);
        TrajectoryRecord r;
        r.t = vals[0];
        r.energy_E = vals[1];
        r.grad_E_l2 = vals[2];
        r.grad_E_Vstar = vals[3];
        r.mass = vals[4];
        r.min_u = vals[5];
        r.max_u = vals[6];
        r.dissipation = vals[7];
        r.bc_max = vals[8];
        r.wt_l2 = vals[9];
        if (have_dist && vals.size() >= 12) {
            r.dist_l2 = vals[10];
            r.dist_V = vals[11];
        }
        records.push_back(r);
    }
    return records;
}

std::string config_hash(const std::string& canonical_text) {
    uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "0x%016llx",
                  static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace torusflow
