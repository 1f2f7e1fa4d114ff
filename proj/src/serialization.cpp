#include "mpseg/serialization.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"

namespace mpseg {

using nlohmann::json;

namespace {

constexpr int kLibraryFormatVersion = 1;
constexpr int kPrimitiveFormatVersion = 1;

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path.string());
    return out;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return j;
}

json config_to_json(const DmpConfig& cfg) {
    return json{{"alpha_z", cfg.alpha_z}, {"alpha_y", cfg.alpha_y},
                {"beta_y", cfg.beta_y},   {"n_basis", cfg.n_basis},
                {"centers", cfg.centers}, {"bandwidths", cfg.bandwidths},
                {"dt", cfg.dt}};
}

DmpConfig config_from_json(const json& j) {
    DmpConfig cfg;
    cfg.alpha_z = j.at("alpha_z").get<double>();
    cfg.alpha_y = j.at("alpha_y").get<double>();
    cfg.beta_y = j.at("beta_y").get<double>();
    cfg.n_basis = j.at("n_basis").get<int>();
    cfg.centers = j.at("centers").get<std::vector<double>>();
    cfg.bandwidths = j.at("bandwidths").get<std::vector<double>>();
    cfg.dt = j.at("dt").get<double>();
    cfg.validate();
    return cfg;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_library(const PrimitiveLibrary& lib, const std::filesystem::path& path,
                  const std::string& config_hash) {
    lib.validate();
    json j;
    j["format"] = "mpseg-library";
    j["version"] = kLibraryFormatVersion;
    if (!config_hash.empty()) j["config_hash"] = config_hash;
    j["dmp"] = config_to_json(lib.cfg);
    j["var_floor"] = lib.var_floor;
    j["standardization"] = {{"mean", lib.standardization.mean},
                            {"scale", lib.standardization.scale}};
    j["components"] = json::array();
    for (const auto& c : lib.components) {
        j["components"].push_back(
            json{{"lambda", c.lambda}, {"mean", c.mean}, {"var", c.var}});
    }
    auto out = open_for_write(path);
    out << j.dump(2) << '\n';
}

PrimitiveLibrary load_library(const std::filesystem::path& path) {
    const json j = read_json(path);
    try {
        if (j.at("format").get<std::string>() != "mpseg-library") {
            throw ParseError(path.string() + ": not a library file");
        }
        if (j.at("version").get<int>() != kLibraryFormatVersion) {
            throw ParseError(path.string() + ": unsupported library version");
        }
        PrimitiveLibrary lib;
        lib.cfg = config_from_json(j.at("dmp"));
        lib.var_floor = j.value("var_floor", kVarFloor);
        lib.standardization.mean =
            j.at("standardization").at("mean").get<std::vector<double>>();
        lib.standardization.scale =
            j.at("standardization").at("scale").get<std::vector<double>>();
        for (const auto& c : j.at("components")) {
            LibraryComponent comp;
            comp.lambda = c.at("lambda").get<double>();
            comp.mean = c.at("mean").get<std::vector<double>>();
            comp.var = c.at("var").get<std::vector<double>>();
            lib.components.push_back(std::move(comp));
        }
        lib.validate();
        return lib;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_primitives(std::span<const std::pair<DmpParams, DmpAdjustment>> primitives,
                     const DmpConfig& cfg, const std::filesystem::path& path) {
    json j;
    j["format"] = "mpseg-primitives";
    j["version"] = kPrimitiveFormatVersion;
    std::ostringstream hash;
    hash << std::hex << cfg.content_hash();
    j["records"] = json::array();
    for (const auto& [params, adj] : primitives) {
        j["records"].push_back(json{{"cfg_hash", hash.str()},
                                    {"v_init", params.v_init},
                                    {"omega_theta", params.omega_theta.w},
                                    {"omega_v", params.omega_v.w},
                                    {"g", {adj.g_theta, adj.g_v}},
                                    {"T", adj.duration}});
    }
    auto out = open_for_write(path);
    out << j.dump(2) << '\n';
}

std::vector<std::pair<DmpParams, DmpAdjustment>> load_primitives(
    const std::filesystem::path& path, const DmpConfig& cfg) {
    const json j = read_json(path);
    std::ostringstream hash;
    hash << std::hex << cfg.content_hash();
    std::vector<std::pair<DmpParams, DmpAdjustment>> out;
    try {
        if (j.at("format").get<std::string>() != "mpseg-primitives") {
            throw ParseError(path.string() + ": not a primitives file");
        }
        for (const auto& r : j.at("records")) {
            if (r.at("cfg_hash").get<std::string>() != hash.str()) {
                throw ParseError(path.string() + ": primitive was fit under a different config");
            }
            DmpParams params;
            params.v_init = r.at("v_init").get<double>();
            params.omega_theta.w = r.at("omega_theta").get<std::vector<double>>();
            params.omega_theta.channel = Channel::lateral;
            params.omega_v.w = r.at("omega_v").get<std::vector<double>>();
            params.omega_v.channel = Channel::longitudinal;
            DmpAdjustment adj;
            adj.g_theta = r.at("g").at(0).get<double>();
            adj.g_v = r.at("g").at(1).get<double>();
            adj.duration = r.at("T").get<double>();
            out.emplace_back(std::move(params), adj);
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return out;
}

void save_segments_csv(std::span<const SegmentationResult> results,
                       const std::filesystem::path& path, const std::string& config_hash) {
    auto out = open_for_write(path);
    if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
    out << "traj,start,end,component,alpha\n";
    for (std::size_t t = 0; t < results.size(); ++t) {
        for (const auto& seg : results[t].segments) {
            out << t << ',' << seg.start << ',' << seg.end << ',' << seg.component << ','
                << fmt_double(seg.alpha) << '\n';
        }
    }
}

std::size_t SegmentsFile::n_trajectories() const {
    std::size_t n = 0;
    for (const auto& r : rows) n = std::max(n, r.traj + 1);
    return n;
}

std::vector<std::size_t> SegmentsFile::interior_boundaries(std::size_t traj) const {
    std::vector<std::size_t> out;
    std::size_t traj_end = 0;
    for (const auto& r : rows) {
        if (r.traj == traj) traj_end = std::max(traj_end, r.end);
    }
    for (const auto& r : rows) {
        if (r.traj == traj && r.end != traj_end) out.push_back(r.end);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double to_double(const std::string& s, const std::string& origin, std::size_t row) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError(origin + ": malformed number in row " + std::to_string(row));
    }
    return v;
}

long to_long(const std::string& s, const std::string& origin, std::size_t row) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError(origin + ": malformed integer in row " + std::to_string(row));
    }
    return v;
}

}  // namespace

SegmentsFile load_segments_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());
    SegmentsFile file;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        if (line.rfind("# config_hash=", 0) == 0) {
            file.config_hash = line.substr(14);
            if (!file.config_hash.empty() && file.config_hash.back() == '\r') {
                file.config_hash.pop_back();
            }
            continue;
        }
        if (line[0] == '#') continue;
        if (!header_seen) {
            auto fields = split_csv_line(line);
            if (fields != std::vector<std::string>{"traj", "start", "end", "component",
                                                   "alpha"}) {
                throw ParseError(path.string() + ": unexpected segments header");
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 5) {
            throw ParseError(path.string() + ": expected 5 fields in row " +
                             std::to_string(row));
        }
        SegmentsFile::Row r;
        r.traj = static_cast<std::size_t>(to_long(fields[0], path.string(), row));
        r.start = static_cast<std::size_t>(to_long(fields[1], path.string(), row));
        r.end = static_cast<std::size_t>(to_long(fields[2], path.string(), row));
        r.component = to_long(fields[3], path.string(), row);
        r.alpha = to_double(fields[4], path.string(), row);
        file.rows.push_back(r);
    }
    if (!header_seen) throw ParseError(path.string() + ": missing segments header");
    return file;
}

void save_cuts_csv(std::span<const CutPointSet> cuts, const std::filesystem::path& path,
                   const std::string& config_hash) {
    auto out = open_for_write(path);
    if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
    out << "traj,index\n";
    for (std::size_t t = 0; t < cuts.size(); ++t) {
        for (std::size_t idx : cuts[t].indices) out << t << ',' << idx << '\n';
    }
}

std::vector<std::vector<std::size_t>> load_cuts_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());
    std::vector<std::vector<std::size_t>> out;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // "traj,index"
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw ParseError(path.string() + ": expected 2 fields in row " +
                             std::to_string(row));
        }
        const auto t = static_cast<std::size_t>(to_long(fields[0], path.string(), row));
        if (t >= out.size()) out.resize(t + 1);
        out[t].push_back(static_cast<std::size_t>(to_long(fields[1], path.string(), row)));
    }
    return out;
}

void save_em_log(std::span<const double> evidence, const std::filesystem::path& path,
                 const std::string& config_hash) {
    auto out = open_for_write(path);
    if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
    out << "iteration,evidence\n";
    for (std::size_t i = 0; i < evidence.size(); ++i) {
        out << i << ',' << fmt_double(evidence[i]) << '\n';
    }
}

void save_truth_csv(std::span<const SyntheticTrajectory> trajs,
                    const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "traj,start,end,prototype\n";
    for (std::size_t t = 0; t < trajs.size(); ++t) {
        const auto& cuts = trajs[t].true_cuts;
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            out << t << ',' << cuts[s] << ',' << cuts[s + 1] << ','
                << trajs[t].prototype_ids[s] << '\n';
        }
    }
}

TruthFile load_truth_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());
    TruthFile file;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    std::vector<std::vector<std::size_t>> ends;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw ParseError(path.string() + ": expected 4 fields in row " +
                             std::to_string(row));
        }
        const auto t = static_cast<std::size_t>(to_long(fields[0], path.string(), row));
        if (t >= file.cuts_per_traj.size()) file.cuts_per_traj.resize(t + 1);
        const auto start = static_cast<std::size_t>(to_long(fields[1], path.string(), row));
        const auto end = static_cast<std::size_t>(to_long(fields[2], path.string(), row));
        auto& cuts = file.cuts_per_traj[t];
        if (cuts.empty()) cuts.push_back(start);
        cuts.push_back(end);
    }
    return file;
}

void save_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "t,course_deg,speed_mps\n";
    // Node 0 carries an arbitrary base course; speeds are carried one node
    // late (the first node repeats the first point's speed).
    double course = 90.0;
    out << fmt_double(0.0) << ',' << fmt_double(course) << ','
        << fmt_double(traj.points.front().v) << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        course += traj.points[k].dtheta;
        double wrapped = std::fmod(course, 360.0);
        if (wrapped < 0.0) wrapped += 360.0;
        out << fmt_double(traj.dt * static_cast<double>(k + 1)) << ','
            << fmt_double(wrapped) << ',' << fmt_double(traj.points[k].v) << '\n';
    }
}

void save_track_csv(const PrimitiveTrack& track, const std::filesystem::path& path,
                    const std::string& config_hash) {
    auto out = open_for_write(path);
    if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
    out << "t,dtheta_m,dtheta_m_dot,dv_m,dv_m_dot\n";
    for (std::size_t k = 0; k < track.size(); ++k) {
        out << fmt_double(track.dt * static_cast<double>(k)) << ','
            << fmt_double(track.dtheta_m[k]) << ',' << fmt_double(track.dtheta_m_dot[k])
            << ',' << fmt_double(track.dv_m[k]) << ',' << fmt_double(track.dv_m_dot[k])
            << '\n';
    }
}

}  // namespace mpseg
