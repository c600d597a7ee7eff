#include "llcomb/io.hpp"

#include "llcomb/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace llcomb {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    // -0.000000 and 0.000000 render the same
    if (std::string_view(buf) == "-0.000000") return "0.000000";
    return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Lines without trailing '\r', skipping blank lines and '#' comments.
std::vector<std::string_view> data_lines(std::string_view text) {
    std::vector<std::string_view> out;
    for (std::string_view line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        out.push_back(line);
    }
    return out;
}

double parse_double(std::string_view s, const std::string& origin) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw IoError(origin + ": malformed number '" + std::string(s) + "'");
    return v;
}

long long parse_int(std::string_view s, const std::string& origin) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError(origin + ": malformed integer '" + std::string(s) + "'");
    return v;
}

void expect_header(std::string_view got, std::string_view want, const std::string& origin) {
    if (got != want) throw IoError(origin + ": expected header '" + std::string(want) + "', found '" + std::string(got) + "'");
}

std::vector<BifurcationCandidate> sorted(std::vector<BifurcationCandidate> c) {
    std::stable_sort(c.begin(), c.end(), [](const BifurcationCandidate& a, const BifurcationCandidate& b) {
        if (a.k != b.k) return a.k < b.k;
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        return a.coord < b.coord;
    });
    return c;
}

json candidate_to_json(const BifurcationCandidate& c) {
    return {{"mode", std::string(to_string(c.mode))},
            {"k", c.k},
            {"sigma", c.sigma},
            {"coord", c.coord},
            {"param", c.param},
            {"S", c.s_ok},
            {"T", c.t_ok},
            {"marginal", c.marginal},
            {"tangential", c.tangential},
            {"turning_point", c.turning_point},
            {"s_expr", c.s_expr},
            {"t_expr", c.t_expr},
            {"state",
             {{"a1", c.state.a1}, {"a2", c.state.a2}, {"coord", c.state.coord}, {"zeta", c.state.zeta}, {"f", c.state.f}}},
            {"alpha", c.kernel.alpha},
            {"beta", c.kernel.beta}};
}

BifurcationCandidate candidate_from_json(const json& j) {
    BifurcationCandidate c;
    c.mode = mode_from_string(j.at("mode").get<std::string>());
    c.k = j.at("k").get<int>();
    c.sigma = j.at("sigma").get<int>();
    c.coord = j.at("coord").get<double>();
    c.param = j.at("param").get<double>();
    c.s_ok = j.at("S").get<bool>();
    c.t_ok = j.at("T").get<bool>();
    c.marginal = j.at("marginal").get<bool>();
    c.tangential = j.at("tangential").get<bool>();
    c.turning_point = j.at("turning_point").get<bool>();
    c.s_expr = j.at("s_expr").get<double>();
    c.t_expr = j.at("t_expr").get<double>();
    const json& s = j.at("state");
    c.state.a1 = s.at("a1").get<double>();
    c.state.a2 = s.at("a2").get<double>();
    c.state.coord = s.at("coord").get<double>();
    c.state.zeta = s.at("zeta").get<double>();
    c.state.f = s.at("f").get<double>();
    c.state.mode = c.mode;
    c.kernel.alpha = j.at("alpha").get<std::array<double, 2>>();
    c.kernel.beta = j.at("beta").get<std::array<double, 2>>();
    return c;
}

EventKind event_kind_from_string(std::string_view s, const std::string& origin) {
    for (EventKind k : {EventKind::turning_point, EventKind::trivial_return, EventKind::secondary_bif_candidate,
                        EventKind::step_limit, EventKind::ds_min_exhausted})
        if (to_string(k) == s) return k;
    throw IoError(origin + ": unknown event kind '" + std::string(s) + "'");
}

fs::path sibling(const fs::path& csv_path, const std::string& suffix) {
    fs::path p = csv_path;
    p.replace_extension();
    return p.string() + suffix;
}

} // namespace

void write_file_atomic(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(path.parent_path().string() + ": cannot create directory: " + ec.message());
    }
    std::random_device rd;
    const fs::path tmp = path.string() + ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(tmp.string() + ": cannot open for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError(tmp.string() + ": write failed");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError(path.string() + ": cannot rename temporary file into place");
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string format_candidates_csv(std::vector<BifurcationCandidate> cands) {
    std::string out = "k,sigma,coord,param,S,T,marginal\n";
    for (const auto& c : sorted(std::move(cands))) {
        out += std::to_string(c.k) + "," + std::to_string(c.sigma) + "," + fixed6(c.coord) + "," + fixed6(c.param) + "," +
               (c.s_ok ? "true" : "false") + "," + (c.t_ok ? "true" : "false") + "," + (c.marginal ? "true" : "false") +
               "\n";
    }
    return out;
}

std::string format_candidates_json(std::vector<BifurcationCandidate> cands) {
    json arr = json::array();
    for (const auto& c : sorted(std::move(cands)))
        arr.push_back({{"k", c.k},
                       {"sigma", c.sigma},
                       {"coord", c.coord},
                       {"param", c.param},
                       {"S", c.s_ok},
                       {"T", c.t_ok},
                       {"marginal", c.marginal}});
    return arr.dump(2) + "\n";
}

std::string format_state_csv(const FieldState& s) {
    std::string out = "x,a1,a2\n";
    const int n = s.n();
    for (int j = 0; j < n; ++j)
        out += format_exact(s.grid.x(j)) + "," + format_exact(s.u[j]) + "," + format_exact(s.u[n + j]) + "\n";
    return out;
}

FieldState parse_state_csv(std::string_view text, const std::string& origin, double padding) {
    const auto lines = data_lines(text);
    if (lines.empty()) throw IoError(origin + ": empty state file");
    expect_header(lines[0], "x,a1,a2", origin);
    const int n = static_cast<int>(lines.size()) - 1;
    if (n < 2) throw IoError(origin + ": a state needs at least 2 nodes");
    const Grid g(n, padding);
    Eigen::VectorXd u(2 * n);
    for (int j = 0; j < n; ++j) {
        const auto cols = split(lines[j + 1], ',');
        if (cols.size() != 3) throw IoError(origin + ": row " + std::to_string(j + 1) + " needs 3 columns");
        const double x = parse_double(cols[0], origin);
        if (std::abs(x - g.x(j)) > 1e-12) throw IoError(origin + ": row " + std::to_string(j + 1) + " is not a grid node");
        u[j] = parse_double(cols[1], origin);
        u[n + j] = parse_double(cols[2], origin);
    }
    return {g, std::move(u)};
}

void write_state(const fs::path& path, const FieldState& s) { write_file_atomic(path, format_state_csv(s)); }

FieldState read_state(const fs::path& path, double padding) {
    return parse_state_csv(read_file(path), path.string(), padding);
}

void write_branch(const fs::path& csv_path, const Branch& b) {
    if (csv_path.extension() != ".csv") throw PreconditionError(csv_path.string() + ": branch files must end in .csv");
    if (b.points.empty()) throw PreconditionError("write_branch: branch has no points");
    const int n = b.points.front().state.n();

    std::map<int, std::vector<std::string>> tags;
    for (const auto& e : b.events) tags[e.index].emplace_back(to_string(e.kind));

    std::string table = "step,param,l2norm,min_eig,event\n";
    std::string points = "step,det_sign,ds,tangent_param,has_tangent";
    for (int i = 0; i < 2 * n; ++i) points += ",u" + std::to_string(i);
    for (int i = 0; i < 2 * n; ++i) points += ",t" + std::to_string(i);
    points += "\n";
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        const BranchPoint& p = b.points[i];
        if (p.state.n() != n) throw PreconditionError("write_branch: points use different grids");
        std::string ev;
        if (auto it = tags.find(static_cast<int>(i)); it != tags.end())
            for (std::size_t j = 0; j < it->second.size(); ++j) ev += (j ? ";" : "") + it->second[j];
        table += std::to_string(i) + "," + format_exact(p.param) + "," + format_exact(p.l2norm) + "," +
                 format_exact(p.min_eig) + "," + ev + "\n";

        const bool has_t = p.tangent.size() == 2 * n;
        points += std::to_string(i) + "," + std::to_string(p.det_sign) + "," + format_exact(p.ds) + "," +
                  format_exact(p.tangent_param) + "," + (has_t ? "1" : "0");
        for (int j = 0; j < 2 * n; ++j) points += "," + format_exact(p.state.u[j]);
        for (int j = 0; j < 2 * n; ++j) points += "," + (has_t ? format_exact(p.tangent[j]) : std::string("0"));
        points += "\n";
    }

    json meta;
    meta["format"] = "llcomb-branch-1";
    meta["mode"] = std::string(to_string(b.mode));
    meta["params"] = {{"d", b.params.d}, {"zeta", b.params.zeta}, {"f", b.params.f}};
    meta["grid"] = {{"n", n}, {"padding", b.points.front().state.grid.padding()}};
    json origin = {{"file", b.origin.file}, {"eps", b.origin.eps}};
    origin["candidate"] = b.origin.candidate ? candidate_to_json(*b.origin.candidate) : json(nullptr);
    origin["parent_index"] = b.origin.parent_index ? json(*b.origin.parent_index) : json(nullptr);
    meta["origin"] = origin;
    json events = json::array();
    const std::string stem = csv_path.stem().string();
    std::vector<std::pair<fs::path, const FieldState*>> sidecars;
    for (std::size_t i = 0; i < b.events.size(); ++i) {
        const BranchEvent& e = b.events[i];
        if (e.index < 0 || e.index >= static_cast<int>(b.points.size()))
            throw PreconditionError("write_branch: event index out of range");
        json je = {{"kind", std::string(to_string(e.kind))},
                   {"index", e.index},
                   {"param", e.param},
                   {"distance", e.distance},
                   {"note", e.note}};
        je["candidate"] = e.candidate ? candidate_to_json(*e.candidate) : json(nullptr);
        je["point_file"] = stem + ".point" + std::to_string(e.index) + ".csv";
        if (e.state) {
            const fs::path sp = sibling(csv_path, ".event" + std::to_string(i) + ".csv");
            je["state_file"] = sp.filename().string();
            sidecars.emplace_back(sp, &*e.state);
        } else {
            je["state_file"] = nullptr;
        }
        events.push_back(std::move(je));
    }
    meta["events"] = events;

    for (const auto& [idx, _] : tags)
        write_state(sibling(csv_path, ".point" + std::to_string(idx) + ".csv"), b.points[idx].state);
    for (const auto& [path, state] : sidecars) write_state(path, *state);
    write_file_atomic(sibling(csv_path, ".points.csv"), points);
    write_file_atomic(sibling(csv_path, ".json"), meta.dump(2) + "\n");
    write_file_atomic(csv_path, table);
}

Branch read_branch(const fs::path& csv_path) {
    const std::string origin_csv = csv_path.string();
    const fs::path meta_path = sibling(csv_path, ".json");
    const fs::path points_path = sibling(csv_path, ".points.csv");
    const std::string table_text = read_file(csv_path);
    const std::string meta_text = read_file(meta_path);
    const std::string points_text = read_file(points_path);

    Branch b;
    try {
        const json meta = json::parse(meta_text);
        if (meta.at("format") != "llcomb-branch-1") throw IoError(meta_path.string() + ": unknown format");
        b.mode = mode_from_string(meta.at("mode").get<std::string>());
        const json& pj = meta.at("params");
        b.params = {pj.at("d").get<double>(), pj.at("zeta").get<double>(), pj.at("f").get<double>()};
        const int n = meta.at("grid").at("n").get<int>();
        const double padding = meta.at("grid").at("padding").get<double>();
        const json& oj = meta.at("origin");
        b.origin.file = oj.at("file").get<std::string>();
        b.origin.eps = oj.at("eps").get<double>();
        if (!oj.at("candidate").is_null()) b.origin.candidate = candidate_from_json(oj.at("candidate"));
        if (!oj.at("parent_index").is_null()) b.origin.parent_index = oj.at("parent_index").get<int>();

        const Grid g(n, padding);
        const auto rows = data_lines(table_text);
        const auto prows = data_lines(points_text);
        if (rows.empty() || prows.empty()) throw IoError(origin_csv + ": empty branch file");
        expect_header(rows[0], "step,param,l2norm,min_eig,event", origin_csv);
        if (rows.size() != prows.size())
            throw IoError(points_path.string() + ": point count differs from " + origin_csv);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto cols = split(rows[i], ',');
            const auto pcols = split(prows[i], ',');
            if (cols.size() != 5) throw IoError(origin_csv + ": row " + std::to_string(i) + " needs 5 columns");
            if (pcols.size() != 5 + 4 * static_cast<std::size_t>(n))
                throw IoError(points_path.string() + ": row " + std::to_string(i) + " has the wrong length");
            if (parse_int(cols[0], origin_csv) != static_cast<long long>(i - 1) ||
                parse_int(pcols[0], points_path.string()) != static_cast<long long>(i - 1))
                throw IoError(origin_csv + ": steps must be numbered 0, 1, 2, ...");
            BranchPoint p;
            p.param = parse_double(cols[1], origin_csv);
            p.l2norm = parse_double(cols[2], origin_csv);
            p.min_eig = parse_double(cols[3], origin_csv);
            p.det_sign = static_cast<int>(parse_int(pcols[1], points_path.string()));
            p.ds = parse_double(pcols[2], points_path.string());
            p.tangent_param = parse_double(pcols[3], points_path.string());
            const bool has_t = parse_int(pcols[4], points_path.string()) != 0;
            Eigen::VectorXd u(2 * n);
            for (int j = 0; j < 2 * n; ++j) u[j] = parse_double(pcols[5 + j], points_path.string());
            p.state = FieldState(g, std::move(u));
            if (has_t) {
                p.tangent.resize(2 * n);
                for (int j = 0; j < 2 * n; ++j) p.tangent[j] = parse_double(pcols[5 + 2 * n + j], points_path.string());
            }
            b.points.push_back(std::move(p));
        }

        for (const json& je : meta.at("events")) {
            BranchEvent e;
            e.kind = event_kind_from_string(je.at("kind").get<std::string>(), meta_path.string());
            e.index = je.at("index").get<int>();
            if (e.index < 0 || e.index >= static_cast<int>(b.points.size()))
                throw IoError(meta_path.string() + ": event index out of range");
            e.param = je.at("param").get<double>();
            e.distance = je.at("distance").get<double>();
            e.note = je.at("note").get<std::string>();
            if (!je.at("candidate").is_null()) e.candidate = candidate_from_json(je.at("candidate"));
            if (!je.at("state_file").is_null()) {
                const fs::path sp = csv_path.parent_path() / je.at("state_file").get<std::string>();
                e.state = read_state(sp, padding);
            }
            b.events.push_back(std::move(e));
        }
    } catch (const json::exception& ex) {
        throw IoError(meta_path.string() + ": " + ex.what());
    } catch (const PreconditionError& ex) {
        throw IoError(origin_csv + ": " + ex.what());
    }
    return b;
}

std::string format_trajectory_csv(const Trajectory& tr) {
    std::string out = "t,zeta,l2norm\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        out += format_exact(tr.times[i]) + "," + format_exact(tr.zetas[i]) + "," + format_exact(tr.l2norms[i]) + "\n";
    return out;
}

std::string format_spectrum_csv(const FieldState& s) {
    std::string out =
        "# a(x) = sum_k a_k exp(ikx) on the even 2pi extension; |a_0| is the mean, |a_k| = |c_k|/2 for k >= 1 "
        "(c_k cosine coefficient); zero amplitudes floored at 1e-300\n"
        "k,log_abs_ak\n";
    for (const auto& [k, v] : spectrum(s)) out += std::to_string(k) + "," + format_exact(v) + "\n";
    return out;
}

std::string format_bounds_json(const Parameters& p, const BoundsReport& r, const std::vector<int>& hat_modes) {
    json j = {{"d", p.d},
              {"f", p.f},
              {"zeta", p.zeta},
              {"gamma", r.gamma},
              {"linf_bound", r.linf_bound},
              {"zeta_star_lo", r.zeta_star_lo},
              {"zeta_star_hi", r.zeta_star_hi},
              {"khat", r.khat},
              {"admits_nonconstant", r.admits_nonconstant(p.d, p.zeta)},
              {"hat_modes", hat_modes}};
    j["kbar"] = r.kbar ? json(*r.kbar) : json(nullptr);
    return j.dump(2) + "\n";
}

} // namespace llcomb
