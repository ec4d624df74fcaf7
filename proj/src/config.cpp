#include "hamtrace/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace hamtrace {

using nlohmann::json;

namespace {

Mat parse_matrix(const json& j, const char* what) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw config_error(std::string(what) + ": expected a matrix (array of rows)");
    const size_t rows = j.size(), cols = j[0].size();
    Mat M(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw config_error(std::string(what) + ": ragged matrix");
        for (size_t c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
    }
    return M;
}

json dump_matrix(const Mat& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

MatrixPath parse_path(const json& j, double T, const char* what) {
    if (!j.is_object() || !j.contains("kind"))
        throw config_error(std::string(what) + ": path spec needs a 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "constant") {
        return MatrixPath::constant(parse_matrix(j.at("matrix"), what), T);
    }
    if (kind == "builtin") {
        std::vector<std::pair<std::string, double>> params;
        if (j.contains("params"))
            for (auto& [k, v] : j["params"].items()) params.emplace_back(k, v.get<double>());
        MatrixPath p = make_builtin(j.at("name").get<std::string>(), params);
        if (std::abs(p.period() - T) > 1e-12 * std::max(1.0, T))
            throw config_error(std::string(what) + ": builtin period differs from document T");
        return p;
    }
    if (kind == "tabulated") {
        std::vector<double> times = j.at("times").get<std::vector<double>>();
        std::vector<Mat> values;
        for (const auto& v : j.at("values")) values.push_back(parse_matrix(v, what));
        Interp order = Interp::Cubic;
        if (j.contains("interp")) {
            const std::string s = j["interp"].get<std::string>();
            if (s == "linear")
                order = Interp::Linear;
            else if (s == "cubic")
                order = Interp::Cubic;
            else
                throw config_error(std::string(what) + ": interp must be 'linear' or 'cubic'");
        }
        if (std::abs(times.back() - T) > 1e-12 * std::max(1.0, T))
            throw config_error(std::string(what) + ": tabulated samples must cover [0,T]");
        return MatrixPath::tabulated(std::move(times), std::move(values), order);
    }
    throw config_error(std::string(what) + ": unknown path kind '" + kind + "'");
}

json dump_path(const MatrixPath& p) {
    json j;
    if (p.kind() == "constant") {
        j["kind"] = "constant";
        j["matrix"] = dump_matrix(p.constant_value());
    } else if (p.kind() == "builtin") {
        j["kind"] = "builtin";
        j["name"] = p.builtin_name();
        json params = json::object();
        for (const auto& [k, v] : p.builtin_params()) params[k] = v;
        j["params"] = params;
    } else {
        j["kind"] = "tabulated";
        j["times"] = p.sample_times();
        json vals = json::array();
        for (const auto& V : p.sample_values()) vals.push_back(dump_matrix(V));
        j["values"] = vals;
        j["interp"] = (p.interp_order() == Interp::Linear) ? "linear" : "cubic";
    }
    return j;
}

Mat parse_boundary_matrix(const json& j, int dim) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "identity") return Mat::Identity(dim, dim);
        if (s == "anti") return -Mat::Identity(dim, dim);
        throw config_error("S: expected 'identity', 'anti', or a matrix");
    }
    Mat S = parse_matrix(j, "S");
    if (S.rows() != dim || S.cols() != dim) throw config_error("S: dimension mismatch");
    return S;
}

cplx parse_nu(const json& j) {
    if (!j.is_array() || j.size() != 2) throw config_error("nu: expected [re, im]");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

} // namespace

Problem parse_problem_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw config_error(std::string("invalid JSON: ") + e.what());
    }
    for (const char* key : {"n", "T", "S", "nu", "B", "D"})
        if (!j.contains(key)) throw config_error(std::string("missing field '") + key + "'");

    const int n = j["n"].get<int>();
    const double T = j["T"].get<double>();
    if (n < 1) throw config_error("n must be positive");
    if (!(T > 0)) throw config_error("T must be positive");

    Problem p;
    p.n = n;
    p.B = parse_path(j["B"], T, "B");
    p.D = parse_path(j["D"], T, "D");
    if (p.B.dim() != 2 * n || p.D.dim() != 2 * n)
        throw config_error("B/D dimension must equal 2n");
    if (p.B.symmetry_defect() > 1e-12) throw config_error("B must be symmetric");
    if (p.D.symmetry_defect() > 1e-12) throw config_error("D must be symmetric");
    p.bc = BoundaryData::make(parse_boundary_matrix(j["S"], 2 * n), parse_nu(j["nu"]), T);
    return p;
}

std::string serialize_problem_config(const Problem& p) {
    json j;
    j["n"] = p.n;
    j["T"] = p.bc.T;
    const Mat I = Mat::Identity(2 * p.n, 2 * p.n);
    if ((p.bc.S - I).cwiseAbs().maxCoeff() == 0.0)
        j["S"] = "identity";
    else if ((p.bc.S + I).cwiseAbs().maxCoeff() == 0.0)
        j["S"] = "anti";
    else
        j["S"] = dump_matrix(p.bc.S);
    j["nu"] = {p.bc.nu.real(), p.bc.nu.imag()};
    j["B"] = dump_path(p.B);
    j["D"] = dump_path(p.D);
    return j.dump(2);
}

SLConfig parse_sl_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw config_error(std::string("invalid JSON: ") + e.what());
    }
    for (const char* key : {"n", "T", "Sbar", "nu", "P", "Q", "R", "R1"})
        if (!j.contains(key)) throw config_error(std::string("missing field '") + key + "'");

    SLConfig c;
    c.n = j["n"].get<int>();
    c.T = j["T"].get<double>();
    if (c.n < 1 || !(c.T > 0)) throw config_error("need n >= 1 and T > 0");
    c.P = parse_path(j["P"], c.T, "P");
    c.Q = parse_path(j["Q"], c.T, "Q");
    c.R = parse_path(j["R"], c.T, "R");
    c.R1 = parse_path(j["R1"], c.T, "R1");
    for (const MatrixPath* p : {&c.P, &c.Q, &c.R, &c.R1})
        if (p->dim() != c.n) throw config_error("P/Q/R/R1 dimension must equal n");
    c.Sbar = parse_boundary_matrix(j["Sbar"], c.n);
    if (orthogonal_defect(c.Sbar) > 1e-12) throw config_error("Sbar must be orthogonal");
    c.nu = parse_nu(j["nu"]);
    return c;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path + "'");
    out << text;
}

} // namespace hamtrace
