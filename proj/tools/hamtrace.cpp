#include "hamtrace/config.hpp"
#include "hamtrace/galerkin.hpp"
#include "hamtrace/index_stability.hpp"
#include "hamtrace/iterated_integrals.hpp"
#include "hamtrace/monodromy.hpp"
#include "hamtrace/spectral_oracle.hpp"
#include "hamtrace/sturm_liouville.hpp"
#include "hamtrace/threebody.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdlib>
#include <iostream>

using namespace hamtrace;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "hamtrace 1.0.0";

// FNV-1a 64-bit content digest for the run manifest
std::string digest(const std::string& text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct ManifestWriter {
    std::string subcommand;
    json entries = json::array();
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void add_output(const std::string& path, const std::string& content) {
        write_file(path, content);
        entries.push_back({{"path", path}, {"digest", digest(content)}});
    }
    void finish(const std::string& config_digest, double tol) {
        if (entries.empty()) return;
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json m;
        m["subcommand"] = subcommand;
        m["tool"] = kVersion;
        m["config_digest"] = config_digest;
        m["tolerance"] = tol;
        m["wall_time_s"] = wall;
        m["outputs"] = entries;
        const std::string first = entries[0]["path"].get<std::string>();
        write_file(first + ".manifest.json", m.dump(2));
    }
};

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx parse_omega_token(std::string tok) {
    if (tok == "1") return {1.0, 0.0};
    if (tok == "-1") return {-1.0, 0.0};
    if (tok == "i") return {0.0, 1.0};
    if (tok == "-i") return {0.0, -1.0};
    // a+bi / a-bi
    const auto pos = tok.find_last_of("+-");
    if (pos != std::string::npos && pos > 0 && tok.back() == 'i') {
        const double re = std::stod(tok.substr(0, pos));
        std::string imtok = tok.substr(pos, tok.size() - pos - 1);
        if (imtok == "+" ) imtok = "1";
        if (imtok == "-") imtok = "-1";
        return {re, std::stod(imtok)};
    }
    return {std::stod(tok), 0.0};
}

int jobs_from(int cli_jobs) {
    if (const char* env = std::getenv("HAMTRACE_JOBS")) return std::atoi(env);
    return cli_jobs;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trace formulas, spectral oracles and stability regions for "
                 "twisted-periodic linear Hamiltonian systems"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    int cli_jobs = 0;
    app.add_option("--jobs", cli_jobs, "worker threads (default: logical cores)");

    // ---------------- monodromy ----------------
    auto* cmd_mono = app.add_subcommand("monodromy", "monodromy matrix and eigenvalue layout");
    std::string cfg_path, out_path = "report.json", lambda_str = "0,0";
    double tol = 1e-10;
    cmd_mono->add_option("--config", cfg_path, "problem JSON")->required();
    cmd_mono->add_option("--lambda", lambda_str, "re,im of the pencil parameter");
    cmd_mono->add_option("--tol", tol, "integrator tolerance");
    cmd_mono->add_option("--out", out_path, "output JSON");

    // ---------------- trace ----------------
    auto* cmd_trace = app.add_subcommand("trace", "reciprocal eigenvalue power traces");
    std::string tr_cfg, tr_out = "traces.json";
    int m_max = 4;
    double tr_tol = 1e-11;
    cmd_trace->add_option("--config", tr_cfg)->required();
    cmd_trace->add_option("--m-max", m_max);
    cmd_trace->add_option("--tol", tr_tol);
    cmd_trace->add_option("--out", tr_out);

    // ---------------- identities ----------------
    auto* cmd_id = app.add_subcommand("identities", "closed forms vs partial eigenvalue sums");
    int id_m = 2;
    double id_alpha = 0.0, id_nu_re = 1.0, id_nu_im = 0.0;
    long id_K = 10000;
    cmd_id->add_option("--m", id_m);
    cmd_id->add_option("--alpha", id_alpha);
    cmd_id->add_option("--nu", id_nu_re);
    cmd_id->add_option("--nu-imag", id_nu_im);
    cmd_id->add_option("--K", id_K);

    // ---------------- oracle ----------------
    auto* cmd_oracle = app.add_subcommand("oracle", "independent spectral verification");
    auto* cmd_eigs = cmd_oracle->add_subcommand("eigs", "eigenvalues by determinant root finding");
    std::string oe_cfg, oe_window = "-200,200", oe_out;
    int oe_grid = 4000;
    double oe_tol = 1e-10;
    bool oe_sqrt = false;
    cmd_eigs->add_option("--config", oe_cfg)->required();
    cmd_eigs->add_option("--window", oe_window, "lo,hi (symmetric window uses max |.|)");
    cmd_eigs->add_option("--grid", oe_grid);
    cmd_eigs->add_option("--tol", oe_tol);
    cmd_eigs->add_flag("--sqrt-density", oe_sqrt, "scan uniformly in sign(l)sqrt|l|");
    cmd_eigs->add_option("--out", oe_out);

    auto* cmd_hill = cmd_oracle->add_subcommand("hill", "eigenvalue product vs monodromy ratio");
    std::string oh_cfg, oh_out;
    double oh_alpha = 1.0;
    int oh_K = 256;
    cmd_hill->add_option("--config", oh_cfg, "second-order problem JSON")->required();
    cmd_hill->add_option("--alpha", oh_alpha, "perturbation scale");
    cmd_hill->add_option("--K", oh_K, "Fourier truncation for the eigenvalue side");
    cmd_hill->add_option("--out", oh_out);

    // ---------------- sl ----------------
    auto* cmd_sl = app.add_subcommand("sl", "second-order (Sturm-Liouville) layer");
    auto* cmd_sl_trace = cmd_sl->add_subcommand("trace", "eigenvalue power sums");
    std::string sl_cfg, sl_out;
    int sl_mmax = 3;
    cmd_sl_trace->add_option("--config", sl_cfg)->required();
    cmd_sl_trace->add_option("--m-max", sl_mmax);
    cmd_sl_trace->add_option("--out", sl_out);

    auto* cmd_sl_krein = cmd_sl->add_subcommand("krein", "classical anti-periodic closed forms");
    std::string kr_cfg, kr_out;
    cmd_sl_krein->add_option("--config", kr_cfg, "JSON with n, T and path R")->required();
    cmd_sl_krein->add_option("--out", kr_out);

    // ---------------- index ----------------
    auto* cmd_index = app.add_subcommand("index", "relative Morse index bounds");
    auto* cmd_bracket = cmd_index->add_subcommand("bracket", "two-sided trace bracket + oracle");
    std::string ib_cfg, ib_d1, ib_d2, ib_out;
    int ib_kmax = 4;
    cmd_bracket->add_option("--config", ib_cfg)->required();
    cmd_bracket->add_option("--d1", ib_d1, "path JSON for the negative bracket")->required();
    cmd_bracket->add_option("--d2", ib_d2, "path JSON for the positive bracket")->required();
    cmd_bracket->add_option("--kmax", ib_kmax);
    cmd_bracket->add_option("--out", ib_out);

    // ---------------- stability ----------------
    auto* cmd_stab = app.add_subcommand("stability", "per-omega stability claims");
    std::string st_cfg, st_omegas = "-1", st_out;
    cmd_stab->add_option("--config", st_cfg)->required();
    cmd_stab->add_option("--omegas", st_omegas, "comma separated (1, -1, i, a+bi)");
    cmd_stab->add_option("--out", st_out);

    // ---------------- threebody ----------------
    auto* cmd_tb = app.add_subcommand("threebody", "planar three-body application");
    auto* tb_f = cmd_tb->add_subcommand("f", "order-2 trace kernel of the circular problem");
    double tbf_beta = 2.0;
    std::string tbf_omega = "-1";
    tb_f->add_option("--beta", tbf_beta)->required();
    tb_f->add_option("--omega", tbf_omega);

    auto* tb_g = cmd_tb->add_subcommand("g", "first-order trace kernel");
    double tbg_beta = 4.0, tbg_u = 0.5;
    tb_g->add_option("--beta", tbg_beta)->required();
    tb_g->add_option("--u", tbg_u, "imaginary part of nu");

    auto* tb_curves = cmd_tb->add_subcommand("curves", "certified region boundary curves");
    int tbc_res = 400;
    std::string tbc_out = "curves.csv";
    tb_curves->add_option("--resolution", tbc_res);
    tb_curves->add_option("--out", tbc_out);

    auto* tb_classify = cmd_tb->add_subcommand("classify", "strongest certified claim at (beta, e)");
    double tcl_beta = 0.0, tcl_e = 0.0;
    tb_classify->add_option("--beta", tcl_beta)->required();
    tb_classify->add_option("--e", tcl_e)->required();

    auto* tb_beta = cmd_tb->add_subcommand("beta", "mass parameter of a mass triple");
    double mb1 = 1, mb2 = 1, mb3 = 1;
    tb_beta->add_option("--m1", mb1);
    tb_beta->add_option("--m2", mb2);
    tb_beta->add_option("--m3", mb3);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_mono) {
            const std::string text = read_file(cfg_path);
            Problem p = parse_problem_config(text);
            double lre = 0, lim = 0;
            std::sscanf(lambda_str.c_str(), "%lf,%lf", &lre, &lim);
            json out;
            if (lre != 0.0 || lim != 0.0) {
                auto fs = integrate_fundamental(p.B, cplx(lre, lim), &p.D, tol);
                out["lambda"] = cplx_json(cplx(lre, lim));
                out["sympl_drift"] = fs.sympl_drift();
                out["steps"] = fs.stats().steps;
                const CMat M = p.bc.S.cast<cplx>() * fs.at_T();
                Eigen::ComplexEigenSolver<CMat> es(M);
                json evs = json::array();
                for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                    evs.push_back(cplx_json(es.eigenvalues()(i)));
                out["eigenvalues"] = evs;
            } else {
                auto rep = monodromy(p.B, p.bc, {p.bc.omega}, tol);
                json evs = json::array();
                for (cplx mu : rep.eigenvalues) evs.push_back(cplx_json(mu));
                out["eigenvalues"] = evs;
                out["classification"] = rep.classification;
                out["e_total"] = rep.e_total;
                out["sympl_drift"] = rep.sympl_drift;
            }
            ManifestWriter mw{"monodromy"};
            mw.add_output(out_path, out.dump(2) + "\n");
            mw.finish(digest(text), tol);
            return 0;
        }

        if (*cmd_trace) {
            const std::string text = read_file(tr_cfg);
            Problem p = parse_problem_config(text);
            TraceReport rep = trace_power(p.B, p.D, p.bc, m_max, tr_tol);
            json out;
            out["m_max"] = rep.m_max;
            json vals = json::array();
            for (int m = 1; m <= rep.m_max; ++m)
                vals.push_back({{"m", m},
                                {"value", cplx_json(rep.values[m - 1])},
                                {"method", rep.method[m - 1]}});
            out["traces"] = vals;
            out["closed_form_m1"] = cplx_json(rep.closed_form_m1);
            out["closed_form_m2"] = cplx_json(rep.closed_form_m2);
            out["resolvent_rcond"] = rep.resolvent_rcond;
            ManifestWriter mw{"trace"};
            mw.add_output(tr_out, out.dump(2) + "\n");
            mw.finish(digest(text), tr_tol);
            return 0;
        }

        if (*cmd_id) {
            auto r = identity_suite(cplx(id_nu_re, id_nu_im), cplx(id_alpha, 0.0), id_m, id_K);
            json out;
            out["closed_form"] = cplx_json(r.closed_form);
            out["partial_sum"] = cplx_json(r.partial_sum);
            out["tail_value"] = cplx_json(r.tail_value);
            out["tail_bound"] = r.tail_bound;
            out["corrected_minus_closed"] =
                std::abs(r.partial_sum + r.tail_value - r.closed_form);
            std::cout << out.dump(2) << std::endl;
            return 0;
        }

        if (*cmd_eigs) {
            const std::string text = read_file(oe_cfg);
            Problem p = parse_problem_config(text);
            double lo = 0, hi = 0;
            std::sscanf(oe_window.c_str(), "%lf,%lf", &lo, &hi);
            const double window = std::max(std::abs(lo), std::abs(hi));
            auto slice = eigenvalues_by_shooting(p.B, p.D, p.bc, window, oe_grid, oe_tol, oe_sqrt);
            json out;
            json evs = json::array();
            for (const auto& e : slice.eigenvalues)
                evs.push_back({{"lambda", e.lambda}, {"mult", e.multiplicity}, {"residual", e.residual}});
            out["eigenvalues"] = evs;
            out["method"] = slice.method;
            out["tail"] = {{"pos_slope", slice.fit_pos.slope},
                           {"pos_intercept", slice.fit_pos.intercept},
                           {"neg_slope", slice.fit_neg.slope},
                           {"neg_intercept", slice.fit_neg.intercept}};
            auto p2 = reciprocal_power_sum(slice, 2);
            out["power_sum_m2"] = {{"value", cplx_json(p2.value)}, {"error_bound", p2.error_bound}};
            const std::string dumped = out.dump(2) + "\n";
            if (oe_out.empty())
                std::cout << dumped;
            else {
                ManifestWriter mw{"oracle eigs"};
                mw.add_output(oe_out, dumped);
                mw.finish(digest(text), oe_tol);
            }
            return 0;
        }

        if (*cmd_hill) {
            const std::string text = read_file(oh_cfg);
            SLConfig c = parse_sl_config(text);
            // scaled perturbation alpha R1
            MatrixPath R1s = c.R1;
            if (oh_alpha != 1.0) {
                auto base = std::make_shared<MatrixPath>(c.R1);
                const double a = oh_alpha;
                R1s = MatrixPath::builtin("scaled_r1", c.n, c.T,
                                          [base, a](double t) { return Mat(a * base->eval(t)); });
            }
            SturmLiouvilleProblem slp(c.P, c.Q, c.R, R1s, c.Sbar, 0.0);
            auto slice = sl_eigenvalues_galerkin(slp, oh_K);
            auto hf = to_hamiltonian(slp);
            auto hr = hill_ratio_check(hf.B, hf.D, hf.bc, slice);
            json out;
            out["lhs"] = cplx_json(hr.lhs);
            out["rhs"] = cplx_json(hr.rhs);
            out["rel_err"] = hr.rel_err;
            out["eigenvalues_used"] = slice.total_multiplicity();
            const std::string dumped = out.dump(2) + "\n";
            if (oh_out.empty())
                std::cout << dumped;
            else {
                ManifestWriter mw{"oracle hill"};
                mw.add_output(oh_out, dumped);
                mw.finish(digest(text), 1e-11);
            }
            return 0;
        }

        if (*cmd_sl_trace) {
            const std::string text = read_file(sl_cfg);
            SLConfig c = parse_sl_config(text);
            SturmLiouvilleProblem slp(c.P, c.Q, c.R, c.R1, c.Sbar, c.nu);
            TraceReport rep = lagrangian_trace(slp, sl_mmax);
            json out;
            json vals = json::array();
            for (int m = 1; m <= rep.m_max; ++m)
                vals.push_back({{"m", m}, {"value", cplx_json(rep.values[m - 1])}});
            out["power_sums"] = vals;
            const std::string dumped = out.dump(2) + "\n";
            if (sl_out.empty())
                std::cout << dumped;
            else {
                ManifestWriter mw{"sl trace"};
                mw.add_output(sl_out, dumped);
                mw.finish(digest(text), 1e-11);
            }
            return 0;
        }

        if (*cmd_sl_krein) {
            const std::string text = read_file(kr_cfg);
            json j = json::parse(text);
            const double T = j.at("T").get<double>();
            // reuse the document parser for the single path field
            KreinData kd;
            kd.T = T;
            json slwrap = {{"n", j.at("n")}, {"T", T}, {"Sbar", "anti"}, {"nu", {0.0, 0.0}},
                           {"P", j.at("R")}, {"Q", j.at("R")}, {"R", j.at("R")}, {"R1", j.at("R")}};
            kd.R = parse_sl_config(slwrap.dump()).R;
            auto [s1, s2] = krein_sums(kd);
            json out;
            out["sum_reciprocal"] = s1;
            out["sum_reciprocal_squared"] = s2;
            const std::string dumped = out.dump(2) + "\n";
            if (kr_out.empty())
                std::cout << dumped;
            else {
                ManifestWriter mw{"sl krein"};
                mw.add_output(kr_out, dumped);
                mw.finish(digest(text), 1e-11);
            }
            return 0;
        }

        if (*cmd_bracket) {
            const std::string text = read_file(ib_cfg);
            Problem p = parse_problem_config(text);
            // bracket paths are path-spec documents sharing the problem period
            auto parse_bracket = [&](const std::string& path) {
                json pj = json::parse(read_file(path));
                json wrap = {{"n", p.n},  {"T", p.bc.T},  {"S", "identity"},
                             {"nu", {0.0, 0.0}}, {"B", pj}, {"D", pj}};
                return parse_problem_config(wrap.dump()).B;
            };
            MatrixPath D1 = parse_bracket(ib_d1), D2 = parse_bracket(ib_d2);
            auto rep = index_bracket(p.B, p.D, p.bc, D1, D2, ib_kmax);
            json out;
            out["m_minus"] = rep.m_minus;
            out["m_plus"] = rep.m_plus;
            out["nondegenerate_certified"] = rep.nondegenerate_certified;
            out["crossing_count"] = rep.crossing_count;
            out["galerkin_index"] = rep.galerkin_index;
            out["oracle_ok"] = rep.oracle_ok;
            const std::string dumped = out.dump(2) + "\n";
            if (ib_out.empty())
                std::cout << dumped;
            else {
                ManifestWriter mw{"index bracket"};
                mw.add_output(ib_out, dumped);
                mw.finish(digest(text), 1e-11);
            }
            return 0;
        }

        if (*cmd_stab) {
            const std::string text = read_file(st_cfg);
            Problem p = parse_problem_config(text);
            std::vector<cplx> omegas;
            std::stringstream ss(st_omegas);
            std::string tok;
            while (std::getline(ss, tok, ',')) omegas.push_back(parse_omega_token(tok));
            auto verdict = stability_criteria(p.B, p.D, p.bc, omegas);
            json out = json::array();
            for (const auto& c : verdict.claims)
                out.push_back({{"omega", cplx_json(c.omega)},
                               {"claim", c.claim},
                               {"criterion", c.criterion},
                               {"trace2", cplx_json(c.trace2)},
                               {"e_omega_bound", c.e_omega_bound}});
            const std::string dumped = out.dump(2) + "\n";
            if (st_out.empty())
                std::cout << dumped;
            else {
                ManifestWriter mw{"stability"};
                mw.add_output(st_out, dumped);
                mw.finish(digest(text), 1e-11);
            }
            return 0;
        }

        if (*tb_f) {
            const double v = threebody::f_eval(tbf_beta, parse_omega_token(tbf_omega));
            json out = {{"beta", tbf_beta}, {"f", v}};
            std::cout << out.dump(2) << std::endl;
            return 0;
        }
        if (*tb_g) {
            const double v = threebody::g_closed(tbg_beta, cplx(0, tbg_u));
            json out = {{"beta", tbg_beta}, {"u", tbg_u}, {"g", v}};
            std::cout << out.dump(2) << std::endl;
            return 0;
        }
        if (*tb_curves) {
            auto curves = threebody::region_curves(tbc_res, jobs_from(cli_jobs));
            std::string csv = "curve_tag,beta,e\n";
            for (const auto& c : curves)
                for (const auto& pt : c.samples) {
                    char buf[96];
                    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", c.tag.c_str(), pt.beta,
                                  pt.e);
                    csv += buf;
                }
            ManifestWriter mw{"threebody curves"};
            mw.add_output(tbc_out, csv);
            mw.finish(digest(std::to_string(tbc_res)), 0.0);
            return 0;
        }
        if (*tb_classify) {
            auto res = threebody::classify_point(tcl_beta, tcl_e);
            json out;
            out["beta"] = tcl_beta;
            out["e"] = tcl_e;
            out["verdict"] = res.verdict;
            out["criterion"] = res.criterion;
            if (res.normal_form) out["normal_form"] = *res.normal_form;
            json evs = json::array();
            for (cplx mu : res.eigenvalues) evs.push_back(cplx_json(mu));
            out["monodromy_eigenvalues"] = evs;
            out["eigenvalue_configuration"] = res.eigenvalue_configuration;
            std::cout << out.dump(2) << std::endl;
            return 0;
        }
        if (*tb_beta) {
            json out = {{"beta", threebody::beta_of_masses(mb1, mb2, mb3)}};
            std::cout << out.dump(2) << std::endl;
            return 0;
        }
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 2;
}
