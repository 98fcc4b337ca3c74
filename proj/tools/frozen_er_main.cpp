#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "frozen_er/experiments.hpp"
#include "frozen_er/forest_count.hpp"
#include "frozen_er/forest_sampler.hpp"
#include "frozen_er/simulator.hpp"
#include "frozen_er/verify.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::string config_hash(const frozen_er::json& j) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016zx", std::hash<std::string>{}(j.dump()));
    return buf;
}

void print_header(std::ostream& os, const frozen_er::json& cfg, std::uint64_t seed) {
    os << "# frozen_er " << kVersion << " config=" << config_hash(cfg)
       << " seed=" << seed << "\n";
}

int cmd_fluid(double p, long k, const std::string& what, double t_min, double t_max,
              double t_step, const std::string& out_path) {
    frozen_er::GelCurve curve(p);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        os = &file;
    }
    const frozen_er::json cfg = {{"cmd", "fluid"}, {"p", p},          {"k", k},
                                 {"what", what},   {"t_min", t_min},  {"t_max", t_max},
                                 {"t_step", t_step}};
    print_header(*os, cfg, 0);
    *os << "t,value\n";
    for (double t = t_min; t <= t_max + 1e-12; t += t_step) {
        double v;
        if (what == "g") v = curve.mass(t);
        else if (what == "d") v = curve.discarded(t);
        else if (what == "v") v = curve.forest_vertices(t);
        else if (what == "e") v = curve.forest_edges(t);
        else if (what == "r") v = curve.ratio(t);
        else if (what == "tk") v = curve.tree_density(k, t);
        else throw CLI::ValidationError("--what must be one of g,d,v,e,r,tk");
        char line[64];
        std::snprintf(line, sizeof(line), "%.10g,%.12g\n", t, v);
        *os << line;
    }
    return 0;
}

int cmd_count_forests(long n, long m, bool asymptotic, double cutoff) {
    if (asymptotic) {
        const auto est = frozen_er::britikov_asymptotic(n, m, cutoff);
        const char* regime = est.regime == frozen_er::ForestRegime::Subcritical
                                 ? "subcritical"
                                 : est.regime == frozen_er::ForestRegime::NearCritical
                                       ? "near-critical"
                                       : "supercritical";
        std::printf("regime=%s omega=%.6f log_count=%.6f\n", regime, est.omega,
                    est.log_estimate);
        if (est.log_alternative)
            std::printf("overlap_alternative_log_count=%.6f\n", *est.log_alternative);
        return 0;
    }
    const frozen_er::ForestCountTable table(n);
    std::cout << table.count(n, m).str() << "\n";
    return 0;
}

int cmd_sample_forest(long n, long m, std::uint64_t seed, long count) {
    frozen_er::Xoshiro256 rng(seed);
    const frozen_er::ForestSampler sampler(n, m);
    const frozen_er::json cfg = {{"cmd", "sample-forest"}, {"n", n}, {"m", m}};
    print_header(std::cout, cfg, seed);
    for (long c = 0; c < count; ++c) {
        if (c) std::cout << "---\n";
        const auto forest = sampler.sample(rng);
        bool first = true;
        for (const auto& comp : forest.components) {
            if (!first) std::cout << "\n";
            first = false;
            for (auto [a, b] : forest.edges)
                if (std::find(comp.begin(), comp.end(), a) != comp.end() &&
                    std::find(comp.begin(), comp.end(), b) != comp.end())
                    std::cout << a << " " << b << "\n";
        }
    }
    return 0;
}

int cmd_simulate(const frozen_er::SimConfig& cfg, const std::string& out) {
    const auto rec = frozen_er::run_simulation(cfg);
    frozen_er::json j;
    j["version"] = kVersion;
    j["config"] = {{"n", cfg.n},
                   {"p", cfg.p},
                   {"mode", cfg.mode == frozen_er::SimMode::Discrete ? "discrete"
                                                                     : "poissonized"},
                   {"strict_ppp", cfg.strict_ppp},
                   {"seed", cfg.seed},
                   {"k_max", cfg.k_max},
                   {"grid_points", cfg.grid_points},
                   {"horizon", cfg.horizon}};
    j["config_hash"] = config_hash(j["config"]);
    j["complete"] = rec.complete;
    j["absorption"] = rec.absorption;
    frozen_er::json ak = frozen_er::json::array(),
                    akp = frozen_er::json::array();
    for (long k = 1; k <= cfg.k_max; ++k) {
        ak.push_back(rec.last_tree_of_size[k]);
        akp.push_back(rec.last_tree_at_least[k]);
    }
    j["last_tree_of_size"] = ak;
    j["last_tree_at_least"] = akp;
    std::ofstream js(out + ".json");
    js << j.dump(2) << "\n";

    std::ofstream csv(out + ".csv");
    print_header(csv, j["config"], cfg.seed);
    csv << "t_or_m,G,D,V,E";
    for (long k = 1; k <= cfg.k_max; ++k) csv << ",N" << k;
    csv << "\n";
    for (const auto& pt : rec.trajectory) {
        csv << pt.at << "," << pt.gel << "," << pt.discarded << ","
            << pt.forest_vertices << "," << pt.forest_edges;
        for (long c : pt.tree_counts) csv << "," << c;
        csv << "\n";
    }
    std::printf("absorption=%.6f complete=%d written=%s{.json,.csv}\n", rec.absorption,
                rec.complete ? 1 : 0, out.c_str());
    return 0;
}

frozen_er::json load_config(const std::string& path) {
    if (path.empty()) return frozen_er::json::object();
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("cannot open config file " + path);
    frozen_er::json j;
    in >> j;
    return j;
}

template <typename T>
T cfg_get(const frozen_er::json& j, const std::string& key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

int cmd_experiment(const std::string& name, const std::string& config_path,
                   std::uint64_t seed, const std::string& out_dir) {
    using namespace frozen_er;
    const json c = load_config(config_path);
    ExperimentReport rep;
    if (name == "trajectory") {
        rep = trajectory_experiment(cfg_get(c, "p", 0.5), cfg_get(c, "n", 100000L),
                                    cfg_get(c, "replicas", 20L), cfg_get(c, "horizon", 3.0),
                                    seed, cfg_get(c, "k_max", 10L),
                                    cfg_get(c, "tol_main", -1.0),
                                    cfg_get(c, "tol_trees", -1.0));
    } else if (name == "gelation") {
        rep = gelation_experiment(cfg_get(c, "p", 1.0), cfg_get(c, "n", 100000L),
                                  cfg_get(c, "replicas", 500L), cfg_get(c, "k", 1L), seed);
    } else if (name == "tree-count-poisson") {
        rep = tree_count_poisson_experiment(cfg_get(c, "p", 1.0), cfg_get(c, "n", 100000L),
                                            cfg_get(c, "k", 1L), cfg_get(c, "c", 0.0),
                                            cfg_get(c, "replicas", 2000L), seed);
    } else if (name == "largest-tree") {
        rep = largest_tree_experiment(cfg_get(c, "p", 0.5), cfg_get(c, "n", 100000L),
                                      cfg_get(c, "t", 0.25), cfg_get(c, "replicas", 50L),
                                      seed);
    } else if (name == "typical-tree") {
        rep = typical_tree_experiment(cfg_get(c, "p", 0.5), cfg_get(c, "n", 10000L),
                                      cfg_get(c, "t", 0.25),
                                      cfg_get(c, "replicas", 2000L), seed);
    } else if (name == "pnk-formula") {
        rep = pnk_formula_experiment(cfg_get(c, "p", 0.5), cfg_get(c, "n", 100L),
                                     cfg_get(c, "k", 1L), cfg_get(c, "ell", 1L),
                                     cfg_get(c, "t", 2.0),
                                     cfg_get(c, "replicas", 20000L), seed);
    } else if (name == "factorial-moment") {
        rep = factorial_moment_experiment(cfg_get(c, "p", 0.5), cfg_get(c, "n", 40L),
                                          cfg_get(c, "k", 2L), cfg_get(c, "j", 2L),
                                          cfg_get(c, "t", 1.0),
                                          cfg_get(c, "replicas", 20000L), seed);
    } else if (name == "expectation-bound") {
        std::vector<long> ns = cfg_get(c, "n_list", std::vector<long>{1000, 10000, 100000});
        rep = expectation_bound_experiment(cfg_get(c, "p", 0.5), cfg_get(c, "k", 2L),
                                           cfg_get(c, "k_prime", 1L), cfg_get(c, "c", 0.0),
                                           cfg_get(c, "replicas", 200L), seed, ns);
    } else if (name == "gel-tail") {
        rep = gel_tail_experiment(cfg_get(c, "p", 1.0), cfg_get(c, "n", 10000L),
                                  cfg_get(c, "replicas", 200L), seed);
    } else if (name == "poissonization-agreement") {
        rep = poissonization_agreement_experiment(cfg_get(c, "p", 0.5),
                                                  cfg_get(c, "n", 10000L),
                                                  cfg_get(c, "t", 1.5),
                                                  cfg_get(c, "replicas", 2000L), seed);
    } else {
        throw CLI::ValidationError("unknown experiment: " + name);
    }
    rep.config["seed"] = seed;
    rep.config["version"] = kVersion;
    rep.config["config_hash"] = config_hash(rep.config);
    rep.write_files(out_dir);
    std::printf("%s: %s (%.1fs) -> %s/%s.json\n", rep.name.c_str(),
                rep.pass ? "pass" : "FAIL", rep.wall_seconds, out_dir.c_str(),
                rep.name.c_str());
    return rep.pass ? 0 : 2;
}

int cmd_verify(bool quick, std::uint64_t seed) {
    frozen_er::AcceptanceOptions opt;
    opt.quick = quick;
    opt.seed = seed;
    const auto results = frozen_er::run_acceptance(opt);
    bool all = true;
    for (const auto& r : results) {
        std::printf("%s  criterion %2d: %s (%s) [%.1fs]\n", r.pass ? "PASS" : "FAIL",
                    r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
        all = all && r.pass;
    }
    return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frozen Erdos-Renyi graph simulator and limit-law toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the frozen graph process");
    frozen_er::SimConfig sc;
    std::string sim_mode = "discrete", sim_out = "run";
    sim->add_option("--n", sc.n, "number of vertices")->required();
    sim->add_option("--p", sc.p, "freezing parameter in (0,1]")->required();
    sim->add_option("--mode", sim_mode, "discrete|poissonized");
    sim->add_option("--seed", sc.seed, "RNG seed");
    sim->add_option("--grid", sc.grid_points, "trajectory sample points");
    sim->add_option("--k-max", sc.k_max, "tracked tree sizes");
    sim->add_option("--t-max", sc.horizon, "trajectory horizon in t units");
    sim->add_option("--step-cap", sc.step_cap, "abort after this many steps");
    sim->add_flag("--strict-ppp", sc.strict_ppp,
                  "ignore rings on already-added edges (Poissonized mode)");
    sim->add_flag("--keep-edges", sc.keep_edges, "retain the edge set (small n)");
    sim->add_option("--out", sim_out, "output basename (.json/.csv)");

    // fluid
    auto* fl = app.add_subcommand("fluid", "dump a fluid-limit function as CSV");
    double fl_p = 1.0, fl_tmin = 0.0, fl_tmax = 3.0, fl_tstep = 0.01;
    long fl_k = 1;
    std::string fl_what = "g", fl_out;
    fl->add_option("--p", fl_p, "freezing parameter")->required();
    fl->add_option("--k", fl_k, "tree size for --what tk");
    fl->add_option("--what", fl_what, "g|d|v|e|r|tk");
    fl->add_option("--t-min", fl_tmin);
    fl->add_option("--t-max", fl_tmax);
    fl->add_option("--t-step", fl_tstep);
    fl->add_option("--out", fl_out, "output file (default stdout)");

    // count-forests
    auto* cf = app.add_subcommand("count-forests", "count labeled forests");
    long cf_n = 0, cf_m = 0;
    bool cf_exact = false, cf_asym = false;
    double cf_cutoff = 1.0;
    cf->add_option("--n", cf_n, "vertices")->required();
    cf->add_option("--m", cf_m, "edges")->required();
    cf->add_flag("--exact", cf_exact, "exact big-integer count (default)");
    cf->add_flag("--asymptotic", cf_asym, "log-scale asymptotic estimate");
    cf->add_option("--cutoff", cf_cutoff, "|omega| regime cutoff");

    // sample-forest
    auto* sf = app.add_subcommand("sample-forest", "sample uniform labeled forests");
    long sf_n = 0, sf_m = 0, sf_count = 1;
    std::uint64_t sf_seed = 1;
    sf->add_option("--n", sf_n)->required();
    sf->add_option("--m", sf_m)->required();
    sf->add_option("--seed", sf_seed)->required();
    sf->add_option("--count", sf_count, "number of samples");

    // experiment
    auto* ex = app.add_subcommand("experiment", "run a verification experiment");
    std::string ex_name, ex_config, ex_out = "reports";
    std::uint64_t ex_seed = 1;
    ex->add_option("--name", ex_name, "experiment id")->required();
    ex->add_option("--config", ex_config, "JSON config file");
    ex->add_option("--seed", ex_seed, "master seed");
    ex->add_option("--out", ex_out, "output directory");

    // verify
    auto* vf = app.add_subcommand("verify", "run the acceptance suite");
    bool vf_quick = false, vf_full = false;
    std::uint64_t vf_seed = 20240901;
    vf->add_flag("--quick", vf_quick, "small-n exact checks only");
    vf->add_flag("--full", vf_full, "full Monte Carlo battery (default)");
    vf->add_option("--seed", vf_seed, "master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            if (sim_mode == "poissonized") sc.mode = frozen_er::SimMode::Poissonized;
            else if (sim_mode != "discrete")
                throw CLI::ValidationError("--mode must be discrete or poissonized");
            return cmd_simulate(sc, sim_out);
        }
        if (fl->parsed()) return cmd_fluid(fl_p, fl_k, fl_what, fl_tmin, fl_tmax, fl_tstep, fl_out);
        if (cf->parsed()) return cmd_count_forests(cf_n, cf_m, cf_asym && !cf_exact, cf_cutoff);
        if (sf->parsed()) return cmd_sample_forest(sf_n, sf_m, sf_seed, sf_count);
        if (ex->parsed()) return cmd_experiment(ex_name, ex_config, ex_seed, ex_out);
        if (vf->parsed()) return cmd_verify(vf_quick && !vf_full, vf_seed);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 1;
}
