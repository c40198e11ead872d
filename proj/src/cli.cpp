#include "vdbelief/cli.hpp"

#include <iostream>

#include <CLI11.hpp>

#include "vdbelief/error.hpp"
#include "vdbelief/experiments.hpp"
#include "vdbelief/json_io.hpp"
#include "vdbelief/lattice.hpp"

namespace vdbelief {

namespace {

struct GlobalFlags {
    int threads = 1;
    std::string kl_base = "e";
    bool include_ties = false;
    std::string u_weighting = "paper";

    double kl_base_value() const {
        if (kl_base == "e") return 0.0;
        return std::stod(kl_base);
    }
    BoundOptions bound_options() const {
        BoundOptions o;
        o.threads = threads;
        o.switch_opts.include_ties = include_ties;
        o.u_weighting = u_weighting == "time" ? UWeighting::Time : UWeighting::Paper;
        return o;
    }
};

FactoredPOMDP load_model(const std::string& path) { return parse_model(read_file(path)); }

std::vector<ValueFunction> load_vfs(const std::string& path, const FactoredPOMDP& m) {
    return value_functions_from_json(Json::parse(read_file(path)), m);
}

int cmd_solve(const std::string& model_path, int horizon, bool infinite, double epsilon,
              const std::string& out) {
    FactoredPOMDP m = load_model(model_path);
    if (infinite) {
        ValueFunction star = solve_infinite(m, epsilon);
        std::cout << "stage *: " << star.vectors.size() << " vectors\n";
        if (!out.empty()) write_file(out, value_functions_to_json({star}, m).dump(2) + "\n");
        return 0;
    }
    if (horizon == -1) {
        if (!m.horizon) throw DomainError("model has no horizon; pass --horizon or --infinite");
        horizon = *m.horizon;
    }
    if (horizon < 1) throw DomainError("horizon must be >= 1");
    auto vfs = solve_finite(m, horizon);
    for (const auto& vf : vfs)
        std::cout << "stage " << vf.stage << ": " << vf.vectors.size() << " vectors\n";
    if (!out.empty()) write_file(out, value_functions_to_json(vfs, m).dump(2) + "\n");
    return 0;
}

int cmd_search(const GlobalFlags& g, const std::string& model_path, const std::string& vf_path,
               const std::string& bound, const std::string& horizon_kind, int max_constraints,
               const std::string& out_assignment, const std::string& out_bounds) {
    FactoredPOMDP m = load_model(model_path);
    auto vfs = load_vfs(vf_path, m);
    SearchOptions opts;
    opts.bounds = g.bound_options();

    SearchResult result;
    if (horizon_kind == "infinite") {
        if (vfs.size() != 1 || vfs[0].stage != kInfiniteStage)
            throw DomainError("infinite search expects a single infinite-horizon set");
        result = greedy_search_infinite(
            m, vfs[0], bound == "e" ? BoundKind::EInfinite : BoundKind::UInfinite, max_constraints,
            opts);
    } else {
        result = greedy_search(m, vfs, bound == "e" ? BoundKind::EFinite : BoundKind::UFinite,
                               max_constraints, opts);
    }
    std::cout << "bound " << result.bound.value << " (" << bound << ", " << horizon_kind << ", c="
              << max_constraints << ")\n";
    if (!out_assignment.empty())
        write_file(out_assignment, assignment_to_json(result.assignment, m).dump(2) + "\n");
    if (!out_bounds.empty())
        write_file(out_bounds, bound_report_to_json(result.report, m).dump(2) + "\n");
    return 0;
}

int cmd_bounds(const GlobalFlags& g, const std::string& model_path, const std::string& vf_path,
               const std::string& assignment_path, int e_stages, const std::string& out) {
    FactoredPOMDP m = load_model(model_path);
    auto vfs = load_vfs(vf_path, m);
    SchemeAssignment assignment = assignment_from_json(Json::parse(read_file(assignment_path)), m);
    BoundOptions opts = g.bound_options();
    opts.e_infinite_stages = e_stages;

    Json out_json;
    if (vfs.size() == 1 && vfs[0].stage == kInfiniteStage) {
        out_json["u"] = bound_report_to_json(u_bound_infinite_report(m, vfs[0], assignment, opts), m);
        out_json["e"] =
            bound_report_to_json(e_bound_infinite(m, vfs[0], assignment, opts).report, m);
    } else {
        out_json["u"] = bound_report_to_json(u_bound_report(m, vfs, assignment, opts).report, m);
        out_json["e"] = bound_report_to_json(e_bound_finite(m, vfs, assignment, opts).report, m);
    }
    std::cout << "U = " << out_json["u"]["value"].dump()
              << ", E = " << out_json["e"]["value"].dump() << "\n";
    if (!out.empty()) write_file(out, out_json.dump(2) + "\n");
    else std::cout << out_json.dump(2) << "\n";
    return 0;
}

int cmd_exec(const std::string& model_path, const std::string& vf_path,
             const std::string& assignment_path, const std::string& prior_path, bool exact,
             int approx_from, int mc_trials, std::uint64_t seed, const std::string& out) {
    FactoredPOMDP m = load_model(model_path);
    auto vfs = load_vfs(vf_path, m);
    ExecutionConfig cfg;
    cfg.monitoring = exact ? Monitoring::Exact : Monitoring::Projected;
    if (!exact) {
        if (assignment_path.empty()) throw DomainError("projected execution needs an assignment");
        cfg.assignment = assignment_from_json(Json::parse(read_file(assignment_path)), m);
    }
    cfg.prior = prior_path.empty()
                    ? BeliefState{Vector(m.space.size(), 1.0 / m.space.size())}
                    : belief_from_json(Json::parse(read_file(prior_path)), m);
    cfg.horizon = static_cast<int>(vfs.size());
    cfg.approx_from = approx_from;
    cfg.rng_seed = seed;

    ExecutionReport rep = mc_trials > 0 ? monte_carlo_loss(m, vfs, cfg, mc_trials)
                                        : execute_exact_loss(m, vfs, cfg);
    std::cout << execution_report_csv(rep, cfg.prior) << "\n";
    if (!out.empty()) write_file(out, execution_report_to_json(rep).dump(2) + "\n");
    else std::cout << execution_report_to_json(rep).dump(2) << "\n";
    return 0;
}

int cmd_table2(const GlobalFlags& g, double prior, const std::string& out) {
    FactoredPOMDP m = factory_model();
    auto vfs = solve_finite(m, *m.horizon);
    ExperimentResult res = run_table2(m, vfs, prior, g.kl_base_value());
    std::cout << "correlation stage      l1      l2      kl    loss  ref\n";
    for (const auto& row : res.rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-11s %5d %7.4f %7.4f %7.4f %7.4f  %s",
                      row["correlation"].get<std::string>().c_str(), row["stage"].get<int>(),
                      row["l1"].get<double>(), row["l2"].get<double>(), row["kl"].get<double>(),
                      row["loss"].get<double>(),
                      row["matches_reference"].get<bool>() ? "match" : "-");
        std::cout << line << "\n";
    }
    if (!out.empty()) write_file(out, res.to_json().dump(2) + "\n");
    return 0;
}

int cmd_random_priors(int trials, std::uint64_t seed, const std::string& scheme,
                      const std::string& prior_model, const std::string& out) {
    FactoredPOMDP m = factory_model();
    auto vfs = solve_finite(m, *m.horizon);
    RandomPriorsOptions opts;
    opts.trials = trials;
    opts.seed = seed;
    opts.use_f3f4 = scheme == "f3f4";
    opts.full_joint = scheme == "full";
    if (prior_model == "dirichlet") opts.prior_model = PriorModel::Dirichlet;
    else if (prior_model == "normalized-uniform") opts.prior_model = PriorModel::NormalizedUniform;
    else if (prior_model == "fm-only") opts.prior_model = PriorModel::FmOnly;
    else throw DomainError("unknown prior model: " + prior_model);

    ExperimentResult res = run_random_priors(m, vfs, opts);
    const auto& r = res.rows.front();
    std::cout << "prior model " << prior_model << ": " << r["suboptimal_runs"].get<int>() << "/"
              << trials << " runs suboptimal (fraction "
              << r["suboptimal_fraction"].get<double>() << "), avg loss over those "
              << r["avg_loss_conditional"].get<double>() << ", unconditional "
              << r["avg_loss_unconditional"].get<double>() << "\n";
    if (!out.empty()) write_file(out, res.to_json().dump(2) + "\n");
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"value-directed belief approximation toolkit"};
    app.require_subcommand(1);

    GlobalFlags g;
    app.add_option("--threads", g.threads, "worker threads for independent LP batches")
        ->check(CLI::PositiveNumber);
    app.add_option("--kl-base", g.kl_base, "KL logarithm base: e or a number");
    app.add_flag("--include-ties", g.include_ties, "count exact ties as switch-set members");
    app.add_option("--u-weighting", g.u_weighting, "per-stage weights: paper or time")
        ->check(CLI::IsMember({"paper", "time"}));

    // solve
    auto* solve = app.add_subcommand("solve", "solve a model and write the value functions");
    std::string solve_model, solve_out;
    int solve_horizon = -1;
    bool solve_infinite_flag = false;
    double solve_epsilon = 1e-6;
    solve->add_option("model", solve_model)->required();
    solve->add_option("--horizon", solve_horizon);
    solve->add_flag("--infinite", solve_infinite_flag);
    solve->add_option("--epsilon", solve_epsilon);
    solve->add_option("--out", solve_out);

    // search
    auto* search = app.add_subcommand("search", "greedy lattice search for projection schemes");
    std::string search_model, search_vf, search_bound = "e", search_horizon = "finite";
    std::string search_out_assignment, search_out_bounds;
    int search_c = 0;
    search->add_option("model", search_model)->required();
    search->add_option("vf", search_vf)->required();
    search->add_option("--bound", search_bound)->check(CLI::IsMember({"u", "e"}));
    search->add_option("--horizon", search_horizon)->check(CLI::IsMember({"finite", "infinite"}));
    search->add_option("--max-constraints,-c", search_c)->required();
    search->add_option("--out-assignment", search_out_assignment);
    search->add_option("--out-bounds", search_out_bounds);

    // bounds
    auto* bounds = app.add_subcommand("bounds", "U and E bounds for an assignment");
    std::string bounds_model, bounds_vf, bounds_assignment, bounds_out;
    int bounds_e_stages = 3;
    bounds->add_option("model", bounds_model)->required();
    bounds->add_option("vf", bounds_vf)->required();
    bounds->add_option("assignment", bounds_assignment)->required();
    bounds->add_option("--e-stages", bounds_e_stages);
    bounds->add_option("--out", bounds_out);

    // exec
    auto* exec = app.add_subcommand("exec", "execute a policy under exact or projected monitoring");
    std::string exec_model, exec_vf, exec_assignment, exec_prior, exec_out;
    bool exec_exact = false;
    int exec_approx_from = 0, exec_mc = 0;
    std::uint64_t exec_seed = 1;
    exec->add_option("model", exec_model)->required();
    exec->add_option("vf", exec_vf)->required();
    exec->add_option("assignment", exec_assignment);
    exec->add_option("--prior", exec_prior);
    exec->add_flag("--exact", exec_exact);
    exec->add_option("--approx-from", exec_approx_from);
    exec->add_option("--mc", exec_mc, "Monte Carlo trials (0 = exact enumeration)");
    exec->add_option("--seed", exec_seed);
    exec->add_option("--out", exec_out);

    // table2
    auto* table2 = app.add_subcommand("table2", "distance-measure comparison experiment");
    double table2_prior = 0.5;
    std::string table2_out;
    table2->add_option("--prior", table2_prior);
    table2->add_option("--out", table2_out);

    // random-priors
    auto* rp = app.add_subcommand("random-priors", "random-prior loss experiment");
    int rp_trials = 1000;
    std::uint64_t rp_seed = 1;
    std::string rp_scheme = "f1f2", rp_model = "dirichlet", rp_out;
    rp->add_option("--trials", rp_trials)->check(CLI::PositiveNumber);
    rp->add_option("--seed", rp_seed);
    rp->add_option("--scheme", rp_scheme)->check(CLI::IsMember({"f1f2", "f3f4", "full"}));
    rp->add_option("--prior-model", rp_model)
        ->check(CLI::IsMember({"dirichlet", "normalized-uniform", "fm-only"}));
    rp->add_option("--out", rp_out);

    // factory
    auto* fact = app.add_subcommand("factory", "write the built-in factory model file");
    std::string fact_emit;
    fact->add_option("--emit", fact_emit)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*solve)
            return cmd_solve(solve_model, solve_horizon, solve_infinite_flag, solve_epsilon,
                             solve_out);
        if (*search)
            return cmd_search(g, search_model, search_vf, search_bound, search_horizon, search_c,
                              search_out_assignment, search_out_bounds);
        if (*bounds)
            return cmd_bounds(g, bounds_model, bounds_vf, bounds_assignment, bounds_e_stages,
                              bounds_out);
        if (*exec)
            return cmd_exec(exec_model, exec_vf, exec_assignment, exec_prior, exec_exact,
                            exec_approx_from, exec_mc, exec_seed, exec_out);
        if (*table2) return cmd_table2(g, table2_prior, table2_out);
        if (*rp) return cmd_random_priors(rp_trials, rp_seed, rp_scheme, rp_model, rp_out);
        if (*fact) {
            write_file(fact_emit, serialize_model(factory_model()));
            return 0;
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace vdbelief
