// Batch front door: load tree/operator/payoff specs, run the solvers and
// checkers, emit deterministic JSON (or CSV) reports.
//
//   multistop solve  --tree fixb.json --op linear --payoff additive --d 2
//   multistop oracle --tree fixb.json --op entropic:1 --payoff additive --d 2
//   multistop verify --tree fixb.json --op robust:0.15:0.05 --payoff additive --d 2
//   multistop axioms --tree fixb.json --op broken
//   multistop swing  --tree swing.json --strike 1.0 --d 2
//
// Exit codes: 0 pass, 1 certified violation, 2 configuration error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "multistop/jsonio.hpp"
#include "multistop/snell.hpp"

namespace ms = multistop;

namespace {

struct CommonArgs {
    std::string tree_path;
    std::string op_spec = "linear";
    std::string payoff_spec = "additive";
    std::string start_spec = "root";
    int d = 2;
    double tol = 1e-10;
    std::uint64_t seed = 42;
    int samples = 200;
    double strike = 1.0;
    std::string out_path;
    std::string format = "json";
};

ms::EnumerationBudget budget_from_env() {
    ms::EnumerationBudget budget;
    if (const char* env = std::getenv("MULTISTOP_BUDGET")) {
        const std::string text(env);
        const auto comma = text.find(',');
        try {
            if (comma == std::string::npos) {
                budget.max_stopping_times = std::stoull(text);
                budget.max_tuples = budget.max_stopping_times * budget.max_stopping_times;
            } else {
                budget.max_stopping_times = std::stoull(text.substr(0, comma));
                budget.max_tuples = std::stoull(text.substr(comma + 1));
            }
        } catch (const std::exception&) {
            throw ms::SpecError("MULTISTOP_BUDGET must be 'N' or 'N,M'");
        }
    }
    return budget;
}

void emit(const CommonArgs& args, const std::string& content) {
    if (args.out_path.empty())
        std::cout << content;
    else
        ms::write_text_file(args.out_path, content);
}

ms::Evaluation build_operator(const CommonArgs& args, const ms::ScenarioTree& tree) {
    const ms::OperatorConfig cfg = ms::parse_operator(args.op_spec);
    if (cfg.broken)
        throw ms::SpecError("the planted broken operator is only usable with 'axioms'");
    return cfg.build(tree);
}

int run_solve(const CommonArgs& args) {
    const ms::ScenarioTree tree = ms::load_tree_file(args.tree_path);
    const ms::Evaluation ev = build_operator(args, tree);
    const ms::PayoffFamily psi = ms::parse_payoff(args.payoff_spec, tree, args.d);
    const ms::StoppingTime start = ms::parse_start(args.start_spec, tree);
    const ms::MultiSolution sol = ms::solve_d(tree, ev, psi, args.d, start, args.tol);

    if (args.format == "csv") {
        std::vector<std::pair<std::string, ms::AdaptedFamily>> families;
        families.emplace_back("V", sol.value);
        families.emplace_back("phi", sol.phi);
        for (std::size_t i = 0; i < sol.aux.size(); ++i)
            families.emplace_back("aux" + std::to_string(i + 1), sol.aux[i]);
        emit(args, ms::families_to_csv(tree, families));
    } else {
        emit(args, ms::solve_report(tree, sol, start, ev.label(), args.tol).dump(2));
    }
    return 0;
}

int run_oracle(const CommonArgs& args) {
    const ms::ScenarioTree tree = ms::load_tree_file(args.tree_path);
    const ms::Evaluation ev = build_operator(args, tree);
    const ms::PayoffFamily psi = ms::parse_payoff(args.payoff_spec, tree, args.d);
    const ms::StoppingTime start = ms::parse_start(args.start_spec, tree);
    const ms::OracleResult res =
        ms::brute_force_value(tree, ev, psi, args.d, start, budget_from_env());
    emit(args, ms::oracle_report(tree, res).dump(2));
    return 0;
}

int run_verify(const CommonArgs& args) {
    const ms::ScenarioTree tree = ms::load_tree_file(args.tree_path);
    const ms::Evaluation ev = build_operator(args, tree);
    const ms::PayoffFamily psi = ms::parse_payoff(args.payoff_spec, tree, args.d);
    const ms::StoppingTime start = ms::parse_start(args.start_spec, tree);

    const ms::MultiSolution sol = ms::solve_d(tree, ev, psi, args.d, start, args.tol);
    const ms::OracleResult oracle =
        ms::brute_force_value(tree, ev, psi, args.d, start, budget_from_env());

    double oracle_gap = 0.0;
    for (std::size_t f = 0; f < oracle.frontier.size(); ++f)
        oracle_gap = std::max(oracle_gap,
                              std::fabs(oracle.value[f] -
                                        sol.value[static_cast<std::size_t>(oracle.frontier[f])]));

    const ms::NecessaryCertificate necessary =
        ms::verify_necessary(tree, ev, psi, args.d, sol.tuple, start, args.tol);
    const ms::SupermartingaleReport super = ms::check_supermartingale(tree, ev, sol.value);

    const bool pass = oracle_gap <= args.tol && necessary.pass && super.pass;

    ms::Report rep = ms::Report::object();
    rep.set("command", ms::Report::str("verify"));
    rep.set("operator", ms::Report::str(ev.label()));
    rep.set("d", ms::Report::integer(args.d));
    rep.set("tolerance", ms::Report::num(args.tol));
    ms::Report certs = ms::Report::object();
    certs.set("oracle_gap", ms::Report::num(oracle_gap));
    certs.set("plugin_gap", ms::Report::num(sol.plugin_gap));
    ms::Report nec = ms::Report::object();
    nec.set("pass", ms::Report::boolean(necessary.pass));
    nec.set("meet_gap", ms::Report::num(necessary.meet_gap));
    certs.set("necessary_condition", std::move(nec));
    ms::Report sup = ms::Report::object();
    sup.set("pass", ms::Report::boolean(super.pass));
    sup.set("pairs_checked", ms::Report::integer(static_cast<std::int64_t>(super.pairs_checked)));
    sup.set("worst_violation", ms::Report::num(super.worst_violation));
    certs.set("supermartingale", std::move(sup));
    rep.set("certificates", std::move(certs));
    rep.set("pass", ms::Report::boolean(pass));
    emit(args, rep.dump(2));
    return pass ? 0 : 1;
}

int run_axioms(const CommonArgs& args) {
    const ms::ScenarioTree tree = ms::load_tree_file(args.tree_path);
    const ms::OperatorConfig cfg = ms::parse_operator(args.op_spec);
    ms::OperatorUnderTest op =
        cfg.broken ? ms::make_broken_operator() : ms::under_test(cfg.build(tree));

    const ms::PayoffFamily psi_pair = ms::parse_payoff(args.payoff_spec, tree, 2);
    const ms::PayoffFamily psi_tuple = ms::parse_payoff(args.payoff_spec, tree, args.d);
    const ms::AxiomChecker checker(tree, args.seed, args.samples);
    const ms::AxiomReport report = checker.run_all(op, psi_pair, &psi_tuple, args.d);
    emit(args, ms::axiom_report_json(report).dump(2));
    return report.all_pass() ? 0 : 1;
}

int run_swing(const CommonArgs& args) {
    const ms::ScenarioTree tree = ms::load_tree_file(args.tree_path);
    if (!tree.grid().equidistant())
        throw ms::SpecError("swing preset needs an equidistant date grid");
    const ms::Evaluation ev = build_operator(args, tree);
    const ms::AdaptedFamily eta = ms::call_payoff(tree, args.strike);
    const ms::PayoffFamily psi = ms::PayoffFamily::additive(tree, eta, args.d);
    const ms::StoppingTime start = ms::StoppingTime::at_stage(tree, 0);

    const ms::MultiSolution sol = ms::solve_d(tree, ev, psi, args.d, start, args.tol);

    ms::Report rep = ms::Report::object();
    rep.set("command", ms::Report::str("swing"));
    rep.set("operator", ms::Report::str(ev.label()));
    rep.set("d", ms::Report::integer(args.d));
    rep.set("strike", ms::Report::num(args.strike));
    rep.set("value", ms::Report::num(sol.value[0]));
    ms::Report certs = ms::Report::object();
    certs.set("plugin_gap", ms::Report::num(sol.plugin_gap));

    bool pass = true;
    if (ev.label() == "linear") {
        const ms::CascadeSolution cascade = ms::solve_cascade_additive(tree, ev, eta, args.d);
        const double single = ms::snell_envelope(tree, ev, eta).value[0];
        const double identity_gap = std::fabs(sol.value[0] - args.d * single);
        const double cascade_gap = std::fabs(sol.value[0] - cascade.value[0]);
        certs.set("rights_times_single_gap", ms::Report::num(identity_gap));
        certs.set("cascade_gap", ms::Report::num(cascade_gap));
        pass = identity_gap <= 1e-12 && cascade_gap <= args.tol;
    }

    std::size_t strategies = 0;
    try {
        strategies = ms::count_stopping_times(tree, start, budget_from_env());
    } catch (const ms::BudgetError&) {
        strategies = 0;
    }
    bool oracle_done = false;
    if (strategies > 0) {
        double max_tuples = 1.0;
        for (int i = 0; i < args.d; ++i) max_tuples *= static_cast<double>(strategies);
        if (max_tuples <= static_cast<double>(budget_from_env().max_tuples)) {
            const ms::OracleResult oracle =
                ms::brute_force_value(tree, ev, psi, args.d, start, budget_from_env());
            const double oracle_gap = std::fabs(oracle.value[0] - sol.value[0]);
            certs.set("oracle_gap", ms::Report::num(oracle_gap));
            pass = pass && oracle_gap <= args.tol;
            oracle_done = true;
        }
    }
    certs.set("oracle_checked", ms::Report::boolean(oracle_done));
    rep.set("certificates", std::move(certs));
    rep.set("pass", ms::Report::boolean(pass));
    emit(args, rep.dump(2));
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-linear multiple stopping on scenario trees"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&args](CLI::App* cmd, bool needs_payoff) {
        cmd->add_option("--tree", args.tree_path, "tree spec file (JSON)")->required();
        cmd->add_option("--op", args.op_spec, "operator spec (JSON, file, or shorthand)");
        if (needs_payoff)
            cmd->add_option("--payoff", args.payoff_spec, "payoff spec (JSON, file, or shorthand)");
        cmd->add_option("--d", args.d, "number of exercise rights");
        cmd->add_option("--start", args.start_spec, "assessment time (root | stage:k | JSON)");
        cmd->add_option("--tol", args.tol, "certification tolerance")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", args.seed, "random seed for checks");
        cmd->add_option("--out", args.out_path, "output path (stdout when omitted)");
        cmd->add_option("--format", args.format, "json | csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* solve = app.add_subcommand("solve", "reduction solver");
    add_common(solve, true);
    CLI::App* oracle = app.add_subcommand("oracle", "brute-force enumeration");
    add_common(oracle, true);
    CLI::App* verify = app.add_subcommand("verify", "solver vs oracle plus certificates");
    add_common(verify, true);
    CLI::App* axioms = app.add_subcommand("axioms", "operator law checks");
    add_common(axioms, true);
    axioms->add_option("--samples", args.samples, "samples per check");
    CLI::App* swing = app.add_subcommand("swing", "equidistant-grid additive preset");
    add_common(swing, false);
    swing->add_option("--strike", args.strike, "call strike for the per-exercise payoff");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) return run_solve(args);
        if (oracle->parsed()) return run_oracle(args);
        if (verify->parsed()) return run_verify(args);
        if (axioms->parsed()) return run_axioms(args);
        if (swing->parsed()) return run_swing(args);
    } catch (const ms::ViolationError& e) {
        std::cerr << "violation: " << e.what() << "\n";
        return 1;
    } catch (const ms::SpecError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ms::BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
