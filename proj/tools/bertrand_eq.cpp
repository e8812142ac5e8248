// Batch front end for Bertrand-Nash equilibrium computations.

#include "bertrand/batch.hpp"
#include "bertrand/scenario_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

bertrand::Extension parse_extension(const std::string& s) {
    if (s == "auto") return bertrand::Extension::Auto;
    if (s == "on") return bertrand::Extension::On;
    if (s == "off") return bertrand::Extension::Off;
    throw std::invalid_argument("unknown extension mode '" + s + "' (valid: auto, on, off)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bertrand-Nash equilibrium prices under mixed Logit demand"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "solve the run matrix of a scenario");
    std::string scenario, methods = "zeta-fpi", inits = "costs", seeds = "1", sizes, jacobian = "analytic", out = "out",
                reference = "zeta-fpi", extension = "auto";
    double eps_T = 1e-6, eps_P = 1e-10;
    int threads = 0, max_iter = 0;
    bertrand::TrustRegionConfig<double> tr;
    double delta0 = 0.0;
    bool no_precondition = false, debug = false;
    run->add_option("--scenario", scenario, "preset name or scenario file")->required();
    run->add_option("--methods", methods, "comma list of zeta-fpi, eta-fpi, cg-nm, eta-nm, zeta-nm");
    run->add_option("--init", inits, "comma list of costs, cost-box[:seed], box:lo:hi[:seed]");
    run->add_option("--seeds", seeds, "seed range a..b or comma list");
    run->add_option("--S", sizes, "comma list of sample sizes (default: the scenario's)");
    run->add_option("--eps-T", eps_T, "termination tolerance on the combined gradient");
    run->add_option("--eps-P", eps_P, "truncation threshold on choice probabilities");
    run->add_option("--jacobian", jacobian, "analytic, fd1, fd2 or fd4");
    run->add_option("--out", out, "output directory");
    run->add_option("--threads", threads, "worker count (default: BERTRAND_EQ_THREADS or core count)");
    run->add_option("--reference", reference, "method whose runs anchor the deviation columns");
    run->add_option("--max-iter", max_iter, "iteration cap (default 75 Newton, 1000 fixed-point)");
    run->add_option("--extended", extension, "extended zeta map: auto, on or off");
    run->add_option("--rho", tr.rho, "sufficient decrease ratio");
    run->add_option("--alpha", tr.alpha, "trust radius expansion factor");
    run->add_option("--beta1", tr.beta1, "trust radius shrink bound");
    run->add_option("--beta2", tr.beta2, "trust radius shrink bound");
    run->add_option("--delta0", delta0, "initial trust radius (default max(1,||p0||_inf)/10)");
    run->add_option("--delta-min", tr.delta_min, "trust radius floor");
    run->add_option("--gmres-tol", tr.gmres_tol, "inexact Newton forcing term");
    run->add_option("--max-krylov", tr.max_krylov, "Krylov dimension cap (default min(J,50))");
    run->add_flag("--no-precondition", no_precondition, "disable the Lambda preconditioner for cg-nm");
    run->add_flag("--debug-dumps", debug, "write demand and Hessian CSVs at each final price");

    auto* validate = app.add_subcommand("validate", "check a scenario and report boundedness diagnostics");
    std::string validate_target;
    validate->add_option("scenario", validate_target, "preset name or scenario file")->required();

    auto* presets = app.add_subcommand("presets", "list built-in scenarios");
    std::string dump;
    presets->add_option("--dump", dump, "print a preset as a scenario document");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (presets->parsed()) {
        try {
            if (!dump.empty()) {
                std::cout << bertrand::scenario_to_json_text(bertrand::preset(dump)) << '\n';
                return 0;
            }
            for (const auto& n : bertrand::preset_names()) std::cout << n << "\t" << bertrand::preset_description(n) << '\n';
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
        return 0;
    }

    if (validate->parsed()) {
        const auto rep = bertrand::validate_scenario(validate_target);
        for (const auto& e : rep.errors) std::cerr << "error: " << e << '\n';
        for (const auto& w : rep.warnings) std::cout << "warning: " << w << '\n';
        if (!rep.ok()) return 1;
        std::cout << "OK: sup ||Lambda^-1 P||_inf = " << rep.bounds.max_lambda_inv_P
                  << ", sup ||Omega~||_inf = " << rep.bounds.max_omega_norm
                  << ", sup ||Omega~(p-c)||_inf = " << rep.bounds.max_omega_markup << " over " << rep.bounds.probes
                  << " probes\n";
        return 0;
    }

    bertrand::RunConfig cfg;
    bertrand::Scenario sc = [&]() -> bertrand::Scenario {
        try {
            return bertrand::resolve_scenario(scenario);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            std::exit(1);
        }
    }();
    try {
        cfg.scenario = scenario;
        for (const auto& m : split(methods)) cfg.methods.push_back(bertrand::parse_method(m));
        cfg.inits.clear();
        for (const auto& i : split(inits)) cfg.inits.push_back(bertrand::InitStrategy::parse(i));
        cfg.seeds = bertrand::parse_seeds(seeds);
        for (const auto& s : split(sizes)) cfg.sample_sizes.push_back(std::stoi(s));
        cfg.options.eps_T = eps_T;
        cfg.options.eps_P = eps_P;
        cfg.options.max_iter = max_iter;
        cfg.options.jacobian = bertrand::parse_jacobian(jacobian);
        cfg.options.extension = parse_extension(extension);
        cfg.options.precondition = !no_precondition;
        if (delta0 > 0.0) tr.delta0 = delta0;
        cfg.options.trust_region = tr;
        cfg.reference = bertrand::parse_method(reference);
        cfg.out_dir = out;
        cfg.threads = threads > 0 ? threads : bertrand::default_threads();
        cfg.debug_dumps = debug;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    const auto res = bertrand::run_batch(cfg, sc);
    int converged = 0;
    for (const auto& r : res.rows) converged += r.run.status == bertrand::RunStatus::Converged;
    std::cout << res.rows.size() << " runs, " << converged << " converged; results in " << out << "/results.csv\n";
    return res.exit_code;
}
