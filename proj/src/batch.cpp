#include "bertrand/batch.hpp"

#include "bertrand/scenario_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bertrand {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Task {
    int index;
    int S;
    std::uint64_t seed;
    std::size_t init;
    Method method;
};

}  // namespace

void RunConfig::validate() const {
    if (methods.empty()) throw std::invalid_argument("at least one method is required");
    if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
    if (inits.empty()) throw std::invalid_argument("at least one initial condition is required");
    if (!(options.eps_T > 0.0)) throw std::invalid_argument("eps_T must be positive");
    if (!(options.eps_P > 0.0)) throw std::invalid_argument("eps_P must be positive");
    for (int S : sample_sizes)
        if (S <= 0) throw std::invalid_argument("sample sizes must be positive");
    if (threads < 1) throw std::invalid_argument("thread count must be positive");
    options.trust_region.validate();
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    const auto dots = text.find("..");
    try {
        if (dots != std::string::npos) {
            const auto a = std::stoull(text.substr(0, dots)), b = std::stoull(text.substr(dots + 2));
            if (b < a) throw std::invalid_argument("empty seed range");
            for (auto s = a; s <= b; ++s) out.push_back(s);
            return out;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
    } catch (const std::logic_error&) {
        throw std::invalid_argument("cannot parse seeds '" + text + "' (use 1..10 or 1,2,3)");
    }
    if (out.empty()) throw std::invalid_argument("no seeds given");
    return out;
}

int default_threads() {
    if (const char* env = std::getenv("BERTRAND_EQ_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

BatchResult run_batch(const RunConfig& config) { return run_batch(config, resolve_scenario(config.scenario)); }

BatchResult run_batch(const RunConfig& config, const Scenario& scenario) {
    config.validate();
    const std::vector<int> sizes = config.sample_sizes.empty() ? std::vector<int>{scenario.default_S} : config.sample_sizes;

    std::map<std::pair<int, std::uint64_t>, std::shared_ptr<const DemandSystem>> demands;
    for (int S : sizes)
        for (auto seed : config.seeds) demands[{S, seed}] = scenario.demand(S, seed);

    std::vector<Task> tasks;
    for (int S : sizes)
        for (auto seed : config.seeds)
            for (std::size_t i = 0; i < config.inits.size(); ++i)
                for (Method m : config.methods) tasks.push_back({static_cast<int>(tasks.size()), S, seed, i, m});

    BatchResult res;
    res.rows.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            const auto& demand = demands.at({task.S, task.seed});
            RunRow row;
            row.index = task.index;
            row.method = task.method;
            row.init = config.inits[task.init].label();
            row.seed = task.seed;
            row.S = task.S;
            const Eigen::VectorXd p0 = config.inits[task.init].generate(scenario.market, task.seed);
            try {
                row.run = solve(demand, task.method, p0, config.options);
            } catch (const std::exception& e) {
                row.run.method = task.method;
                row.run.p0 = p0;
                row.run.p_final = p0;
                row.run.status = RunStatus::NumericalFailure;
                row.run.message = e.what();
                row.run.grad_inf = std::numeric_limits<double>::quiet_NaN();
            }
            res.rows[t] = std::move(row);
        }
    };
    const int n = std::min<int>(config.threads, static_cast<int>(tasks.size()));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Deviations from the reference method's converged run in the same (S, seed, init) group.
    for (auto& row : res.rows) {
        const RunRow* ref = nullptr;
        for (const auto& other : res.rows)
            if (other.method == config.reference && other.S == row.S && other.seed == row.seed && other.init == row.init)
                ref = &other;
        if (!ref || ref->run.status != RunStatus::Converged || row.run.p_final.size() != ref->run.p_final.size()) continue;
        const Eigen::VectorXd d = (row.run.p_final - ref->run.p_final).cwiseAbs();
        std::vector<double> dv(d.data(), d.data() + d.size());
        row.dev_min = d.minCoeff();
        row.dev_max = d.maxCoeff();
        row.dev_median = median_of(dv);
        row.has_deviation = true;
    }

    for (const auto& row : res.rows)
        if (row.run.status == RunStatus::NumericalFailure) res.exit_code = 2;

    if (!config.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(fs::path(config.out_dir) / "traces");
        std::ofstream(fs::path(config.out_dir) / "results.csv") << [&] {
            std::ostringstream os;
            write_results_csv(os, res.rows);
            return os.str();
        }();
        std::ofstream prices(fs::path(config.out_dir) / "prices.csv");
        write_prices_csv(prices, res.rows);
        std::ofstream(fs::path(config.out_dir) / "summary.json") << summary_json(config, res.rows) << '\n';
        for (const auto& row : res.rows) {
            std::ofstream tr(fs::path(config.out_dir) / "traces" / ("run-" + std::to_string(row.index) + ".csv"));
            write_trace_csv(tr, row.run);
        }
        if (config.debug_dumps) {
            fs::create_directories(fs::path(config.out_dir) / "debug");
            for (const auto& row : res.rows) {
                const auto& demand = demands.at({row.S, row.seed});
                const auto& p = row.run.p_final;
                if (!p.allFinite()) continue;
                const auto L = demand->logit(p);
                const auto e = demand_eval(L, demand->market(), p, true);
                std::ofstream de(fs::path(config.out_dir) / "debug" / ("eval-" + std::to_string(row.index) + ".csv"));
                write_eval_csv(de, e, demand->market());
                std::ofstream dh(fs::path(config.out_dir) / "debug" / ("hessian-" + std::to_string(row.index) + ".csv"));
                write_hessian_csv(dh, hessian_parts(L, e, demand->market(), p));
            }
        }
    }
    return res;
}

void write_results_csv(std::ostream& os, const std::vector<RunRow>& rows, bool wall_time) {
    os << "index,method,init,seed,S,iterations";
    if (wall_time) os << ",wall_time_s";
    os << ",status,fo,so,grad_inf,dev_min,dev_median,dev_max\n";
    for (const auto& r : rows) {
        os << r.index << ',' << to_string(r.method) << ',' << r.init << ',' << r.seed << ',' << r.S << ','
           << r.run.iterations;
        if (wall_time) os << ',' << num(r.run.wall_seconds);
        os << ',' << to_string(r.run.status) << ',' << (r.run.fo_pass ? 'S' : 'F') << ',' << (r.run.so_pass ? 'S' : 'F')
           << ',' << num(r.run.grad_inf);
        if (r.has_deviation)
            os << ',' << num(r.dev_min) << ',' << num(r.dev_median) << ',' << num(r.dev_max);
        else
            os << ",,,";
        os << '\n';
    }
}

void write_trace_csv(std::ostream& os, const SolverRun& run) {
    os << "iteration,residual_norm,grad_inf,delta,krylov_dim,step_norm,accepted,rejections\n";
    for (const auto& t : run.trace)
        os << t.iteration << ',' << num(t.residual_norm) << ',' << num(t.stationarity) << ',' << num(t.delta) << ','
           << t.krylov_dim << ',' << num(t.step_norm) << ',' << (t.accepted ? 1 : 0) << ',' << t.rejections << '\n';
}

void write_prices_csv(std::ostream& os, const std::vector<RunRow>& rows) {
    os << "index,product,p0,price\n";
    for (const auto& r : rows)
        for (Eigen::Index j = 0; j < r.run.p_final.size(); ++j)
            os << r.index << ',' << j + 1 << ',' << num(j < r.run.p0.size() ? r.run.p0[j] : std::nan("")) << ','
               << num(r.run.p_final[j]) << '\n';
}

std::string summary_json(const RunConfig& config, const std::vector<RunRow>& rows) {
    using nlohmann::json;
    auto stats = [](std::vector<double> v) {
        if (v.empty()) return json(nullptr);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return json{{"min", *lo}, {"median", median_of(v)}, {"max", *hi}};
    };
    json doc;
    doc["scenario"] = config.scenario;
    doc["reference"] = to_string(config.reference);
    doc["runs"] = rows.size();
    json methods = json::object();
    for (Method m : config.methods) {
        std::vector<double> its, devs, walls;
        int converged = 0, fo = 0, so = 0, count = 0;
        for (const auto& r : rows) {
            if (r.method != m) continue;
            ++count;
            converged += r.run.status == RunStatus::Converged;
            fo += r.run.fo_pass;
            so += r.run.so_pass;
            its.push_back(r.run.iterations);
            walls.push_back(r.run.wall_seconds);
            if (r.has_deviation) devs.push_back(r.dev_median);
        }
        methods[to_string(m)] = {{"runs", count},        {"converged", converged},
                                 {"fo_pass", fo},        {"so_pass", so},
                                 {"iterations", stats(its)}, {"median_deviation", stats(devs)},
                                 {"wall_time_s", stats(walls)}};
    }
    doc["methods"] = methods;
    return doc.dump(2);
}

}  // namespace bertrand
