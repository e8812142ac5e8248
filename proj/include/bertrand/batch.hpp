#pragma once

#include "bertrand/model_zoo.hpp"
#include "bertrand/solvers.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bertrand {

struct RunConfig {
    std::string scenario;
    std::vector<Method> methods;
    std::vector<InitStrategy> inits{InitStrategy::at_costs()};
    std::vector<std::uint64_t> seeds{1};
    std::vector<int> sample_sizes;  // empty: the scenario default
    SolverOptions options;
    Method reference = Method::ZetaFPI;
    std::string out_dir;  // empty: nothing written
    int threads = 1;
    bool debug_dumps = false;

    void validate() const;
};

struct RunRow {
    int index = 0;
    Method method = Method::ZetaFPI;
    std::string init;
    std::uint64_t seed = 0;
    int S = 0;
    SolverRun run;
    double dev_min = 0.0;
    double dev_median = 0.0;
    double dev_max = 0.0;
    bool has_deviation = false;
};

struct BatchResult {
    std::vector<RunRow> rows;
    int exit_code = 0;
};

/// "1..10", "3", or "1,4,9".
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// Worker count from BERTRAND_EQ_THREADS, else the hardware concurrency.
int default_threads();

/// Runs every (S, seed, init, method) combination in that nesting order.
BatchResult run_batch(const RunConfig& config, const Scenario& scenario);
BatchResult run_batch(const RunConfig& config);

void write_results_csv(std::ostream& os, const std::vector<RunRow>& rows, bool wall_time = true);
void write_trace_csv(std::ostream& os, const SolverRun& run);
void write_prices_csv(std::ostream& os, const std::vector<RunRow>& rows);
std::string summary_json(const RunConfig& config, const std::vector<RunRow>& rows);

}  // namespace bertrand
