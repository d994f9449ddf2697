#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dragsim/policy.hpp"
#include "dragsim/scenario.hpp"
#include "dragsim/traffic.hpp"

namespace dragsim {

enum class ExperimentKind {
    stationary,
    pattern_shift_100d,
    noise_sweep,
    scale_sweep,
    width_sweep,
};

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

// Trailing mean; the first window-1 entries average whatever prefix is
// available.
std::vector<double> moving_average(const std::vector<double>& series, int window);

struct DailyMetric {
    int day = 0;  // 1-based
    double raw = 0.0;  // mean slot cost over the day
    double normalized = 0.0;  // raw / paired all-on raw, same trace and day
    double normalized_ma = 0.0;  // 10-day trailing mean of normalized
    double energy = 0.0;  // raw component day-means
    double delay = 0.0;
    double switching = 0.0;
};

struct TraceResult {
    int trace = 0;
    std::vector<DailyMetric> days;
    double final20_mean = 0.0;  // mean normalized cost of the final 20 days
    double visited_fraction = -1.0;  // tabular policies only
    int days_completed = 0;
    bool truncated = false;
};

// Aggregate over the traces of one experiment point.
struct PointSummary {
    double value = 0.0;  // swept parameter (0 for single-point kinds)
    std::string dir;  // output subdirectory ("" for single-point kinds)
    double mean = 0.0;  // across traces, of per-trace final-20-day means
    double stddev = 0.0;  // population std across traces
    std::vector<TraceResult> traces;
};

struct ExperimentResult {
    std::vector<PointSummary> points;
};

struct ExperimentSpec {
    ScenarioConfig scenario;
    TrafficConfig traffic;
    PolicyOptions policy;
    AgentKind agent = AgentKind::drag;
    ExperimentKind kind = ExperimentKind::stationary;
    int days = 416;
    int traces = 20;
    std::uint64_t master_seed = 1;
    std::string out_dir;
    int shift_every_days = 100;  // pattern_shift_100d period
    std::vector<double> noise_points = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
    std::vector<int> size_points = {6, 8, 10, 12, 14, 16};
    std::vector<double> width_points = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    double walltime_budget_s = 0.0;  // 0 = unlimited; breach truncates gracefully
    bool write_slot_csv = true;
};

// One policy driving one seeded environment for a number of days, with
// a paired all-on environment on the identical random stream supplying
// the normalization denominator.
struct TraceTask {
    ScenarioConfig scenario;
    TrafficConfig traffic;
    PolicyOptions policy;
    AgentKind agent = AgentKind::all_on;
    int days = 1;
    int trace_index = 0;
    std::uint64_t seed = 0;
    int shift_every_days = 0;  // 0 = never
    std::string slot_csv_path;  // empty = don't write
    std::string checkpoint_path;  // written when truncated (DDPG only)
    double deadline_s = 0.0;  // seconds from task start; 0 = unlimited
};

TraceResult run_one_trace(const TraceTask& task);

// Runs every (point, trace) pair, parallelized across DRAGSIM_WORKERS
// threads, and writes per-trace slot CSVs, a daily.csv per point, a
// summary.json per point, and for sweeps a top-level sweep.csv plus
// aggregate summary.json. Output bytes depend only on the spec.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct DirSummary {
    int traces = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> per_trace;
};

// Recomputes the final-20-day summary from a run directory's daily.csv.
DirSummary summarize_dir(const std::string& dir);

// Long-format arrival trace for the given seed: the exact stream a run
// with that seed sees. Columns: slot,bs_index,lambda.
void export_traffic_csv(const ScenarioConfig& scenario, const TrafficConfig& traffic,
                        std::uint64_t seed, long slots, std::ostream& out);

// Shortest round-trip decimal form, used for all CSV numbers.
std::string format_double(double v);

}  // namespace dragsim
