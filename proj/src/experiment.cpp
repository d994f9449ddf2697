#include "dragsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dragsim/cost.hpp"
#include "dragsim/errors.hpp"
#include "dragsim/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dragsim {

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
    if (name == "stationary") return ExperimentKind::stationary;
    if (name == "pattern_shift_100d") return ExperimentKind::pattern_shift_100d;
    if (name == "noise_sweep") return ExperimentKind::noise_sweep;
    if (name == "scale_sweep") return ExperimentKind::scale_sweep;
    if (name == "width_sweep") return ExperimentKind::width_sweep;
    return std::nullopt;
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::stationary: return "stationary";
        case ExperimentKind::pattern_shift_100d: return "pattern_shift_100d";
        case ExperimentKind::noise_sweep: return "noise_sweep";
        case ExperimentKind::scale_sweep: return "scale_sweep";
        case ExperimentKind::width_sweep: return "width_sweep";
    }
    return "?";
}

std::vector<double> moving_average(const std::vector<double>& series, int window) {
    if (window < 1) throw ConfigError("moving_average: window must be >= 1");
    std::vector<double> out(series.size());
    double acc = 0.0;
    for (size_t i = 0; i < series.size(); ++i) {
        acc += series[i];
        if (i >= static_cast<size_t>(window)) acc -= series[i - window];
        const auto n = std::min(i + 1, static_cast<size_t>(window));
        out[i] = acc / static_cast<double>(n);
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string action_bits(const ModeVector& m) {
    std::string s(m.size(), '0');
    for (size_t i = 0; i < m.size(); ++i)
        if (m[i]) s[i] = '1';
    return s;
}

double mean_of(const std::vector<double>& v, size_t from, size_t to) {
    double s = 0.0;
    for (size_t i = from; i < to; ++i) s += v[i];
    return to > from ? s / static_cast<double>(to - from) : 0.0;
}

}  // namespace

TraceResult run_one_trace(const TraceTask& task) {
    const auto start = std::chrono::steady_clock::now();
    const auto over_budget = [&] {
        if (task.deadline_s <= 0.0) return false;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                   .count() > task.deadline_s;
    };

    HetNetEnv env(task.scenario, task.traffic, task.seed);
    HetNetEnv ref(task.scenario, task.traffic, task.seed);  // paired all-on stream
    auto policy = make_policy(task.agent, env, task.policy, task.seed);
    const ModeVector allon = all_on_modes(task.scenario.n_sbs);
    const int spd = task.scenario.slots_per_day;

    std::ofstream slots_out;
    if (!task.slot_csv_path.empty()) {
        slots_out.open(task.slot_csv_path, std::ios::binary);
        if (!slots_out)
            throw std::runtime_error("cannot open " + task.slot_csv_path + " for writing");
        slots_out << "slot,action";
        for (int b = 0; b < task.scenario.total_bs(); ++b) slots_out << ",lambda_" << b;
        slots_out << ",energy,delay_cost,switching_cost,total\n";
    }

    TraceResult result;
    result.trace = task.trace_index;
    for (int day = 1; day <= task.days; ++day) {
        if (over_budget()) {
            result.truncated = true;
            break;
        }
        double raw = 0.0, raw_ref = 0.0, e = 0.0, d = 0.0, w = 0.0;
        for (int k = 0; k < spd; ++k) {
            const SlotLog log = policy->run_slot(env);
            const StepResult rr = ref.step(allon);
            raw += log.cost.total;
            raw_ref += rr.cost.total;
            e += log.cost.energy;
            d += log.cost.delay_cost;
            w += log.cost.switching_cost;
            if (slots_out) {
                slots_out << log.slot << ',' << action_bits(log.action);
                for (double lam : log.arrivals) slots_out << ',' << format_double(lam);
                slots_out << ',' << format_double(log.cost.energy) << ','
                          << format_double(log.cost.delay_cost) << ','
                          << format_double(log.cost.switching_cost) << ','
                          << format_double(log.cost.total) << '\n';
            }
        }
        DailyMetric dm;
        dm.day = day;
        dm.raw = raw / spd;
        dm.normalized = raw_ref > 0.0 ? raw / raw_ref : 0.0;
        dm.energy = e / spd;
        dm.delay = d / spd;
        dm.switching = w / spd;
        result.days.push_back(dm);

        if (task.shift_every_days > 0 && day % task.shift_every_days == 0 &&
            day < task.days) {
            env.shift_pattern();
            ref.shift_pattern();
        }
    }
    result.days_completed = static_cast<int>(result.days.size());

    std::vector<double> normalized;
    normalized.reserve(result.days.size());
    for (const auto& dm : result.days) normalized.push_back(dm.normalized);
    const auto ma = moving_average(normalized, 10);
    for (size_t i = 0; i < ma.size(); ++i) result.days[i].normalized_ma = ma[i];
    const size_t n = normalized.size();
    const size_t from = n >= 20 ? n - 20 : 0;
    result.final20_mean = mean_of(normalized, from, n);
    result.visited_fraction = policy->visited_fraction();

    if (result.truncated && !task.checkpoint_path.empty())
        if (DragAgent* agent = policy->drag_agent())
            agent->save_checkpoint_file(task.checkpoint_path);
    return result;
}

namespace {

struct PointSpec {
    ScenarioConfig scenario;
    TrafficConfig traffic;
    PolicyOptions policy;
    double value = 0.0;
    std::string dir;  // relative to out_dir, "" = top level
};

std::vector<PointSpec> expand_points(const ExperimentSpec& spec) {
    std::vector<PointSpec> pts;
    auto base = [&] {
        PointSpec p;
        p.scenario = spec.scenario;
        p.traffic = spec.traffic;
        p.policy = spec.policy;
        return p;
    };
    auto label = [](int i, const std::string& tag) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "point_%02d_%s", i, tag.c_str());
        return std::string(buf);
    };
    switch (spec.kind) {
        case ExperimentKind::stationary:
        case ExperimentKind::pattern_shift_100d: {
            pts.push_back(base());
            break;
        }
        case ExperimentKind::noise_sweep: {
            int i = 0;
            for (double sigma : spec.noise_points) {
                PointSpec p = base();
                p.traffic.ou_sigma = sigma;
                p.value = sigma;
                p.dir = label(i++, "sigma_" + format_double(sigma));
                pts.push_back(std::move(p));
            }
            break;
        }
        case ExperimentKind::scale_sweep: {
            int i = 0;
            for (int n_sbs : spec.size_points) {
                PointSpec p = base();
                p.scenario.n_sbs = n_sbs;
                p.value = n_sbs;
                p.dir = label(i++, "sbs_" + std::to_string(n_sbs));
                pts.push_back(std::move(p));
            }
            break;
        }
        case ExperimentKind::width_sweep: {
            int i = 0;
            for (double k : spec.width_points) {
                PointSpec p = base();
                p.policy.drag.width_scale = k;
                p.value = k;
                p.dir = label(i++, "width_" + format_double(k));
                pts.push_back(std::move(p));
            }
            break;
        }
    }
    if (pts.empty()) throw ConfigError("experiment expands to no points");
    return pts;
}

int worker_count() {
    if (const char* env = std::getenv("DRAGSIM_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError("DRAGSIM_WORKERS must be a positive integer");
        return static_cast<int>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void write_daily_csv(const std::string& path, const std::vector<TraceResult>& traces) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "trace,day,raw,normalized,normalized_ma10,energy,delay_cost,switching_cost\n";
    for (const auto& tr : traces)
        for (const auto& dm : tr.days)
            out << tr.trace << ',' << dm.day << ',' << format_double(dm.raw) << ','
                << format_double(dm.normalized) << ',' << format_double(dm.normalized_ma)
                << ',' << format_double(dm.energy) << ',' << format_double(dm.delay)
                << ',' << format_double(dm.switching) << '\n';
}

PointSummary aggregate_point(const PointSpec& pt, std::vector<TraceResult> traces) {
    PointSummary ps;
    ps.value = pt.value;
    ps.dir = pt.dir;
    double sum = 0.0;
    for (const auto& tr : traces) sum += tr.final20_mean;
    ps.mean = traces.empty() ? 0.0 : sum / static_cast<double>(traces.size());
    double var = 0.0;
    for (const auto& tr : traces) {
        const double c = tr.final20_mean - ps.mean;
        var += c * c;
    }
    ps.stddev = traces.empty() ? 0.0 : std::sqrt(var / static_cast<double>(traces.size()));
    ps.traces = std::move(traces);
    return ps;
}

json point_json(const ExperimentSpec& spec, const PointSummary& ps) {
    json j;
    j["agent"] = to_string(spec.agent);
    j["experiment"] = to_string(spec.kind);
    j["days"] = spec.days;
    j["traces"] = static_cast<int>(ps.traces.size());
    j["master_seed"] = spec.master_seed;
    j["point_value"] = ps.value;
    j["final20"]["mean"] = ps.mean;
    j["final20"]["stddev"] = ps.stddev;
    json per = json::array();
    json days_done = json::array();
    bool truncated = false;
    for (const auto& tr : ps.traces) {
        per.push_back(tr.final20_mean);
        days_done.push_back(tr.days_completed);
        truncated = truncated || tr.truncated;
    }
    j["final20"]["per_trace"] = per;
    j["days_completed"] = days_done;
    j["truncated"] = truncated;
    if (!ps.traces.empty() && ps.traces.front().visited_fraction >= 0.0) {
        json vf = json::array();
        for (const auto& tr : ps.traces) vf.push_back(tr.visited_fraction);
        j["visited_fraction"] = vf;
    }
    return j;
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << body;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.scenario.validate();
    if (spec.days < 1) throw ConfigError("days must be >= 1");
    if (spec.traces < 1) throw ConfigError("traces must be >= 1");
    if (spec.out_dir.empty()) throw ConfigError("output directory must be set");
    const auto pts = expand_points(spec);
    for (const auto& pt : pts) pt.scenario.validate();

    fs::create_directories(spec.out_dir);
    for (const auto& pt : pts)
        if (!pt.dir.empty()) fs::create_directories(fs::path(spec.out_dir) / pt.dir);

    struct Task {
        size_t point;
        int trace;
        TraceTask tt;
    };
    std::vector<Task> tasks;
    const auto t_start = std::chrono::steady_clock::now();
    for (size_t pi = 0; pi < pts.size(); ++pi) {
        const auto& pt = pts[pi];
        const fs::path pdir =
            pt.dir.empty() ? fs::path(spec.out_dir) : fs::path(spec.out_dir) / pt.dir;
        for (int ti = 0; ti < spec.traces; ++ti) {
            Task t;
            t.point = pi;
            t.trace = ti;
            t.tt.scenario = pt.scenario;
            t.tt.traffic = pt.traffic;
            t.tt.policy = pt.policy;
            t.tt.agent = spec.agent;
            t.tt.days = spec.days;
            t.tt.trace_index = ti;
            t.tt.seed = trace_seed(spec.master_seed, static_cast<std::uint64_t>(ti));
            t.tt.shift_every_days =
                spec.kind == ExperimentKind::pattern_shift_100d ? spec.shift_every_days : 0;
            if (spec.write_slot_csv)
                t.tt.slot_csv_path =
                    (pdir / ("trace_" + std::to_string(ti) + "_slots.csv")).string();
            t.tt.checkpoint_path =
                (pdir / ("trace_" + std::to_string(ti) + "_agent.ckpt")).string();
            t.tt.deadline_s = 0.0;  // shared deadline handled below
            tasks.push_back(std::move(t));
        }
    }

    std::vector<TraceResult> results(tasks.size());
    std::vector<std::exception_ptr> failures(tasks.size());
    std::atomic<size_t> next{0};
    const int workers = std::min<int>(worker_count(), static_cast<int>(tasks.size()));
    auto run_tasks = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            TraceTask tt = tasks[i].tt;
            if (spec.walltime_budget_s > 0.0) {
                const double used =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                        .count();
                tt.deadline_s = std::max(spec.walltime_budget_s - used, 1e-9);
            }
            try {
                results[i] = run_one_trace(tt);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run_tasks();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_tasks);
        for (auto& th : pool) th.join();
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    ExperimentResult res;
    for (size_t pi = 0; pi < pts.size(); ++pi) {
        std::vector<TraceResult> traces;
        for (size_t i = 0; i < tasks.size(); ++i)
            if (tasks[i].point == pi) traces.push_back(results[i]);
        std::sort(traces.begin(), traces.end(),
                  [](const TraceResult& a, const TraceResult& b) { return a.trace < b.trace; });
        PointSummary ps = aggregate_point(pts[pi], std::move(traces));
        const fs::path pdir = ps.dir.empty() ? fs::path(spec.out_dir)
                                             : fs::path(spec.out_dir) / ps.dir;
        write_daily_csv((pdir / "daily.csv").string(), ps.traces);
        write_text((pdir / "summary.json").string(), point_json(spec, ps).dump(2) + "\n");
        res.points.push_back(std::move(ps));
    }

    if (res.points.size() > 1 || !res.points.front().dir.empty()) {
        std::ostringstream sweep;
        sweep << "point,value,mean,stddev\n";
        json top;
        top["agent"] = to_string(spec.agent);
        top["experiment"] = to_string(spec.kind);
        top["days"] = spec.days;
        top["traces"] = spec.traces;
        top["master_seed"] = spec.master_seed;
        json points = json::array();
        for (size_t pi = 0; pi < res.points.size(); ++pi) {
            const auto& ps = res.points[pi];
            sweep << pi << ',' << format_double(ps.value) << ',' << format_double(ps.mean)
                  << ',' << format_double(ps.stddev) << '\n';
            json pj;
            pj["value"] = ps.value;
            pj["dir"] = ps.dir;
            pj["mean"] = ps.mean;
            pj["stddev"] = ps.stddev;
            points.push_back(std::move(pj));
        }
        top["points"] = std::move(points);
        write_text((fs::path(spec.out_dir) / "sweep.csv").string(), sweep.str());
        write_text((fs::path(spec.out_dir) / "summary.json").string(),
                   top.dump(2) + "\n");
    }
    return res;
}

DirSummary summarize_dir(const std::string& dir) {
    const fs::path daily = fs::path(dir) / "daily.csv";
    std::ifstream in(daily);
    if (!in) throw ConfigError("no daily.csv under " + dir);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(daily.string() + ": empty file");

    std::map<int, std::vector<double>> normalized_by_trace;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() < 4)
            throw ConfigError(daily.string() + ":" + std::to_string(lineno) +
                              ": expected at least 4 columns");
        try {
            const int trace = std::stoi(fields[0]);
            const double norm = std::stod(fields[3]);
            normalized_by_trace[trace].push_back(norm);
        } catch (const std::exception&) {
            throw ConfigError(daily.string() + ":" + std::to_string(lineno) +
                              ": malformed numeric field");
        }
    }

    DirSummary s;
    for (const auto& [trace, series] : normalized_by_trace) {
        const size_t n = series.size();
        const size_t from = n >= 20 ? n - 20 : 0;
        s.per_trace.push_back(mean_of(series, from, n));
    }
    s.traces = static_cast<int>(s.per_trace.size());
    if (s.traces == 0) throw ConfigError(daily.string() + ": no data rows");
    double sum = 0.0;
    for (double v : s.per_trace) sum += v;
    s.mean = sum / s.traces;
    double var = 0.0;
    for (double v : s.per_trace) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / s.traces);
    return s;
}

void export_traffic_csv(const ScenarioConfig& scenario, const TrafficConfig& traffic,
                        std::uint64_t seed, long slots, std::ostream& out) {
    HetNetEnv env(scenario, traffic, seed);
    const ModeVector allon = all_on_modes(scenario.n_sbs);
    out << "slot,bs_index,lambda\n";
    for (long t = 0; t < slots; ++t) {
        const ArrivalVector lam = env.peek_arrivals();
        for (size_t b = 0; b < lam.size(); ++b)
            out << t << ',' << b << ',' << format_double(lam[b]) << '\n';
        env.step(allon);
    }
}

}  // namespace dragsim
