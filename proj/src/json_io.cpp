#include "miver/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace miver {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw std::invalid_argument("problem file field '" + field + "': " + why);
}

double num_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<double>();
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

json problem_to_json(const Problem& problem) {
    json j;
    j["dim"] = problem.dim;
    j["a"] = problem.linear_coeffs;
    j["constraints"] = json::array();
    for (const Constraint& c : problem.constraints)
        j["constraints"].push_back({{"b", c.b}, {"B", c.bound}});
    j["groups"] = json::array();
    for (const Group& g : problem.groups)
        j["groups"].push_back({{"start", g.start}, {"len", g.len}});
    switch (problem.criterion.kind) {
        case CriterionKind::Linear:
            j["criterion"] = "linear";
            break;
        case CriterionKind::Constant:
            j["criterion"] = "constant";
            j["criterion_value"] = problem.criterion.value;
            break;
        case CriterionKind::IdleCapacity:
            j["criterion"] = "idle_capacity";
            j["capacities"] = problem.criterion.capacities;
            j["loads"] = problem.criterion.loads;
            j["complement"] = problem.criterion.complement;
            break;
    }
    j["sense"] = "max";
    return j;
}

Problem problem_from_json(const json& j) {
    Problem p;
    if (!j.contains("dim") || !j["dim"].is_number_integer() ||
        j["dim"].get<long long>() < 0)
        bad_field("dim", "required non-negative integer");
    p.dim = j["dim"].get<std::size_t>();
    if (!j.contains("a") || !j["a"].is_array())
        bad_field("a", "required array of numbers");
    p.linear_coeffs = j["a"].get<std::vector<double>>();
    if (p.linear_coeffs.size() != p.dim)
        bad_field("a", "length must equal dim");
    if (j.contains("constraints")) {
        if (!j["constraints"].is_array())
            bad_field("constraints", "must be an array");
        for (const json& cj : j["constraints"]) {
            if (!cj.contains("b") || !cj.contains("B"))
                bad_field("constraints", "each entry needs 'b' and 'B'");
            Constraint c;
            c.b = cj["b"].get<std::vector<double>>();
            c.bound = cj["B"].get<double>();
            if (c.b.size() != p.dim)
                bad_field("constraints", "row length must equal dim");
            p.constraints.push_back(std::move(c));
        }
    }
    if (j.contains("groups")) {
        for (const json& gj : j["groups"]) {
            if (!gj.contains("start") || !gj.contains("len"))
                bad_field("groups", "each entry needs 'start' and 'len'");
            p.groups.push_back(
                {gj["start"].get<std::size_t>(), gj["len"].get<std::size_t>()});
        }
    }
    std::string crit = j.value("criterion", "linear");
    if (crit == "linear") {
        p.criterion.kind = CriterionKind::Linear;
    } else if (crit == "constant") {
        p.criterion.kind = CriterionKind::Constant;
        p.criterion.value = num_or(j, "criterion_value", 1.0);
    } else if (crit == "idle_capacity") {
        p.criterion.kind = CriterionKind::IdleCapacity;
        if (!j.contains("capacities"))
            bad_field("capacities", "required for idle_capacity");
        p.criterion.capacities = j["capacities"].get<std::vector<double>>();
        if (j.contains("loads"))
            p.criterion.loads = j["loads"].get<std::vector<double>>();
        p.criterion.complement = j.value("complement", false);
    } else {
        bad_field("criterion", "unknown kind '" + crit + "'");
    }
    std::string sense = j.value("sense", "max");
    if (sense == "min") {
        for (double& a : p.linear_coeffs) a = -a;
    } else if (sense != "max") {
        bad_field("sense", "must be 'max' or 'min'");
    }
    p.validate();
    return p;
}

Problem load_problem(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("problem file " + path + ": " + e.what());
    }
    return problem_from_json(j);
}

void save_problem(const Problem& problem, const std::string& path) {
    write_text_file(path, problem_to_json(problem).dump(2) + "\n");
}

json adapt_config_to_json(const AdaptConfig& c) {
    json j;
    j["strategy"] =
        c.strategy == AdaptStrategy::Additive ? "additive" : "multiplicative";
    j["d"] = c.d;
    j["schedule"] =
        c.schedule == AdditiveSchedule::Harmonic ? "harmonic" : "constant";
    j["w"] = c.w;
    j["delta_f"] = c.delta_f;
    j["m"] = c.m;
    switch (c.rollback_mode) {
        case RollbackMode::None: j["rollback"] = "none"; break;
        case RollbackMode::Full: j["rollback"] = "full"; break;
        case RollbackMode::PartialEachStep:
            j["rollback"] = "partial_each_step";
            break;
        case RollbackMode::Triggered: j["rollback"] = "triggered"; break;
    }
    j["adaptive_p0"] = c.adaptive_p0;
    j["literal_partial"] = c.literal_partial;
    return j;
}

AdaptConfig adapt_config_from_json(const json& j) {
    AdaptConfig c;
    std::string strategy = j.value("strategy", "multiplicative");
    if (strategy == "additive")
        c.strategy = AdaptStrategy::Additive;
    else if (strategy == "multiplicative")
        c.strategy = AdaptStrategy::Multiplicative;
    else
        throw std::invalid_argument("unknown adapt strategy '" + strategy + "'");
    c.d = num_or(j, "d", c.d);
    std::string sched = j.value("schedule", "harmonic");
    c.schedule = sched == "constant" ? AdditiveSchedule::Constant
                                     : AdditiveSchedule::Harmonic;
    c.w = num_or(j, "w", c.w);
    c.delta_f = num_or(j, "delta_f", c.delta_f);
    c.m = j.value("m", c.m);
    std::string rb = j.value("rollback", "full");
    if (rb == "none") c.rollback_mode = RollbackMode::None;
    else if (rb == "full") c.rollback_mode = RollbackMode::Full;
    else if (rb == "partial_each_step")
        c.rollback_mode = RollbackMode::PartialEachStep;
    else if (rb == "triggered") c.rollback_mode = RollbackMode::Triggered;
    else throw std::invalid_argument("unknown rollback mode '" + rb + "'");
    c.adaptive_p0 = j.value("adaptive_p0", false);
    c.literal_partial = j.value("literal_partial", false);
    return c;
}

json solver_config_to_json(const SolverConfig& c) {
    json j;
    j["population"] = c.population;
    j["max_steps"] = c.max_steps;
    j["max_time"] = c.max_time;
    j["no_improve_stop"] = c.no_improve_stop;
    j["workers"] = c.workers;
    j["seed"] = c.seed;
    if (c.p0_override) j["p0"] = *c.p0_override;
    if (c.target_value) j["target_value"] = *c.target_value;
    if (c.target_penalty) j["target_penalty"] = *c.target_penalty;
    j["p0_retry_steps"] = c.p0_retry_steps;
    j["p0_retry_factor"] = c.p0_retry_factor;
    j["p0_retry_max"] = c.p0_retry_max;
    j["trace_stride"] = c.trace_stride;
    j["adapt"] = adapt_config_to_json(c.adapt);
    return j;
}

SolverConfig solver_config_from_json(const json& j) {
    SolverConfig c;
    c.population = j.value("population", c.population);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.max_time = num_or(j, "max_time", c.max_time);
    c.no_improve_stop = j.value("no_improve_stop", c.no_improve_stop);
    c.workers = j.value("workers", c.workers);
    c.seed = j.value("seed", c.seed);
    if (j.contains("p0")) c.p0_override = j["p0"].get<double>();
    if (j.contains("target_value"))
        c.target_value = j["target_value"].get<double>();
    if (j.contains("target_penalty"))
        c.target_penalty = j["target_penalty"].get<double>();
    c.p0_retry_steps = j.value("p0_retry_steps", c.p0_retry_steps);
    c.p0_retry_factor = num_or(j, "p0_retry_factor", c.p0_retry_factor);
    c.p0_retry_max = j.value("p0_retry_max", c.p0_retry_max);
    c.trace_stride = j.value("trace_stride", c.trace_stride);
    if (j.contains("adapt")) c.adapt = adapt_config_from_json(j["adapt"]);
    return c;
}

json solution_to_json(const Solution& sol, const SolverConfig& config) {
    json j;
    j["x"] = bits_to_string(sol.x);
    j["f"] = sol.f;
    j["f_p"] = sol.f_p;
    j["f_m"] = sol.f_m;
    j["feasible"] = sol.feasible;
    j["best_penalty"] = sol.best_penalty;
    j["steps"] = sol.steps;
    j["stop_reason"] = sol.stop_reason;
    j["seed"] = sol.seed;
    j["config"] = solver_config_to_json(config);
    return j;
}

std::string trace_to_csv(const std::vector<TraceSample>& trace) {
    std::string out = "elapsed_seconds,best_feasible_value,best_modified_value,steps\n";
    for (const TraceSample& s : trace) {
        out += fmt_double(s.elapsed);
        out += ',';
        out += s.best_feasible ? fmt_double(*s.best_feasible) : std::string();
        out += ',';
        out += fmt_double(s.best_modified);
        out += ',';
        out += std::to_string(s.steps);
        out += '\n';
    }
    return out;
}

void save_trace_csv(const std::vector<TraceSample>& trace,
                    const std::string& path) {
    write_text_file(path, trace_to_csv(trace));
}

std::string rle_encode(const BitVector& x) {
    std::string out;
    std::size_t i = 0;
    std::uint8_t cur = 0;  // runs start with the 0-run, possibly empty
    while (i < x.size()) {
        std::size_t run = 0;
        while (i < x.size() && x[i] == cur) {
            ++run;
            ++i;
        }
        if (!out.empty()) out += ',';
        out += std::to_string(run);
        cur ^= 1;
    }
    if (out.empty()) out = "0";
    return out;
}

BitVector rle_decode(const std::string& s) {
    BitVector x;
    std::uint8_t cur = 0;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t end = s.find(',', pos);
        if (end == std::string::npos) end = s.size();
        std::size_t run = std::stoull(s.substr(pos, end - pos));
        x.insert(x.end(), run, cur);
        cur ^= 1;
        pos = end + 1;
    }
    return x;
}

json message_to_json(const Message& msg, bool compress) {
    json j;
    switch (msg.kind) {
        case MessageKind::ImproveFeasible: j["kind"] = "improve_feasible"; break;
        case MessageKind::ImproveModified: j["kind"] = "improve_modified"; break;
        case MessageKind::Stop: j["kind"] = "stop"; break;
    }
    j["sender"] = msg.sender;
    j["f"] = msg.f;
    if (compress && msg.x.size() > 10000)
        j["x_rle"] = rle_encode(msg.x);
    else
        j["x"] = bits_to_string(msg.x);
    if (msg.p_avg) j["p_avg"] = *msg.p_avg;
    j["ts"] = msg.ts;
    return j;
}

Message message_from_json(const json& j) {
    Message msg;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "improve_feasible") msg.kind = MessageKind::ImproveFeasible;
    else if (kind == "improve_modified") msg.kind = MessageKind::ImproveModified;
    else if (kind == "stop") msg.kind = MessageKind::Stop;
    else throw std::invalid_argument("unknown message kind '" + kind + "'");
    msg.sender = j.value("sender", 0);
    msg.f = num_or(j, "f", 0.0);
    if (j.contains("x_rle"))
        msg.x = rle_decode(j["x_rle"].get<std::string>());
    else if (j.contains("x"))
        msg.x = bits_from_string(j["x"].get<std::string>());
    if (j.contains("p_avg")) msg.p_avg = j["p_avg"].get<double>();
    msg.ts = num_or(j, "ts", 0.0);
    return msg;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace miver
