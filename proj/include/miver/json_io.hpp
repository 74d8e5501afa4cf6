#ifndef MIVER_JSON_IO_HPP_
#define MIVER_JSON_IO_HPP_

#include <string>

#include <json.hpp>

#include "miver/cluster.hpp"
#include "miver/problem.hpp"
#include "miver/solver.hpp"

namespace miver {

using nlohmann::json;

json problem_to_json(const Problem& problem);
/// Parses a problem document; "sense":"min" inputs are negated into the
/// canonical maximize form. Throws std::invalid_argument naming the
/// offending field.
Problem problem_from_json(const json& j);

Problem load_problem(const std::string& path);
void save_problem(const Problem& problem, const std::string& path);

json adapt_config_to_json(const AdaptConfig& c);
AdaptConfig adapt_config_from_json(const json& j);

json solver_config_to_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const json& j);

/// Solution document: bit string, values, feasibility, seed and the full
/// effective config. Wall-clock timings stay out of the file so identical
/// inputs produce identical bytes.
json solution_to_json(const Solution& sol, const SolverConfig& config);

std::string trace_to_csv(const std::vector<TraceSample>& trace);
void save_trace_csv(const std::vector<TraceSample>& trace,
                    const std::string& path);

/// Cluster wire encoding. With compress set and dim > 10^4 the bit string
/// is sent as alternating run lengths (starting with the 0-run) in "x_rle".
json message_to_json(const Message& msg, bool compress = false);
Message message_from_json(const json& j);

std::string rle_encode(const BitVector& x);
BitVector rle_decode(const std::string& s);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace miver

#endif  // MIVER_JSON_IO_HPP_
