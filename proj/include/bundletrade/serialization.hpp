#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "bundletrade/core.hpp"

namespace bundletrade {

/// Malformed input. line is 1-based (0 when the error is not tied to a line),
/// field names the offending key when there is one.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::string field, const std::string& message);

    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

// Instance files are JSON Lines: a header {"n","w","eps","v","d"} followed by
// one {"kind","menu":[{"counts","value"}]} object per event.
void write_instance(std::ostream& out, const Instance& inst);
Instance read_instance(std::istream& in);
std::string instance_to_string(const Instance& inst);
Instance instance_from_string(const std::string& text);
void save_instance(const std::string& path, const Instance& inst);
Instance load_instance(const std::string& path);

// Trace files are JSON Lines: a header carrying the run parameters followed by
// one object per step.
void write_trace(std::ostream& out, const Trace& trace);
Trace read_trace(std::istream& in);
std::string trace_to_string(const Trace& trace);
Trace trace_from_string(const std::string& text);
void save_trace(const std::string& path, const Trace& trace);
Trace load_trace(const std::string& path);

}  // namespace bundletrade
