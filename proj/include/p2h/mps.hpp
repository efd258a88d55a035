#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "p2h/milp.hpp"

namespace p2h {

struct MpsWriteOptions {
    /// Write the objective negated as a minimization, for solvers that ignore
    /// the sense comment and always minimize.
    bool negate_objective = false;
};

/// Free-format MPS. The NAME line carries the FREE keyword so that readers which
/// auto-detect fixed format still split on whitespace; the objective sense is
/// recorded in a leading `* OBJSENSE MAX|MIN` comment.
void write_mps(const MilpModel& m, std::ostream& out, const MpsWriteOptions& opts = {});
void write_mps(const MilpModel& m, const std::string& path, const MpsWriteOptions& opts = {});
std::string to_mps_string(const MilpModel& m, const MpsWriteOptions& opts = {});

class MpsParseError : public std::runtime_error {
public:
    MpsParseError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

/// Reads what write_mps produces. Integer columns inside INTORG markers must have
/// bounds within [0,1] and become binaries; RANGES are rejected.
MilpModel parse_mps(std::istream& in);
MilpModel parse_mps(const std::string& path);
MilpModel parse_mps_string(const std::string& text);

}  // namespace p2h
