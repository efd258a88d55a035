#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace p2h {

enum class VarKind { Continuous, Binary };
enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjSense { Maximize, Minimize };

/// Where a variable or row comes from: unit, step and a short constraint-family tag.
struct Tag {
    int unit = -1;
    int step = -1;
    std::string family;

    friend bool operator==(const Tag&, const Tag&) = default;
};

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = 0.0;
    Tag tag;
};

struct Term {
    int var = -1;
    double coef = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
    Tag tag;
};

/// Solver-agnostic MILP: variables, sparse rows and a linear objective.
class MilpModel {
public:
    std::string name = "model";

    /// Throws std::invalid_argument on duplicate names or inverted bounds.
    int add_variable(const std::string& name, VarKind kind, double lower, double upper, Tag tag = {});
    int add_binary(const std::string& name, Tag tag = {}) { return add_variable(name, VarKind::Binary, 0.0, 1.0, std::move(tag)); }

    /// Duplicate variable references are merged and zero coefficients dropped.
    int add_constraint(const std::string& name, std::vector<Term> terms, RowSense sense, double rhs, Tag tag = {});

    void set_objective(std::vector<Term> terms, ObjSense sense = ObjSense::Maximize);

    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Constraint>& constraints() const { return rows_; }
    const std::vector<Term>& objective() const { return objective_; }
    ObjSense objective_sense() const { return sense_; }

    Variable& variable(int id) { return vars_.at(static_cast<std::size_t>(id)); }
    const Variable& variable(int id) const { return vars_.at(static_cast<std::size_t>(id)); }
    std::optional<int> find_variable(const std::string& name) const;
    std::optional<int> find_constraint(const std::string& name) const;

    std::size_t num_binaries() const;
    std::string objective_name = "obj";

private:
    void check_terms(const std::vector<Term>& terms, const std::string& where) const;

    std::vector<Variable> vars_;
    std::vector<Constraint> rows_;
    std::vector<Term> objective_;
    ObjSense sense_ = ObjSense::Maximize;
    std::map<std::string, int> var_index_;
    std::map<std::string, int> row_index_;
};

/// Copy with every binary made continuous on [0, 1].
MilpModel relaxation(const MilpModel& m);

double row_activity(const Constraint& row, const std::vector<double>& x);
double objective_value(const MilpModel& m, const std::vector<double>& x);

/// Amount by which `x` violates the row (0 when satisfied).
double row_violation(const Constraint& row, const std::vector<double>& x);

struct FeasibilityFinding {
    std::string what;  // row or variable name
    double violation = 0.0;
};

/// Rows are checked to tol * (1 + |rhs|), bounds to tol, integrality to int_tol.
std::vector<FeasibilityFinding> check_feasibility(const MilpModel& m, const std::vector<double>& x,
                                                  double tol = 1e-6, double int_tol = 1e-4);

/// Same names, kinds, bounds, rows and objective; numbers equal within `tol` (relative
/// to magnitude). Tags are not compared since MPS does not carry them.
bool equivalent(const MilpModel& a, const MilpModel& b, double tol = 1e-9, std::string* why = nullptr);

/// JSON mapping each variable and row name to its unit, step and family tag.
std::string metadata_json(const MilpModel& m);

const char* to_string(RowSense s);

}  // namespace p2h
