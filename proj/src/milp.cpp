#include "p2h/milp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace p2h {

const char* to_string(RowSense s) {
    switch (s) {
        case RowSense::LessEqual: return "<=";
        case RowSense::Equal: return "=";
        case RowSense::GreaterEqual: return ">=";
    }
    return "?";
}

int MilpModel::add_variable(const std::string& name, VarKind kind, double lower, double upper, Tag tag) {
    if (name.empty()) throw std::invalid_argument("variable name must not be empty");
    if (var_index_.count(name)) throw std::invalid_argument("duplicate variable '" + name + "'");
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
        throw std::invalid_argument("variable '" + name + "': inverted bounds");
    if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
        throw std::invalid_argument("binary '" + name + "' must have bounds within [0,1]");
    const int id = static_cast<int>(vars_.size());
    vars_.push_back({name, kind, lower, upper, std::move(tag)});
    var_index_.emplace(name, id);
    return id;
}

void MilpModel::check_terms(const std::vector<Term>& terms, const std::string& where) const {
    for (const auto& t : terms) {
        if (t.var < 0 || t.var >= static_cast<int>(vars_.size()))
            throw std::invalid_argument(where + ": undeclared variable index " + std::to_string(t.var));
        if (!std::isfinite(t.coef)) throw std::invalid_argument(where + ": non-finite coefficient");
    }
}

namespace {

std::vector<Term> merge_terms(std::vector<Term> terms) {
    std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> out;
    for (const auto& t : terms) {
        if (!out.empty() && out.back().var == t.var)
            out.back().coef += t.coef;
        else
            out.push_back(t);
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const Term& t) { return t.coef == 0.0; }), out.end());
    return out;
}

}  // namespace

int MilpModel::add_constraint(const std::string& name, std::vector<Term> terms, RowSense sense, double rhs, Tag tag) {
    if (name.empty()) throw std::invalid_argument("row name must not be empty");
    if (row_index_.count(name)) throw std::invalid_argument("duplicate row '" + name + "'");
    if (!std::isfinite(rhs)) throw std::invalid_argument("row '" + name + "': non-finite rhs");
    check_terms(terms, "row '" + name + "'");
    const int id = static_cast<int>(rows_.size());
    rows_.push_back({name, merge_terms(std::move(terms)), sense, rhs, std::move(tag)});
    row_index_.emplace(name, id);
    return id;
}

void MilpModel::set_objective(std::vector<Term> terms, ObjSense sense) {
    check_terms(terms, "objective");
    objective_ = merge_terms(std::move(terms));
    sense_ = sense;
}

std::optional<int> MilpModel::find_variable(const std::string& name) const {
    auto it = var_index_.find(name);
    if (it == var_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> MilpModel::find_constraint(const std::string& name) const {
    auto it = row_index_.find(name);
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
}

std::size_t MilpModel::num_binaries() const {
    return static_cast<std::size_t>(
        std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

MilpModel relaxation(const MilpModel& m) {
    MilpModel r = m;
    for (std::size_t j = 0; j < r.variables().size(); ++j) r.variable(static_cast<int>(j)).kind = VarKind::Continuous;
    r.name = m.name + "_relaxed";
    return r;
}

double row_activity(const Constraint& row, const std::vector<double>& x) {
    double s = 0.0;
    for (const auto& t : row.terms) s += t.coef * x.at(static_cast<std::size_t>(t.var));
    return s;
}

double objective_value(const MilpModel& m, const std::vector<double>& x) {
    double s = 0.0;
    for (const auto& t : m.objective()) s += t.coef * x.at(static_cast<std::size_t>(t.var));
    return s;
}

double row_violation(const Constraint& row, const std::vector<double>& x) {
    const double a = row_activity(row, x);
    switch (row.sense) {
        case RowSense::LessEqual: return std::max(0.0, a - row.rhs);
        case RowSense::GreaterEqual: return std::max(0.0, row.rhs - a);
        case RowSense::Equal: return std::abs(a - row.rhs);
    }
    return 0.0;
}

std::vector<FeasibilityFinding> check_feasibility(const MilpModel& m, const std::vector<double>& x, double tol,
                                                  double int_tol) {
    if (x.size() != m.variables().size()) throw std::invalid_argument("check_feasibility: assignment size mismatch");
    std::vector<FeasibilityFinding> out;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const auto& v = m.variables()[j];
        const double under = v.lower - x[j], over = x[j] - v.upper;
        if (under > tol || over > tol) out.push_back({v.name + " (bounds)", std::max(under, over)});
        if (v.kind == VarKind::Binary) {
            const double frac = std::abs(x[j] - std::round(x[j]));
            if (frac > int_tol) out.push_back({v.name + " (integrality)", frac});
        }
    }
    for (const auto& r : m.constraints()) {
        const double viol = row_violation(r, x);
        if (viol > tol * (1.0 + std::abs(r.rhs))) out.push_back({r.name, viol});
    }
    return out;
}

namespace {

bool close(double a, double b, double tol) {
    if (a == b) return true;  // also equal infinities
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

bool same_terms(const std::vector<Term>& a, const std::vector<Term>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].var != b[i].var || !close(a[i].coef, b[i].coef, tol)) return false;
    return true;
}

}  // namespace

bool equivalent(const MilpModel& a, const MilpModel& b, double tol, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (a.objective_sense() != b.objective_sense()) return fail("objective sense differs");
    if (a.variables().size() != b.variables().size()) return fail("variable count differs");
    if (a.constraints().size() != b.constraints().size()) return fail("row count differs");
    for (std::size_t j = 0; j < a.variables().size(); ++j) {
        const auto& u = a.variables()[j];
        const auto& v = b.variables()[j];
        if (u.name != v.name) return fail("variable " + std::to_string(j) + " name differs");
        if (u.kind != v.kind) return fail("variable '" + u.name + "' kind differs");
        if (!close(u.lower, v.lower, tol) || !close(u.upper, v.upper, tol))
            return fail("variable '" + u.name + "' bounds differ");
    }
    for (std::size_t r = 0; r < a.constraints().size(); ++r) {
        const auto& p = a.constraints()[r];
        const auto& q = b.constraints()[r];
        if (p.name != q.name) return fail("row " + std::to_string(r) + " name differs");
        if (p.sense != q.sense) return fail("row '" + p.name + "' sense differs");
        if (!close(p.rhs, q.rhs, tol)) return fail("row '" + p.name + "' rhs differs");
        if (!same_terms(p.terms, q.terms, tol)) return fail("row '" + p.name + "' coefficients differ");
    }
    if (!same_terms(a.objective(), b.objective(), tol)) return fail("objective differs");
    return true;
}

std::string metadata_json(const MilpModel& m) {
    using nlohmann::ordered_json;
    auto tag_json = [](const Tag& t) {
        ordered_json j;
        j["unit"] = t.unit;
        j["step"] = t.step;
        j["family"] = t.family;
        return j;
    };
    ordered_json j;
    j["model"] = m.name;
    ordered_json vars = ordered_json::object();
    for (const auto& v : m.variables()) vars[v.name] = tag_json(v.tag);
    ordered_json rows = ordered_json::object();
    for (const auto& r : m.constraints()) rows[r.name] = tag_json(r.tag);
    j["variables"] = std::move(vars);
    j["constraints"] = std::move(rows);
    return j.dump(1) + "\n";
}

}  // namespace p2h
