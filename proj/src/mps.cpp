#include "p2h/mps.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

namespace p2h {

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

char sense_code(RowSense s) {
    switch (s) {
        case RowSense::LessEqual: return 'L';
        case RowSense::GreaterEqual: return 'G';
        case RowSense::Equal: return 'E';
    }
    return 'E';
}

void write_bounds(const Variable& v, std::ostream& out) {
    const double inf = std::numeric_limits<double>::infinity();
    const std::string& n = v.name;
    if (v.kind == VarKind::Binary) {
        if (v.lower == 0.0 && v.upper == 1.0)
            out << " BV BND " << n << "\n";
        else if (v.lower == v.upper)
            out << " FX BND " << n << " " << num(v.lower) << "\n";
        else
            out << " LO BND " << n << " " << num(v.lower) << "\n UP BND " << n << " " << num(v.upper) << "\n";
        return;
    }
    if (v.lower == v.upper) {
        out << " FX BND " << n << " " << num(v.lower) << "\n";
        return;
    }
    if (v.lower == -inf && v.upper == inf) {
        out << " FR BND " << n << "\n";
        return;
    }
    if (v.lower == -inf)
        out << " MI BND " << n << "\n";
    else if (v.lower != 0.0)
        out << " LO BND " << n << " " << num(v.lower) << "\n";
    if (v.upper != inf) out << " UP BND " << n << " " << num(v.upper) << "\n";
}

bool needs_bounds(const Variable& v) {
    return v.kind == VarKind::Binary || v.lower != 0.0 || v.upper != std::numeric_limits<double>::infinity();
}

}  // namespace

void write_mps(const MilpModel& m, std::ostream& out, const MpsWriteOptions& opts) {
    const bool maximize = m.objective_sense() == ObjSense::Maximize;
    const bool flip = opts.negate_objective && maximize;
    out << "* OBJSENSE " << (maximize && !flip ? "MAX" : "MIN") << "\n";
    out << "NAME " << m.name << " FREE\n";
    out << "ROWS\n";
    out << " N " << m.objective_name << "\n";
    for (const auto& r : m.constraints()) out << " " << sense_code(r.sense) << " " << r.name << "\n";

    // column-major view of the rows
    const auto& vars = m.variables();
    std::vector<std::vector<std::pair<int, double>>> cols(vars.size());
    std::vector<double> obj(vars.size(), 0.0);
    for (const auto& t : m.objective()) obj[t.var] = flip ? -t.coef : t.coef;
    for (std::size_t r = 0; r < m.constraints().size(); ++r)
        for (const auto& t : m.constraints()[r].terms) cols[t.var].push_back({static_cast<int>(r), t.coef});

    out << "COLUMNS\n";
    bool in_int = false;
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const bool is_bin = vars[j].kind == VarKind::Binary;
        if (is_bin != in_int) {
            out << " MARKER 'MARKER' " << (is_bin ? "'INTORG'" : "'INTEND'") << "\n";
            in_int = is_bin;
        }
        std::vector<std::pair<const std::string*, double>> entries;
        if (obj[j] != 0.0 || cols[j].empty()) entries.push_back({&m.objective_name, obj[j]});
        for (const auto& [r, c] : cols[j]) entries.push_back({&m.constraints()[r].name, c});
        for (std::size_t e = 0; e < entries.size(); e += 2) {
            out << " " << vars[j].name << " " << *entries[e].first << " " << num(entries[e].second);
            if (e + 1 < entries.size()) out << " " << *entries[e + 1].first << " " << num(entries[e + 1].second);
            out << "\n";
        }
    }
    if (in_int) out << " MARKER 'MARKER' 'INTEND'\n";

    out << "RHS\n";
    for (const auto& r : m.constraints())
        if (r.rhs != 0.0) out << " RHS " << r.name << " " << num(r.rhs) << "\n";

    bool any_bounds = false;
    for (const auto& v : vars) any_bounds = any_bounds || needs_bounds(v);
    if (any_bounds) {
        out << "BOUNDS\n";
        for (const auto& v : vars)
            if (needs_bounds(v)) write_bounds(v, out);
    }
    out << "ENDATA\n";
}

void write_mps(const MilpModel& m, const std::string& path, const MpsWriteOptions& opts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write MPS file '" + path + "'");
    write_mps(m, out, opts);
    if (!out) throw std::runtime_error("error while writing MPS file '" + path + "'");
}

std::string to_mps_string(const MilpModel& m, const MpsWriteOptions& opts) {
    std::ostringstream os;
    write_mps(m, os, opts);
    return os.str();
}

MpsParseError::MpsParseError(int line, const std::string& what)
    : std::runtime_error("MPS line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

double parse_num(const std::string& tok, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw MpsParseError(line, "bad number '" + tok + "'");
        return v;
    } catch (const std::invalid_argument&) {
        throw MpsParseError(line, "bad number '" + tok + "'");
    } catch (const std::out_of_range&) {
        throw MpsParseError(line, "number out of range '" + tok + "'");
    }
}

struct ColData {
    std::string name;
    bool integer = false;
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    bool bounded = false;
};

}  // namespace

MilpModel parse_mps(std::istream& in) {
    const double inf = std::numeric_limits<double>::infinity();
    enum class Sec { None, Name, Rows, Columns, Rhs, Ranges, Bounds, ObjSense, End };
    Sec sec = Sec::None;
    std::string model_name = "model";
    ObjSense sense = ObjSense::Minimize;
    std::string obj_name;
    std::vector<std::pair<std::string, RowSense>> rows;
    std::map<std::string, int> row_index;
    std::vector<std::vector<Term>> row_terms;
    std::vector<double> rhs;
    std::vector<ColData> cols;
    std::map<std::string, int> col_index;
    std::vector<Term> objective;
    bool in_int = false;

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty()) continue;
        if (raw[0] == '*') {
            std::istringstream cs(raw.substr(1));
            std::string key, val;
            cs >> key >> val;
            if (key == "OBJSENSE") sense = val == "MAX" ? ObjSense::Maximize : ObjSense::Minimize;
            continue;
        }
        std::istringstream ls(raw);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;

        if (raw[0] != ' ' && raw[0] != '\t') {
            const std::string& head = tok[0];
            if (head == "NAME") {
                sec = Sec::Name;
                if (tok.size() >= 2) model_name = tok[1];
            } else if (head == "ROWS") {
                sec = Sec::Rows;
            } else if (head == "COLUMNS") {
                sec = Sec::Columns;
            } else if (head == "RHS") {
                sec = Sec::Rhs;
            } else if (head == "RANGES") {
                sec = Sec::Ranges;
            } else if (head == "BOUNDS") {
                sec = Sec::Bounds;
            } else if (head == "OBJSENSE") {
                sec = Sec::ObjSense;
                if (tok.size() >= 2) sense = tok[1] == "MAX" || tok[1] == "MAXIMIZE" ? ObjSense::Maximize : ObjSense::Minimize;
            } else if (head == "ENDATA") {
                sec = Sec::End;
                break;
            } else {
                throw MpsParseError(line_no, "unknown section '" + head + "'");
            }
            continue;
        }

        switch (sec) {
            case Sec::ObjSense:
                sense = tok[0] == "MAX" || tok[0] == "MAXIMIZE" ? ObjSense::Maximize : ObjSense::Minimize;
                break;
            case Sec::Rows: {
                if (tok.size() != 2) throw MpsParseError(line_no, "ROWS entry needs a type and a name");
                const std::string& t = tok[0];
                if (t == "N") {
                    if (obj_name.empty()) obj_name = tok[1];
                    break;  // extra free rows are ignored
                }
                RowSense s;
                if (t == "L")
                    s = RowSense::LessEqual;
                else if (t == "G")
                    s = RowSense::GreaterEqual;
                else if (t == "E")
                    s = RowSense::Equal;
                else
                    throw MpsParseError(line_no, "unknown row type '" + t + "'");
                if (row_index.count(tok[1]) || tok[1] == obj_name)
                    throw MpsParseError(line_no, "duplicate row '" + tok[1] + "'");
                row_index[tok[1]] = static_cast<int>(rows.size());
                rows.push_back({tok[1], s});
                row_terms.emplace_back();
                rhs.push_back(0.0);
                break;
            }
            case Sec::Columns: {
                if (tok.size() == 3 && tok[1] == "'MARKER'") {
                    if (tok[2] == "'INTORG'")
                        in_int = true;
                    else if (tok[2] == "'INTEND'")
                        in_int = false;
                    else
                        throw MpsParseError(line_no, "unknown marker " + tok[2]);
                    break;
                }
                if (tok.size() != 3 && tok.size() != 5) throw MpsParseError(line_no, "COLUMNS entry needs 3 or 5 fields");
                auto it = col_index.find(tok[0]);
                int c;
                if (it == col_index.end()) {
                    c = static_cast<int>(cols.size());
                    col_index[tok[0]] = c;
                    cols.push_back({tok[0], in_int});
                } else {
                    c = it->second;
                    if (c != static_cast<int>(cols.size()) - 1)
                        throw MpsParseError(line_no, "column '" + tok[0] + "' is not contiguous");
                }
                for (std::size_t e = 1; e + 1 < tok.size(); e += 2) {
                    const double v = parse_num(tok[e + 1], line_no);
                    if (tok[e] == obj_name) {
                        objective.push_back({c, v});
                        continue;
                    }
                    auto r = row_index.find(tok[e]);
                    if (r == row_index.end()) throw MpsParseError(line_no, "unknown row '" + tok[e] + "'");
                    row_terms[r->second].push_back({c, v});
                }
                break;
            }
            case Sec::Rhs: {
                if (tok.size() != 3 && tok.size() != 5) throw MpsParseError(line_no, "RHS entry needs 3 or 5 fields");
                for (std::size_t e = 1; e + 1 < tok.size(); e += 2) {
                    if (tok[e] == obj_name) throw MpsParseError(line_no, "objective constants are not supported");
                    auto r = row_index.find(tok[e]);
                    if (r == row_index.end()) throw MpsParseError(line_no, "unknown row '" + tok[e] + "'");
                    rhs[r->second] = parse_num(tok[e + 1], line_no);
                }
                break;
            }
            case Sec::Ranges:
                throw MpsParseError(line_no, "RANGES are not supported");
            case Sec::Bounds: {
                if (tok.size() < 3) throw MpsParseError(line_no, "BOUNDS entry needs a type, set and column");
                auto it = col_index.find(tok[2]);
                if (it == col_index.end()) throw MpsParseError(line_no, "unknown column '" + tok[2] + "'");
                auto& col = cols[it->second];
                const std::string& t = tok[0];
                auto value = [&]() {
                    if (tok.size() != 4) throw MpsParseError(line_no, t + " bound needs a value");
                    return parse_num(tok[3], line_no);
                };
                col.bounded = true;
                if (t == "UP")
                    col.upper = value();
                else if (t == "LO")
                    col.lower = value();
                else if (t == "FX")
                    col.lower = col.upper = value();
                else if (t == "FR")
                    col.lower = -inf, col.upper = inf;
                else if (t == "MI")
                    col.lower = -inf;
                else if (t == "PL")
                    col.upper = inf;
                else if (t == "BV") {
                    col.integer = true;
                    col.lower = 0.0;
                    col.upper = 1.0;
                } else
                    throw MpsParseError(line_no, "unknown bound type '" + t + "'");
                break;
            }
            case Sec::Name:
            case Sec::None:
            case Sec::End:
                throw MpsParseError(line_no, "data outside of a section");
        }
    }
    if (sec != Sec::End) throw MpsParseError(line_no, "missing ENDATA");

    MilpModel m;
    m.name = model_name;
    if (!obj_name.empty()) m.objective_name = obj_name;
    for (const auto& c : cols) {
        VarKind kind = VarKind::Continuous;
        double lo = c.lower, hi = c.upper;
        if (c.integer) {
            if (!c.bounded) lo = 0.0, hi = 1.0;
            if (lo < 0.0 || hi > 1.0)
                throw MpsParseError(line_no, "integer column '" + c.name + "' is not binary");
            kind = VarKind::Binary;
        }
        m.add_variable(c.name, kind, lo, hi);
    }
    for (std::size_t r = 0; r < rows.size(); ++r)
        m.add_constraint(rows[r].first, row_terms[r], rows[r].second, rhs[r]);
    m.set_objective(objective, sense);
    return m;
}

MilpModel parse_mps(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open MPS file '" + path + "'");
    return parse_mps(in);
}

MilpModel parse_mps_string(const std::string& text) {
    std::istringstream in(text);
    return parse_mps(in);
}

}  // namespace p2h
