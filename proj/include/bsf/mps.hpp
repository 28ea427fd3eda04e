#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bsf/errors.hpp"
#include "bsf/lp.hpp"
#include "bsf/mip.hpp"

namespace bsf {

namespace detail {

inline std::string mps_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string var_name(const LinearProgram& lp, int j) {
  return lp.variables[j].name.empty() ? "C" + std::to_string(j) : lp.variables[j].name;
}
inline std::string row_name(const LinearProgram& lp, int i) {
  return lp.rows[i].name.empty() ? "R" + std::to_string(i) : lp.rows[i].name;
}

inline void mps_line(std::ostream& os, const std::string& a, const std::string& b, const std::string& c = {},
                     const std::string& d = {}) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "    %-8s  %-8s  %12s", a.c_str(), b.c_str(), c.c_str());
  os << buf;
  if (!d.empty()) os << "  " << d;
  os << '\n';
}

}  // namespace detail

/// Writes the model as MPS: NAME, OBJSENSE (maximization only), ROWS,
/// COLUMNS with integer markers, RHS, BOUNDS, ENDATA. Fields are laid out in
/// the classic columns but separated by blanks, so names longer than eight
/// characters survive a round trip. Duplicate names are a caller error.
inline void write_mps(std::ostream& os, const LinearProgram& lp, const std::vector<char>& is_integer,
                      const std::string& name = "BSF") {
  using detail::mps_number;
  lp.validate();
  const int n = lp.num_variables(), m = lp.num_rows();
  auto integer = [&](int j) { return j < static_cast<int>(is_integer.size()) && is_integer[j]; };

  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(n));
  for (int i = 0; i < m; ++i) {
    std::map<int, double> merged;
    for (const Term& t : lp.rows[i].terms) merged[t.var] += t.coef;
    for (auto [j, c] : merged)
      if (c != 0.0) cols[j].push_back({i, c});
  }

  os << "NAME          " << name << '\n';
  if (lp.sense == ObjectiveSense::Maximize) os << "OBJSENSE\n    MAX\n";
  os << "ROWS\n N  obj\n";
  for (int i = 0; i < m; ++i) {
    const char* s = lp.rows[i].sense == RowSense::LessEqual ? "L" : lp.rows[i].sense == RowSense::Equal ? "E" : "G";
    os << ' ' << s << "  " << detail::row_name(lp, i) << '\n';
  }
  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int j = 0; j < n; ++j) {
    if (integer(j) != in_int) {
      in_int = integer(j);
      detail::mps_line(os, "MARKER" + std::to_string(marker++), "'MARKER'", "", in_int ? "'INTORG'" : "'INTEND'");
    }
    const std::string vn = detail::var_name(lp, j);
    if (lp.variables[j].objective != 0.0 || cols[j].empty())
      detail::mps_line(os, vn, "obj", mps_number(lp.variables[j].objective));
    for (auto [i, c] : cols[j]) detail::mps_line(os, vn, detail::row_name(lp, i), mps_number(c));
  }
  if (in_int) detail::mps_line(os, "MARKER" + std::to_string(marker++), "'MARKER'", "", "'INTEND'");
  os << "RHS\n";
  for (int i = 0; i < m; ++i)
    if (lp.rows[i].rhs != 0.0) detail::mps_line(os, "RHS", detail::row_name(lp, i), mps_number(lp.rows[i].rhs));
  os << "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    const Variable& v = lp.variables[j];
    const std::string vn = detail::var_name(lp, j);
    const bool lo_inf = v.lower == -kInf, up_inf = v.upper == kInf;
    if (lo_inf && up_inf) {
      os << " FR BND       " << vn << '\n';
      continue;
    }
    if (v.lower == v.upper) {
      os << " FX BND       " << vn << "  " << mps_number(v.lower) << '\n';
      continue;
    }
    if (lo_inf)
      os << " MI BND       " << vn << '\n';
    else if (v.lower != 0.0 || integer(j))
      os << " LO BND       " << vn << "  " << mps_number(v.lower) << '\n';
    if (!up_inf)
      os << " UP BND       " << vn << "  " << mps_number(v.upper) << '\n';
    else if (integer(j))
      os << " PL BND       " << vn << '\n';
  }
  os << "ENDATA\n";
}

inline void write_mps(std::ostream& os, const MipSpec& spec, const std::string& name = "BSF") {
  write_mps(os, spec.lp, spec.is_integer, name);
}

template <class Model>
void export_mps(const Model& model, const std::string& path, const std::string& name = "BSF") {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_mps(os, model, name);
  if (!os) throw IoError("write to '" + path + "' failed");
}

/// The subset of MPS that write_mps produces.
inline MipSpec read_mps(std::istream& is) {
  MipSpec spec;
  LinearProgram& lp = spec.lp;
  std::map<std::string, int> rows, vars;
  std::string objective_row;
  std::string section, line;
  bool in_int = false;
  int lineno = 0;
  auto var_index = [&](const std::string& nm) {
    auto it = vars.find(nm);
    if (it != vars.end()) return it->second;
    const int j = lp.add_variable(0, kInf, 0, nm);
    vars[nm] = j;
    spec.is_integer.resize(static_cast<std::size_t>(j) + 1, 0);
    spec.is_integer[j] = in_int;
    if (in_int) lp.variables[j].upper = 1;  // marker default without BOUNDS
    return j;
  };
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad number '" + s + "'");
    }
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::vector<std::string> f;
    for (std::string w; ls >> w;) f.push_back(w);
    if (f.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      section = f[0];
      if (section == "ENDATA") break;
      if (section != "NAME" && section != "OBJSENSE" && section != "ROWS" && section != "COLUMNS" &&
          section != "RHS" && section != "BOUNDS" && section != "RANGES")
        throw ParseError(lineno, "unknown section '" + section + "'");
      if (section == "RANGES") throw ParseError(lineno, "RANGES is not supported");
      continue;
    }
    if (section == "OBJSENSE") {
      if (f[0] == "MAX" || f[0] == "MAXIMIZE")
        lp.sense = ObjectiveSense::Maximize;
      else if (f[0] != "MIN" && f[0] != "MINIMIZE")
        throw ParseError(lineno, "unknown objective sense '" + f[0] + "'");
    } else if (section == "ROWS") {
      if (f.size() != 2) throw ParseError(lineno, "ROWS entries need a type and a name");
      if (f[0] == "N") {
        if (!objective_row.empty()) throw ParseError(lineno, "second objective row");
        objective_row = f[1];
        continue;
      }
      RowSense s;
      if (f[0] == "L") s = RowSense::LessEqual;
      else if (f[0] == "E") s = RowSense::Equal;
      else if (f[0] == "G") s = RowSense::GreaterEqual;
      else throw ParseError(lineno, "unknown row type '" + f[0] + "'");
      if (rows.count(f[1])) throw ParseError(lineno, "duplicate row '" + f[1] + "'");
      rows[f[1]] = lp.add_row({}, s, 0.0, f[1]);
    } else if (section == "COLUMNS") {
      if (f.size() >= 3 && f[1] == "'MARKER'") {
        if (f[2] == "'INTORG'") in_int = true;
        else if (f[2] == "'INTEND'") in_int = false;
        else throw ParseError(lineno, "unknown marker " + f[2]);
        continue;
      }
      if (f.size() != 3 && f.size() != 5) throw ParseError(lineno, "COLUMNS entries need 3 or 5 fields");
      const int j = var_index(f[0]);
      for (std::size_t p = 1; p + 1 < f.size(); p += 2) {
        const double c = number(f[p + 1]);
        if (f[p] == objective_row) {
          lp.variables[j].objective = c;
        } else {
          auto it = rows.find(f[p]);
          if (it == rows.end()) throw ParseError(lineno, "unknown row '" + f[p] + "'");
          lp.rows[it->second].terms.push_back({j, c});
        }
      }
    } else if (section == "RHS") {
      if (f.size() != 3 && f.size() != 5) throw ParseError(lineno, "RHS entries need 3 or 5 fields");
      for (std::size_t p = 1; p + 1 < f.size(); p += 2) {
        if (f[p] == objective_row) continue;
        auto it = rows.find(f[p]);
        if (it == rows.end()) throw ParseError(lineno, "unknown row '" + f[p] + "'");
        lp.rows[it->second].rhs = number(f[p + 1]);
      }
    } else if (section == "BOUNDS") {
      if (f.size() < 3) throw ParseError(lineno, "BOUNDS entries need a type, a set name and a column");
      auto it = vars.find(f[2]);
      if (it == vars.end()) throw ParseError(lineno, "unknown column '" + f[2] + "'");
      Variable& v = lp.variables[it->second];
      const std::string& t = f[0];
      auto value = [&] {
        if (f.size() != 4) throw ParseError(lineno, t + " bound needs a value");
        return number(f[3]);
      };
      if (t == "UP") v.upper = value();
      else if (t == "LO") v.lower = value();
      else if (t == "FX") v.lower = v.upper = value();
      else if (t == "FR") v.lower = -kInf, v.upper = kInf;
      else if (t == "MI") v.lower = -kInf;
      else if (t == "PL") v.upper = kInf;
      else if (t == "BV") v.lower = 0, v.upper = 1, spec.set_integer(it->second);
      else throw ParseError(lineno, "unknown bound type '" + t + "'");
    } else if (section == "NAME" || section.empty()) {
      throw ParseError(lineno, "data outside a section");
    }
  }
  spec.is_integer.resize(static_cast<std::size_t>(lp.num_variables()), 0);
  return spec;
}

inline MipSpec import_mps(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_mps(is);
}

/// Human-readable dump for debugging.
inline void write_lp_text(std::ostream& os, const LinearProgram& lp, const std::vector<char>& is_integer = {}) {
  auto coef = [](double c, bool first) {
    std::string s = c < 0 ? (first ? "-" : " - ") : (first ? "" : " + ");
    if (std::abs(c) != 1.0) s += detail::mps_number(std::abs(c)) + " ";
    return s;
  };
  os << (lp.sense == ObjectiveSense::Minimize ? "minimize\n  " : "maximize\n  ");
  bool first = true;
  for (int j = 0; j < lp.num_variables(); ++j)
    if (lp.variables[j].objective != 0.0) {
      os << coef(lp.variables[j].objective, first) << detail::var_name(lp, j);
      first = false;
    }
  if (first) os << "0";
  os << "\nsubject to\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const Row& r = lp.rows[i];
    os << "  " << detail::row_name(lp, i) << ": ";
    bool f = true;
    for (const Term& t : r.terms) {
      os << coef(t.coef, f) << detail::var_name(lp, t.var);
      f = false;
    }
    if (f) os << "0";
    os << (r.sense == RowSense::LessEqual ? " <= " : r.sense == RowSense::Equal ? " = " : " >= ")
       << detail::mps_number(r.rhs) << '\n';
  }
  os << "bounds\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const Variable& v = lp.variables[j];
    os << "  " << detail::mps_number(v.lower) << " <= " << detail::var_name(lp, j) << " <= "
       << detail::mps_number(v.upper);
    if (j < static_cast<int>(is_integer.size()) && is_integer[j]) os << "  integer";
    os << '\n';
  }
  os << "end\n";
}

}  // namespace bsf
