#include "relay_mtl/milp/lp_format.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <sstream>

namespace relay_mtl::milp {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_terms(std::string& out, const std::vector<Term>& terms) {
  int on_line = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double c = terms[i].coef;
    if (i == 0) {
      out += ' ';
      out += num(c);
    } else {
      if (on_line >= 8) {
        out += "\n  ";
        on_line = 0;
      }
      out += c < 0 ? " - " : " + ";
      out += num(std::abs(c));
    }
    out += " x" + std::to_string(terms[i].var);
    ++on_line;
  }
}

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) {
    const std::string low = [&] {
      std::string t = s;
      for (auto& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      return t;
    }();
    if (low == "inf" || low == "+inf" || low == "infinity" || low == "+infinity") return kInf;
    if (low == "-inf" || low == "-infinity") return -kInf;
    throw LpFormatError("malformed number '" + s + "' for " + what);
  }
  return v;
}

int var_id(const std::string& name, const Model& model) {
  if (name.size() < 2 || name[0] != 'x') throw LpFormatError("unknown variable name '" + name + "'");
  int id = -1;
  auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), id);
  if (ec != std::errc() || p != name.data() + name.size() || id < 0 || id >= model.num_variables() ||
      name != "x" + std::to_string(id)) {
    throw LpFormatError("unknown variable name '" + name + "'");
  }
  return id;
}

}  // namespace

std::string lp_row_name(const std::string& tag, int index) {
  std::string s;
  for (char ch : tag) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
    s += ok ? ch : '_';
  }
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == 'e' || s[0] == 'E') {
    s = "c_" + s;
  }
  return s + "_" + std::to_string(index);
}

std::string export_lp(const Model& model) {
  std::string out = "\\ relay_mtl model\nMinimize\n obj:";
  if (model.objective().empty()) {
    out += " 0 x0";
  } else {
    write_terms(out, model.objective());
  }
  out += "\nSubject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const auto& c = model.constraints()[static_cast<std::size_t>(i)];
    out += ' ' + lp_row_name(c.tag, i) + ':';
    write_terms(out, c.terms);
    switch (c.sense) {
      case Sense::LessEqual: out += " <= "; break;
      case Sense::GreaterEqual: out += " >= "; break;
      case Sense::Equal: out += " = "; break;
    }
    out += num(c.rhs) + '\n';
  }
  out += "Bounds\n";
  for (const auto& v : model.variables()) {
    const std::string name = "x" + std::to_string(v.id);
    if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (v.lower == v.upper) {
      out += ' ' + name + " = " + num(v.lower) + '\n';
    } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out += ' ' + name + " free\n";
    } else {
      out += ' ' + num(v.lower) + " <= " + name + " <= " + num(v.upper) + '\n';
    }
  }
  if (model.num_binaries() > 0) {
    out += "Binary\n";
    for (const auto& v : model.variables()) {
      if (v.kind == VarKind::Binary) out += " x" + std::to_string(v.id) + '\n';
    }
  }
  out += "End\n";
  return out;
}

ImportedSolution import_solution(const std::string& text, const Model& model) {
  ImportedSolution sol;
  std::map<int, double> seen;
  auto put = [&](const std::string& name, const std::string& value) {
    const int id = var_id(name, model);
    if (!seen.emplace(id, parse_number(value, name)).second) {
      throw LpFormatError("duplicate variable '" + name + "'");
    }
  };
  auto lower = [](std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
  };

  if (text.find("<CPLEXSolution") != std::string::npos || text.find("<?xml") != std::string::npos) {
    static const std::regex status_re(R"(solutionStatusString\s*=\s*\"([^\"]*)\")");
    static const std::regex var_re(R"(<variable\b([^>]*)>)");
    static const std::regex name_re(R"(\bname\s*=\s*\"([^\"]*)\")");
    static const std::regex value_re(R"(\bvalue\s*=\s*\"([^\"]*)\")");
    std::smatch m;
    if (std::regex_search(text, m, status_re)) sol.status = lower(m[1].str());
    for (auto it = std::sregex_iterator(text.begin(), text.end(), var_re); it != std::sregex_iterator(); ++it) {
      const std::string attrs = (*it)[1].str();
      std::smatch nm;
      std::smatch vm;
      if (!std::regex_search(attrs, nm, name_re) || !std::regex_search(attrs, vm, value_re)) {
        throw LpFormatError("variable element without name or value");
      }
      put(nm[1].str(), vm[1].str());
    }
  } else {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string a;
      std::string b;
      std::string extra;
      if (!(ls >> a)) continue;
      if (!(ls >> b) || (ls >> extra)) {
        throw LpFormatError("line " + std::to_string(lineno) + ": expected 'name value'");
      }
      if (a == "status") {
        if (sol.status) throw LpFormatError("duplicate status line");
        sol.status = lower(b);
        continue;
      }
      put(a, b);
    }
  }
  sol.values.assign(static_cast<std::size_t>(model.num_variables()), 0.0);
  for (int id = 0; id < model.num_variables(); ++id) {
    auto it = seen.find(id);
    if (it == seen.end()) {
      sol.missing.push_back(id);
    } else {
      sol.values[static_cast<std::size_t>(id)] = it->second;
    }
  }
  return sol;
}

}  // namespace relay_mtl::milp
