#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relay_mtl/milp/model.hpp"

namespace relay_mtl::milp {

class LpFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CPLEX LP text: sections Minimize / Subject To / Bounds / Binary / End, variables named
/// `x{id}`, numbers printed with 17 significant digits, rows named `{tag}_{index}` with the
/// tag reduced to [A-Za-z0-9_.]. Identical models give byte-identical output.
std::string export_lp(const Model& model);

/// Row name used by export_lp for constraint `index`.
std::string lp_row_name(const std::string& tag, int index);

struct ImportedSolution {
  std::vector<double> values;            // indexed by variable id
  std::optional<std::string> status;     // lower-cased, when the file states one
  std::vector<int> missing;              // ids absent from the file (defaulted to 0)
  bool missing_defaulted() const { return !missing.empty(); }
};

/// Reads either the minimal format (optional `status <word>` line, then `name value`
/// lines; `#` starts a comment) or the subset of the CPLEX `.sol` XML made of the
/// `solutionStatusString` header attribute and `<variable name=.. value=..>` elements.
/// Unknown or duplicate names and malformed numbers throw LpFormatError.
ImportedSolution import_solution(const std::string& text, const Model& model);

}  // namespace relay_mtl::milp
