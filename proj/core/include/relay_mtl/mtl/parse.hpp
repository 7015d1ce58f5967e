#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "relay_mtl/mtl/formula.hpp"

namespace relay_mtl::mtl {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parses the concrete formula syntax.
///
///   formula  := or ( 'U' interval? formula )?          right-associative, lowest
///   or       := and ( '|' and )*
///   and      := unary ( '&' unary )*
///   unary    := '!' unary | 'F' interval? unary | 'G' interval? unary | '@' INT unary | primary
///   primary  := 'true' | 'false' | IDENT | '(' formula ')'
///   interval := '[' INT ',' ( INT | 'inf' ) ']'
///
/// Identifiers are resolved against `atoms`; an unknown name is a ParseError.
Formula parse_formula(std::string_view text, const AtomTable& atoms);

}  // namespace relay_mtl::mtl
