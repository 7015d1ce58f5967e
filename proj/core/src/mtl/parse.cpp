#include "relay_mtl/mtl/parse.hpp"

#include <cctype>
#include <climits>
#include <optional>

namespace relay_mtl::mtl {
namespace {

enum class Tok { End, Ident, Int, LParen, RParen, LBracket, RBracket, Comma, Bang, Amp, Bar, At };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    cur_ = Token{};
    cur_.pos = i_;
    if (i_ >= s_.size()) return;
    const char c = s_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_ + 1;
      while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_' ||
                               s_[j] == '.')) {
        ++j;
      }
      cur_.kind = Tok::Ident;
      cur_.text = std::string(s_.substr(i_, j - i_));
      i_ = j;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
      cur_.kind = Tok::Int;
      cur_.text = std::string(s_.substr(i_, j - i_));
      i_ = j;
      return;
    }
    switch (c) {
      case '(': cur_.kind = Tok::LParen; break;
      case ')': cur_.kind = Tok::RParen; break;
      case '[': cur_.kind = Tok::LBracket; break;
      case ']': cur_.kind = Tok::RBracket; break;
      case ',': cur_.kind = Tok::Comma; break;
      case '!': cur_.kind = Tok::Bang; break;
      case '&': cur_.kind = Tok::Amp; break;
      case '|': cur_.kind = Tok::Bar; break;
      case '@': cur_.kind = Tok::At; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", i_);
    }
    cur_.text = std::string(1, c);
    ++i_;
  }

  std::string_view s_;
  std::size_t i_ = 0;
  Token cur_;
};

class Parser {
 public:
  Parser(std::string_view text, const AtomTable& atoms) : lex_(text), atoms_(atoms) {}

  Formula parse() {
    Formula f = formula();
    if (lex_.peek().kind != Tok::End) {
      throw ParseError("unexpected '" + lex_.peek().text + "' after formula", lex_.peek().pos);
    }
    return f;
  }

 private:
  bool at_keyword(const char* kw) const {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == kw;
  }

  Formula formula() {
    Formula lhs = disjunction();
    if (at_keyword("U")) {
      lex_.take();
      TimeInterval iv = interval_opt();
      Formula rhs = formula();
      return Formula::until(iv, lhs, rhs);
    }
    return lhs;
  }

  Formula disjunction() {
    std::vector<Formula> parts{conjunction()};
    while (lex_.peek().kind == Tok::Bar) {
      lex_.take();
      parts.push_back(conjunction());
    }
    return Formula::disjunction(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{unary()};
    while (lex_.peek().kind == Tok::Amp) {
      lex_.take();
      parts.push_back(unary());
    }
    return Formula::conjunction(std::move(parts));
  }

  Formula unary() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Bang) {
      lex_.take();
      return Formula::negation(unary());
    }
    if (t.kind == Tok::At) {
      lex_.take();
      int k = integer();
      return Formula::at(k, unary());
    }
    if (at_keyword("F") || at_keyword("G")) {
      const bool ev = lex_.take().text == "F";
      TimeInterval iv = interval_opt();
      Formula body = unary();
      return ev ? Formula::eventually(iv, body) : Formula::always(iv, body);
    }
    return primary();
  }

  Formula primary() {
    Token t = lex_.take();
    switch (t.kind) {
      case Tok::LParen: {
        Formula f = formula();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::Ident:
        if (t.text == "true") return Formula::truth();
        if (t.text == "false") return Formula::falsity();
        if (t.text == "U") throw ParseError("'U' needs a left operand", t.pos);
        {
          auto it = atoms_.find(t.text);
          if (it == atoms_.end()) throw ParseError("unknown atom '" + t.text + "'", t.pos);
          return Formula::atom(it->second);
        }
      case Tok::End:
        throw ParseError("unexpected end of formula", t.pos);
      default:
        throw ParseError("unexpected '" + t.text + "'", t.pos);
    }
  }

  TimeInterval interval_opt() {
    if (lex_.peek().kind != Tok::LBracket) return TimeInterval::unbounded();
    const std::size_t start = lex_.take().pos;
    int lo = integer();
    expect(Tok::Comma, "','");
    std::optional<int> hi;
    if (at_keyword("inf")) {
      lex_.take();
    } else {
      hi = integer();
    }
    expect(Tok::RBracket, "']'");
    if (hi && *hi < lo) {
      throw ParseError("interval [" + std::to_string(lo) + "," + std::to_string(*hi) + "] has lo > hi",
                       start);
    }
    return TimeInterval(lo, hi);
  }

  int integer() {
    Token t = lex_.take();
    if (t.kind != Tok::Int) throw ParseError("expected integer", t.pos);
    if (t.text.size() > 9) throw ParseError("integer too large", t.pos);
    return std::stoi(t.text);
  }

  void expect(Tok kind, const char* what) {
    Token t = lex_.take();
    if (t.kind != kind) {
      throw ParseError(std::string("expected ") + what +
                           (t.kind == Tok::End ? " before end of formula" : ", got '" + t.text + "'"),
                       t.pos);
    }
  }

  Lexer lex_;
  const AtomTable& atoms_;
};

}  // namespace

Formula parse_formula(std::string_view text, const AtomTable& atoms) {
  return Parser(text, atoms).parse();
}

}  // namespace relay_mtl::mtl
