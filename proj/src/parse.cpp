#include "presym/parse.hpp"

#include <cctype>
#include <sstream>

namespace presym {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const VarResolver& resolve) : text_(text), resolve_(resolve) {}

  Expr parse()
  {
    Expr e = sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const
  {
    throw ParseError("parse error at column " + std::to_string(pos_ + 1) + " in '" + std::string(text_) +
                     "': " + what);
  }

  void skip_space()
  {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c)
  {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr sum()
  {
    Expr e = product();
    while (true) {
      if (accept('+')) {
        e += product();
      } else if (accept('-')) {
        e -= product();
      } else {
        return e;
      }
    }
  }

  Expr product()
  {
    Expr e = unary();
    while (true) {
      if (accept('*')) {
        e *= unary();
      } else if (accept('/')) {
        Expr d = unary();
        if (d.is_zero()) fail("division by zero");
        e = e / d;
      } else {
        return e;
      }
    }
  }

  Expr unary()
  {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power()
  {
    Expr base = primary();
    if (accept('^')) {
      skip_space();
      bool negative = false;
      if (accept('-')) negative = true;
      skip_space();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("integer exponent expected");
      int exponent = std::stoi(std::string(text_.substr(start, pos_ - start)));
      if (negative && base.is_zero()) fail("division by zero");
      return pow(base, negative ? -exponent : exponent);
    }
    return base;
  }

  Expr primary()
  {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = sum();
      if (!accept(')')) fail("')' expected");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
        ++pos_;
      try {
        return Expr(parse_rational(text_.substr(start, pos_ - start)));
      } catch (const std::invalid_argument& err) {
        fail(err.what());
      }
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string_view name = text_.substr(start, pos_ - start);
      auto v = resolve_(name);
      if (!v) fail("unknown identifier '" + std::string(name) + "'");
      return Expr(*v);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  const VarResolver& resolve_;
  std::size_t pos_ = 0;
};

std::string monomial_text(const Monomial& m)
{
  std::string out;
  for (const auto& [v, e] : m.factors()) {
    if (!out.empty()) out += '*';
    out += v.name;
    if (e > 1) out += '^' + std::to_string(e);
  }
  return out;
}

}  // namespace

Expr parse_expr(std::string_view text, const VarResolver& resolve) { return Parser(text, resolve).parse(); }

Expr parse_expr(std::string_view text, const VarTable& table)
{
  VarResolver r = [&table](std::string_view name) { return table.find(name); };
  return parse_expr(text, r);
}

VarResolver any_as_parameter()
{
  return [](std::string_view name) -> std::optional<Var> { return parameter(std::string(name)); };
}

std::string to_string(const Polynomial& p)
{
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    Rational mag = abs(c);
    if (first) {
      if (c < 0) os << '-';
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (m.is_one()) {
      os << mag.get_str();
    } else {
      if (mag != 1) os << mag.get_str() << '*';
      os << monomial_text(m);
    }
  }
  return os.str();
}

std::string to_string(const Expr& e)
{
  if (e.is_polynomial()) return to_string(e.numerator());
  return "(" + to_string(e.numerator()) + ")/(" + to_string(e.denominator()) + ")";
}

}  // namespace presym
