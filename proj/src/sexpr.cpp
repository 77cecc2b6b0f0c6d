#include "mu/sexpr.hpp"

namespace mu {

namespace {

struct Cursor {
  const std::string& s;
  size_t i = 0, line = 1, col = 1;

  bool eof() const { return i >= s.size(); }
  char peek() const { return s[i]; }
  char get() {
    char c = s[i++];
    if (c == '\n') { line++; col = 1; } else { col++; }
    return c;
  }
  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == ';') {  // comment to end of line
        while (!eof() && peek() != '\n') get();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        get();
      } else {
        break;
      }
    }
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }
};

bool atom_char(char c) {
  return c != '(' && c != ')' && c != ';' && c != ' ' && c != '\t' && c != '\n' && c != '\r';
}

Sexpr read_form(Cursor& cur) {
  cur.skip_ws();
  if (cur.eof()) cur.fail("unexpected end of input");
  if (cur.peek() == '(') {
    cur.get();
    Sexpr e;
    for (;;) {
      cur.skip_ws();
      if (cur.eof()) cur.fail("unterminated list");
      if (cur.peek() == ')') { cur.get(); break; }
      e.items.push_back(read_form(cur));
    }
    return e;
  }
  if (cur.peek() == ')') cur.fail("unexpected ')'");
  std::string a;
  while (!cur.eof() && atom_char(cur.peek())) a.push_back(cur.get());
  if (a.empty()) cur.fail("empty atom");
  return Sexpr::sym(std::move(a));
}

}  // namespace

Sexpr parse_sexpr(const std::string& text) {
  Cursor cur{text};
  Sexpr e = read_form(cur);
  cur.skip_ws();
  if (!cur.eof()) cur.fail("trailing input after form");
  return e;
}

std::vector<Sexpr> parse_sexprs(const std::string& text) {
  Cursor cur{text};
  std::vector<Sexpr> out;
  for (;;) {
    cur.skip_ws();
    if (cur.eof()) break;
    out.push_back(read_form(cur));
  }
  return out;
}

std::string print_sexpr(const Sexpr& e) {
  if (e.is_atom) return e.atom;
  std::string out = "(";
  for (size_t i = 0; i < e.items.size(); i++) {
    if (i) out += ' ';
    out += print_sexpr(e.items[i]);
  }
  out += ')';
  return out;
}

}  // namespace mu
