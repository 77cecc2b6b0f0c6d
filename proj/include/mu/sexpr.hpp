#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mu {

// Minimal s-expression reader/writer shared by the formula, ordinal,
// certificate and trace formats.
struct Sexpr {
  bool is_atom = false;
  std::string atom;            // valid when is_atom
  std::vector<Sexpr> items;    // valid when !is_atom

  static Sexpr sym(std::string s) {
    Sexpr e;
    e.is_atom = true;
    e.atom = std::move(s);
    return e;
  }
  static Sexpr list(std::vector<Sexpr> xs) {
    Sexpr e;
    e.items = std::move(xs);
    return e;
  }

  bool is_list() const { return !is_atom; }
  size_t size() const { return items.size(); }
  const Sexpr& at(size_t i) const {
    if (is_atom || i >= items.size()) throw std::runtime_error("sexpr: index out of range");
    return items[i];
  }
  // First item as a head symbol, or "" for non-lists / empty lists.
  const std::string& head() const {
    static const std::string empty;
    if (is_atom || items.empty() || !items[0].is_atom) return empty;
    return items[0].atom;
  }
};

struct ParseError : std::runtime_error {
  size_t line, col;
  ParseError(const std::string& msg, size_t line_, size_t col_)
      : std::runtime_error(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_), col(col_) {}
};

Sexpr parse_sexpr(const std::string& text);
std::vector<Sexpr> parse_sexprs(const std::string& text);  // whole-file, many forms
std::string print_sexpr(const Sexpr& e);

}  // namespace mu
