#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mu/formula.hpp"

namespace mu {

// Theory levels: finite levels are plain naturals; nested levels W+c are
// offset by kLevelOmega.
constexpr int kLevelOmega = 1000;

inline bool level_is_nested(int level) { return level >= kLevelOmega; }

// Depth expression -> theory level, restricted to the window
// [0,C0) u [W, W+C0). Out-of-window depths are reported as nullopt.
std::optional<int> level_of_depth(const DepthExpr& d, int c0);

struct Theory {
  enum class Family { FinitaryMu, InfPlus, Inf };

  Family family = Family::InfPlus;
  int level = 1;    // finitary: top of the allowed depth window
  int c0 = 1;       // window size C0
  bool id1 = false; // the single-level ID1 variant of section-4 theories
  std::optional<int> cut_ceiling;  // engaged: Cut formulas must have rank < value

  static Theory finitary(int level, int c0);
  static Theory inf_plus(int level, int c0, bool id1);
  static Theory inf(int level, int c0, bool id1);

  Theory restrict_cuts(int n) const {
    Theory t = *this;
    t.cut_ceiling = n;
    return t;
  }

  // The theory whose rules the Read rules of this level branch over.
  Theory reading_theory() const;
  Theory reading_theory_for_tag(int tag_level) const;

  bool read_formula_premises() const { return !id1; }

  bool contains(const Rule& r) const;
  bool formula_in_scope(const Formula& f) const;  // proper + window (+ closed for infinitary)

  std::string name() const;
  Sexpr to_sexpr() const;
  static Theory from_sexpr(const Sexpr& e);

  uint64_t hash() const;
  bool operator==(const Theory& o) const;
  bool operator!=(const Theory& o) const { return !(*this == o); }
};

}  // namespace mu
