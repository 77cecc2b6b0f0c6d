#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mu/formula.hpp"

namespace mu {

// Primitive recursive relation symbols with executable decision procedures on
// numerals, plus quantifier-free defining-axiom schemas for the Def rule.
struct PrRelation {
  std::string name;
  size_t arity;
  std::function<bool(const std::vector<uint64_t>&)> eval;
};

const PrRelation* registry_find(const std::string& name);

// Closed literal of registry form (possibly negated).
bool evaluate_literal(const Formula& f);

// Quantifier-free instance of a shipped defining-axiom schema.
bool is_def_axiom_instance(const Formula& f);

// True closed quantifier-free formula over registry atoms (used by embedding).
bool evaluate_closed_qf(const Formula& f);

}  // namespace mu
