// Writes the corpus certificates. Outputs land in the directory given as
// argv[1] (default: corpus).

#include <filesystem>
#include <fstream>
#include <iostream>

#include "corpus_builders.hpp"

using namespace mu;

int main(int argc, char** argv) {
  std::filesystem::path dir = argc > 1 ? argv[1] : "corpus";
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const FinDed& d) {
    std::ofstream out(dir / name);
    out << print_finitary(d) << "\n";
    std::cout << name << ": " << finitary_size(d) << " rules\n";
  };
  write("even4.proof", corpus::even4_ded());
  write("depth2.proof", corpus::depth2_ded());

  // nested.proof: a single mu-induction over a depth-W fixed point
  Formula inner_body = parse_formula("(or (= w 0) (or (not (X w)) (W w)))");
  Formula inner = mk_mu_atom(mk_var("x"), "w", "W", inner_body);
  Formula nested =
      mk_mu_atom(mk_num(0), "x", "X", mk_or(mk_neg(inner), parse_formula("(= x 0)")));
  FinDed ind = fin_make(rule_ind_mu(mk_num(0), nested, "y", parse_formula("(= 0 0)")), {});
  write("nested.proof", ind);
  return 0;
}
