// Regenerates data/sample/synthetic_patients.csv, the bundled synthetic
// dataset used by the example configs and the test suite. The data is fully
// synthetic: per-region demographic mixes are planted so the bias metrics
// have something to show, and the two label columns depend on the symptom
// and age features so the forests have something to learn.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "biasaudit/rng.hpp"

using biasaudit::Rng;

namespace {

struct RegionPlan {
  const char* name;
  std::vector<const char*> states;
  int rows;
  // race value probabilities: 1, 2, 3, 4, 5, missing("9")
  double race[6];
  double p_male;
  double vaccine_offset;
};

const std::vector<RegionPlan> kPlan = {
    {"North", {"AC", "AP", "AM", "PA", "RO", "RR", "TO"}, 380,
     {0.22, 0.05, 0.01, 0.62, 0.08, 0.02}, 0.52, -0.05},
    {"Northeast", {"AL", "BA", "CE", "MA", "PB", "PE", "PI", "RN", "SE"}, 560,
     {0.28, 0.10, 0.01, 0.57, 0.02, 0.02}, 0.49, 0.00},
    {"Central-West", {"DF", "GO", "MT", "MS"}, 310,
     {0.40, 0.08, 0.02, 0.46, 0.02, 0.02}, 0.51, 0.03},
    {"Southeast", {"ES", "MG", "RJ", "SP"}, 820,
     {0.55, 0.09, 0.02, 0.31, 0.01, 0.02}, 0.50, 0.08},
    {"South", {"PR", "RS", "SC"}, 430,
     {0.76, 0.05, 0.01, 0.15, 0.01, 0.02}, 0.53, 0.12},
};

int pick_weighted(Rng& rng, const double* probs, int n) {
  double u = rng.next_unit();
  for (int i = 0; i < n; ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  return n - 1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path = argc > 1 ? argv[1] : "data/sample/synthetic_patients.csv";
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 1;
  }

  Rng rng(20240601);
  std::vector<std::string> rows;

  for (const auto& region : kPlan) {
    for (int i = 0; i < region.rows; ++i) {
      const std::string uf = region.states[rng.next_below(region.states.size())];
      const std::string municip = "M" + std::to_string(10000 + rng.next_below(90000));

      std::string sexo;
      if (rng.next_unit() < 0.01) sexo = "I";
      else sexo = rng.next_unit() < region.p_male ? "M" : "F";

      const int race_pick = pick_weighted(rng, region.race, 6);
      const std::string raca = race_pick == 5 ? "9" : std::to_string(race_pick + 1);

      std::string idade;
      int age = -1;
      if (rng.next_unit() < 0.02) {
        idade = "";
      } else {
        age = static_cast<int>(rng.next_below(96));
        idade = std::to_string(age);
      }

      const bool febre = rng.next_unit() < 0.55;
      const bool tosse = rng.next_unit() < 0.50;
      const std::string febre_s = rng.next_unit() < 0.01 ? "9" : (febre ? "1" : "2");
      const std::string tosse_s = rng.next_unit() < 0.01 ? "9" : (tosse ? "1" : "2");

      double p_uti = 0.06 + (febre ? 0.42 : 0.0) + (tosse ? 0.22 : 0.0) +
                     (age > 55 ? 0.18 : 0.0);
      if (p_uti > 0.92) p_uti = 0.92;
      std::string uti = rng.next_unit() < p_uti ? "1" : "2";
      if (rng.next_unit() < 0.015) uti = "9";

      double p_vac = 0.25 + (age >= 40 ? 0.35 : 0.0) + region.vaccine_offset;
      std::string vacina = rng.next_unit() < p_vac ? "1" : "2";
      if (rng.next_unit() < 0.01) vacina = "9";

      rows.push_back(municip + ";" + uf + ";" + sexo + ";" + raca + ";" + idade + ";" +
                     febre_s + ";" + tosse_s + ";" + uti + ";" + vacina);
    }
  }

  // Shuffle so the file is not region-blocked.
  for (std::size_t i = rows.size() - 1; i > 0; --i) {
    const auto j = rng.next_below(i + 1);
    std::swap(rows[i], rows[j]);
  }

  out << "ID_MUNICIP;SG_UF;CS_SEXO;CS_RACA;NU_IDADE_N;FEBRE;TOSSE;UTI;VACINA_COV\n";
  for (const auto& row : rows) out << row << "\n";
  std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  return 0;
}
