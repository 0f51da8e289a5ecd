#pragma once

#include <string>
#include <vector>

#ifndef RANKLAB_SPEC_DIR
#define RANKLAB_SPEC_DIR "examples_specs"
#endif

namespace clicases {

inline std::string spec(const char* name) { return std::string(RANKLAB_SPEC_DIR) + "/" + name; }

// One invocation per command, sized to finish quickly.
inline std::vector<std::vector<std::string>> all_commands() {
  const std::string chacon = spec("chacon.json");
  return {
      {"heights", "--spec", chacon, "--stages", "4"},
      {"descendants", "--spec", chacon, "--base", "1:0", "--to", "3"},
      {"diffset", "--spec", chacon, "--base", "0:0", "--to", "2"},
      {"ap", "--spec", chacon, "--base", "1:0", "--to", "3", "--max-len", "14", "--x", "42"},
      {"partners", "--spec", chacon, "--stage", "1"},
      {"membership", "--k", "5", "--alphabet", "0,1,3,4", "--n", "2", "--target", "19"},
      {"gaps", "--k", "9", "--alphabet", "0,2,3,5,6,8", "--n", "3"},
      {"coverage", "--all-k", "7", "--n", "2"},
      {"gamma", "--k", "5", "--alphabet", "0,1,3,4", "--betas", "2,3"},
      {"conservativity", "--spec", chacon, "--alpha", "1,1", "--base-stage", "0", "--horizon", "3"},
      {"ergodic-match", "--spec", chacon, "--signature", "+,-", "--b", "0,1", "--base-stage", "1", "--horizon", "3",
       "--probe", "9,9"},
      {"pattern", "--spec", chacon, "--b", "0,1", "--signature", "+,+", "--base-stage", "1", "--cutoff", "2"},
      {"mixing", "--spec", spec("separated.json"), "--levels", "0", "--m", "40"},
      {"npc", "--spec", chacon, "--base-stage", "0", "--horizon", "3"},
      {"pwm", "--spec", spec("tq_4_1.json"), "--alpha", "2", "--b", "0,0", "--base-stage", "1"},
      {"non-ergodic", "--spec", spec("all_but_last.json"), "--alpha", "1,1", "--b", "0,1", "--base-stage", "1",
       "--horizon", "4"},
      {"asymmetry", "--spec", chacon, "--level", "1:0", "--n", "1", "--eval", "3"},
      {"validate", "--spec", spec("asymm.json")},
  };
}

}  // namespace clicases
