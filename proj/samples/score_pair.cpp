// Scores one hypothesis/reference pair with every document-level metric.
//
//   score_pair '<p>Hallo <b>Welt</b></p>' '<p>Hello <b>world</b></p>'

#include <cstdio>

#include "structeval/docmetrics.hpp"
#include "structeval/rewards.hpp"

int main(int argc, char** argv) {
  using namespace structeval;
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s HYPOTHESIS REFERENCE\n", argv[0]);
    return 2;
  }
  DocScores s = score_document(argv[1], argv[2]);
  if (s.status == DocStatus::ref_invalid) {
    std::fprintf(stderr, "reference does not parse: %s\n", s.reason.c_str());
    return 2;
  }
  std::printf("status             %s\n", to_string(s.status));
  std::printf("xml_validity       %.0f\n", s.xml_validity);
  std::printf("xml_match          %.0f\n", s.xml_match);
  std::printf("treesim            %.4f\n", s.tree_sim);
  std::printf("node_chrf          %.4f\n", s.node_chrf);
  std::printf("optimal_node_chrf  %.4f\n", s.optimal_node_chrf);
  if (s.edit_count) std::printf("edit_count         %.1f\n", *s.edit_count);
  std::printf("reward(treesim,node_chrf) %.4f\n",
              score_reward(argv[1], argv[2], RewardSpec({"treesim", "node_chrf"})));
  return 0;
}
