// Builds ARCS and Default ladders for one synthetic title and prints the
// BD-rate / BD decoding time of ARCS against Default for a few alphas.

#include <iostream>

#include "arcs/arcs.hpp"

int main() {
  arcs::SynthSpec spec;
  spec.titles = 1;
  const auto datasets = arcs::generate(spec);
  const auto& title = datasets.front();

  const auto reference = arcs::build_default(title);
  for (double a : {0.0, 0.04, 0.08}) {
    const auto ladder = arcs::optimize_arcs(title, arcs::Alpha{a});
    arcs::write_ladder_markdown(std::cout, ladder);
    const auto bdr = arcs::bd_delta(arcs::build_curve(reference, arcs::CurveAxis::QualityVsLogRate),
                                    arcs::build_curve(ladder, arcs::CurveAxis::QualityVsLogRate));
    const auto bddt = arcs::bd_delta(arcs::build_curve(reference, arcs::CurveAxis::QualityVsLogTime),
                                     arcs::build_curve(ladder, arcs::CurveAxis::QualityVsLogTime));
    std::cout << "\nBD-rate " << bdr.value_percent << " %, BD decoding time " << bddt.value_percent << " %\n\n";
  }
}
