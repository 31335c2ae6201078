#pragma once

#include <json.hpp>

#include "classdeg/class_degree.hpp"
#include "classdeg/delta.hpp"
#include "classdeg/entropy_est.hpp"
#include "classdeg/joinings.hpp"
#include "classdeg/splicing.hpp"

namespace classdeg {

inline nlohmann::ordered_json word_json(const Alphabet& alphabet, const Word& w) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (Sym s : w) out.push_back(alphabet.name(s));
  return out;
}

inline nlohmann::ordered_json estimate_json(const EntropyEstimate& e) {
  return {{"value", e.value},
          {"stderr", e.stderr_value},
          {"method", e.method},
          {"k", e.k},
          {"n", e.n}};
}

inline nlohmann::ordered_json block_json(const FactorTriple& triple, const TransitionBlock& tb) {
  return {{"depth", tb.depth()},
          {"w", word_json(triple.y_alphabet, tb.w)},
          {"n", tb.n},
          {"M", word_json(triple.x.alphabet, tb.m)}};
}

inline nlohmann::ordered_json diagonal_json(const DiagonalReport& r) {
  return {{"trials", r.trials},  {"window", r.window},
          {"d2_hits", r.d2_hits}, {"estimate", r.estimate},
          {"wilson_low", r.wilson_low}, {"wilson_high", r.wilson_high},
          {"workers", r.workers}};
}

inline nlohmann::ordered_json jump_entropy_json(const JumpEntropyReport& r) {
  return {{"empirical", r.empirical},
          {"closed_form", r.closed_form},
          {"gap", r.gap},
          {"stderr_combined", r.stderr_combined},
          {"h_x", r.h_x},
          {"h_x_stderr", r.h_x_stderr},
          {"h_t_given_x", r.h_t_given_x},
          {"h_t_stderr", r.h_t_stderr},
          {"mark_density", r.mark_density},
          {"marks", r.marks},
          {"path_len", r.path_len}};
}

inline nlohmann::ordered_json distinguishability_json(const DistinguishabilityReport& r) {
  return {{"pstar", r.pstar}, {"hstar", r.hstar}, {"d", r.d},
          {"trials", r.trials}, {"misses", r.misses}, {"window", r.window},
          {"separator", r.separator}};
}

inline nlohmann::ordered_json delta_json(const DeltaReport& r) {
  return {{"N", r.n_param},
          {"p", r.p_param},
          {"h_lambda", estimate_json(r.h_lambda)},
          {"h_lambda_exact", r.h_lambda_exact},
          {"h_lambda_prime", estimate_json(r.h_lambda_prime)},
          {"integral_mu1", r.integral_mu1},
          {"integral_mu2", r.integral_mu2},
          {"integral_mu1_prime", r.integral_mu1_prime},
          {"integral_mu2_prime", r.integral_mu2_prime},
          {"h1_bound", r.h1_bound},
          {"h2_bound", r.h2_bound},
          {"h3_bound", r.h3_bound},
          {"pstar", r.pstar},
          {"hstar", r.hstar},
          {"separator", r.separator},
          {"delta_hat", r.delta_hat},
          {"delta_ci_low", r.delta_ci_low},
          {"delta_ci_high", r.delta_ci_high},
          {"bound_value", r.bound_value},
          {"constants",
           {{"C0", r.c0}, {"C1", r.c1}, {"C2", r.c2}, {"C3", r.c3}, {"C4", r.c4}, {"C5", r.c5}}},
          {"nu_w", r.nu_w},
          {"h_eta", r.h_eta},
          {"pr_t_nonzero", r.pr_t_nonzero},
          {"pr_coin", r.pr_coin},
          {"pr_s12", r.pr_s12},
          {"pr_s21", r.pr_s21},
          {"discarded_fraction", r.discarded_fraction},
          {"trials", r.trials},
          {"path_len", r.path_len},
          {"workers", r.workers},
          {"seed", r.seed}};
}

inline nlohmann::ordered_json selection_json(const BoundSelection& s) {
  nlohmann::ordered_json probes = nlohmann::ordered_json::array();
  for (const auto& p : s.probes)
    probes.push_back({{"N", p.n_param}, {"hstar", p.hstar}, {"pstar", p.pstar}});
  return {{"feasible", s.feasible},
          {"N", s.n_param},
          {"p", s.p_param},
          {"margin", s.margin},
          {"hstar", s.hstar},
          {"bound_value", s.bound_value},
          {"C3", s.c3},
          {"C4", s.c4},
          {"C5", s.c5},
          {"probes", probes},
          {"message", s.message}};
}

}  // namespace classdeg
