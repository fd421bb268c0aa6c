#pragma once

// JSON encodings of library values. Keys come out sorted (nlohmann's default
// object map) and doubles in shortest round-trip form, so equal values give
// equal bytes.

#include <string>
#include <vector>

#include <json.hpp>

#include "symdyn/block_construction.hpp"
#include "symdyn/group_shift.hpp"
#include "symdyn/sft.hpp"
#include "symdyn/shadowing.hpp"
#include "symdyn/tower.hpp"

namespace symdyn::io {

using Json = nlohmann::json;

inline std::string big_to_string(const blocks::BigInt& v) { return v.str(); }

inline blocks::BigInt big_from_json(const Json& j) {
  if (j.is_number_unsigned()) return blocks::BigInt(j.get<std::uint64_t>());
  if (!j.is_string()) throw InvalidArgument("json: expected a decimal integer string");
  const auto s = j.get<std::string>();
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw InvalidArgument("json: bad decimal integer \"" + s + "\"");
  return blocks::BigInt(s);
}

/// Object member access with a readable error.
inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw InvalidArgument(std::string("json: missing field \"") + key + "\"");
  return j.at(key);
}

inline Json window_json(const Window& w) {
  Json a = Json::array();
  for (Position g : w) a.push_back(g);
  return a;
}

// --- core-symbolic -------------------------------------------------------

inline Json to_json(const Configuration& x) {
  Json patch = Json::object();
  for (auto& [g, s] : x.patch()) patch[std::to_string(g)] = static_cast<int>(s);
  return {{"alphabet_size", x.alphabet().size()},
          {"period", x.period()},
          {"fundamental", to_digits(x.fundamental())},
          {"patch", patch}};
}

inline Configuration configuration_from_json(const Json& j) {
  const Alphabet a(field(j, "alphabet_size").get<int>());
  const Word fund = from_digits(field(j, "fundamental").get<std::string>(), a);
  if (j.contains("period") && j.at("period").get<Position>() != static_cast<Position>(fund.size()))
    throw InvalidArgument("json: configuration period does not match its fundamental domain");
  std::map<Position, Symbol> patch;
  if (j.contains("patch"))
    for (auto& [k, v] : j.at("patch").items()) {
      std::size_t used = 0;
      const Position g = std::stoll(k, &used);
      if (used != k.size()) throw InvalidArgument("json: bad patch position \"" + k + "\"");
      patch.emplace(g, static_cast<Symbol>(v.get<int>()));
    }
  return Configuration(a, fund, std::move(patch));
}

inline Json to_json(const SftSpec& s) {
  return {{"alphabet_size", s.alphabet().size()},
          {"window_size", s.window_size()},
          {"allowed", s.allowed_digits()}};
}

inline SftSpec sft_from_json(const Json& j) {
  const Alphabet a(field(j, "alphabet_size").get<int>());
  std::vector<Word> allowed;
  for (auto& w : field(j, "allowed")) allowed.push_back(from_digits(w.get<std::string>(), a));
  return SftSpec(a, field(j, "window_size").get<int>(), std::move(allowed));
}

// --- tower ------------------------------------------------------------------

inline Json to_json(const tower::TowerSpec& t) {
  return {{"a", t.a_seq()}, {"b", t.b_seq()}, {"growth_ok", t.growth_flags()}};
}

inline Json to_json(const tower::CosetDecomp& d, std::size_t list_limit = 64) {
  Json j{{"n", d.n}, {"block", d.block}, {"modulus", d.modulus},
         {"T_size", d.T.size()}, {"E_size", d.E.size()}};
  if (d.T.size() <= list_limit) j["T"] = window_json(d.T);
  if (d.E.size() <= list_limit) j["E"] = window_json(d.E);
  return j;
}

inline Json to_json(const tower::DirectSumSpec& s) {
  return {{"factor_exponents", s.exponents()}, {"gamma", s.gammas()},
          {"gamma_nonidentity", s.gamma_nonidentity()}};
}

// --- construction5 -------------------------------------------------------

inline Json to_json(const blocks::StageData& st) {
  Json A = Json::array();
  for (const auto& u : st.A) A.push_back(to_digits(u));
  Json sizes = Json::object();
  for (auto [size, count] : st.counts.class_sizes) sizes[std::to_string(size)] = count;
  Json j{{"n", st.n},
         {"A", A},
         {"A_size", st.A.size()},
         {"w", to_digits(st.w)},
         {"s_prev", st.s_prev ? Json(to_digits(*st.s_prev)) : Json(nullptr)},
         {"counts",
          {{"B", big_to_string(st.counts.B)},
           {"B_prime", big_to_string(st.counts.B_prime)},
           {"class_sizes", sizes}}}};
  if (st.classes) {
    Json c = Json::object();
    for (const auto& [s, members] : *st.classes) {
      Json m = Json::array();
      for (const auto& u : members) m.push_back(to_digits(u));
      c[to_digits(s)] = m;
    }
    j["classes"] = c;
  }
  return j;
}

inline blocks::StageData stage_from_json(const Json& j) {
  const Alphabet a(blocks::kSymbols);
  blocks::StageData st;
  st.n = field(j, "n").get<std::size_t>();
  for (auto& u : field(j, "A")) st.A.push_back(from_digits(u.get<std::string>(), a));
  st.w = from_digits(field(j, "w").get<std::string>(), a);
  if (j.contains("s_prev") && !j.at("s_prev").is_null())
    st.s_prev = from_digits(j.at("s_prev").get<std::string>(), a);
  if (j.contains("counts")) {
    const Json& c = j.at("counts");
    if (c.contains("B")) st.counts.B = big_from_json(c.at("B"));
    if (c.contains("B_prime")) st.counts.B_prime = big_from_json(c.at("B_prime"));
    if (c.contains("class_sizes"))
      for (auto& [k, v] : c.at("class_sizes").items())
        st.counts.class_sizes[std::stoull(k)] = v.get<std::uint64_t>();
  }
  if (j.contains("classes")) {
    std::map<Word, std::vector<Word>> cls;
    for (auto& [k, v] : j.at("classes").items()) {
      auto& dst = cls[from_digits(k, a)];
      for (auto& u : v) dst.push_back(from_digits(u.get<std::string>(), a));
    }
    st.classes = std::move(cls);
  }
  const std::size_t len = st.A.empty() ? st.w.size() : st.A.front().size();
  for (const auto& u : st.A)
    if (u.size() != len) throw InvalidArgument("json: stage " + std::to_string(st.n) +
                                               " has words of unequal length");
  return st;
}

inline Json to_json(const blocks::CardBoundRow& r) {
  return {{"n", r.n}, {"lhs", big_to_string(r.lhs)}, {"rhs", big_to_string(r.rhs)},
          {"pass", r.pass}};
}

inline Json to_json(const blocks::DisjointReport& r) {
  Json j{{"n", r.n}, {"pass", r.pass}, {"checks", r.checks}};
  if (r.witness) {
    auto& [u, v, g] = *r.witness;
    j["witness"] = {{"u", to_digits(u)}, {"v", to_digits(v)}, {"offset", g}};
  }
  return j;
}

inline Json to_json(const blocks::RigidityReport& r) {
  Json j{{"n", r.n}, {"pass", r.pass}, {"pairs", r.pairs}};
  if (r.witness) {
    auto& [u, v, res] = *r.witness;
    j["witness"] = {{"u", to_digits(u)}, {"v", to_digits(v)}, {"residue", res},
                    {"disagreeing_blocks", 1}};
  }
  return j;
}

inline Json to_json(const blocks::EntropyRow& r) {
  return {{"n", r.n}, {"h", r.h}, {"bound", std::isnan(r.bound) ? Json(nullptr) : Json(r.bound)},
          {"pass", r.pass}};
}

inline Json to_json(const blocks::LayerMembership& m) {
  const char* v = m.verdict == blocks::LayerVerdict::InR   ? "in_R"
                  : m.verdict == blocks::LayerVerdict::InX ? "in_X"
                                                           : "outside";
  return {{"verdict", v},
          {"translate", m.translate ? Json(*m.translate) : Json(nullptr)},
          {"translates", m.translates}};
}

// --- construction4 -------------------------------------------------------

/// Packed element as its bit string, factor 1 first.
inline std::string element_bits(const tower::TruncatedGroup& G, std::uint64_t g) {
  return G.to_bits(g);
}

inline Json values_json(const tower::TruncatedGroup& G, const groupshift::Values& x) {
  Json j = Json::object();
  for (std::uint64_t g = 0; g < x.size(); ++g) j[G.to_bits(g)] = static_cast<int>(x[g]);
  return j;
}

inline Json to_json(const groupshift::PatternCount& c) {
  return {{"N", c.N},
          {"exponent", big_to_string(c.exponent)},
          {"closed_form", c.closed_form ? Json(big_to_string(*c.closed_form)) : Json(nullptr)},
          {"brute_kernel_dim", c.brute_kernel_dim ? Json(*c.brute_kernel_dim) : Json(nullptr)},
          {"verified", c.verified},
          {"note", c.note}};
}

inline Json to_json(const tower::TruncatedGroup& G, const groupshift::HomoclinicReport& r) {
  Json d = Json::array();
  for (auto& x : r.deductions)
    d.push_back({{"g", G.to_bits(x.g)}, {"constraint_sum", x.constraint_sum},
                 {"value", static_cast<int>(x.value)}});
  return {{"verdict", r.verdict == groupshift::HomoclinicVerdict::ForcedZero ? "forced_zero"
                                                                            : "inconclusive"},
          {"factor", r.factor ? Json(*r.factor) : Json(nullptr)},
          {"deductions", d},
          {"candidate_is_zero", r.candidate_is_zero},
          {"N", r.N}};
}

inline Json to_json(const tower::TruncatedGroup& G, const groupshift::IndependenceResult& r) {
  Json F = Json::array();
  for (auto g : r.F_prime) F.push_back(G.to_bits(g));
  return {{"F_prime", F},
          {"F_prime_size", r.F_prime.size()},
          {"F_size", r.F_size},
          {"prefix", r.prefix},
          {"gammas", r.gammas},
          {"c", r.c},
          {"iterations", r.iterations},
          {"stabilized_at", r.stabilized_at},
          {"identity_gamma_used", r.identity_gamma_used},
          {"bound_holds", r.bound_holds}};
}

inline Json to_json(const groupshift::EntropyValue& v) {
  return {{"partial", v.partial}, {"product", v.product}, {"tail_mass", v.tail_mass},
          {"lower", v.lower}, {"terms", v.terms}};
}

// --- shadowing ---------------------------------------------------------------

inline Json vector_json(const shadow::RealVector& v) {
  Json a = Json::array();
  for (double c : v) a.push_back(c);
  return a;
}

inline Json to_json(const shadow::Ell1Approx& e) {
  return {{"k", e.k},
          {"radius", e.radius},
          {"method", e.method},
          {"grid", e.grid},
          {"terms", e.terms},
          {"norm", e.norm},
          {"norm_lower", e.norm_lower()},
          {"norm_upper", e.norm_upper()},
          {"tail_bound", e.tail_bound},
          {"residual", e.residual},
          {"residual_left", e.residual_left}};
}

inline Json coefficients_json(const shadow::RealLaurent& B) {
  Json j = Json::object();
  for (auto& [s, m] : B.coeffs) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
      rows.push_back(row);
    }
    j[std::to_string(s)] = B.k == 1 ? Json(m(0, 0)) : rows;
  }
  return j;
}

inline Json to_json(const shadow::ShadowParams& p) {
  return {{"epsilon", p.epsilon},
          {"norm_A", p.norm_A},
          {"delta", p.delta},
          {"S", window_json(p.S)},
          {"r_S", p.r_S},
          {"r_F", p.r_F},
          {"F_tail", p.F_tail},
          {"F_threshold", p.F_threshold},
          {"r_K", p.r_K},
          {"r_W", p.r_W},
          {"delta_prime", p.delta_prime}};
}

inline Json to_json(const shadow::PreconditionReport& r) {
  return {{"ok", r.ok}, {"worst", r.worst}, {"g", r.g}, {"f", r.f}, {"w", r.w}};
}

inline Json to_json(const shadow::TraceResult& r, bool per_position = true) {
  Json j{{"window", {r.window_lo, r.window_hi}},
         {"horizon", r.horizon},
         {"max_error", r.max_error},
         {"pass", r.pass},
         {"metric_tail", r.metric_tail},
         {"value_error", r.value_error},
         {"membership_residual", r.membership_residual},
         {"residual_window", {r.residual_lo, r.residual_hi}},
         {"snap_max", r.snap_max}};
  if (r.precondition) j["precondition"] = to_json(*r.precondition);
  if (per_position) {
    j["error"] = r.error;
    j["error_origin"] = r.error_origin;
  }
  return j;
}

inline Json to_json(const shadow::SpliceCheck& c) {
  Json j{{"ok", c.ok},
         {"boundary_worst", c.worst},
         {"boundary_witness", c.witness},
         {"boundary_size", c.boundary.size()},
         {"residual_outer", c.residual_outer},
         {"residual_inner", c.residual_inner}};
  if (c.precondition) j["precondition"] = to_json(*c.precondition);
  return j;
}

}  // namespace symdyn::io
