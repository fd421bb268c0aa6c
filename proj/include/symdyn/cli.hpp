#pragma once

// Subcommand dispatch for the symdyn tool. Each subcommand is a pure function
// of its parsed options and input files. Reports serialize deterministically:
// thread counts and timings stay out of the manifest, and timings only appear
// on request.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "symdyn/json_io.hpp"

namespace symdyn::cli {

using io::Json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSchema = "symdyn-report/1";

/// Malformed invocation; maps to exit code 2 like resource errors.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

enum class Status { Pass, Fail, Inconclusive };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Inconclusive: return "inconclusive";
  }
  return "fail";
}

struct Check {
  std::string name;
  Status status = Status::Fail;
  Json numbers = Json::object();
  Json witness = nullptr;
};

struct Report {
  std::string subcommand;
  Json params = Json::object();
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Json result = Json::object();
  std::vector<Check> checks;
  Json timing = Json::object();

  Check& check(std::string name, bool pass, Json numbers = Json::object(),
               Json witness = nullptr) {
    return add(std::move(name), pass ? Status::Pass : Status::Fail, std::move(numbers),
               std::move(witness));
  }
  Check& add(std::string name, Status s, Json numbers = Json::object(), Json witness = nullptr) {
    checks.push_back({std::move(name), s, std::move(numbers), std::move(witness)});
    return checks.back();
  }
  bool pass() const {
    for (const auto& c : checks)
      if (c.status != Status::Pass) return false;
    return true;
  }
  Json to_json(bool with_timing) const {
    Json cs = Json::array();
    for (const auto& c : checks)
      cs.push_back({{"name", c.name},
                    {"status", status_name(c.status)},
                    {"pass", c.status == Status::Pass},
                    {"numbers", c.numbers},
                    {"witness", c.witness}});
    Json j{{"schema", kSchema},
           {"manifest",
            {{"subcommand", subcommand},
             {"params", params},
             {"seed", seed ? Json(*seed) : Json(nullptr)},
             {"tool_version", kToolVersion},
             {"inputs", inputs},
             {"outputs", outputs}}},
           {"checks", cs},
           {"pass", pass()},
           {"result", result}};
    if (with_timing) j["timing"] = timing;
    return j;
  }
};

// --- small helpers ------------------------------------------------------------

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + path);
  out << text;
  if (!out) throw ResourceError("write failed for " + path);
}

inline Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw UsageError("malformed JSON in " + what + ": " + e.what());
  }
}

inline Json read_json_file(const std::string& path) { return parse_json_text(read_text(path), path); }

/// "lo:hi" with lo <= hi.
inline std::pair<Position, Position> parse_range(const std::string& s, const char* what) {
  const auto colon = s.find(':', s.empty() ? 0 : 1);
  if (colon == std::string::npos) throw UsageError(std::string(what) + ": expected lo:hi, got " + s);
  try {
    std::size_t u1 = 0, u2 = 0;
    const std::string a = s.substr(0, colon), b = s.substr(colon + 1);
    const Position lo = std::stoll(a, &u1), hi = std::stoll(b, &u2);
    if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument("trailing characters");
    if (hi < lo) throw UsageError(std::string(what) + ": empty range " + s);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError(std::string(what) + ": expected lo:hi, got " + s);
  }
}

inline std::set<std::string> parse_set(const std::vector<std::string>& items,
                                       const std::set<std::string>& allowed, const char* what) {
  std::set<std::string> out;
  for (const auto& raw : items) {
    std::stringstream ss(raw);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) {
        if (!allowed.count(tok)) throw UsageError(std::string(what) + ": unknown entry " + tok);
        out.insert(tok);
      }
  }
  return out;
}

/// Runs `f`, recording elapsed seconds under `key` in the report.
template <class F>
auto timed(Report& rep, const std::string& key, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  if constexpr (std::is_void_v<decltype(f())>) {
    f();
    rep.timing[key] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } else {
    auto r = f();
    rep.timing[key] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }
}

/// Options shared by every subcommand.
struct Common {
  unsigned threads = 1;
  std::string out;
  std::string config;
  bool timing = false;
};

inline void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--threads", c.threads, "worker threads; never changes results")
      ->check(CLI::Range(1u, 1024u));
  sub->add_option("--out", c.out, "write the report here instead of stdout");
  sub->add_option("--config", c.config, "JSON object of option values (command line wins)");
  sub->add_flag("--timing", c.timing, "include wall-clock timings in the report");
}

// --- tower --------------------------------------------------------------------

struct TowerOpts {
  std::vector<std::uint64_t> tower;
  std::vector<int> factors;
  std::vector<std::string> gammas;
  std::string gamma_default = "e1";
  std::size_t truncate = 0;
  std::uint64_t cap = tower::TruncatedGroup::kDefaultCap;
  CLI::Option* truncate_opt = nullptr;
};

/// e_j is the j-th standard basis vector, e1 the most significant bit.
inline tower::DirectSumSpec direct_sum_from(const std::vector<int>& factors,
                                            const std::vector<std::string>& gammas,
                                            const std::string& gamma_default) {
  if (factors.empty()) throw UsageError("--factors is required");
  std::vector<std::uint64_t> g;
  if (!gammas.empty()) {
    if (gammas.size() != factors.size())
      throw UsageError("--gammas needs one bit string per factor");
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const auto& s = gammas[k];
      if (s.size() != static_cast<std::size_t>(factors[k]) ||
          s.find_first_not_of("01") != std::string::npos)
        throw UsageError("--gammas: factor " + std::to_string(k + 1) + " needs " +
                         std::to_string(factors[k]) + " bits, got " + s);
      g.push_back(std::stoull(s, nullptr, 2));
    }
  } else {
    if (gamma_default.size() < 2 || gamma_default[0] != 'e')
      throw UsageError("--gamma-default: expected e<j>, got " + gamma_default);
    const int j = std::stoi(gamma_default.substr(1));
    for (int a : factors) {
      if (j < 1 || j > a)
        throw UsageError("--gamma-default: " + gamma_default + " does not exist in (Z/2)^" +
                         std::to_string(a));
      g.push_back(std::uint64_t{1} << (a - j));
    }
  }
  return tower::DirectSumSpec(factors, std::move(g));
}

inline Report run_tower(const TowerOpts& o, const Common&) {
  Report rep;
  rep.subcommand = "tower";
  if (o.tower.empty() && o.factors.empty()) throw UsageError("tower: give --tower or --factors");
  if (!o.tower.empty()) {
    rep.params["tower"] = o.tower;
    const tower::TowerSpec t(o.tower);
    rep.result["tower"] = io::to_json(t);
    Json stages = Json::array();
    for (std::size_t n = 1; n <= t.stages(); ++n) {
      const auto d = tower::coset_reps(t, n);
      stages.push_back(io::to_json(d));
      if (d.modulus > (std::uint64_t{1} << 24)) {
        rep.add("coset_partition_" + std::to_string(n), Status::Inconclusive,
                {{"modulus", d.modulus}}, "E_n too large to enumerate");
        continue;
      }
      // E_n = disjoint union of t + E_{n-1}, and g -> (g mod b_n, g div b_n) inverts recompose.
      std::vector<std::uint32_t> hits(d.modulus, 0);
      for (Position tt : d.T)
        for (std::uint64_t e = 0; e < d.block; ++e) ++hits[static_cast<std::size_t>(tt) + e];
      std::optional<Position> bad;
      for (std::size_t i = 0; i < hits.size() && !bad; ++i)
        if (hits[i] != 1) bad = static_cast<Position>(i);
      const auto b = static_cast<Position>(d.modulus);
      for (Position g = -2 * b; g < 2 * b && !bad; ++g) {
        auto [e, m] = d.decompose(g);
        if (!d.E.contains(e) || d.recompose(e, m) != g) bad = g;
      }
      rep.check("coset_partition_" + std::to_string(n), !bad,
                {{"T_size", d.T.size()}, {"E_size", d.E.size()}},
                bad ? Json(*bad) : Json(nullptr));
    }
    rep.result["cosets"] = stages;
  }
  if (!o.factors.empty()) {
    rep.params["factors"] = o.factors;
    rep.params["gammas"] = o.gammas;
    rep.params["gamma_default"] = o.gamma_default;
    const auto spec = direct_sum_from(o.factors, o.gammas, o.gamma_default);
    const std::size_t N = o.truncate_opt->count() ? o.truncate : spec.factors();
    rep.params["truncate"] = N;
    const tower::TruncatedGroup G(spec, N, o.cap);
    Json ds{{"spec", io::to_json(spec)}, {"N", N}, {"size", G.size()}};
    if (G.size() <= 256) {
      Json el = Json::array();
      for (std::uint64_t g = 0; g < G.size(); ++g) el.push_back(G.to_bits(g));
      ds["elements"] = el;
    }
    rep.result["direct_sum"] = ds;
    bool self_inverse = true;
    for (std::uint64_t g = 0; g < G.size(); ++g)
      self_inverse = self_inverse && G.op(g, G.inverse(g)) == G.identity() && G.op(G.identity(), g) == g;
    rep.check("self_inverse", self_inverse, {{"elements", G.size()}});
    for (std::size_t k = 1; k <= N; ++k) {
      std::set<std::uint64_t> classes;
      for (std::uint64_t g = 0; g < G.size(); ++g) classes.insert(g & ~G.factor_mask(k));
      const std::uint64_t expect = G.size() / G.factor_order(k);
      rep.check("coset_count_" + std::to_string(k), classes.size() == expect,
                {{"classes", classes.size()}, {"expected", expect}});
    }
  }
  return rep;
}

// --- construct5 / verify5 -----------------------------------------------------

inline const std::set<std::string>& stage_check_names() {
  static const std::set<std::string> s{"card", "disjoint", "rigidity", "nesting", "entropy"};
  return s;
}

inline Json stages_json(const std::vector<blocks::StageData>& stages) {
  Json a = Json::array();
  for (const auto& st : stages) a.push_back(io::to_json(st));
  return a;
}

/// Structural sanity of stage data read back from a file; the verifiers
/// assume it.
inline void shape_check(Report& rep, const tower::TowerSpec& t,
                        const std::vector<blocks::StageData>& stages) {
  std::string why;
  for (std::size_t i = 0; i < stages.size() && why.empty(); ++i) {
    const auto& st = stages[i];
    if (st.n != i) why = "stage index " + std::to_string(st.n) + " at position " + std::to_string(i);
    else if (st.n > t.stages()) why = "stage " + std::to_string(st.n) + " beyond the tower";
    else if (!std::is_sorted(st.A.begin(), st.A.end()) ||
             std::adjacent_find(st.A.begin(), st.A.end()) != st.A.end())
      why = "A_" + std::to_string(st.n) + " has a repeated word";
    else if (!st.A.empty() && !std::binary_search(st.A.begin(), st.A.end(), st.w))
      why = "w_" + std::to_string(st.n) + " is not in A_" + std::to_string(st.n);
    else
      for (const auto& u : st.A)
        if (u.size() != t.b(st.n)) {
          why = "a word of A_" + std::to_string(st.n) + " has length " + std::to_string(u.size());
          break;
        }
  }
  rep.check("shape", why.empty(), {{"stages", stages.size()}}, why.empty() ? Json(nullptr) : Json(why));
}

inline void stage_checks(Report& rep, const tower::TowerSpec& t,
                         const std::vector<blocks::StageData>& stages,
                         const std::set<std::string>& which, unsigned threads) {
  if (which.count("card"))
    for (const auto& r : blocks::verify_card_bound(t, stages)) {
      Json row = io::to_json(r);
      rep.check("card_bound_" + std::to_string(r.n), r.pass,
                {{"lhs", row["lhs"]}, {"rhs", row["rhs"]}},
                r.pass ? Json(nullptr) : Json("|A_{n+1}| 3^{b_n} < (|A_n| - 1)^{a_{n+1} - 1}"));
    }
  for (const auto& st : stages) {
    if (st.n == 0) continue;
    if (which.count("disjoint")) {
      auto r = blocks::verify_translate_disjoint(st, threads);
      Json j = io::to_json(r);
      rep.check("translate_disjoint_" + std::to_string(st.n), r.pass, {{"checks", r.checks}},
                j.value("witness", Json(nullptr)));
    }
    if (which.count("rigidity")) {
      auto r = blocks::verify_rigidity(st, t.b(st.n - 1), threads);
      Json j = io::to_json(r);
      rep.check("rigidity_" + std::to_string(st.n), r.pass, {{"pairs", r.pairs}},
                j.value("witness", Json(nullptr)));
    }
  }
  if (which.count("nesting")) {
    auto r = blocks::verify_nesting(t, stages);
    rep.check("nesting", r.pass, Json::object(), r.pass ? Json(nullptr) : Json(r.witness));
  }
  if (which.count("entropy")) {
    auto r = blocks::verify_entropy(t, stages);
    Json rows = Json::array();
    for (auto& row : r.rows) rows.push_back(io::to_json(row));
    rep.check("entropy", r.pass,
              {{"rows", rows}, {"monotone_nonincreasing", r.monotone_nonincreasing}});
  }
}

struct Construct5Opts {
  std::vector<std::uint64_t> tower;
  std::size_t max_stage = 0;
  CLI::Option* max_stage_opt = nullptr;
  std::vector<std::string> w;
  std::vector<std::string> checks{"card,disjoint,rigidity,nesting,entropy"};
  std::uint64_t enumeration_cap = std::uint64_t{1} << 26;
  std::uint64_t materialized_cap = std::uint64_t{1} << 22;
  std::uint64_t class_listing_limit = 4096;
};

inline Report run_construct5(const Construct5Opts& o, const Common& c) {
  Report rep;
  rep.subcommand = "construct5";
  if (o.tower.empty()) throw UsageError("construct5: --tower is required");
  const tower::TowerSpec t(o.tower);
  const std::size_t max_stage = o.max_stage_opt->count() ? o.max_stage : t.stages();
  const auto which = parse_set(o.checks, stage_check_names(), "--check");
  blocks::ConstructionOptions opt;
  opt.enumeration_cap = o.enumeration_cap;
  opt.materialized_cap = o.materialized_cap;
  opt.class_listing_limit = o.class_listing_limit;
  opt.threads = c.threads;
  Json wj = Json::object();
  for (const auto& s : o.w) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw UsageError("--w: expected n:digits, got " + s);
    const std::size_t n = std::stoul(s.substr(0, colon));
    opt.w_choice[n] = from_digits(s.substr(colon + 1), Alphabet(blocks::kSymbols));
    wj[std::to_string(n)] = s.substr(colon + 1);
  }
  rep.params = {{"tower", o.tower},
                {"max_stage", max_stage},
                {"w", wj},
                {"check", std::vector<std::string>(which.begin(), which.end())},
                {"enumeration_cap", o.enumeration_cap},
                {"materialized_cap", o.materialized_cap},
                {"class_listing_limit", o.class_listing_limit}};
  const auto res = timed(rep, "construction", [&] { return blocks::run_construction(t, max_stage, opt); });
  rep.result = {{"tower", io::to_json(t)},
                {"stages", stages_json(res.stages)},
                {"death_stage", res.death_stage ? Json(*res.death_stage) : Json(nullptr)},
                {"diagnostic", res.diagnostic},
                {"continuation_dies", res.continuation_dies}};
  timed(rep, "checks", [&] { stage_checks(rep, t, res.stages, which, c.threads); });
  return rep;
}

struct Verify5Opts {
  std::string stages;
  std::vector<std::string> checks{"card,disjoint,rigidity,nesting,entropy"};
};

inline Report run_verify5(const Verify5Opts& o, const Common& c) {
  Report rep;
  rep.subcommand = "verify5";
  if (o.stages.empty()) throw UsageError("verify5: --stages is required");
  const auto which = parse_set(o.checks, stage_check_names(), "--check");
  rep.params = {{"stages", o.stages}, {"check", std::vector<std::string>(which.begin(), which.end())}};
  rep.inputs.push_back(o.stages);
  const Json doc = read_json_file(o.stages);
  const Json& root = doc.contains("result") ? doc.at("result") : doc;
  std::vector<blocks::StageData> stages;
  std::optional<tower::TowerSpec> t;
  try {
    t.emplace(io::field(io::field(root, "tower"), "a").get<std::vector<std::uint64_t>>());
    for (const auto& s : io::field(root, "stages")) stages.push_back(io::stage_from_json(s));
  } catch (const Json::exception& e) {
    throw UsageError(std::string("verify5: malformed stages file: ") + e.what());
  }
  if (stages.empty()) throw UsageError("verify5: no stages in " + o.stages);
  // A_n is a set; an edited word may land out of order, which is not a defect.
  for (auto& st : stages) std::sort(st.A.begin(), st.A.end());
  rep.result = {{"tower", io::to_json(*t)}, {"stages_read", stages.size()}};
  shape_check(rep, *t, stages);
  if (rep.pass()) stage_checks(rep, *t, stages, which, c.threads);
  return rep;
}

// --- groupshift4 --------------------------------------------------------------

struct GroupShiftOpts {
  std::vector<int> factors;
  std::vector<std::string> gammas;
  std::string gamma_default = "e1";
  std::size_t truncate = 0;
  CLI::Option* truncate_opt = nullptr;
  std::string cmd;
  std::string pattern;
  std::vector<std::string> support;
  std::vector<std::string> F;
  std::size_t n = 1;
  std::size_t max_realize = 4;
  std::uint64_t cap = tower::TruncatedGroup::kDefaultCap;
};

inline Json pattern_source(const std::string& p) {
  if (!p.empty() && p.front() == '{') return parse_json_text(p, "--pattern");
  return read_json_file(p);
}

inline Report run_groupshift4(const GroupShiftOpts& o, const Common& c) {
  Report rep;
  rep.subcommand = "groupshift4";
  static const std::set<std::string> cmds{"extend", "count", "entropy", "homoclinic", "independence"};
  if (!cmds.count(o.cmd)) throw UsageError("groupshift4: --cmd must be one of extend|count|entropy|homoclinic|independence");
  const auto spec = direct_sum_from(o.factors, o.gammas, o.gamma_default);
  const std::size_t N = o.truncate_opt->count() ? o.truncate : spec.factors();
  rep.params = {{"factors", o.factors}, {"gammas", o.gammas}, {"gamma_default", o.gamma_default},
                {"truncate", N}, {"cmd", o.cmd}};
  const groupshift::GroupShift X(spec, N, o.cap);
  const auto& G = X.group();
  const auto E = X.free_set();
  rep.result["group"] = {{"spec", io::to_json(spec)}, {"N", N}, {"size", X.size()},
                         {"E_size", E.size()}, {"gamma_nonidentity", spec.gamma_nonidentity()}};
  auto element = [&](const std::string& s) {
    const auto g = G.from_bits(s);
    return g;
  };

  if (o.cmd == "count") {
    auto pc = timed(rep, "count", [&] { return X.count_patterns(); });
    rep.result["count"] = io::to_json(pc);
    rep.add("pattern_count", pc.brute_kernel_dim ? (pc.verified ? Status::Pass : Status::Fail)
                                                 : Status::Inconclusive,
            {{"exponent", io::big_to_string(pc.exponent)},
             {"brute_kernel_dim", pc.brute_kernel_dim ? Json(*pc.brute_kernel_dim) : Json(nullptr)}},
            pc.note.empty() ? Json(nullptr) : Json(pc.note));
  } else if (o.cmd == "extend") {
    if (!o.pattern.empty()) {
      rep.params["pattern"] = o.pattern;
      const Json pj = pattern_source(o.pattern);
      if (!pj.is_object()) throw UsageError("--pattern: expected an object of bit strings to 0/1");
      std::vector<std::uint8_t> w(E.size(), 0);
      for (auto& [k, v] : pj.items()) {
        const auto g = element(k);
        auto it = std::lower_bound(E.begin(), E.end(), g);
        if (it == E.end() || *it != g) throw UsageError("--pattern: " + k + " is not in E_N");
        const int b = v.get<int>();
        if (b != 0 && b != 1) throw UsageError("--pattern: values must be 0 or 1");
        w[static_cast<std::size_t>(it - E.begin())] = static_cast<std::uint8_t>(b);
      }
      const auto x = X.extend(w, c.threads);
      const auto m = X.check_membership(x, c.threads);
      bool agrees = true;
      for (std::size_t i = 0; i < E.size(); ++i) agrees = agrees && x[E[i]] == w[i];
      rep.result["x"] = io::values_json(G, x);
      rep.check("membership", m.member, Json::object(),
                m.violation ? Json({{"factor", m.violation->first},
                                    {"coset", G.to_bits(m.violation->second)}})
                            : Json(nullptr));
      rep.check("restriction", agrees);
    } else {
      if (E.size() > 20) throw ResourceError("extend: exhaustive run needs |E_N| <= 20, got " +
                                             std::to_string(E.size()));
      std::optional<std::uint64_t> bad;
      std::set<std::vector<std::uint8_t>> outputs;
      for (std::uint64_t omega = 0; omega < (std::uint64_t{1} << E.size()) && !bad; ++omega) {
        std::vector<std::uint8_t> w(E.size());
        for (std::size_t i = 0; i < E.size(); ++i) w[i] = (omega >> i) & 1;
        const auto x = X.extend(w, c.threads);
        bool ok = X.check_membership(x, c.threads).member;
        for (std::size_t i = 0; i < E.size(); ++i) ok = ok && x[E[i]] == w[i];
        if (!ok) bad = omega;
        outputs.insert(x);
      }
      const std::uint64_t patterns = std::uint64_t{1} << E.size();
      rep.check("extend_exhaustive", !bad && outputs.size() == patterns,
                {{"patterns", patterns}, {"distinct_outputs", outputs.size()}},
                bad ? Json(*bad) : Json(nullptr));
    }
  } else if (o.cmd == "homoclinic") {
    std::vector<std::set<std::uint64_t>> candidates;
    if (!o.support.empty()) {
      rep.params["support"] = o.support;
      std::set<std::uint64_t> s;
      for (auto& b : o.support) s.insert(element(b));
      candidates.push_back(std::move(s));
    } else {
      // Every nonempty subset of the first n factors' subgroup.
      if (o.n > N) throw UsageError("--n exceeds the truncation");
      rep.params["n"] = o.n;
      std::uint64_t mask = 0;
      for (std::size_t k = 1; k <= o.n; ++k) mask |= G.factor_mask(k);
      std::vector<std::uint64_t> sub;
      for (std::uint64_t g = 0; g < X.size(); ++g)
        if ((g & ~mask) == 0) sub.push_back(g);
      if (sub.size() > 16) throw ResourceError("homoclinic: subgroup too large for subset enumeration");
      for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << sub.size()); ++bits) {
        std::set<std::uint64_t> s;
        for (std::size_t i = 0; i < sub.size(); ++i)
          if ((bits >> i) & 1) s.insert(sub[i]);
        candidates.push_back(std::move(s));
      }
    }
    Json list = Json::array();
    std::size_t forced = 0, consistent = 0;
    for (const auto& s : candidates) {
      const auto r = X.homoclinic_check(s);
      groupshift::Values x(X.size(), 0);
      for (auto g : s) x[g] = 1;
      // Second route: the candidate fails the defining constraints directly.
      const bool member = X.check_membership(x, c.threads).member;
      const bool is_forced = r.verdict == groupshift::HomoclinicVerdict::ForcedZero;
      forced += is_forced;
      consistent += is_forced ? (member == s.empty()) : 1;
      Json sj = Json::array();
      for (auto g : s) sj.push_back(G.to_bits(g));
      Json entry = io::to_json(G, r);
      entry["support"] = sj;
      entry["member"] = member;
      if (list.size() < 64) list.push_back(entry);
    }
    rep.result["candidates"] = list;
    rep.result["candidate_count"] = candidates.size();
    rep.check("homoclinic_forced_zero", forced == candidates.size() && consistent == candidates.size(),
              {{"candidates", candidates.size()}, {"forced_zero", forced},
               {"membership_agrees", consistent}});
  } else if (o.cmd == "independence") {
    std::vector<std::uint64_t> F;
    if (o.F.empty() || (o.F.size() == 1 && o.F[0] == "all")) {
      for (std::uint64_t g = 0; g < X.size(); ++g) F.push_back(g);
      rep.params["F"] = "all";
    } else {
      for (auto& b : o.F) F.push_back(element(b));
      rep.params["F"] = o.F;
    }
    rep.params["n"] = o.n;
    rep.params["max_realize"] = o.max_realize;
    const auto ind = X.find_independence_set(F, o.n);
    rep.result["independence"] = io::to_json(G, ind);
    rep.check("independence_bound", ind.bound_holds,
              {{"F_prime", ind.F_prime.size()}, {"c", ind.c}, {"F", ind.F_size}});
    if (ind.F_prime.size() <= o.max_realize)
      rep.check("realizable", X.realizable(ind, o.max_realize, c.threads),
                {{"patterns", std::uint64_t{1} << ind.F_prime.size()}});
    else
      rep.add("realizable", Status::Inconclusive, {{"F_prime", ind.F_prime.size()}},
              "|F'| above the exhaustive limit");
  } else {
    const auto ev = groupshift::entropy_value(spec, N);
    rep.result["entropy"] = io::to_json(ev);
    rep.check("entropy_range", ev.partial > 0 && ev.partial <= std::log(2.0),
              {{"partial", ev.partial}});
  }
  return rep;
}

// --- shadow / splice ----------------------------------------------------------

struct ShadowOpts {
  std::string poly = "3-1t";
  double epsilon = 0.1;
  double tol = 1e-10;
  std::string orbit = "perturbed";
  std::string point = "lattice";
  long long amplitude = 2;
  double noise = -1;
  std::uint64_t seed = 7;
  std::string window = "-50:50";
  Position radius = -1;
  Position r_W = -1;
  Position horizon = 12;
  double residual_tol = 1e-9;
  double snap_margin = 1e-9;
  std::string csv;
  // splice only
  std::string F = "0:40";
  Position inner_shift = -20;
  std::string outer = "zero";
};

struct Prepared {
  shadow::LaurentMatrix A;
  shadow::Ell1Approx B;
  shadow::ShadowParams p;
};

/// B and the parameter bundle, or nullopt with the failure recorded. With no
/// explicit radius, R is the certified F-radius plus the window length, doubled
/// until B certifies tol.
inline std::optional<Prepared> prepare(Report& rep, const ShadowOpts& o, Position window_len,
                                       unsigned threads) {
  auto A = shadow::parse_polynomial(o.poly);
  const auto As = A.involution();
  shadow::L1Options lo;
  lo.threads = threads;
  rep.result["A"] = A.to_string();
  rep.result["A_star"] = As.to_string();
  try {
    Position R = o.radius;
    if (R < 0) {
      std::optional<Position> rf;
      for (Position probe = 64; probe <= 4096 && !rf; probe *= 2) {
        auto B0 = shadow::l1_inverse(As, o.tol, probe, lo);
        try {
          rf = shadow::delta_for_epsilon(A, B0, o.epsilon).r_F;
        } catch (const NotCertified&) {
        }
      }
      if (!rf) throw NotCertified("no F-radius found up to 4096");
      R = *rf + window_len;
    }
    auto B = timed(rep, "inverse", [&] {
      // Short windows: widen until the truncation meets tol. Explicit radii are kept.
      for (;;) {
        try {
          return shadow::l1_inverse(As, o.tol, R, lo);
        } catch (const NotCertified&) {
          if (o.radius >= 0 || R >= 4096) throw;
          R = std::min<Position>(2 * R, 4096);
        }
      }
    });
    rep.result["inverse"] = io::to_json(B);
    rep.check("inverse_certificate", B.residual <= o.tol && B.residual_left <= o.tol,
              {{"residual", B.residual}, {"residual_left", B.residual_left}, {"norm", B.norm},
               {"tail_bound", B.tail_bound}, {"tol", o.tol}});
    auto p = shadow::delta_for_epsilon(A, B, o.epsilon,
                                       o.r_W >= 0 ? std::optional<Position>(o.r_W) : std::nullopt);
    rep.result["params"] = io::to_json(p);
    return Prepared{std::move(A), std::move(B), std::move(p)};
  } catch (const NonInvertible& e) {
    rep.check("invertible", false, {{"theta", e.witness_theta}, {"magnitude", e.witness_magnitude}},
              {{"theta", e.witness_theta}, {"message", e.what()}});
  } catch (const NotCertified& e) {
    rep.check("inverse_certificate", false, Json::object(), e.what());
  }
  return std::nullopt;
}

inline Json shadow_params_json(const ShadowOpts& o, bool splice) {
  Json j{{"poly", o.poly}, {"epsilon", o.epsilon}, {"tol", o.tol}, {"window", o.window},
         {"radius", o.radius}, {"r_W", o.r_W}, {"horizon", o.horizon},
         {"residual_tol", o.residual_tol}, {"snap_margin", o.snap_margin}};
  if (splice) {
    j["F"] = o.F;
    j["inner_shift"] = o.inner_shift;
    j["outer"] = o.outer;
  } else {
    j["orbit"] = o.orbit;
    j["point"] = o.point;
    j["amplitude"] = o.amplitude;
    j["noise"] = o.noise;
  }
  return j;
}

/// Records the trace checks; false when tracing could not run.
inline std::optional<shadow::TraceResult> traced(Report& rep, const shadow::PseudoOrbitSpec& po,
                                                 const Prepared& pr, const ShadowOpts& o,
                                                 Position lo, Position hi, unsigned threads) {
  shadow::TraceOptions to;
  to.window_lo = lo;
  to.window_hi = hi;
  to.horizon = o.horizon;
  to.snap_margin = o.snap_margin;
  to.threads = threads;
  try {
    auto r = timed(rep, "trace", [&] { return shadow::trace(po, pr.A, pr.B, pr.p, to); });
    rep.check("precondition", r.precondition->ok,
              {{"worst", r.precondition->worst}, {"delta", pr.p.delta},
               {"checks", r.precondition->checks}});
    rep.check("integer_snap", r.snap_max < 0.5 - o.snap_margin, {{"snap_max", r.snap_max}});
    rep.check("membership_residual", r.membership_residual < o.residual_tol,
              {{"residual", r.membership_residual}, {"tol", o.residual_tol}});
    rep.check("tracing", r.pass, {{"max_error", r.max_error}, {"epsilon", pr.p.epsilon}});
    return r;
  } catch (const NumericMargin& e) {
    rep.check("trace", false, Json::object(), e.what());
  }
  return std::nullopt;
}

inline void write_csv(const std::string& path, const shadow::TraceResult& r) {
  std::ostringstream s;
  s.precision(17);
  s << "g,error,error_origin\n";
  for (std::size_t i = 0; i < r.error.size(); ++i)
    s << r.window_lo + static_cast<Position>(i) << ',' << r.error[i] << ',' << r.error_origin[i]
      << '\n';
  write_text(path, s.str());
}

inline Report run_shadow(const ShadowOpts& o, const Common& c) {
  Report rep;
  rep.subcommand = "shadow";
  rep.params = shadow_params_json(o, false);
  rep.seed = o.seed;
  if (o.orbit != "true" && o.orbit != "perturbed") throw UsageError("--orbit must be true or perturbed");
  if (o.point != "lattice" && o.point != "homoclinic" && o.point != "zero")
    throw UsageError("--point must be lattice, homoclinic or zero");
  const auto [lo, hi] = parse_range(o.window, "--window");
  auto pr = prepare(rep, o, hi - lo, c.threads);
  if (!pr) return rep;
  std::optional<shadow::OrbitPoint> x0;
  if (o.point == "lattice") {
    shadow::LatticePoint lp;
    lp.k = pr->A.k();
    lp.seed = o.seed;
    lp.amplitude = o.amplitude;
    lp.B = std::make_shared<const shadow::RealLaurent>(pr->B.B);
    x0.emplace(lp);
  } else if (o.point == "homoclinic") {
    x0.emplace(shadow::homoclinic_point(pr->A, pr->B).x);
  } else {
    x0.emplace(shadow::TorusConfig::zero(pr->A.k()));
  }
  const double noise = o.noise >= 0 ? o.noise : pr->p.delta_prime / 2;
  rep.result["noise"] = noise;
  const auto po = o.orbit == "true"
                      ? shadow::PseudoOrbitSpec::true_orbit(*x0)
                      : shadow::PseudoOrbitSpec::perturbed(*x0, noise, shadow::splitmix64(o.seed));
  if (auto r = traced(rep, po, *pr, o, lo, hi, c.threads)) {
    rep.result["trace"] = io::to_json(*r);
    if (!o.csv.empty()) {
      write_csv(o.csv, *r);
      rep.outputs.push_back(o.csv);
    }
  }
  return rep;
}

inline Report run_splice(const ShadowOpts& o, const Common& c) {
  Report rep;
  rep.subcommand = "splice";
  rep.params = shadow_params_json(o, true);
  if (o.outer != "zero" && o.outer != "homoclinic") throw UsageError("--outer must be zero or homoclinic");
  const auto [lo, hi] = parse_range(o.window, "--window");
  const auto [flo, fhi] = parse_range(o.F, "--F");
  auto pr = prepare(rep, o, hi - lo, c.threads);
  if (!pr) return rep;
  const auto hp = shadow::homoclinic_point(pr->A, pr->B);
  rep.check("homoclinic_membership", hp.residual < o.residual_tol,
            {{"residual", hp.residual}, {"tail", hp.tail}, {"nontrivial", hp.nontrivial}});
  const shadow::OrbitPoint outer(o.outer == "zero" ? shadow::TorusConfig::zero(pr->A.k()) : hp.x);
  const shadow::OrbitPoint inner(hp.x.shifted(o.inner_shift));
  const Window F = Window::interval(flo, fhi + 1);
  std::optional<shadow::PseudoOrbitSpec> po;
  try {
    auto [spo, chk] = shadow::splice_orbits(outer, inner, F, pr->A, pr->p, lo, hi, o.horizon,
                                            o.residual_tol);
    rep.check("boundary_closeness", true,
              {{"worst", chk.worst}, {"delta_prime", pr->p.delta_prime},
               {"boundary_size", chk.boundary.size()}});
    rep.check("splice_precondition", chk.precondition->ok,
              {{"worst", chk.precondition->worst}, {"delta", pr->p.delta}});
    po.emplace(std::move(spo));
  } catch (const NumericMargin& e) {
    rep.check("boundary_closeness", false, Json::object(), e.what());
    return rep;
  }
  auto r = traced(rep, *po, *pr, o, lo, hi, c.threads);
  if (!r) return rep;
  rep.result["trace"] = io::to_json(*r);
  // d(alpha_g x, alpha_g y) on |h| <= horizon, for y the outer or inner point.
  auto dist = [&](const shadow::OrbitPoint& y, Position g) {
    double worst = r->metric_tail;
    for (Position h = -o.horizon; h <= o.horizon; ++h)
      worst = std::max(worst, std::ldexp(shadow::rho(r->x_at(h - g), y.value(h - g)) + r->value_error,
                                         -static_cast<int>(std::abs(h))));
    return worst;
  };
  double off_F = 0, on_F = 0;
  for (Position g = lo; g <= hi; ++g) {
    if (F.contains(g)) on_F = std::max(on_F, dist(inner, g));
    else off_F = std::max(off_F, dist(outer, g));
  }
  rep.check("close_to_outer_off_F", off_F < pr->p.epsilon, {{"max", off_F}});
  rep.check("close_to_inner_on_F", on_F < pr->p.epsilon, {{"max", on_F}});
  // Asymptotic to the outer point: the integer data differs from the outer
  // point's only on a finite set, and pointwise distance decays at the edges.
  double edge = 0;
  const Position x_hi = r->x_lo + static_cast<Position>(r->x.size()) - 1;
  for (Position q = r->x_lo; q <= x_hi; ++q)
    if (q < r->x_lo + 8 || q > x_hi - 8) edge = std::max(edge, shadow::rho(r->x_at(q), outer.value(q)));
  std::size_t z_support = 0;
  if (o.outer == "zero")
    for (const auto& zi : r->z)
      for (auto v : zi) z_support += v != 0;
  rep.check("asymptotic_to_outer", edge < o.residual_tol && (o.outer != "zero" || z_support > 0),
            {{"edge_rho", edge}, {"z_support", z_support}});
  return rep;
}

// --- entropy ------------------------------------------------------------------

struct EntropyOpts {
  std::vector<std::uint64_t> tower;
  std::size_t max_stage = 0;
  CLI::Option* max_stage_opt = nullptr;
  std::vector<int> factors;
  std::vector<std::string> gammas;
  std::string gamma_default = "e1";
  std::size_t truncate = 0;
  CLI::Option* truncate_opt = nullptr;
  std::string rule;
  double tol = 1e-15;
};

inline Report run_entropy(const EntropyOpts& o, const Common& c) {
  Report rep;
  rep.subcommand = "entropy";
  const int modes = !o.tower.empty() + !o.factors.empty() + !o.rule.empty();
  if (modes != 1) throw UsageError("entropy: give exactly one of --tower, --factors, --rule");
  if (!o.tower.empty()) {
    const tower::TowerSpec t(o.tower);
    rep.params["tower"] = o.tower;
    Json rows = Json::array();
    for (std::size_t n = 1; n <= t.stages(); ++n)
      rows.push_back({{"n", n}, {"bound", blocks::entropy_lower_bound(t, n)}});
    rep.result["bounds"] = rows;
    if (o.max_stage_opt->count()) {
      rep.params["max_stage"] = o.max_stage;
      blocks::ConstructionOptions opt;
      opt.threads = c.threads;
      const auto res = blocks::run_construction(t, o.max_stage, opt);
      stage_checks(rep, t, res.stages, {"entropy"}, c.threads);
    }
  } else if (!o.factors.empty()) {
    const auto spec = direct_sum_from(o.factors, o.gammas, o.gamma_default);
    const std::size_t N = o.truncate_opt->count() ? o.truncate : spec.factors();
    rep.params = {{"factors", o.factors}, {"truncate", N}};
    const auto ev = groupshift::entropy_value(spec, N);
    rep.result["entropy"] = io::to_json(ev);
    rep.check("entropy_range", ev.partial > 0 && ev.partial <= std::log(2.0), {{"partial", ev.partial}});
  } else {
    std::function<int(std::size_t)> a;
    if (o.rule == "linear") a = [](std::size_t n) { return static_cast<int>(n); };
    else if (o.rule == "square") a = [](std::size_t n) { return static_cast<int>(n * n); };
    else if (o.rule == "double") a = [](std::size_t n) { return static_cast<int>(n) * 2; };
    else throw UsageError("--rule must be linear, square or double");
    rep.params = {{"rule", o.rule}, {"tol", o.tol}};
    const auto ev = groupshift::entropy_value(a, o.tol, 1000);
    rep.result["entropy"] = io::to_json(ev);
    rep.check("enclosure", ev.lower <= ev.partial && ev.lower > 0 && ev.tail_mass < o.tol,
              {{"lower", ev.lower}, {"partial", ev.partial}, {"tail_mass", ev.tail_mass}});
  }
  return rep;
}

// --- sft-pair -----------------------------------------------------------------

struct SftPairOpts {
  std::string sft = "golden";
  std::string sft_file;
  int n = 0;
};

inline Report run_sft_pair(const SftPairOpts& o, const Common&) {
  Report rep;
  rep.subcommand = "sft-pair";
  std::optional<SftSpec> sft;
  if (!o.sft_file.empty()) {
    rep.inputs.push_back(o.sft_file);
    rep.params["sft_file"] = o.sft_file;
    sft.emplace(io::sft_from_json(read_json_file(o.sft_file)));
  } else {
    rep.params["sft"] = o.sft;
    if (o.sft == "golden") sft.emplace(SftSpec::golden_mean());
    else if (o.sft == "single") sft.emplace(SftSpec(Alphabet(2), 1, {{0}}));
    else if (o.sft.rfind("full:", 0) == 0) sft.emplace(SftSpec::full_shift(Alphabet(std::stoi(o.sft.substr(5)))));
    else throw UsageError("--sft must be golden, single or full:<k>");
  }
  const int n = o.n > 0 ? o.n : 2 * (sft->window_size() - 1) + 2;
  rep.params["n"] = n;
  rep.result["sft"] = io::to_json(*sft);
  const auto res = find_asymptotic_pair_sft(*sft, n);
  rep.result["words_at_n"] = res.words_at_n;
  rep.result["diagnostic"] = res.diagnostic;
  rep.check("pair_found", res.pair.has_value(), {{"words_at_n", res.words_at_n}},
            res.pair ? Json(nullptr) : Json(res.diagnostic));
  if (!res.pair) return rep;
  const auto& p = *res.pair;
  rep.result["pair"] = {{"x", io::to_json(p.x)},
                        {"y", io::to_json(p.y)},
                        {"outer_word", to_digits(p.outer_word)},
                        {"inner_word", to_digits(p.inner_word)},
                        {"closing", to_digits(p.closing)},
                        {"difference", io::window_json(p.difference)}};
  const auto v = is_asymptotic_pair(p.x, p.y);
  rep.check("difference_finite_nonempty",
            v.asymptotic && !v.difference.empty() && v.difference == p.difference,
            {{"difference_size", v.difference.size()}});
  const auto mx = sft_membership(p.x, *sft), my = sft_membership(p.y, *sft);
  rep.check("membership_x", mx.member, Json::object(),
            mx.violation ? Json(*mx.violation) : Json(nullptr));
  rep.check("membership_y", my.member, Json::object(),
            my.violation ? Json(*my.violation) : Json(nullptr));
  return rep;
}

// --- report -------------------------------------------------------------------

struct ReportOpts {
  std::vector<std::string> inputs;
};

inline Report run_report(const ReportOpts& o, const Common&) {
  Report rep;
  rep.subcommand = "report";
  if (o.inputs.empty()) throw UsageError("report: --inputs is required");
  rep.params["inputs"] = o.inputs;
  Json rows = Json::array();
  for (std::size_t i = 0; i < o.inputs.size(); ++i) {
    rep.inputs.push_back(o.inputs[i]);
    const Json doc = read_json_file(o.inputs[i]);
    if (!doc.is_object() || doc.value("schema", "") != kSchema)
      throw UsageError("report: " + o.inputs[i] + " is not a " + kSchema + " document");
    Json failed = Json::array();
    for (const auto& ch : doc.at("checks"))
      if (!ch.at("pass").get<bool>()) failed.push_back(ch.at("name"));
    const bool pass = doc.at("pass").get<bool>();
    rows.push_back({{"path", o.inputs[i]},
                    {"subcommand", doc.at("manifest").at("subcommand")},
                    {"pass", pass},
                    {"checks", doc.at("checks").size()},
                    {"failed", failed}});
    rep.check("input_" + std::to_string(i), pass, {{"failed", failed.size()}});
  }
  rep.result["inputs"] = rows;
  return rep;
}

// --- dispatch -----------------------------------------------------------------

namespace detail {

inline bool negative_number_like(const std::string& s) {
  return s.size() >= 2 && s[0] == '-' && (std::isdigit(static_cast<unsigned char>(s[1])) || s[1] == '.');
}

/// "--opt -5:5" becomes "--opt=-5:5" so option values may start with '-'.
inline std::vector<std::string> glue_negative_values(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) == 0 && a.find('=') == std::string::npos && i + 1 < args.size() &&
        negative_number_like(args[i + 1])) {
      out.push_back(a + "=" + args[i + 1]);
      ++i;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

inline std::string option_name(const std::string& tok) {
  const auto eq = tok.find('=');
  return tok.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
}

/// Splices the --config document into the argument list. Keys name long
/// options (underscores read as dashes); keys already on the command line
/// are skipped.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  if (args.empty()) throw UsageError("--config needs a subcommand");
  const Json doc = read_json_file(*path);
  if (!doc.is_object()) throw UsageError("config " + *path + ": expected a JSON object");
  std::set<std::string> given;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) given.insert(option_name(a));
  std::vector<std::string> extra;
  auto scalar = [&](const Json& v, const std::string& key) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw UsageError("config " + *path + ": unsupported value for " + key);
  };
  for (const auto& [key, v] : doc.items()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (given.count(flag)) continue;
    if (v.is_boolean()) {
      if (v.get<bool>()) extra.push_back("--" + flag);
      continue;
    }
    std::string value;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) value += (i ? "," : "") + scalar(v[i], key);
    } else {
      value = scalar(v, key);
    }
    extra.push_back("--" + flag + "=" + value);
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name. Returns the exit
/// code: 0 when every check passes, 1 on a failed check, 2 on a usage or
/// resource error.
inline int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"symdyn: constructions and verifiers for symbolic and algebraic dynamics", "symdyn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  TowerOpts tw;
  Construct5Opts c5;
  Verify5Opts v5;
  GroupShiftOpts gs;
  ShadowOpts sh;
  ShadowOpts sp;
  EntropyOpts en;
  SftPairOpts sfp;
  ReportOpts ro;
  std::function<Report()> run;

  auto* t = app.add_subcommand("tower", "tower data, coset representatives and truncated direct sums");
  t->add_option("--tower,--a", tw.tower, "stage indices a_1,a_2,...")->delimiter(',');
  t->add_option("--factors", tw.factors, "factor exponents of the direct sum")->delimiter(',');
  t->add_option("--gammas", tw.gammas, "gamma_n as bit strings, one per factor")->delimiter(',');
  t->add_option("--gamma-default", tw.gamma_default, "default gamma_n: e<j>");
  tw.truncate_opt = t->add_option("--truncate", tw.truncate, "truncation level N");
  t->add_option("--cap", tw.cap, "enumeration cap for the truncated group");
  add_common(t, common);
  t->callback([&] { run = [&] { return run_tower(tw, common); }; });

  auto* c = app.add_subcommand("construct5", "build the block-code stages A_n");
  c->add_option("--tower,--a", c5.tower, "stage indices a_1,a_2,...")->delimiter(',');
  c5.max_stage_opt = c->add_option("--max-stage", c5.max_stage, "last stage to build");
  c->add_option("--w", c5.w, "force w_n: n:digits (repeatable)");
  c->add_option("--check", c5.checks, "checks: card,disjoint,rigidity,nesting,entropy");
  c->add_option("--enumeration-cap", c5.enumeration_cap, "candidate patterns per stage");
  c->add_option("--materialized-cap", c5.materialized_cap, "largest |A_n| kept in memory");
  c->add_option("--class-listing-limit", c5.class_listing_limit, "list C_{s,n} when |B_n| is at most this");
  add_common(c, common);
  c->callback([&] { run = [&] { return run_construct5(c5, common); }; });

  auto* v = app.add_subcommand("verify5", "re-verify a stages file");
  v->add_option("--stages", v5.stages, "stages JSON written by construct5")->required();
  v->add_option("--check", v5.checks, "checks: card,disjoint,rigidity,nesting,entropy");
  add_common(v, common);
  v->callback([&] { run = [&] { return run_verify5(v5, common); }; });

  auto* g = app.add_subcommand("groupshift4", "the group shift over a direct sum of 2-groups");
  g->add_option("--factors", gs.factors, "factor exponents a_1,a_2,...")->delimiter(',')->required();
  g->add_option("--gammas", gs.gammas, "gamma_n as bit strings")->delimiter(',');
  g->add_option("--gamma-default", gs.gamma_default, "default gamma_n: e<j>");
  gs.truncate_opt = g->add_option("--truncate", gs.truncate, "truncation level N");
  g->add_option("--cmd", gs.cmd, "extend|count|entropy|homoclinic|independence")->required();
  g->add_option("--pattern", gs.pattern, "extend input: JSON object or file, bit string -> 0/1");
  g->add_option("--support", gs.support, "homoclinic candidate support, bit strings")->delimiter(',');
  g->add_option("--F", gs.F, "independence input set, bit strings or 'all'")->delimiter(',');
  g->add_option("--n", gs.n, "prefix factors for independence and homoclinic subsets");
  g->add_option("--max-realize", gs.max_realize, "largest F' checked exhaustively");
  g->add_option("--cap", gs.cap, "enumeration cap for the truncated group");
  add_common(g, common);
  g->callback([&] { run = [&] { return run_groupshift4(gs, common); }; });

  auto shadow_options = [&](CLI::App* s, ShadowOpts& o) {
    s->add_option("--poly", o.poly, "Laurent polynomial, e.g. 3-1t or 5-t-t^-1");
    s->add_option("--epsilon", o.epsilon, "tracing tolerance")->check(CLI::PositiveNumber);
    s->add_option("--tol", o.tol, "inverse residual tolerance")->check(CLI::PositiveNumber);
    s->add_option("--window", o.window, "evaluation window lo:hi");
    s->add_option("--radius", o.radius, "truncation radius of B (default: F radius + window length, widened until tol holds)");
    s->add_option("--rw", o.r_W, "radius of W (default 2 r_K)");
    s->add_option("--horizon", o.horizon, "metric evaluated on |h| <= horizon");
    s->add_option("--residual-tol", o.residual_tol, "membership residual tolerance");
    s->add_option("--snap-margin", o.snap_margin, "required margin of the integer snap");
  };
  auto* s = app.add_subcommand("shadow", "trace a pseudo-orbit of an algebraic action");
  shadow_options(s, sh);
  s->add_option("--orbit", sh.orbit, "true|perturbed");
  s->add_option("--point", sh.point, "base point: lattice|homoclinic|zero");
  s->add_option("--amplitude", sh.amplitude, "integer amplitude of the lattice point");
  s->add_option("--noise", sh.noise, "noise amplitude (default delta'/2)");
  s->add_option("--seed", sh.seed, "seed for the base point and the noise");
  s->add_option("--csv", sh.csv, "per-position error table");
  add_common(s, common);
  s->callback([&] { run = [&] { return run_shadow(sh, common); }; });

  auto* sl = app.add_subcommand("splice", "splice two orbits along F and trace the result");
  shadow_options(sl, sp);
  sl->add_option("--F", sp.F, "splice window lo:hi");
  sl->add_option("--inner-shift", sp.inner_shift, "translate of the homoclinic inner point");
  sl->add_option("--outer", sp.outer, "outer point: zero|homoclinic");
  add_common(sl, common);
  sl->callback([&] { run = [&] { return run_splice(sp, common); }; });

  auto* e = app.add_subcommand("entropy", "entropy bounds and values");
  e->add_option("--tower,--a", en.tower, "block-code tower")->delimiter(',');
  en.max_stage_opt = e->add_option("--max-stage", en.max_stage, "also build stages and compare h_n");
  e->add_option("--factors", en.factors, "group shift factor exponents")->delimiter(',');
  e->add_option("--gammas", en.gammas, "gamma_n as bit strings")->delimiter(',');
  e->add_option("--gamma-default", en.gamma_default, "default gamma_n: e<j>");
  en.truncate_opt = e->add_option("--truncate", en.truncate, "truncation level N");
  e->add_option("--rule", en.rule, "exponent rule for the infinite product: linear|square|double");
  e->add_option("--tol", en.tol, "tail tolerance for --rule");
  add_common(e, common);
  e->callback([&] { run = [&] { return run_entropy(en, common); }; });

  auto* f = app.add_subcommand("sft-pair", "find an asymptotic pair in a one-dimensional SFT");
  f->add_option("--sft", sfp.sft, "golden|single|full:<k>");
  f->add_option("--sft-file", sfp.sft_file, "SFT as JSON {alphabet_size, window_size, allowed}");
  f->add_option("--n", sfp.n, "word length for the search");
  add_common(f, common);
  f->callback([&] { run = [&] { return run_sft_pair(sfp, common); }; });

  auto* r = app.add_subcommand("report", "summarize report files");
  r->add_option("--inputs", ro.inputs, "report JSON files")->delimiter(',');
  add_common(r, common);
  r->callback([&] { run = [&] { return run_report(ro, common); }; });

  try {
    auto args = detail::glue_negative_values(detail::expand_config(raw_args));
    std::vector<std::string> argv_s{"symdyn"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (auto& a : argv_s) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& pe) {
      const int code = app.exit(pe, out, err);
      return code == 0 ? 0 : 2;
    }
    Report rep = run();
    const std::string text = rep.to_json(common.timing).dump(2) + "\n";
    if (!common.out.empty()) {
      rep.outputs.insert(rep.outputs.begin(), common.out);
      const std::string with_out = rep.to_json(common.timing).dump(2) + "\n";
      write_text(common.out, with_out);
      out << rep.subcommand << ": " << (rep.pass() ? "PASS" : "FAIL") << " (" << rep.checks.size()
          << " checks) -> " << common.out << "\n";
    } else {
      out << text;
    }
    if (!rep.pass())
      for (const auto& ch : rep.checks)
        if (ch.status != Status::Pass)
          err << "check " << ch.name << ": " << status_name(ch.status)
              << (ch.witness.is_null() ? "" : " witness " + ch.witness.dump()) << "\n";
    return rep.pass() ? 0 : 1;
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << "\n";
  } catch (const ResourceError& ex) {
    err << "resource error: " << ex.what() << "\n";
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
  } catch (const Json::exception& ex) {
    err << "malformed input: " << ex.what() << "\n";
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
  }
  return 2;
}

}  // namespace symdyn::cli
