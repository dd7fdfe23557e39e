#include "stimfolio/pipeline/stages.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "stimfolio/cml.hpp"
#include "stimfolio/errors.hpp"
#include "stimfolio/pipeline/manifest.hpp"
#include "stimfolio/pipeline/workers.hpp"
#include "stimfolio/random.hpp"
#include "stimfolio/selection.hpp"

namespace stimfolio::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kFamilies = {"uniform", "nonuniform", "exl"};

// Mixture families, keyed by member role.
const std::vector<std::pair<std::string, std::string>> kMixFamilies = {
    {"uniform", "uniform_portfolio"},
    {"nonuniform", "nonuniform_portfolio"},
    {"exl", "exl_portfolio"},
};

// High-efficiency families paired with the low-risk cloud; the first is primary.
const std::vector<std::string> kHighFamilies = {"nonuniform", "uniform"};

std::string path_in(const RunContext& ctx, const std::string& file) {
  return (fs::path(ctx.run_dir) / file).string();
}

void log(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << "[stimfolio] " << msg << std::endl;
}

std::string fmt(double v) { return format_double(v); }

std::string clean_reason(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string reason_of(const std::exception& e) { return clean_reason(e.what()); }

const std::vector<std::string> kDesignColumns = {
    "design_id",       "n_fractures",    "stage_length_m",
    "spacing_ratio",   "injection_rate_m3_per_s", "treating_time_s",
    "viscosity_pa_s",  "perf_factor_pa_s2_per_m6"};

std::vector<std::string> design_fields(const StageDesign& d) {
  return {d.design_id,
          std::to_string(d.n_fractures),
          fmt(d.stage_length_m),
          fmt(d.spacing_ratio),
          fmt(d.injection_rate_m3_per_s),
          fmt(d.treating_time_s),
          fmt(d.viscosity_pa_s),
          fmt(d.perf_factor_pa_s2_per_m6)};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double nominal_perforation_loss(const StageDesign& d) {
  const double q = d.injection_rate_m3_per_s / d.n_fractures;
  return d.perf_factor_pa_s2_per_m6 * q * q;
}

std::uint64_t lhs_seed(const RunConfig& cfg, const std::string& family) {
  return derive_stream_key(cfg.master_seed, {hash_label("lhs"), hash_label(family)});
}

std::uint64_t mix_seed(const RunConfig& cfg, const std::string& family) {
  return derive_stream_key(cfg.master_seed, {hash_label("mix"), hash_label(family)});
}

std::map<std::string, std::uint64_t> seed_ledger(const RunConfig& cfg) {
  std::map<std::string, std::uint64_t> m;
  m["master"] = cfg.master_seed;
  for (const auto& f : kFamilies) m["lhs/" + f] = lhs_seed(cfg, f);
  for (const auto& [f, role] : kMixFamilies) m["mix/" + f] = mix_seed(cfg, f);
  // Rock streams are keyed per realization below this root.
  m["rock"] = derive_stream_key(cfg.master_seed, {hash_label("rock")});
  return m;
}

// ---------------------------------------------------------------------------
// Stochastic evaluation.

RockRealization realization_for(const RunConfig& cfg, const StageDesign& d, std::size_t idx) {
  if (!cfg.constant_rock_properties) return draw_realization(cfg.rock, cfg.uncertainty(), d, idx);
  RockRealization r = base_realization(cfg.rock, d);
  r.realization_id = d.design_id + "/r" + std::to_string(idx);
  return r;
}

RealizationRecord run_realization(const RunConfig& cfg, const StageDesign& d, std::size_t idx) {
  RealizationRecord rec;
  rec.design_id = d.design_id;
  rec.index = idx;
  try {
    const RockRealization rock = realization_for(cfg, d, idx);
    rec.realization_id = rock.realization_id;
    rec.seed = rock.seed;
    const StageOutcome out = simulate_stage(d, rock, cfg.solver);
    rec.volume_balance_error = out.volume_balance_error;
    rec.efficiency = out.stage_efficiency;
    if (!out.accepted) {
      rec.ok = false;
      rec.failure_reason = clean_reason(out.failure_reason);
      return rec;
    }
    rec.variability = energy_variability(out.per_cluster_efficiency);
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.failure_reason = reason_of(e);
  }
  return rec;
}

}  // namespace

std::vector<DesignEvaluation> evaluate_designs(const RunConfig& cfg,
                                               const std::vector<StageDesign>& designs,
                                               std::size_t workers) {
  const std::size_t nr = cfg.realizations_per_design;
  std::vector<RealizationRecord> flat(designs.size() * nr);
  parallel_for(flat.size(), workers, [&](std::size_t k) {
    flat[k] = run_realization(cfg, designs[k / nr], k % nr);
  });

  std::vector<DesignEvaluation> out(designs.size());
  for (std::size_t i = 0; i < designs.size(); ++i) {
    auto& ev = out[i];
    ev.stats.design_id = designs[i].design_id;
    ev.realizations.assign(flat.begin() + std::ptrdiff_t(i * nr),
                           flat.begin() + std::ptrdiff_t((i + 1) * nr));
    std::vector<double> eff, var;
    for (const auto& r : ev.realizations) {
      if (!r.ok) {
        ev.ok = false;
        ev.failure_reason = "realization " + r.realization_id + " failed: " + r.failure_reason;
        break;
      }
      eff.push_back(r.efficiency);
      var.push_back(r.variability);
    }
    if (!ev.ok) continue;
    try {
      ev.efficiency_term = relative_sample_stddev(eff);
      ev.variability_term = relative_sample_stddev(var);
      ev.stats = make_design_stats(designs[i].design_id, eff, var);
    } catch (const std::exception& e) {
      ev.ok = false;
      ev.failure_reason = reason_of(e);
    }
  }
  return out;
}

StageDesign design_from_row(const CsvTable& t, std::size_t row) {
  StageDesign d;
  d.design_id = t.at(row, "design_id");
  d.n_fractures = int(parse_u64(t.at(row, "n_fractures")));
  d.stage_length_m = t.number(row, "stage_length_m");
  d.spacing_ratio = t.number(row, "spacing_ratio");
  d.injection_rate_m3_per_s = t.number(row, "injection_rate_m3_per_s");
  d.treating_time_s = t.number(row, "treating_time_s");
  d.viscosity_pa_s = t.number(row, "viscosity_pa_s");
  d.perf_factor_pa_s2_per_m6 = t.number(row, "perf_factor_pa_s2_per_m6");
  return d;
}

namespace {

const std::vector<std::string> kStatsColumns = {
    "status", "mean_efficiency", "risk", "efficiency_term", "variability_term", "realizations",
    "failure_reason"};

std::vector<std::string> stats_fields(const DesignEvaluation& ev, std::size_t nr) {
  if (!ev.ok) return {"failed", "nan", "nan", "nan", "nan", std::to_string(nr), ev.failure_reason};
  return {"ok",
          fmt(ev.stats.mean_efficiency),
          fmt(ev.stats.risk_sigma),
          fmt(ev.efficiency_term),
          fmt(ev.variability_term),
          std::to_string(ev.stats.realization_count()),
          ""};
}

// ---------------------------------------------------------------------------
// screen

std::vector<std::string> stage_screen(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  CsvTable designs(concat({"family"}, concat(kDesignColumns, {"perforation_loss_pa"})));
  CsvTable scored({"family", "design_id", "status", "efficiency", "variability",
                   "volume_balance_error", "energy_balance_error", "max_flow_deviation", "steps",
                   "failure_reason"});

  std::vector<std::pair<std::string, StageDesign>> all;
  for (const auto& f : kFamilies) {
    const std::size_t n = f == "uniform"      ? cfg.candidates.uniform
                          : f == "nonuniform" ? cfg.candidates.nonuniform
                                              : cfg.candidates.exl;
    for (auto& d : lhs_sample(cfg.family_space(f), n, lhs_seed(cfg, f))) all.emplace_back(f, d);
  }
  log(ctx, "screen: simulating " + std::to_string(all.size()) + " candidates");

  std::vector<std::vector<std::string>> rows(all.size());
  parallel_for(all.size(), ctx.workers, [&](std::size_t i) {
    const auto& [family, d] = all[i];
    std::vector<std::string> row{family, d.design_id};
    try {
      const StageOutcome out = simulate_stage(d, base_realization(cfg.rock, d), cfg.solver);
      const double ebal = out.pumped_energy_j > 0.0
                              ? std::abs(out.total_energy_j - out.pumped_energy_j) /
                                    out.pumped_energy_j
                              : 0.0;
      std::string status = "ok", reason;
      double variability = std::numeric_limits<double>::quiet_NaN();
      if (!out.accepted) {
        status = "failed";
        reason = clean_reason(out.failure_reason);
      } else {
        try {
          variability = energy_variability(out.per_cluster_efficiency);
        } catch (const std::exception& e) {
          status = "failed";
          reason = reason_of(e);
        }
      }
      row.insert(row.end(), {status, fmt(out.stage_efficiency), fmt(variability),
                             fmt(out.volume_balance_error), fmt(ebal),
                             fmt(out.max_flow_deviation), std::to_string(out.step_count), reason});
    } catch (const std::exception& e) {
      row.insert(row.end(), {"failed", "nan", "nan", "nan", "nan", "nan", "0", reason_of(e)});
    }
    rows[i] = std::move(row);
  });

  std::size_t failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& [family, d] = all[i];
    designs.add_row(concat(concat({family}, design_fields(d)), {fmt(nominal_perforation_loss(d))}));
    if (rows[i][2] != "ok") ++failed;
    scored.add_row(std::move(rows[i]));
  }
  if (failed) log(ctx, "screen: " + std::to_string(failed) + " candidates failed (recorded)");
  designs.write(path_in(ctx, "designs.csv"));
  scored.write(path_in(ctx, "scored.csv"));
  return {"designs.csv", "scored.csv"};
}

// ---------------------------------------------------------------------------
// select

std::vector<std::string> stage_select(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const CsvTable designs = CsvTable::read(path_in(ctx, "designs.csv"));
  const CsvTable scored = CsvTable::read(path_in(ctx, "scored.csv"));

  std::map<std::string, StageDesign> by_id;
  std::map<std::string, std::string> family_of;
  for (std::size_t r = 0; r < designs.rows(); ++r) {
    StageDesign d = design_from_row(designs, r);
    family_of[d.design_id] = designs.at(r, "family");
    by_id[d.design_id] = std::move(d);
  }

  std::map<std::string, std::vector<ScoredDesign>> pool;
  for (std::size_t r = 0; r < scored.rows(); ++r) {
    if (scored.at(r, "status") != "ok") continue;
    ScoredDesign s{scored.at(r, "design_id"), scored.number(r, "efficiency"),
                   scored.number(r, "variability"), ScoreProvenance::deterministic_screen};
    if (!by_id.count(s.design_id))
      throw InsufficientDataError("select: scored design " + s.design_id + " not in designs.csv");
    pool[scored.at(r, "family")].push_back(std::move(s));
  }
  for (auto& [f, v] : pool)
    std::sort(v.begin(), v.end(),
              [](const auto& a, const auto& b) { return a.design_id < b.design_id; });

  const std::size_t count = cfg.selection_count;
  std::vector<std::pair<std::string, ScoredDesign>> chosen;  // (role, design)
  for (const std::string f : {"uniform", "nonuniform"}) {
    const auto front = pareto_front(pool[f]);
    log(ctx, "select: " + f + " Pareto front has " + std::to_string(front.size()) + " points");
    for (auto& s : grid_select(front, count)) chosen.emplace_back(f + "_portfolio", s);
  }
  for (auto& s : threshold_select(pool["uniform"], cfg.inflection_efficiency, count))
    chosen.emplace_back("uniform_single", s);

  // Low-risk family: rank every screened candidate by its stochastic risk.
  std::vector<StageDesign> exl_designs;
  for (const auto& s : pool["exl"]) exl_designs.push_back(by_id.at(s.design_id));
  log(ctx, "select: evaluating " + std::to_string(exl_designs.size()) +
               " low-risk candidates x " + std::to_string(cfg.realizations_per_design) +
               " realizations");
  const auto evals = evaluate_designs(cfg, exl_designs, ctx.workers);
  CsvTable exl_stats(concat({"design_id"}, kStatsColumns));
  std::vector<ScoredDesign> exl_scored;
  for (const auto& ev : evals) {
    exl_stats.add_row(concat({ev.stats.design_id}, stats_fields(ev, cfg.realizations_per_design)));
    if (ev.ok)
      exl_scored.push_back({ev.stats.design_id, ev.stats.mean_efficiency, ev.stats.risk_sigma,
                            ScoreProvenance::stochastic});
  }
  for (auto& s : threshold_select(exl_scored, std::numeric_limits<double>::infinity(), count))
    chosen.emplace_back("exl_portfolio", s);

  CsvTable members(concat({"role", "family"}, concat(kDesignColumns, {"score_efficiency",
                                                                        "score_risk",
                                                                        "score_kind"})));
  for (const auto& [role, s] : chosen) {
    const auto& d = by_id.at(s.design_id);
    members.add_row(concat(concat({role, family_of.at(s.design_id)}, design_fields(d)),
                           {fmt(s.ret), fmt(s.risk),
                            s.provenance == ScoreProvenance::stochastic ? "stochastic"
                                                                        : "deterministic"}));
  }
  members.add_row(concat(concat({"base", "base"}, design_fields(cfg.base_case)),
                         {"nan", "nan", "none"}));

  members.write(path_in(ctx, "members.csv"));
  exl_stats.write(path_in(ctx, "exl_candidate_stats.csv"));
  return {"members.csv", "exl_candidate_stats.csv"};
}

// ---------------------------------------------------------------------------
// evaluate

std::vector<std::string> stage_evaluate(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const CsvTable members = CsvTable::read(path_in(ctx, "members.csv"));
  std::vector<StageDesign> unique;
  std::map<std::string, std::size_t> slot;
  for (std::size_t r = 0; r < members.rows(); ++r) {
    StageDesign d = design_from_row(members, r);
    if (slot.emplace(d.design_id, unique.size()).second) unique.push_back(std::move(d));
  }
  log(ctx, "evaluate: " + std::to_string(unique.size()) + " designs x " +
               std::to_string(cfg.realizations_per_design) + " realizations");
  const auto evals = evaluate_designs(cfg, unique, ctx.workers);

  CsvTable stats(concat({"role", "family", "design_id"}, kStatsColumns));
  std::size_t failed = 0;
  for (std::size_t r = 0; r < members.rows(); ++r) {
    const auto& ev = evals[slot.at(members.at(r, "design_id"))];
    if (!ev.ok) {
      ++failed;
      log(ctx, "evaluate: design " + ev.stats.design_id + " failed: " + ev.failure_reason);
    }
    stats.add_row(concat({members.at(r, "role"), members.at(r, "family"), ev.stats.design_id},
                         stats_fields(ev, cfg.realizations_per_design)));
  }
  CsvTable detail({"design_id", "realization_index", "realization_id", "seed", "status",
                   "efficiency", "variability", "volume_balance_error", "failure_reason"});
  for (const auto& ev : evals)
    for (const auto& r : ev.realizations)
      detail.add_row({r.design_id, std::to_string(r.index), r.realization_id,
                      std::to_string(r.seed), r.ok ? "ok" : "failed", fmt(r.efficiency),
                      fmt(r.variability), fmt(r.volume_balance_error), r.failure_reason});

  stats.write(path_in(ctx, "stats.csv"));
  detail.write(path_in(ctx, "realizations.csv"));
  return {"stats.csv", "realizations.csv"};
}

// ---------------------------------------------------------------------------
// mix

std::string join_weights(const std::vector<double>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s.push_back(' ');
    s += fmt(w[i]);
  }
  return s;
}

std::vector<double> split_weights(const std::string& s) {
  std::vector<double> w;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t sp = s.find(' ', start);
    w.push_back(parse_double(std::string_view(s).substr(start, sp - start)));
    if (sp == std::string::npos) break;
    start = sp + 1;
  }
  return w;
}

std::vector<std::string> stage_mix(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const CsvTable stats = CsvTable::read(path_in(ctx, "stats.csv"));
  CsvTable portfolios({"family", "portfolio_index", "expected_return", "risk", "risk_aggregation",
                       "weights"});
  CsvTable pmembers({"family", "member_index", "design_id", "mean_efficiency", "risk"});

  for (const auto& [family, role] : kMixFamilies) {
    std::vector<DesignStats> mem;
    for (std::size_t r = 0; r < stats.rows(); ++r) {
      if (stats.at(r, "role") != role || stats.at(r, "status") != "ok") continue;
      DesignStats s;
      s.design_id = stats.at(r, "design_id");
      s.mean_efficiency = stats.number(r, "mean_efficiency");
      s.risk_sigma = stats.number(r, "risk");
      mem.push_back(std::move(s));
    }
    if (mem.empty())
      throw InsufficientDataError("mix: no evaluated members for the " + family + " family");
    for (std::size_t i = 0; i < mem.size(); ++i)
      pmembers.add_row({family, std::to_string(i), mem[i].design_id, fmt(mem[i].mean_efficiency),
                        fmt(mem[i].risk_sigma)});
    const auto cloud = feasibility_set(mem, cfg.mixture_samples, mix_seed(cfg, family),
                                       cfg.risk_aggregation);
    for (std::size_t k = 0; k < cloud.size(); ++k)
      portfolios.add_row({family, std::to_string(k), fmt(cloud[k].expected_return),
                          fmt(cloud[k].risk), to_string(cfg.risk_aggregation),
                          join_weights(cloud[k].weights.weights)});
    log(ctx, "mix: " + family + " " + std::to_string(cloud.size()) + " portfolios over " +
                 std::to_string(mem.size()) + " members");
  }
  portfolios.write(path_in(ctx, "portfolios.csv"));
  pmembers.write(path_in(ctx, "portfolio_members.csv"));
  return {"portfolios.csv", "portfolio_members.csv"};
}

// ---------------------------------------------------------------------------
// tangent

struct Cloud {
  std::vector<RiskReturnPoint> points;
  std::vector<std::vector<double>> weights;
  std::vector<std::string> member_ids;
  std::vector<double> member_risks;
  std::vector<double> member_returns;
};

std::map<std::string, Cloud> load_clouds(const RunContext& ctx) {
  const CsvTable pf = CsvTable::read(path_in(ctx, "portfolios.csv"));
  const CsvTable pm = CsvTable::read(path_in(ctx, "portfolio_members.csv"));
  std::map<std::string, Cloud> clouds;
  for (std::size_t r = 0; r < pm.rows(); ++r) {
    auto& c = clouds[pm.at(r, "family")];
    c.member_ids.push_back(pm.at(r, "design_id"));
    c.member_returns.push_back(pm.number(r, "mean_efficiency"));
    c.member_risks.push_back(pm.number(r, "risk"));
  }
  for (std::size_t r = 0; r < pf.rows(); ++r) {
    auto& c = clouds[pf.at(r, "family")];
    c.points.push_back({pf.number(r, "risk"), pf.number(r, "expected_return"), c.points.size()});
    c.weights.push_back(split_weights(pf.at(r, "weights")));
    if (c.weights.back().size() != c.member_ids.size())
      throw NumericalError("tangent: weight vector length does not match the member list");
  }
  return clouds;
}

struct BaseRef {
  bool ok = false;
  double eff = 0.0, risk = 0.0;
};

BaseRef load_base(const RunContext& ctx) {
  const CsvTable stats = CsvTable::read(path_in(ctx, "stats.csv"));
  for (std::size_t r = 0; r < stats.rows(); ++r)
    if (stats.at(r, "role") == "base" && stats.at(r, "status") == "ok") {
      BaseRef b{true, stats.number(r, "mean_efficiency"), stats.number(r, "risk")};
      b.ok = b.eff > 0.0 && b.risk > 0.0;
      return b;
    }
  return {};
}

json point_json(const RiskReturnPoint& p, const BaseRef& base) {
  json j = {{"risk", p.risk}, {"expected_return", p.ret}, {"portfolio_index", p.source}};
  if (base.ok) {
    j["efficiency_ratio"] = p.ret / base.eff;
    j["risk_ratio"] = p.risk / base.risk;
  }
  return j;
}

json weights_json(const PortfolioWeights& w) {
  json j = json::object();
  for (std::size_t i = 0; i < w.weights.size(); ++i) j[w.member_ids[i]] = w.weights[i];
  return j;
}

std::vector<std::string> stage_tangent(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  auto clouds = load_clouds(ctx);
  const BaseRef base = load_base(ctx);
  for (const std::string f : {"exl", "nonuniform", "uniform"})
    if (clouds[f].points.empty())
      throw InsufficientDataError("tangent: no portfolios for the " + f + " family");

  CsvTable frontiers({"family", "point_index", "risk", "expected_return", "portfolio_index"});
  std::map<std::string, std::vector<RiskReturnPoint>> fronts;
  for (const std::string f : {"exl", "nonuniform", "uniform"}) {
    fronts[f] = upper_frontier(clouds[f].points);
    for (std::size_t i = 0; i < fronts[f].size(); ++i)
      frontiers.add_row({f, std::to_string(i), fmt(fronts[f][i].risk), fmt(fronts[f][i].ret),
                         std::to_string(fronts[f][i].source)});
  }

  CsvTable lines({"high_family", "lambda", "risk", "expected_return", "risk_recomputed",
                  "risk_gap", "efficiency_ratio", "risk_ratio"});
  json doc;
  doc["risk_aggregation"] = to_string(cfg.risk_aggregation);
  doc["primary_family"] = kHighFamilies.front();
  doc["tolerance"] = kTangentTolerance;
  doc["base_case"] = base.ok ? json{{"design_id", cfg.base_case.design_id},
                                    {"efficiency", base.eff},
                                    {"risk", base.risk}}
                             : json(nullptr);
  json tangents = json::object();
  const Cloud& low = clouds["exl"];

  for (const auto& hf : kHighFamilies) {
    const Cloud& high = clouds[hf];
    TangentResult t;
    try {
      t = common_tangent(fronts["exl"], fronts[hf]);
    } catch (const InsufficientDataError& e) {
      if (hf == kHighFamilies.front()) throw;
      tangents[hf] = {{"error", e.what()}};
      log(ctx, std::string("tangent: ") + hf + ": " + e.what());
      continue;
    }
    t.low_weights = {low.member_ids, low.weights[t.low.source]};
    t.high_weights = {high.member_ids, high.weights[t.high.source]};

    const double audit = std::max(normalized_clearance(t, low.points),
                                  normalized_clearance(t, high.points));
    if (audit > kTangentTolerance)
      throw NumericalError("tangent: a sampled portfolio lies above the " + hf + " line");

    // Merged member list for recomputing the combined risk.
    std::vector<double> risks = low.member_risks;
    risks.insert(risks.end(), high.member_risks.begin(), high.member_risks.end());
    const SquareMatrix cov = covariance_matrix(risks, SquareMatrix::identity(risks.size()));

    json combos = json::array();
    for (int k = 0; k <= 10; ++k) {
      const double lambda = k / 10.0;
      const CombinationPoint c = combination_point(t, lambda);
      const double recomputed = cfg.risk_aggregation == RiskAggregation::linear
                                    ? linear_pooled_risk(c.weights, risks)
                                    : std::sqrt(portfolio_variance(c.weights, cov));
      const double er = base.ok ? c.ret / base.eff : std::nan("");
      const double rr = base.ok ? c.risk / base.risk : std::nan("");
      lines.add_row({hf, fmt(lambda), fmt(c.risk), fmt(c.ret), fmt(recomputed),
                     fmt(c.risk - recomputed), fmt(er), fmt(rr)});
      json cj = {{"lambda", lambda},
                 {"risk", c.risk},
                 {"expected_return", c.ret},
                 {"risk_recomputed", recomputed},
                 {"risk_gap", c.risk - recomputed},
                 {"weights", weights_json(c.weights)}};
      if (base.ok) {
        cj["efficiency_ratio"] = er;
        cj["risk_ratio"] = rr;
      }
      combos.push_back(std::move(cj));
    }
    json lowj = point_json(t.low, base);
    lowj["weights"] = weights_json(t.low_weights);
    json highj = point_json(t.high, base);
    highj["weights"] = weights_json(t.high_weights);
    tangents[hf] = {{"low", lowj},
                    {"high", highj},
                    {"slope", t.slope},
                    {"intercept", t.intercept},
                    {"return_scale", t.return_scale},
                    {"low_front_clearance", t.low_clearance},
                    {"high_front_clearance", t.high_clearance},
                    {"max_sampled_clearance", audit},
                    {"combinations", combos}};
    log(ctx, "tangent: " + hf + " slope " + fmt(t.slope));
  }
  doc["tangents"] = tangents;

  write_text_file(path_in(ctx, "cml.json"), doc.dump(2) + "\n");
  frontiers.write(path_in(ctx, "frontiers.csv"));
  lines.write(path_in(ctx, "tangent_lines.csv"));
  return {"cml.json", "frontiers.csv", "tangent_lines.csv"};
}

// ---------------------------------------------------------------------------
// Orchestration.

RunManifest open_manifest(const RunContext& ctx, const std::string& stage) {
  const std::string digest = config_digest(ctx.config);
  if (RunManifest::exists(ctx.run_dir)) {
    RunManifest m = RunManifest::load(ctx.run_dir);
    if (m.config_sha256 == digest && m.schema_version == kSchemaVersion) return m;
    if (stage != stage_order().front())
      throw ConfigError("run directory " + ctx.run_dir +
                        " was produced with a different configuration; rerun from screen or use "
                        "a fresh --out");
  }
  RunManifest m;
  m.artifact_version = STIMFOLIO_VERSION;
  m.config_sha256 = digest;
  m.master_seed = ctx.config.master_seed;
  m.created_utc = utc_now();
  m.seed_ledger = seed_ledger(ctx.config);
  return m;
}

}  // namespace

const std::vector<std::string>& stage_order() {
  static const std::vector<std::string> order = {"screen", "select", "evaluate", "mix",
                                                 "tangent"};
  return order;
}

void run_stage(const RunContext& ctx, const std::string& stage) {
  fs::create_directories(ctx.run_dir);
  RunManifest m = open_manifest(ctx, stage);

  const auto& order = stage_order();
  const auto pos = std::find(order.begin(), order.end(), stage);
  if (pos == order.end()) throw ConfigError("unknown stage \"" + stage + "\"");
  for (auto it = order.begin(); it != pos; ++it)
    if (!m.verify(ctx.run_dir, *it))
      throw ConfigError("stage " + stage + " needs completed upstream stage " + *it + " in " +
                        ctx.run_dir);

  write_text_file(path_in(ctx, "config.json"), to_json(ctx.config).dump(2) + "\n");

  std::vector<std::string> files;
  if (stage == "screen")
    files = stage_screen(ctx);
  else if (stage == "select")
    files = stage_select(ctx);
  else if (stage == "evaluate")
    files = stage_evaluate(ctx);
  else if (stage == "mix")
    files = stage_mix(ctx);
  else
    files = stage_tangent(ctx);

  StageRecord rec{stage, utc_now(), {}};
  for (const auto& f : files) rec.outputs.push_back(describe_output(ctx.run_dir, f));
  m.record(std::move(rec), order);
  m.updated_utc = utc_now();
  m.save(ctx.run_dir);
}

void run_pipeline(const RunContext& ctx, bool resume) {
  fs::create_directories(ctx.run_dir);
  bool fresh = !resume;
  if (resume && RunManifest::exists(ctx.run_dir)) {
    const RunManifest m = RunManifest::load(ctx.run_dir);
    if (m.config_sha256 != config_digest(ctx.config)) fresh = true;
  }
  bool rerun = fresh;
  for (const auto& stage : stage_order()) {
    if (!rerun && RunManifest::exists(ctx.run_dir) &&
        RunManifest::load(ctx.run_dir).verify(ctx.run_dir, stage)) {
      log(ctx, stage + ": up to date, skipped");
      continue;
    }
    rerun = true;  // everything downstream of a rerun stage reruns too
    if (stage == stage_order().front() && fresh && RunManifest::exists(ctx.run_dir))
      fs::remove(fs::path(ctx.run_dir) / kManifestFile);
    run_stage(ctx, stage);
  }
}

}  // namespace stimfolio::pipeline
